//! Derives the reference background spectrum and the 4000 Hz speech levels
//! from crossing anchors, using one solve of the open-window small blind.
//!
//! The solve is linear, so every band's receiver level is its source level
//! plus a fixed transfer curve. Usage: `calibrate_bnl [h]`.

use blind_acoustics::bands::{band_sum_db, BandSpectrum};
use blind_acoustics::materials::MaterialDb;
use blind_acoustics::run::run_scene;
use blind_acoustics::scene::{build_scenario, speech_spectrum, ScenarioId, SpeechClass};
use blind_acoustics::solver::SolveOptions;

const BNL_4000: f64 = 12.0;

/// `(band, distance)` pairs where soft speech meets the background.
const SOFT_ANCHORS: [(usize, f64); 3] = [(0, 24.0), (3, 27.0), (4, 11.0)];
const SOFT_4000_AT: f64 = 12.0;
const NORMAL_4000_AT: f64 = 24.0;

/// Sets the 4000 Hz entry of `shape` so that the normalized 4000 Hz level equals `target`.
fn solve_shape_4000(shape: [f64; 6], overall: f64, target: f64) -> [f64; 6] {
    let normalized = |x: f64| {
        let mut s = shape;
        s[5] = x;
        let b = BandSpectrum(s);
        x + overall - band_sum_db(&b)
    };
    let (mut lo, mut hi) = (-40.0, 120.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if normalized(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut s = shape;
    s[5] = 0.5 * (lo + hi);
    s
}

fn main() {
    let h: f64 = std::env::args().nth(1).map(|s| s.parse().expect("h")).unwrap_or(0.1);
    let db = MaterialDb::builtin();
    let id: ScenarioId = "SS01".parse().expect("id");
    let scene = build_scenario(id);
    let out = run_scene::<f64>(&scene, &db, Some(h), &SolveOptions::default()).expect("solve");
    let loud = speech_spectrum(SpeechClass::Loud);
    let talkers_db = 10.0 * (scene.sources.len() as f64).log10();
    let transfer = |band: usize, d: f64| {
        let s = out
            .profile
            .samples
            .iter()
            .find(|s| (s.distance - d).abs() < 1e-9)
            .expect("anchor on the sampling grid");
        s.bands[band] - loud[band]
    };
    println!("h = {h}, {} talkers ({talkers_db:.2} dB)", scene.sources.len());
    for b in 0..6 {
        println!("transfer band {b}: 0 m {:.2}, 12 m {:.2}, 24 m {:.2}", transfer(b, 0.0), transfer(b, 12.0), transfer(b, 24.0));
    }

    let normal_shape = [52.0, 57.2, 59.8, 53.5, 48.8, 43.8];
    let soft_shape = [52.0, 56.2, 57.8, 49.5, 43.8, 37.8];
    let normal = solve_shape_4000(normal_shape, 60.0, BNL_4000 - transfer(5, NORMAL_4000_AT));
    let soft = solve_shape_4000(soft_shape, 54.8, BNL_4000 - transfer(5, SOFT_4000_AT));
    let norm = |s: [f64; 6], o: f64| {
        let b = BandSpectrum(s);
        b.map(|l| l + o - band_sum_db(&b))
    };
    let normal_n = norm(normal, 60.0);
    let soft_n = norm(soft, 54.8);
    println!("normal shape 4000 = {:.2}, normalized {:?}", normal[5], normal_n.0.map(|v| (v * 100.0).round() / 100.0));
    println!("soft shape 4000 = {:.2}, normalized {:?}", soft[5], soft_n.0.map(|v| (v * 100.0).round() / 100.0));

    let mut bnl = [f64::NAN; 6];
    bnl[5] = BNL_4000;
    for (b, d) in SOFT_ANCHORS {
        bnl[b] = soft_n[b] + transfer(b, d);
    }
    // Unanchored bands: linear in log-frequency between 125 Hz and 1000 Hz.
    bnl[1] = bnl[0] + (bnl[3] - bnl[0]) / 3.0;
    bnl[2] = bnl[0] + 2.0 * (bnl[3] - bnl[0]) / 3.0;
    println!("bnl {:?}", bnl.map(|v| (v * 100.0).round() / 100.0));
    for b in 0..6 {
        let min_normal = out.profile.samples.iter().map(|s| s.bands[b] - loud[b] + normal_n[b]).fold(f64::MAX, f64::min);
        println!("band {b}: normal speech minimum along line {min_normal:.2} vs bnl {:.2}", bnl[b]);
    }
}

