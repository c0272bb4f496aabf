mod common;

use proptest::prelude::*;

use blind_acoustics::acoustics::{
    energy_density_from_spl, source_power_from_spl1m, spl_from_energy_density, transmission_coefficient,
    AirProperties, Radiation,
};
use blind_acoustics::analysis::{compare, crossing_distances, LineProfile};
use blind_acoustics::bands::{band_sum_db, BandSpectrum, BAND_COUNT};
use blind_acoustics::materials::Material;
use blind_acoustics::run::run_scene;
use blind_acoustics::scene::ScenarioId;
use blind_acoustics::solver::{exchange_coefficient, BoundaryModel, SolveOptions};

fn spectrum(lo: f64, hi: f64) -> impl Strategy<Value = BandSpectrum> {
    prop::array::uniform6(lo..hi).prop_map(BandSpectrum)
}

fn profile(n: usize) -> impl Strategy<Value = LineProfile<f64>> {
    prop::collection::vec(spectrum(0.0, 80.0), n).prop_map(|rows| {
        LineProfile::from_bands(rows.into_iter().enumerate().map(|(i, b)| (0.5 * i as f64, b)))
    })
}

proptest! {
    #[test]
    fn band_sum_bounds(levels in spectrum(-20.0, 120.0)) {
        let s = band_sum_db(&levels);
        let max = levels.max();
        prop_assert!(s >= max - 1e-9);
        prop_assert!(s <= max + 10.0 * (BAND_COUNT as f64).log10() + 1e-9);
    }

    #[test]
    fn band_sum_shifts_with_levels(levels in spectrum(-20.0, 120.0), k in -50.0f64..50.0) {
        let shifted = levels.map(|l| l + k);
        prop_assert!((band_sum_db(&shifted) - band_sum_db(&levels) - k).abs() < 1e-9);
    }

    #[test]
    fn energy_level_round_trip(spl in -20.0f64..140.0) {
        let air = AirProperties::default();
        let w = energy_density_from_spl(spl, &air);
        prop_assert!((spl_from_energy_density(w, &air) - spl).abs() < 1e-9);
    }

    #[test]
    fn source_power_scales_with_level(level in 0.0f64..120.0, extra in 0.0f64..40.0) {
        let air = AirProperties::default();
        let p0 = source_power_from_spl1m(level, &air, Radiation::Spherical);
        let p1 = source_power_from_spl1m(level + extra, &air, Radiation::Spherical);
        prop_assert!((p1 / p0 - 10f64.powf(extra / 10.0)).abs() < 1e-9 * p1 / p0);
        let half = source_power_from_spl1m(level, &air, Radiation::Hemispherical);
        prop_assert!((p0 / half - 2.0).abs() < 1e-12);
    }

    #[test]
    fn transmission_in_unit_interval(a in 0.0f64..120.0, b in 0.0f64..120.0) {
        let (ta, tb) = (transmission_coefficient(a).unwrap(), transmission_coefficient(b).unwrap());
        prop_assert!(ta > 0.0 && ta <= 1.0);
        if a < b {
            prop_assert!(ta > tb);
        }
    }

    #[test]
    fn negative_loss_rejected(tl in -100.0f64..-1e-9) {
        prop_assert!(transmission_coefficient(tl).is_err());
    }

    #[test]
    fn exchange_ordering(alpha in 0.0f64..=1.0, beta in 0.0f64..=1.0) {
        let c = 343.0;
        let s = exchange_coefficient(alpha, c, BoundaryModel::Sabine);
        let m = exchange_coefficient(alpha, c, BoundaryModel::Modified);
        let e = exchange_coefficient(alpha, c, BoundaryModel::Eyring);
        prop_assert!(s >= 0.0);
        prop_assert!(m >= s - 1e-12);
        prop_assert!(e >= m - 1e-12);
        for model in [BoundaryModel::Sabine, BoundaryModel::Modified, BoundaryModel::Eyring] {
            if alpha < beta {
                prop_assert!(exchange_coefficient(alpha, c, model) <= exchange_coefficient(beta, c, model));
            }
        }
    }

    #[test]
    fn materials_keep_alpha_in_range(alpha in spectrum(-0.2, 1.3), tl in spectrum(0.0, 60.0)) {
        match Material::new("x", alpha, Some(tl)) {
            Ok(m) => {
                let tau = m.tau();
                for b in 0..BAND_COUNT {
                    prop_assert!((0.0..=1.0).contains(&m.alpha[b]));
                    prop_assert!(m.alpha[b] + tau[b] <= 1.0 + 1e-12);
                }
            }
            Err(_) => {
                let clamped = alpha.map(|a| a.min(1.0));
                let bad = (0..BAND_COUNT)
                    .any(|b| alpha[b] < 0.0 || clamped[b] + transmission_coefficient(tl[b]).unwrap() > 1.0 + 1e-12);
                prop_assert!(bad);
            }
        }
    }

    #[test]
    fn crossing_moves_closer_as_background_rises(p in profile(25), bnl in spectrum(0.0, 80.0), lift in 0.0f64..20.0) {
        let low = crossing_distances(&p, &bnl);
        let high = crossing_distances(&p, &bnl.map(|b| b + lift));
        for b in 0..BAND_COUNT {
            if let Some(d) = low.bands[b].interpolated {
                let h = high.bands[b].interpolated.expect("a crossing persists when the background rises");
                prop_assert!(h <= d);
                prop_assert!(high.bands[b].sampled.unwrap() <= low.bands[b].sampled.unwrap());
            }
            if let (Some(s), Some(i)) = (low.bands[b].sampled, low.bands[b].interpolated) {
                prop_assert!(i <= s + 0.05 && i >= s - 0.55);
            }
        }
    }

    #[test]
    fn comparison_is_antisymmetric(a in profile(12), b in profile(12)) {
        let ab = compare(&a, &b).unwrap();
        let ba = compare(&b, &a).unwrap();
        for (x, y) in ab.samples.iter().zip(&ba.samples) {
            prop_assert_eq!(x.overall, -y.overall);
            for k in 0..BAND_COUNT {
                prop_assert_eq!(x.bands[k], -y.bands[k]);
            }
        }
        let aa = compare(&a, &a).unwrap();
        prop_assert!(aa.samples.iter().all(|s| s.overall == 0.0));
    }

    #[test]
    fn scenario_ids_round_trip(small in any::<bool>(), n in 1u8..=7) {
        let text = format!("{}{:02}", if small { "SS" } else { "MS" }, n);
        let id: ScenarioId = text.parse().unwrap();
        prop_assert_eq!(id.to_string(), text.clone());
        prop_assert_eq!(id.counterpart().counterpart(), id);
        let lower: ScenarioId = text.to_lowercase().parse().unwrap();
        prop_assert_eq!(lower, id);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// In a closed room with uniform walls the field is positive, peaks at the
    /// source, and stronger absorption lowers it everywhere.
    #[test]
    fn sealed_room_field_behaves(alpha in 0.05f64..0.9, x in 0.6f64..2.4, y in 0.6f64..2.4, z in 0.6f64..2.4) {
        let opts = SolveOptions::default();
        let run = |a: f64| {
            let scene = common::sealed_room([3.0; 3], a, vec![common::flat_source([x, y, z], 70.0)], 0.5);
            run_scene::<f64>(&scene, &common::db_with_uniform(a), None, &opts).unwrap()
        };
        let base = run(alpha);
        let more = run((alpha + 0.1).min(1.0));
        let src = base.mesh.grid.locate([x, y, z]).unwrap();
        for b in 0..BAND_COUNT {
            let w = &base.field.w[b];
            prop_assert!(w.iter().all(|&v| v > 0.0));
            let peak = w.iter().cloned().fold(f64::MIN, f64::max);
            prop_assert_eq!(w[src], peak);
            for (lo, hi) in more.field.w[b].iter().zip(w) {
                prop_assert!(lo < hi);
            }
        }
    }
}
