//! CSV and PGM writers for profiles, crossings, comparisons and slices.

use std::io::{Read, Write};

use crate::bands::{band_sum_db, BandSpectrum, OctaveBands, BAND_COUNT};
use crate::error::{Error, Result};
use crate::num::Real;

use super::{CrossingReport, LineProfile, ProfileDelta, SliceMap};

fn fmt<T: Real>(v: T) -> String {
    let v = v.f64();
    if v.is_finite() {
        format!("{v:.4}")
    } else {
        v.to_string()
    }
}

fn band_header(prefix: &str) -> Vec<String> {
    OctaveBands::CENTERS_HZ.iter().map(|f| format!("{prefix}_{f}")).collect()
}

/// One row per receiver: distance, band levels, overall level and
/// background-exceedance flags (1 when the level is above the background).
pub fn write_profile_csv<T: Real, W: Write>(profile: &LineProfile<T>, bnl: &BandSpectrum, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["distance_m".to_string()];
    header.extend(band_header("spl"));
    header.push("spl_overall".into());
    header.extend(band_header("exceeds"));
    header.push("exceeds_overall".into());
    w.write_record(&header)?;
    let bnl_overall = band_sum_db(bnl);
    for s in &profile.samples {
        let mut row = vec![format!("{:.3}", s.distance)];
        row.extend(s.bands.iter().map(fmt));
        row.push(fmt(s.overall));
        row.extend((0..BAND_COUNT).map(|b| u8::from(s.bands[b].f64() > bnl[b]).to_string()));
        row.push(u8::from(s.overall.f64() > bnl_overall).to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the band columns of a profile written by [`write_profile_csv`].
pub fn read_profile_csv<R: Read>(input: R) -> Result<LineProfile<f64>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::InvalidScene(format!("profile CSV lacks column {name}")))
    };
    let d_col = col("distance_m")?;
    let band_cols = band_header("spl").iter().map(|n| col(n)).collect::<Result<Vec<_>>>()?;
    let mut samples = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let parse = |i: usize| {
            rec.get(i)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::InvalidScene(format!("bad number in profile CSV column {}", &headers[i])))
        };
        let d = parse(d_col)?;
        let mut bands = BandSpectrum::<f64>::zeros();
        for (b, &c) in band_cols.iter().enumerate() {
            bands[b] = parse(c)?;
        }
        samples.push((d, bands));
    }
    Ok(LineProfile::from_bands(samples))
}

/// One row per band: background level and crossing distances (empty when
/// the band stays above the background along the whole line).
pub fn write_crossings_csv<W: Write>(report: &CrossingReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["band_hz", "bnl_db", "crossing_sampled_m", "crossing_m"])?;
    let opt = |v: Option<f64>| v.map(|d| format!("{d:.1}")).unwrap_or_default();
    for (b, c) in report.bands.iter().enumerate() {
        w.write_record([
            OctaveBands::CENTERS_HZ[b].to_string(),
            format!("{:.1}", report.bnl[b]),
            opt(c.sampled),
            opt(c.interpolated),
        ])?;
    }
    w.write_record(["all".to_string(), format!("{:.1}", band_sum_db(&report.bnl)), String::new(), opt(report.all_bands())])?;
    w.flush()?;
    Ok(())
}

pub fn write_compare_csv<T: Real, W: Write>(delta: &ProfileDelta<T>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["distance_m".to_string()];
    header.extend(band_header("delta"));
    header.push("delta_overall".into());
    w.write_record(&header)?;
    for s in &delta.samples {
        let mut row = vec![format!("{:.3}", s.distance)];
        row.extend(s.bands.iter().map(fmt));
        row.push(fmt(s.overall));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Grid layout: the first row holds `u` coordinates, every following row a
/// `v` coordinate and its levels. Masked cells are left empty.
pub fn write_slice_csv<T: Real, W: Write>(slice: &SliceMap<T>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["v_m\\u_m".to_string()];
    header.extend((0..slice.nu).map(|u| format!("{:.3}", slice.u0 + u as f64 * slice.h)));
    w.write_record(&header)?;
    for v in 0..slice.nv {
        let mut row = vec![format!("{:.3}", slice.v0 + v as f64 * slice.h)];
        row.extend((0..slice.nu).map(|u| if slice.masked(u, v) { String::new() } else { fmt(slice.at(u, v)) }));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Binary greyscale image, `v` increasing upwards. Levels map linearly from
/// `min_db..max_db` onto grey values 1..=255; masked cells are black.
pub fn write_slice_pgm<T: Real, W: Write>(slice: &SliceMap<T>, min_db: f64, max_db: f64, mut out: W) -> Result<()> {
    if !(max_db > min_db) {
        return Err(Error::InvalidOptions(format!("image range {min_db}..{max_db} is empty")));
    }
    write!(out, "P5\n{} {}\n255\n", slice.nu, slice.nv)?;
    let mut row = vec![0u8; slice.nu];
    for v in (0..slice.nv).rev() {
        for (u, px) in row.iter_mut().enumerate() {
            *px = if slice.masked(u, v) {
                0
            } else {
                let t = ((slice.at(u, v).f64() - min_db) / (max_db - min_db)).clamp(0.0, 1.0);
                1 + (t * 254.0).round() as u8
            };
        }
        out.write_all(&row)?;
    }
    out.flush()?;
    Ok(())
}
