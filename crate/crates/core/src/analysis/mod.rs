//! Receiver-line profiles, background-noise crossings, scenario comparisons
//! and planar SPL maps.

mod export;

use serde::{Deserialize, Serialize};

pub use export::{
    read_profile_csv, write_compare_csv, write_crossings_csv, write_profile_csv, write_slice_csv,
    write_slice_pgm,
};

use crate::acoustics::{spl_from_energy_density, AirProperties};
use crate::bands::{band_sum_db, BandSpectrum, BAND_COUNT};
use crate::error::{Error, Result};
use crate::num::Real;
use crate::scene::{CellClass, Point3, VoxelGrid};
use crate::solver::FieldSolution;

/// Straight line of equally spaced receivers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReceiverLine {
    pub start: Point3,
    /// Normalized on use.
    pub direction: Point3,
    /// m
    pub length: f64,
    /// m
    pub step: f64,
}

impl ReceiverLine {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidScene(format!("receiver step must be positive, got {}", self.step)));
        }
        if !(self.length >= 0.0 && self.length.is_finite()) {
            return Err(Error::InvalidScene(format!("receiver length must be non-negative, got {}", self.length)));
        }
        let norm = self.direction.iter().map(|d| d * d).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidScene("receiver direction must be non-zero".into()));
        }
        Ok(())
    }

    pub fn sample_count(&self) -> usize {
        (self.length / self.step + 1e-9).floor() as usize + 1
    }

    /// `(distance along the line, position)` for every sample.
    pub fn points(&self) -> impl Iterator<Item = (f64, Point3)> + '_ {
        let norm = self.direction.iter().map(|d| d * d).sum::<f64>().sqrt();
        let dir = self.direction.map(|d| d / norm);
        (0..self.sample_count()).map(move |i| {
            let d = i as f64 * self.step;
            (d, [0, 1, 2].map(|a| self.start[a] + d * dir[a]))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSample<T> {
    pub distance: f64,
    pub bands: BandSpectrum<T>,
    pub overall: T,
}

/// SPL along a receiver line.
#[derive(Debug, Clone, PartialEq)]
pub struct LineProfile<T> {
    pub samples: Vec<ProfileSample<T>>,
}

impl<T: Real> LineProfile<T> {
    /// Builds a profile from per-band levels; the overall level is derived.
    pub fn from_bands(samples: impl IntoIterator<Item = (f64, BandSpectrum<T>)>) -> Self {
        Self {
            samples: samples
                .into_iter()
                .map(|(distance, bands)| ProfileSample { distance, overall: band_sum_db(&bands), bands })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn distances(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.distance).collect()
    }

    pub fn overall(&self) -> Vec<T> {
        self.samples.iter().map(|s| s.overall).collect()
    }

    /// Mean overall level over samples with `lo <= d <= hi`.
    pub fn mean_overall(&self, lo: f64, hi: f64) -> Option<T> {
        mean(self.samples.iter().filter(|s| s.distance >= lo - 1e-9 && s.distance <= hi + 1e-9).map(|s| s.overall))
    }
}

fn mean<T: Real>(it: impl Iterator<Item = T>) -> Option<T> {
    let (sum, n) = it.fold((T::zero(), 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / T::of(n as f64))
}

/// Trilinear interpolation of a cell-centred field, restricted to cells of
/// the same class as the cell containing `p` so walls are not smeared.
pub fn interpolate<T: Real>(grid: &VoxelGrid, field: &[T], p: Point3) -> Result<T> {
    let home = grid.locate(p).ok_or(Error::SampleOutsideGrid(p))?;
    let home_class = grid.class(home);
    let mut base = [0usize; 3];
    let mut frac = [0.0f64; 3];
    for a in 0..3 {
        let n = grid.dims[a];
        let t = (p[a] - grid.origin[a]) / grid.h - 0.5;
        if n == 1 {
            base[a] = 0;
            frac[a] = 0.0;
            continue;
        }
        let i0 = t.floor().clamp(0.0, (n - 2) as f64);
        base[a] = i0 as usize;
        frac[a] = (t - i0).clamp(0.0, 1.0);
    }
    let mut acc = 0.0;
    let mut wsum = 0.0;
    for corner in 0..8 {
        let mut c = base;
        let mut weight = 1.0;
        for a in 0..3 {
            let up = (corner >> a) & 1 == 1;
            if up {
                if grid.dims[a] == 1 {
                    weight = 0.0;
                    break;
                }
                c[a] += 1;
                weight *= frac[a];
            } else {
                weight *= 1.0 - frac[a];
            }
        }
        if weight == 0.0 {
            continue;
        }
        let idx = grid.index(c[0], c[1], c[2]);
        if grid.class(idx) != home_class {
            continue;
        }
        acc += weight * field[idx].f64();
        wsum += weight;
    }
    Ok(if wsum > 0.0 { T::of(acc / wsum) } else { field[home] })
}

/// SPL per band and overall at every receiver.
pub fn sample_line<T: Real>(solution: &FieldSolution<T>, line: &ReceiverLine, air: &AirProperties) -> Result<LineProfile<T>> {
    line.validate()?;
    let grid = &solution.grid;
    let mut samples = Vec::with_capacity(line.sample_count());
    for (d, p) in line.points() {
        let mut bands = BandSpectrum::<T>::zeros();
        for b in 0..BAND_COUNT {
            let w = interpolate(grid, &solution.w[b], p)?;
            bands[b] = spl_from_energy_density(w, air);
        }
        samples.push((d, bands));
    }
    Ok(LineProfile::from_bands(samples))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandCrossing {
    /// First sampled distance with `SPL ≤ BNL`.
    pub sampled: Option<f64>,
    /// Linear interpolation between the bracketing samples, to 0.1 m.
    pub interpolated: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossingReport {
    pub bnl: BandSpectrum,
    pub bands: [BandCrossing; BAND_COUNT],
}

impl CrossingReport {
    /// Distance beyond which every band has reached the background level,
    /// or `None` if some band never does within the line.
    pub fn all_bands(&self) -> Option<f64> {
        self.bands
            .iter()
            .map(|c| c.interpolated)
            .try_fold(0.0f64, |m, d| d.map(|d| m.max(d)))
    }
}

fn round_tenth(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

/// Per band, where the profile first drops to the background level.
pub fn crossing_distances<T: Real>(profile: &LineProfile<T>, bnl: &BandSpectrum) -> CrossingReport {
    let bands = std::array::from_fn(|b| {
        let excess = |s: &ProfileSample<T>| s.bands[b].f64() - bnl[b];
        let Some(k) = profile.samples.iter().position(|s| excess(s) <= 0.0) else {
            return BandCrossing { sampled: None, interpolated: None };
        };
        let at = &profile.samples[k];
        let interpolated = if k == 0 {
            at.distance
        } else {
            let prev = &profile.samples[k - 1];
            let (e0, e1) = (excess(prev), excess(at));
            let t = if e0 != e1 { e0 / (e0 - e1) } else { 1.0 };
            prev.distance + t * (at.distance - prev.distance)
        };
        BandCrossing { sampled: Some(at.distance), interpolated: Some(round_tenth(interpolated)) }
    });
    CrossingReport { bnl: *bnl, bands }
}

/// Elementwise level difference `a - b`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileDelta<T> {
    pub samples: Vec<ProfileSample<T>>,
}

impl<T: Real> ProfileDelta<T> {
    pub fn mean_overall(&self, lo: f64, hi: f64) -> Option<T> {
        mean(self.samples.iter().filter(|s| s.distance >= lo - 1e-9 && s.distance <= hi + 1e-9).map(|s| s.overall))
    }

    pub fn mean_band(&self, band: usize, lo: f64, hi: f64) -> Option<T> {
        mean(self.samples.iter().filter(|s| s.distance >= lo - 1e-9 && s.distance <= hi + 1e-9).map(|s| s.bands[band]))
    }
}

pub fn compare<T: Real>(a: &LineProfile<T>, b: &LineProfile<T>) -> Result<ProfileDelta<T>> {
    if a.len() != b.len() {
        return Err(Error::GridMismatch(format!("{} vs {} samples", a.len(), b.len())));
    }
    let samples = a
        .samples
        .iter()
        .zip(&b.samples)
        .map(|(sa, sb)| {
            if (sa.distance - sb.distance).abs() > 1e-6 {
                return Err(Error::GridMismatch(format!("distance {} vs {}", sa.distance, sb.distance)));
            }
            Ok(ProfileSample {
                distance: sa.distance,
                bands: sa.bands - sb.bands,
                overall: sa.overall - sb.overall,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ProfileDelta { samples })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandSelection {
    Band(usize),
    Overall,
}

/// SPL on a grid plane, nearest-cell sampled.
#[derive(Debug, Clone)]
pub struct SliceMap<T> {
    /// Normal axis of the plane.
    pub axis: usize,
    pub offset: f64,
    /// In-plane axes `(u, v)`, in increasing axis order.
    pub plane_axes: [usize; 2],
    pub nu: usize,
    pub nv: usize,
    /// Cell-centre coordinate of the first column / row.
    pub u0: f64,
    pub v0: f64,
    pub h: f64,
    /// Row-major (`v` rows of `u` columns).
    pub values: Vec<T>,
    pub classes: Vec<CellClass>,
}

impl<T: Real> SliceMap<T> {
    pub fn at(&self, u: usize, v: usize) -> T {
        self.values[u + self.nu * v]
    }

    /// True where the pixel lies in the blind or the occupancy box.
    pub fn masked(&self, u: usize, v: usize) -> bool {
        self.classes[u + self.nu * v] != CellClass::Exterior
    }
}

pub fn slice_map<T: Real>(
    solution: &FieldSolution<T>,
    axis: usize,
    offset: f64,
    selection: BandSelection,
    air: &AirProperties,
) -> Result<SliceMap<T>> {
    let grid = &solution.grid;
    if axis > 2 {
        return Err(Error::InvalidScene(format!("slice axis {axis} out of range")));
    }
    let t = (offset - grid.origin[axis]) / grid.h;
    let n = grid.dims[axis];
    if !(t >= 0.0 && t <= n as f64) {
        return Err(Error::OutsideDomain(format!("slice plane at {offset} on axis {axis}")));
    }
    if let BandSelection::Band(b) = selection {
        if b >= BAND_COUNT {
            return Err(Error::InvalidScene(format!("band index {b} out of range")));
        }
    }
    let layer = (t.floor() as usize).min(n - 1);
    let plane_axes = match axis {
        0 => [1, 2],
        1 => [0, 2],
        _ => [0, 1],
    };
    let (nu, nv) = (grid.dims[plane_axes[0]], grid.dims[plane_axes[1]]);
    let mut values = Vec::with_capacity(nu * nv);
    let mut classes = Vec::with_capacity(nu * nv);
    for v in 0..nv {
        for u in 0..nu {
            let mut c = [0usize; 3];
            c[axis] = layer;
            c[plane_axes[0]] = u;
            c[plane_axes[1]] = v;
            let idx = grid.index(c[0], c[1], c[2]);
            let spl = |b: usize| spl_from_energy_density(solution.w[b][idx], air);
            let value = match selection {
                BandSelection::Band(b) => spl(b),
                BandSelection::Overall => band_sum_db(&BandSpectrum(std::array::from_fn(spl))),
            };
            values.push(value);
            classes.push(grid.class(idx));
        }
    }
    Ok(SliceMap {
        axis,
        offset,
        plane_axes,
        nu,
        nv,
        u0: grid.origin[plane_axes[0]] + 0.5 * grid.h,
        v0: grid.origin[plane_axes[1]] + 0.5 * grid.h,
        h: grid.h,
        values,
        classes,
    })
}
