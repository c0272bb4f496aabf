//! Steady-state acoustic diffusion solves, one linear system per octave band.

mod cg;
mod exchange;
mod multigrid;
mod system;

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use cg::{pcg, CgResult, Jacobi, Preconditioner};
pub use exchange::{exchange_coefficient, BoundaryModel, EYRING_ALPHA_CAP};
pub use multigrid::Multigrid;
pub use system::{assemble, BandSource, BandSystem, SceneMesh};

use crate::acoustics::{AirProperties, Radiation, SourceSpec};
use crate::bands::{BandSpectrum, BAND_COUNT};
use crate::error::{Error, Result};
use crate::num::Real;
use crate::scene::{CellClass, FaceGroup, FaceKind, FaceTag, Surface, VoxelGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PreconditionerKind {
    /// Diagonal scaling.
    Jacobi,
    /// Aggregation multigrid V-cycle.
    #[default]
    Multigrid,
}

impl std::str::FromStr for PreconditionerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "jacobi" => Ok(Self::Jacobi),
            "multigrid" | "mg" => Ok(Self::Multigrid),
            other => Err(format!("unknown preconditioner `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub boundary_model: BoundaryModel,
    pub rel_tolerance: f64,
    /// Defaults to `10·√N` for an N-cell grid.
    pub max_iterations: Option<usize>,
    /// Number of bands solved concurrently.
    pub threads: usize,
    pub preconditioner: PreconditionerKind,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            boundary_model: BoundaryModel::Sabine,
            rel_tolerance: 1e-8,
            max_iterations: None,
            threads: 1,
            preconditioner: PreconditionerKind::default(),
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tolerance > 0.0 && self.rel_tolerance < 1.0) {
            return Err(Error::InvalidOptions(format!(
                "rel_tolerance must lie in (0, 1), got {}",
                self.rel_tolerance
            )));
        }
        if self.max_iterations == Some(0) {
            return Err(Error::InvalidOptions("max_iterations must be at least 1".into()));
        }
        Ok(())
    }

    pub fn max_iterations_for(&self, cells: usize) -> usize {
        self.max_iterations
            .unwrap_or_else(|| ((10.0 * (cells as f64).sqrt()).ceil() as usize).max(1))
    }
}

/// Solution of one band plus solver diagnostics.
#[derive(Debug, Clone)]
pub struct BandSolution<T> {
    pub w: Vec<T>,
    pub diagnostics: BandDiagnostics,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BandDiagnostics {
    pub band_hz: f64,
    pub iterations: usize,
    pub residual: f64,
    /// Cells with `w < 0` before clamping.
    pub negative_cells: usize,
    /// Smallest raw value relative to the largest; `>= 0` when nothing was clamped.
    pub min_relative: f64,
    pub seconds: f64,
    /// Filled in by [`energy_balance`].
    #[serde(default)]
    pub imbalance: f64,
}

/// Solves one assembled band.
pub fn solve_band<T: Real>(system: &BandSystem<T>, options: &SolveOptions) -> Result<BandSolution<T>> {
    options.validate()?;
    let start = Instant::now();
    let max_iter = options.max_iterations_for(system.len());
    let result = match options.preconditioner {
        PreconditionerKind::Jacobi => pcg(system, &Jacobi::new(system), options.rel_tolerance, max_iter),
        PreconditionerKind::Multigrid => pcg(system, &Multigrid::new(system), options.rel_tolerance, max_iter),
    }?;
    let mut w = result.x;
    let max = w.iter().fold(T::zero(), |m, &v| m.max(v));
    let min = w.iter().fold(T::zero(), |m, &v| m.min(v));
    let mut negative_cells = 0;
    for v in w.iter_mut() {
        if *v < T::zero() {
            negative_cells += 1;
            *v = T::zero();
        }
    }
    if negative_cells > 0 {
        log::debug!("band {}: clamped {negative_cells} negative cells", system.band);
    }
    Ok(BandSolution {
        w,
        diagnostics: BandDiagnostics {
            band_hz: crate::bands::OctaveBands::CENTERS_HZ[system.band],
            iterations: result.iterations,
            residual: result.residual,
            negative_cells,
            min_relative: if max > T::zero() { (min / max).f64() } else { 0.0 },
            seconds: start.elapsed().as_secs_f64(),
            imbalance: 0.0,
        },
    })
}

/// Per-band energy density over a voxel grid.
#[derive(Debug, Clone)]
pub struct FieldSolution<T> {
    pub grid: VoxelGrid,
    /// `w[band][cell]`, J/m³.
    pub w: Vec<Vec<T>>,
    /// Injected source power per band, W.
    pub injected: BandSpectrum<T>,
    pub diagnostics: Vec<BandDiagnostics>,
    pub boundary_model: BoundaryModel,
}

impl<T: Real> FieldSolution<T> {
    pub fn band(&self, band: usize) -> &[T] {
        &self.w[band]
    }
}

/// Source powers per band for a set of point sources.
pub fn band_sources<T: Real>(
    sources: &[SourceSpec],
    air: &AirProperties,
    radiation: Radiation,
) -> Vec<[BandSource<T>; BAND_COUNT]> {
    sources
        .iter()
        .map(|s| {
            let p = s.power::<T>(air, radiation);
            std::array::from_fn(|b| BandSource { position: s.position, power: p[b] })
        })
        .collect()
}

/// Assembles and solves all six bands.
///
/// Bands are independent; with `threads > 1` they are distributed over
/// worker threads. Each band's result depends only on its own inputs.
pub fn solve_all_bands<T: Real>(
    mesh: &SceneMesh,
    sources: &[SourceSpec],
    air: &AirProperties,
    radiation: Radiation,
    options: &SolveOptions,
) -> Result<FieldSolution<T>> {
    options.validate()?;
    air.validate()?;
    let per_source = band_sources::<T>(sources, air, radiation);
    let band_srcs: Vec<Vec<BandSource<T>>> = (0..BAND_COUNT)
        .map(|b| per_source.iter().map(|s| s[b]).collect())
        .collect();
    let injected = BandSpectrum(std::array::from_fn(|b| band_srcs[b].iter().map(|s| s.power).sum()));

    let solve_one = |band: usize| -> Result<BandSolution<T>> {
        let sys = assemble(mesh, air, band, &band_srcs[band], options.boundary_model)?;
        solve_band(&sys, options).map_err(|e| match e {
            Error::NonConvergence { iterations, residual, history, .. } => Error::NonConvergence {
                band: Some(band),
                iterations,
                residual,
                history,
            },
            other => other,
        })
    };

    let threads = options.threads.clamp(1, BAND_COUNT);
    let results: Vec<Result<BandSolution<T>>> = if threads == 1 {
        (0..BAND_COUNT).map(solve_one).collect()
    } else {
        let next = AtomicUsize::new(0);
        let slots: Mutex<Vec<Option<Result<BandSolution<T>>>>> = Mutex::new((0..BAND_COUNT).map(|_| None).collect());
        std::thread::scope(|scope| {
            for _ in 0..threads {
                scope.spawn(|| loop {
                    let band = next.fetch_add(1, Ordering::Relaxed);
                    if band >= BAND_COUNT {
                        break;
                    }
                    let r = solve_one(band);
                    slots.lock().expect("no poisoned workers")[band] = Some(r);
                });
            }
        });
        slots
            .into_inner()
            .expect("no poisoned workers")
            .into_iter()
            .map(|r| r.expect("every band solved"))
            .collect()
    };

    let mut w = Vec::with_capacity(BAND_COUNT);
    let mut diagnostics = Vec::with_capacity(BAND_COUNT);
    for r in results {
        let s = r?;
        log::info!(
            "{} Hz: {} iterations, residual {:.2e}, {:.2} s",
            s.diagnostics.band_hz,
            s.diagnostics.iterations,
            s.diagnostics.residual,
            s.diagnostics.seconds
        );
        w.push(s.w);
        diagnostics.push(s.diagnostics);
    }
    let mut solution = FieldSolution {
        grid: mesh.grid.clone(),
        w,
        injected,
        diagnostics,
        boundary_model: options.boundary_model,
    };
    let balance = energy_balance(&solution, mesh, air);
    for (d, b) in solution.diagnostics.iter_mut().zip(&balance) {
        d.imbalance = b.imbalance;
    }
    Ok(solution)
}

/// Power audit of one band.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BandBalance {
    pub band_hz: f64,
    /// W
    pub injected: f64,
    /// Power absorbed per face group, W.
    pub absorbed: BTreeMap<FaceGroup, f64>,
    /// Power absorbed by the air, W.
    pub air: f64,
    pub absorbed_total: f64,
    /// Net power carried from the interior to the exterior through partitions, W.
    pub transmitted: f64,
    /// Net power carried through open apertures, W.
    pub aperture_flux: f64,
    /// `|injected - absorbed_total| / injected`; zero when nothing is injected.
    pub imbalance: f64,
}

/// Sums every absorption term of the discrete model and compares with the
/// injected power. Transmission is an internal transfer and nets to zero.
pub fn energy_balance<T: Real>(solution: &FieldSolution<T>, mesh: &SceneMesh, air: &AirProperties) -> Vec<BandBalance> {
    let grid = &mesh.grid;
    let faces = &mesh.faces;
    let dims = grid.dims;
    let h = grid.h;
    let area = h * h;
    let model = solution.boundary_model;
    let ax = |alpha: f64| exchange_coefficient(alpha, air.c, model);

    (0..BAND_COUNT)
        .map(|band| {
            let w = &solution.w[band];
            let wv = |idx: usize| w[idx].f64();
            let mut bal = BandBalance {
                band_hz: crate::bands::OctaveBands::CENTERS_HZ[band],
                injected: solution.injected[band].f64(),
                ..Default::default()
            };
            let sink = air.c * air.m[band] * h * h * h;
            if sink > 0.0 {
                bal.air = (0..grid.len()).filter(|&i| grid.class(i).is_fluid()).map(|i| sink * wv(i)).sum();
            }
            for axis in 0..3 {
                let mut fd = dims;
                fd[axis] += 1;
                for k in 0..fd[2] {
                    for j in 0..fd[1] {
                        for i in 0..fd[0] {
                            let fc = [i, j, k];
                            let tag = faces.tag(axis, fc);
                            if tag == FaceTag::FLUID || tag == FaceTag::INACTIVE {
                                continue;
                            }
                            let pos = fc[axis];
                            let hi = (pos < dims[axis]).then(|| grid.index(i, j, k));
                            let lo = (pos > 0).then(|| {
                                let mut l = fc;
                                l[axis] -= 1;
                                grid.index(l[0], l[1], l[2])
                            });
                            match faces.kind(tag) {
                                FaceKind::Aperture => {
                                    let (l, u) = (lo.unwrap(), hi.unwrap());
                                    let d = 2.0 * mesh.diffusion(l) * mesh.diffusion(u) / (mesh.diffusion(l) + mesh.diffusion(u));
                                    let flux = d * area / h * (wv(l) - wv(u));
                                    let out = if grid.class(l) == CellClass::Interior { flux } else { -flux };
                                    bal.aperture_flux += out;
                                }
                                FaceKind::Surface(Surface::Boundary { group, alpha }) => {
                                    let cell = [lo, hi]
                                        .into_iter()
                                        .flatten()
                                        .find(|&c| grid.class(c).is_fluid())
                                        .expect("boundary face has a fluid side");
                                    *bal.absorbed.entry(*group).or_default() += ax(alpha[band]) * area * wv(cell);
                                }
                                FaceKind::Surface(Surface::Partition { group, alpha_neg, alpha_pos, tau, interior_is_neg }) => {
                                    let (l, u) = (lo.unwrap(), hi.unwrap());
                                    let a = ax(alpha_neg[band]) * area * wv(l) + ax(alpha_pos[band]) * area * wv(u);
                                    *bal.absorbed.entry(*group).or_default() += a;
                                    let t = air.c * tau[band] / 4.0 * area * (wv(l) - wv(u));
                                    bal.transmitted += if *interior_is_neg { t } else { -t };
                                }
                                FaceKind::Fluid | FaceKind::Inactive => {}
                            }
                        }
                    }
                }
            }
            bal.absorbed_total = bal.absorbed.values().sum::<f64>() + bal.air;
            bal.imbalance = if bal.injected > 0.0 {
                (bal.injected - bal.absorbed_total).abs() / bal.injected
            } else {
                0.0
            };
            bal
        })
        .collect()
}

/// Machine-readable run diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub scene: Option<String>,
    pub h: f64,
    pub cells: usize,
    pub boundary_model: BoundaryModel,
    pub rel_tolerance: f64,
    pub bands: Vec<BandDiagnostics>,
}

impl RunReport {
    pub fn new<T: Real>(scene: Option<String>, solution: &FieldSolution<T>, options: &SolveOptions) -> Self {
        Self {
            scene,
            h: solution.grid.h,
            cells: solution.grid.len(),
            boundary_model: options.boundary_model,
            rel_tolerance: options.rel_tolerance,
            bands: solution.diagnostics.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
