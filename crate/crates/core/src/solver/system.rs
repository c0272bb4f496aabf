//! Finite-volume assembly of the steady diffusion equation
//! `-∇·(D∇w) + c·m·w = q` on a voxel grid.

use crate::acoustics::AirProperties;
use crate::bands::BAND_COUNT;
use crate::error::{Error, Result};
use crate::materials::MaterialDb;
use crate::num::Real;
use crate::scene::{
    subdomain_stats, voxelize, CellClass, FaceKind, FaceSet, Point3, SceneSpec, SubdomainStats,
    Surface, VoxelGrid,
};

use super::exchange::{exchange_coefficient, BoundaryModel};

/// A voxelized scene with its per-subdomain diffusion data.
#[derive(Debug, Clone)]
pub struct SceneMesh {
    pub grid: VoxelGrid,
    pub faces: FaceSet,
    pub stats: Vec<SubdomainStats>,
}

impl SceneMesh {
    pub fn new(grid: VoxelGrid, faces: FaceSet, air: &AirProperties) -> Result<Self> {
        let stats = subdomain_stats(&grid, &faces, air)?;
        Ok(Self { grid, faces, stats })
    }

    pub fn build(scene: &SceneSpec, db: &MaterialDb, h: f64) -> Result<Self> {
        let (grid, faces) = voxelize(scene, db, h)?;
        Self::new(grid, faces, &scene.air)
    }

    /// Diffusion coefficient of the subdomain owning `cell`.
    pub fn diffusion(&self, cell: usize) -> f64 {
        self.stats[self.grid.subdomain(cell) as usize].diffusion
    }
}

/// Point source with its power in one band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandSource<T> {
    pub position: Point3,
    pub power: T,
}

/// Symmetric 7-point system for one band.
///
/// Row `i` reads `diag[i]·w[i] - Σ_a (off[a][i]·w[i+s_a] + off[a][i-s_a]·w[i-s_a]) = rhs[i]`
/// where `s_a` is the stride along axis `a`. `off[a][i]` is zero whenever
/// cell `i` has no neighbour in `+a`. Solid cells are identity rows.
#[derive(Debug, Clone)]
pub struct BandSystem<T> {
    pub band: usize,
    pub dims: [usize; 3],
    pub diag: Vec<T>,
    pub off: [Vec<T>; 3],
    pub rhs: Vec<T>,
}

impl<T: Real> BandSystem<T> {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn stride(&self, axis: usize) -> usize {
        match axis {
            0 => 1,
            1 => self.dims[0],
            _ => self.dims[0] * self.dims[1],
        }
    }

    /// `y = M x`.
    pub fn apply(&self, x: &[T], y: &mut [T]) {
        let n = self.len();
        debug_assert!(x.len() == n && y.len() == n);
        for ((yi, &d), &xi) in y.iter_mut().zip(&self.diag).zip(x) {
            *yi = d * xi;
        }
        for axis in 0..3 {
            let s = self.stride(axis);
            if s >= n {
                continue;
            }
            let g = &self.off[axis][..n - s];
            {
                let (y_lo, x_hi) = (&mut y[..n - s], &x[s..]);
                for ((yi, &gi), &xj) in y_lo.iter_mut().zip(g).zip(x_hi) {
                    *yi -= gi * xj;
                }
            }
            {
                let (y_hi, x_lo) = (&mut y[s..], &x[..n - s]);
                for ((yi, &gi), &xj) in y_hi.iter_mut().zip(g).zip(x_lo) {
                    *yi -= gi * xj;
                }
            }
        }
    }

    /// Entry `M[i][j]` of the implied matrix.
    pub fn entry(&self, i: usize, j: usize) -> T {
        if i == j {
            return self.diag[i];
        }
        let (lo, hi) = (i.min(j), i.max(j));
        for axis in 0..3 {
            if hi - lo == self.stride(axis) {
                return -self.off[axis][lo];
            }
        }
        T::zero()
    }

    /// Dense copy of the matrix; test helper for small systems.
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let n = self.len();
        let mut m = vec![vec![T::zero(); n]; n];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = self.diag[i];
        }
        for axis in 0..3 {
            let s = self.stride(axis);
            for i in 0..n.saturating_sub(s) {
                let g = self.off[axis][i];
                if g != T::zero() {
                    m[i][i + s] -= g;
                    m[i + s][i] -= g;
                }
            }
        }
        m
    }
}

/// Harmonic mean, the flux-continuous face diffusivity between two cells.
fn harmonic_mean(a: f64, b: f64) -> f64 {
    if a == b {
        a
    } else {
        2.0 * a * b / (a + b)
    }
}

/// Assembles the system for one band.
pub fn assemble<T: Real>(
    mesh: &SceneMesh,
    air: &AirProperties,
    band: usize,
    sources: &[BandSource<T>],
    model: BoundaryModel,
) -> Result<BandSystem<T>> {
    let grid = &mesh.grid;
    let faces = &mesh.faces;
    if band >= BAND_COUNT {
        return Err(Error::Nonconforming(format!("band index {band} out of range")));
    }
    if faces.dims() != grid.dims {
        return Err(Error::Nonconforming("face set and grid dimensions differ".into()));
    }
    if mesh.stats.len() != grid.subdomain_count() {
        return Err(Error::Nonconforming("subdomain statistics do not match the grid".into()));
    }
    for s in faces.surfaces() {
        let ok = match s {
            Surface::Boundary { alpha, .. } => (0.0..=1.0).contains(&alpha[band]),
            Surface::Partition { alpha_neg, alpha_pos, tau, .. } => {
                (0.0..=1.0).contains(&alpha_neg[band])
                    && (0.0..=1.0).contains(&alpha_pos[band])
                    && (0.0..=1.0).contains(&tau[band])
            }
        };
        if !ok {
            return Err(Error::Nonconforming(format!("{:?} face data out of range", s.group())));
        }
    }

    let n = grid.len();
    let dims = grid.dims;
    let h = grid.h;
    let area = h * h;
    let volume = h * h * h;
    let c = air.c;
    let sink = c * air.m[band] * volume;

    let mut diag = vec![0.0f64; n];
    let mut off = [vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]];

    for (idx, d) in diag.iter_mut().enumerate() {
        *d = if grid.class(idx).is_fluid() { sink } else { 1.0 };
    }

    let ax = |alpha: f64| exchange_coefficient(alpha, c, model);

    for axis in 0..3 {
        let stride = grid.stride(axis);
        let mut fd = dims;
        fd[axis] += 1;
        for k in 0..fd[2] {
            for j in 0..fd[1] {
                for i in 0..fd[0] {
                    let fc = [i, j, k];
                    let pos = fc[axis];
                    let hi = (pos < dims[axis]).then(|| grid.index(i, j, k));
                    let lo = if pos > 0 {
                        let mut l = fc;
                        l[axis] -= 1;
                        Some(grid.index(l[0], l[1], l[2]))
                    } else {
                        None
                    };
                    match faces.kind(faces.tag(axis, fc)) {
                        FaceKind::Inactive => {}
                        FaceKind::Fluid | FaceKind::Aperture => {
                            let (Some(l), Some(u)) = (lo, hi) else {
                                return Err(Error::Nonconforming("fluid face on the hull".into()));
                            };
                            if !grid.class(l).is_fluid() || !grid.class(u).is_fluid() {
                                return Err(Error::Nonconforming("fluid face next to a solid cell".into()));
                            }
                            debug_assert_eq!(u - l, stride);
                            let g = harmonic_mean(mesh.diffusion(l), mesh.diffusion(u)) * area / h;
                            diag[l] += g;
                            diag[u] += g;
                            off[axis][l] = T::of(g);
                        }
                        FaceKind::Surface(Surface::Boundary { alpha, .. }) => {
                            let cell = match (lo, hi) {
                                (Some(l), Some(u)) => {
                                    if grid.class(l).is_fluid() {
                                        l
                                    } else {
                                        u
                                    }
                                }
                                (Some(x), None) | (None, Some(x)) => x,
                                (None, None) => unreachable!(),
                            };
                            if !grid.class(cell).is_fluid() {
                                return Err(Error::Nonconforming("boundary face without a fluid side".into()));
                            }
                            diag[cell] += ax(alpha[band]) * area;
                        }
                        FaceKind::Surface(Surface::Partition { alpha_neg, alpha_pos, tau, interior_is_neg, .. }) => {
                            let (Some(l), Some(u)) = (lo, hi) else {
                                return Err(Error::Nonconforming("partition face on the hull".into()));
                            };
                            let expect = if *interior_is_neg {
                                (CellClass::Interior, CellClass::Exterior)
                            } else {
                                (CellClass::Exterior, CellClass::Interior)
                            };
                            if (grid.class(l), grid.class(u)) != expect {
                                return Err(Error::Nonconforming("partition face does not separate interior from exterior".into()));
                            }
                            let t = c * tau[band] / 4.0 * area;
                            diag[l] += ax(alpha_neg[band]) * area + t;
                            diag[u] += ax(alpha_pos[band]) * area + t;
                            off[axis][l] = T::of(t);
                        }
                    }
                }
            }
        }
    }

    let mut rhs = vec![T::zero(); n];
    for (s, src) in sources.iter().enumerate() {
        let cell = grid
            .locate(src.position)
            .ok_or_else(|| Error::Nonconforming(format!("source {s} lies outside the grid")))?;
        if !grid.class(cell).is_fluid() {
            return Err(Error::Nonconforming(format!("source {s} lies in a solid cell")));
        }
        rhs[cell] += src.power;
    }

    Ok(BandSystem {
        band,
        dims,
        diag: diag.into_iter().map(T::of).collect(),
        off,
        rhs,
    })
}
