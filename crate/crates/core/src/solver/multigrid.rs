//! Aggregation multigrid V-cycle used as a CG preconditioner.
//!
//! Fine cells are grouped in 2×2×2 blocks; the coarse operator is the
//! Galerkin product `PᵀAP` with piecewise-constant `P`, which keeps the
//! 7-point structure. Smoothing is one forward Gauss-Seidel sweep before and
//! one backward sweep after the coarse correction, so the cycle is a
//! symmetric operator. The coarsest level is factorized densely.

use crate::num::Real;

use super::cg::Preconditioner;
use super::system::BandSystem;

const COARSEST_CELLS: usize = 512;
/// Piecewise-constant prolongation under-corrects smooth error by about a
/// factor of two in 3-D; scaling the coarse correction compensates.
const COARSE_SCALE: f64 = 1.8;

struct Level<T> {
    dims: [usize; 3],
    diag: Vec<T>,
    off: [Vec<T>; 3],
    /// Rows with at least one coupling; the others are decoupled identity-like rows.
    active: Vec<bool>,
}

impl<T: Real> Level<T> {
    fn len(&self) -> usize {
        self.diag.len()
    }

    fn stride(&self, axis: usize) -> usize {
        match axis {
            0 => 1,
            1 => self.dims[0],
            _ => self.dims[0] * self.dims[1],
        }
    }

    fn strides(&self) -> [usize; 3] {
        [self.stride(0), self.stride(1), self.stride(2)]
    }

    #[inline]
    fn neighbour_sum(&self, idx: usize, x: &[T], s: &[usize; 3]) -> T {
        let n = self.len();
        let mut acc = T::zero();
        for a in 0..3 {
            if idx + s[a] < n {
                acc += self.off[a][idx] * x[idx + s[a]];
            }
            if idx >= s[a] {
                acc += self.off[a][idx - s[a]] * x[idx - s[a]];
            }
        }
        acc
    }

    fn forward_gs(&self, b: &[T], x: &mut [T]) {
        let s = self.strides();
        for idx in 0..self.len() {
            x[idx] = (b[idx] + self.neighbour_sum(idx, x, &s)) / self.diag[idx];
        }
    }

    fn backward_gs(&self, b: &[T], x: &mut [T]) {
        let s = self.strides();
        for idx in (0..self.len()).rev() {
            x[idx] = (b[idx] + self.neighbour_sum(idx, x, &s)) / self.diag[idx];
        }
    }

    fn residual(&self, b: &[T], x: &[T], r: &mut [T]) {
        let s = self.strides();
        for idx in 0..self.len() {
            r[idx] = b[idx] - self.diag[idx] * x[idx] + self.neighbour_sum(idx, x, &s);
        }
    }

    fn coarse_index(&self, coarse_dims: [usize; 3], idx: usize) -> usize {
        let c = coords(self.dims, idx);
        (c[0] / 2) + coarse_dims[0] * ((c[1] / 2) + coarse_dims[1] * (c[2] / 2))
    }

    fn coarsen(&self) -> Level<T> {
        let cd = self.dims.map(|d| d.div_ceil(2));
        let nc = cd[0] * cd[1] * cd[2];
        let mut diag = vec![T::zero(); nc];
        let mut off = [vec![T::zero(); nc], vec![T::zero(); nc], vec![T::zero(); nc]];
        let mut active = vec![false; nc];
        let s = self.strides();
        let n = self.len();
        for idx in 0..n {
            if !self.active[idx] {
                continue;
            }
            let c = coords(self.dims, idx);
            let ci = self.coarse_index(cd, idx);
            active[ci] = true;
            diag[ci] += self.diag[idx];
            for a in 0..3 {
                if idx + s[a] >= n {
                    continue;
                }
                let g = self.off[a][idx];
                if g == T::zero() {
                    continue;
                }
                if c[a].is_multiple_of(2) {
                    diag[ci] -= g + g;
                } else {
                    off[a][ci] += g;
                }
            }
        }
        for (d, &act) in diag.iter_mut().zip(&active) {
            if !act {
                *d = T::one();
            }
        }
        Level { dims: cd, diag, off, active }
    }
}

fn coords(dims: [usize; 3], idx: usize) -> [usize; 3] {
    let i = idx % dims[0];
    let rest = idx / dims[0];
    [i, rest % dims[1], rest / dims[1]]
}

/// Dense Cholesky factor of the coarsest level.
struct DenseCholesky {
    n: usize,
    l: Vec<f64>,
}

impl DenseCholesky {
    fn new<T: Real>(level: &Level<T>) -> Option<Self> {
        let n = level.len();
        let mut a = vec![0.0f64; n * n];
        for i in 0..n {
            a[i * n + i] = level.diag[i].f64();
        }
        for axis in 0..3 {
            let s = level.stride(axis);
            for i in 0..n.saturating_sub(s) {
                let g = level.off[axis][i].f64();
                a[i * n + i + s] -= g;
                a[(i + s) * n + i] -= g;
            }
        }
        for j in 0..n {
            let mut d = a[j * n + j];
            for k in 0..j {
                d -= a[j * n + k] * a[j * n + k];
            }
            if !(d > 0.0) {
                return None;
            }
            let d = d.sqrt();
            a[j * n + j] = d;
            for i in j + 1..n {
                let mut v = a[i * n + j];
                for k in 0..j {
                    v -= a[i * n + k] * a[j * n + k];
                }
                a[i * n + j] = v / d;
            }
        }
        Some(Self { n, l: a })
    }

    fn solve<T: Real>(&self, b: &[T], x: &mut [T]) {
        let n = self.n;
        let mut y: Vec<f64> = b.iter().map(|v| v.f64()).collect();
        for i in 0..n {
            let mut v = y[i];
            for k in 0..i {
                v -= self.l[i * n + k] * y[k];
            }
            y[i] = v / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut v = y[i];
            for k in i + 1..n {
                v -= self.l[k * n + i] * y[k];
            }
            y[i] = v / self.l[i * n + i];
        }
        for (xi, yi) in x.iter_mut().zip(y) {
            *xi = T::of(yi);
        }
    }
}

/// Multilevel preconditioner built from one band system.
pub struct Multigrid<T> {
    levels: Vec<Level<T>>,
    coarse: Option<DenseCholesky>,
}

impl<T: Real> Multigrid<T> {
    pub fn new(sys: &BandSystem<T>) -> Self {
        let n = sys.len();
        let mut active = vec![false; n];
        for axis in 0..3 {
            let s = sys.stride(axis);
            for i in 0..n.saturating_sub(s) {
                if sys.off[axis][i] != T::zero() {
                    active[i] = true;
                    active[i + s] = true;
                }
            }
        }
        let mut levels = vec![Level {
            dims: sys.dims,
            diag: sys.diag.clone(),
            off: sys.off.clone(),
            active,
        }];
        loop {
            let last = levels.last().expect("at least one level");
            if last.len() <= COARSEST_CELLS || last.dims.iter().all(|&d| d == 1) {
                break;
            }
            let next = last.coarsen();
            levels.push(next);
        }
        let coarse = DenseCholesky::new(levels.last().expect("at least one level"));
        if coarse.is_none() {
            log::warn!("coarsest multigrid level is not positive definite; smoothing only");
        }
        Self { levels, coarse }
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    fn cycle(&self, depth: usize, b: &[T], x: &mut [T]) {
        let level = &self.levels[depth];
        if depth + 1 == self.levels.len() {
            match &self.coarse {
                Some(chol) => chol.solve(b, x),
                None => {
                    x.iter_mut().for_each(|v| *v = T::zero());
                    level.forward_gs(b, x);
                    level.backward_gs(b, x);
                }
            }
            return;
        }
        x.iter_mut().for_each(|v| *v = T::zero());
        level.forward_gs(b, x);

        let mut r = vec![T::zero(); level.len()];
        level.residual(b, x, &mut r);
        let coarse = &self.levels[depth + 1];
        let mut rc = vec![T::zero(); coarse.len()];
        for idx in 0..level.len() {
            if level.active[idx] {
                rc[level.coarse_index(coarse.dims, idx)] += r[idx];
            }
        }
        let mut xc = vec![T::zero(); coarse.len()];
        self.cycle(depth + 1, &rc, &mut xc);
        let scale = T::of(COARSE_SCALE);
        for idx in 0..level.len() {
            if level.active[idx] {
                x[idx] += scale * xc[level.coarse_index(coarse.dims, idx)];
            }
        }

        level.backward_gs(b, x);
    }
}

impl<T: Real> Preconditioner<T> for Multigrid<T> {
    fn apply(&self, r: &[T], z: &mut [T]) {
        self.cycle(0, r, z);
    }
}
