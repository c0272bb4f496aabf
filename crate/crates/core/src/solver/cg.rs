//! Preconditioned conjugate gradients on a [`BandSystem`].

use crate::error::{Error, Result};
use crate::num::Real;

use super::system::BandSystem;

pub trait Preconditioner<T>: Sync {
    /// `z ≈ M⁻¹ r`. Must act as a fixed symmetric positive-definite operator.
    fn apply(&self, r: &[T], z: &mut [T]);
}

/// Diagonal (Jacobi) scaling.
pub struct Jacobi<T> {
    inv_diag: Vec<T>,
}

impl<T: Real> Jacobi<T> {
    pub fn new(sys: &BandSystem<T>) -> Self {
        Self {
            inv_diag: sys.diag.iter().map(|&d| T::one() / d).collect(),
        }
    }
}

impl<T: Real> Preconditioner<T> for Jacobi<T> {
    fn apply(&self, r: &[T], z: &mut [T]) {
        for ((zi, &ri), &di) in z.iter_mut().zip(r).zip(&self.inv_diag) {
            *zi = ri * di;
        }
    }
}

/// Sequential dot product accumulated in `f64`, so `f32` fields keep
/// usable reductions and results do not depend on thread count.
pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x.f64() * y.f64()).sum()
}

fn norm<T: Real>(a: &[T]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone)]
pub struct CgResult<T> {
    pub x: Vec<T>,
    pub iterations: usize,
    /// Final true relative residual `‖b - Mx‖ / ‖b‖`.
    pub residual: f64,
    /// Relative residual after every iteration.
    pub history: Vec<f64>,
}

/// Solves `M x = b` from a zero initial guess until `‖r‖ ≤ tol·‖b‖`.
pub fn pcg<T: Real>(
    sys: &BandSystem<T>,
    pre: &dyn Preconditioner<T>,
    tol: f64,
    max_iter: usize,
) -> Result<CgResult<T>> {
    let n = sys.len();
    let scale = norm(&sys.rhs);
    let mut x = vec![T::zero(); n];
    if scale == 0.0 {
        return Ok(CgResult { x, iterations: 0, residual: 0.0, history: Vec::new() });
    }
    // Unit-norm right-hand side: sources that differ only by a gain follow
    // the same iterates and stop at the same step.
    let inv = T::of(1.0 / scale);
    let b: Vec<T> = sys.rhs.iter().map(|&v| v * inv).collect();
    let b = &b;
    let b_norm = norm(b);

    let mut r = b.clone();
    let mut z = vec![T::zero(); n];
    let mut p = vec![T::zero(); n];
    let mut q = vec![T::zero(); n];
    let mut history = Vec::new();
    let mut iterations = 0;

    // Restart on the true residual if the recursive one drifted.
    loop {
        pre.apply(&r, &mut z);
        p.copy_from_slice(&z);
        let mut rz = dot(&r, &z);
        let mut rel = norm(&r) / b_norm;

        while rel > tol && iterations < max_iter {
            sys.apply(&p, &mut q);
            let pq = dot(&p, &q);
            if !(pq > 0.0) {
                return Err(Error::NonConvergence { band: Some(sys.band), iterations, residual: rel, history });
            }
            let alpha = T::of(rz / pq);
            for ((xi, ri), (&pi, &qi)) in x.iter_mut().zip(r.iter_mut()).zip(p.iter().zip(&q)) {
                *xi += alpha * pi;
                *ri -= alpha * qi;
            }
            pre.apply(&r, &mut z);
            let rz_next = dot(&r, &z);
            let beta = T::of(rz_next / rz);
            rz = rz_next;
            for (pi, &zi) in p.iter_mut().zip(&z) {
                *pi = zi + beta * *pi;
            }
            iterations += 1;
            rel = norm(&r) / b_norm;
            history.push(rel);
        }

        sys.apply(&x, &mut q);
        for ((ri, &bi), &qi) in r.iter_mut().zip(b).zip(&q) {
            *ri = bi - qi;
        }
        let true_rel = norm(&r) / b_norm;
        if true_rel <= tol {
            let s = T::of(scale);
            x.iter_mut().for_each(|v| *v = s * *v);
            return Ok(CgResult { x, iterations, residual: true_rel, history });
        }
        if iterations >= max_iter {
            return Err(Error::NonConvergence { band: Some(sys.band), iterations, residual: true_rel, history });
        }
    }
}
