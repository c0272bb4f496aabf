//! Steady-state diffusion-equation model of sound leaking from a
//! photography blind into the surrounding forest.
//!
//! The numeric core is generic over [`Real`] (`f32` or `f64`); geometry and
//! material data are always `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod acoustics;
pub mod analysis;
pub mod bands;
pub mod error;
pub mod materials;
pub mod num;
pub mod reproduce;
pub mod run;
pub mod scene;
pub mod solver;

pub use error::{Error, Result};
pub use num::Real;

/// Band spectrum in double precision.
pub type Spectrum = bands::BandSpectrum<f64>;
pub type Field = solver::FieldSolution<f64>;
pub type Field32 = solver::FieldSolution<f32>;
pub type Profile = analysis::LineProfile<f64>;
pub type System = solver::BandSystem<f64>;
