use serde::{Deserialize, Serialize};

use crate::num::Real;

/// Wall exchange law turning an absorption coefficient into a Robin
/// coefficient on the energy density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryModel {
    #[default]
    Sabine,
    Eyring,
    Modified,
}

impl std::str::FromStr for BoundaryModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "sabine" => Ok(Self::Sabine),
            "eyring" => Ok(Self::Eyring),
            "modified" => Ok(Self::Modified),
            other => Err(format!("unknown boundary model `{other}`")),
        }
    }
}

/// Largest α fed to the Eyring law, which diverges at 1.
pub const EYRING_ALPHA_CAP: f64 = 0.9999;

/// Exchange coefficient `A_x(α)` in m/s.
///
/// - sabine: `cα/4`
/// - eyring: `-c·ln(1-α)/4`, α capped at 0.9999
/// - modified: `cα / (2(2-α))`
pub fn exchange_coefficient<T: Real>(alpha: T, c: T, model: BoundaryModel) -> T {
    let alpha = alpha.max(T::zero()).min(T::one());
    match model {
        BoundaryModel::Sabine => c * alpha / T::of(4.0),
        BoundaryModel::Eyring => {
            let a = alpha.min(T::of(EYRING_ALPHA_CAP));
            -c * (T::one() - a).ln() / T::of(4.0)
        }
        BoundaryModel::Modified => c * alpha / (T::of(2.0) * (T::of(2.0) - alpha)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rigid_wall() {
        for m in [BoundaryModel::Sabine, BoundaryModel::Eyring, BoundaryModel::Modified] {
            assert_eq!(exchange_coefficient(0.0f64, 343.0, m), 0.0);
        }
    }

    #[test]
    fn half_absorbing_values_and_ordering() {
        let s = exchange_coefficient(0.5f64, 343.0, BoundaryModel::Sabine);
        let e = exchange_coefficient(0.5f64, 343.0, BoundaryModel::Eyring);
        let m = exchange_coefficient(0.5f64, 343.0, BoundaryModel::Modified);
        assert!((s - 42.875).abs() < 1e-12);
        assert!((e - 59.44).abs() < 0.005);
        assert!((m - 57.17).abs() < 0.005);
        assert!(e > m && m > s);
    }

    #[test]
    fn eyring_is_finite_at_full_absorption() {
        let e = exchange_coefficient(1.0f64, 343.0, BoundaryModel::Eyring);
        assert!(e.is_finite());
        assert!((e - 343.0 * -(1.0f64 - 0.9999).ln() / 4.0).abs() < 1e-9);
    }

    #[test]
    fn f32_matches_f64() {
        let a = exchange_coefficient(0.3f32, 343.0, BoundaryModel::Modified) as f64;
        let b = exchange_coefficient(0.3f64, 343.0, BoundaryModel::Modified);
        assert!((a - b).abs() / b < 1e-6);
    }
}
