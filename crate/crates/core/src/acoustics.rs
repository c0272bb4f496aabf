//! Decibel arithmetic and energy/pressure/power conversions.

use serde::{Deserialize, Serialize};

use crate::bands::BandSpectrum;
use crate::error::{Error, Result};
use crate::num::Real;

/// Reference RMS pressure, Pa.
pub const P_REF: f64 = 2e-5;

/// Energy densities below this are clamped before taking a logarithm.
pub const DEFAULT_ENERGY_FLOOR: f64 = 1e-20;

/// Propagation medium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AirProperties {
    /// Speed of sound, m/s.
    #[serde(default = "AirProperties::default_c")]
    pub c: f64,
    /// Density, kg/m³.
    #[serde(default = "AirProperties::default_rho")]
    pub rho: f64,
    /// Atmospheric energy attenuation per band, 1/m.
    #[serde(default = "BandSpectrum::zeros")]
    pub m: BandSpectrum,
}

impl AirProperties {
    fn default_c() -> f64 {
        343.0
    }

    fn default_rho() -> f64 {
        1.21
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidAir(format!("c must be positive, got {}", self.c)));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::InvalidAir(format!("rho must be positive, got {}", self.rho)));
        }
        if self.m.iter().any(|m| !(m >= 0.0)) {
            return Err(Error::InvalidAir("attenuation m must be >= 0".into()));
        }
        Ok(())
    }

    /// Characteristic impedance ρc.
    pub fn impedance(&self) -> f64 {
        self.rho * self.c
    }
}

impl Default for AirProperties {
    fn default() -> Self {
        Self {
            c: Self::default_c(),
            rho: Self::default_rho(),
            m: BandSpectrum::zeros(),
        }
    }
}

/// Solid angle assumed when converting a level at 1 m into radiated power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Radiation {
    #[default]
    Spherical,
    Hemispherical,
}

impl Radiation {
    pub fn solid_angle(self) -> f64 {
        match self {
            Radiation::Spherical => 4.0 * std::f64::consts::PI,
            Radiation::Hemispherical => 2.0 * std::f64::consts::PI,
        }
    }
}

/// `τ = 10^(-TL/10)`.
pub fn transmission_coefficient<T: Real>(tl_db: T) -> Result<T> {
    if !(tl_db >= T::zero()) {
        return Err(Error::NegativeTransmissionLoss(tl_db.f64()));
    }
    Ok(T::of(10.0).powf(-tl_db / T::of(10.0)))
}

/// Diffuse-field SPL of an energy density, using `p² = w·ρ·c²`.
pub fn spl_from_energy_density<T: Real>(w: T, air: &AirProperties) -> T {
    spl_from_energy_density_with_floor(w, air, T::of(DEFAULT_ENERGY_FLOOR))
}

pub fn spl_from_energy_density_with_floor<T: Real>(w: T, air: &AirProperties, floor: T) -> T {
    // NaN also takes the floor
    let w = if w >= floor { w } else { floor };
    let scale = T::of(air.rho * air.c * air.c / (P_REF * P_REF));
    T::of(10.0) * (w * scale).log10()
}

/// Inverse of [`spl_from_energy_density`].
pub fn energy_density_from_spl<T: Real>(spl_db: T, air: &AirProperties) -> T {
    let scale = T::of(P_REF * P_REF / (air.rho * air.c * air.c));
    T::of(10.0).powf(spl_db / T::of(10.0)) * scale
}

/// Sound power that produces `level_db` at 1 m from a point source.
pub fn source_power_from_spl1m<T: Real>(level_db: T, air: &AirProperties, radiation: Radiation) -> T {
    let p2 = T::of(P_REF * P_REF) * T::of(10.0).powf(level_db / T::of(10.0));
    T::of(radiation.solid_angle()) * p2 / T::of(air.impedance())
}

/// An omnidirectional point source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    /// Position in scene coordinates, m.
    pub position: [f64; 3],
    /// Free-field SPL at 1 m per band, dB.
    pub level_at_1m: BandSpectrum,
}

impl SourceSpec {
    pub fn new(position: [f64; 3], level_at_1m: BandSpectrum) -> Self {
        Self { position, level_at_1m }
    }

    pub fn overall_db(&self) -> f64 {
        self.level_at_1m.band_sum_db()
    }

    /// Radiated power per band, W.
    pub fn power<T: Real>(&self, air: &AirProperties, radiation: Radiation) -> BandSpectrum<T> {
        self.level_at_1m
            .cast::<T>()
            .map(|l| source_power_from_spl1m(l, air, radiation))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau_examples() {
        assert_eq!(transmission_coefficient(0.0f64).unwrap(), 1.0);
        assert!((transmission_coefficient(10.0f64).unwrap() - 0.1).abs() < 1e-15);
        assert!((transmission_coefficient(29.0f64).unwrap() - 1.2589e-3).abs() < 1e-7);
        assert!(matches!(
            transmission_coefficient(-1.0f64),
            Err(Error::NegativeTransmissionLoss(_))
        ));
    }

    #[test]
    fn spl_reference_and_doubling() {
        let air = AirProperties::default();
        let w_ref = P_REF * P_REF / (air.rho * air.c * air.c);
        assert!(spl_from_energy_density(w_ref, &air).abs() < 1e-9);
        let a = spl_from_energy_density(3.7e-7f64, &air);
        let b = spl_from_energy_density(7.4e-7f64, &air);
        assert!((b - a - 3.0103).abs() < 1e-4);
        assert!((spl_from_energy_density(1e-6f64, &air) - 85.51).abs() < 0.005);
    }

    #[test]
    fn spl_floor_clamps() {
        let air = AirProperties::default();
        let floor = spl_from_energy_density(DEFAULT_ENERGY_FLOOR, &air);
        assert_eq!(spl_from_energy_density(0.0, &air), floor);
        assert_eq!(spl_from_energy_density(-1.0, &air), floor);
        assert_eq!(spl_from_energy_density(f64::NAN, &air), floor);
    }

    #[test]
    fn source_power_examples() {
        let air = AirProperties::default();
        let w0 = source_power_from_spl1m(0.0f64, &air, Radiation::Spherical);
        assert!((w0 - 1.211e-11).abs() < 1e-14);
        let loud = source_power_from_spl1m(73.8f64, &air, Radiation::Spherical);
        assert!((loud - 2.905e-4).abs() < 1e-7);
        let up = source_power_from_spl1m(83.8f64, &air, Radiation::Spherical);
        assert!((up / loud - 10.0).abs() < 1e-9);
        let hemi = source_power_from_spl1m(73.8f64, &air, Radiation::Hemispherical);
        assert!((hemi * 2.0 - loud).abs() < 1e-15);
    }

    #[test]
    fn air_validation() {
        assert!(AirProperties::default().validate().is_ok());
        let bad = AirProperties { c: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let mut bad = AirProperties::default();
        bad.m[2] = -1e-3;
        assert!(bad.validate().is_err());
    }
}
