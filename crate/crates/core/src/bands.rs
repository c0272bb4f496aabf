//! Octave bands and per-band spectra.

use std::ops::{Add, Index, IndexMut, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::num::Real;

/// Number of octave bands carried by every spectrum.
pub const BAND_COUNT: usize = 6;

/// The fixed octave-band set, 125 Hz to 4 kHz.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OctaveBands;

impl OctaveBands {
    pub const CENTERS_HZ: [f64; BAND_COUNT] = [125.0, 250.0, 500.0, 1000.0, 2000.0, 4000.0];

    pub fn centers() -> &'static [f64; BAND_COUNT] {
        &Self::CENTERS_HZ
    }

    /// Short column label, e.g. `125` or `4000`.
    pub fn label(band: usize) -> String {
        format!("{}", Self::CENTERS_HZ[band] as u32)
    }

    pub fn index_of(center_hz: f64) -> Option<usize> {
        Self::CENTERS_HZ.iter().position(|&c| (c - center_hz).abs() < 1e-9)
    }
}

/// One value per octave band. Units depend on the use site (α, dB, W, J/m³).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandSpectrum<T = f64>(pub [T; BAND_COUNT]);

impl<T: Real> BandSpectrum<T> {
    /// Builds a spectrum, rejecting non-finite values.
    pub fn new(values: [T; BAND_COUNT]) -> Result<Self> {
        if let Some(b) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSpectrum(format!(
                "band {} Hz is not finite",
                OctaveBands::label(b)
            )));
        }
        Ok(Self(values))
    }

    pub fn from_slice(values: &[T]) -> Result<Self> {
        let arr: [T; BAND_COUNT] = values.try_into().map_err(|_| {
            Error::InvalidSpectrum(format!(
                "expected {BAND_COUNT} band values, got {}",
                values.len()
            ))
        })?;
        Self::new(arr)
    }

    pub fn splat(v: T) -> Self {
        Self([v; BAND_COUNT])
    }

    pub fn zeros() -> Self {
        Self::splat(T::zero())
    }

    pub fn values(&self) -> &[T; BAND_COUNT] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = T> + '_ {
        self.0.iter().copied()
    }

    pub fn map<U, F: FnMut(T) -> U>(&self, f: F) -> BandSpectrum<U> {
        BandSpectrum(self.0.map(f))
    }

    pub fn zip_with<F: FnMut(T, T) -> T>(&self, other: &Self, mut f: F) -> Self {
        let mut out = self.0;
        for (o, &b) in out.iter_mut().zip(other.0.iter()) {
            *o = f(*o, b);
        }
        Self(out)
    }

    pub fn cast<U: Real>(&self) -> BandSpectrum<U> {
        self.map(|v| U::of(v.f64()))
    }

    /// Energetic sum of band levels: `10·log10(Σ 10^(L/10))`.
    pub fn band_sum_db(&self) -> T {
        band_sum_db(self)
    }

    pub fn max(&self) -> T {
        self.iter().fold(T::neg_infinity(), T::max)
    }

    pub fn min(&self) -> T {
        self.iter().fold(T::infinity(), T::min)
    }
}

/// Energetic (power) sum of decibel levels over the six bands.
///
/// Bands at `-inf` contribute nothing. The sum is taken relative to the
/// loudest band so very large levels do not overflow.
pub fn band_sum_db<T: Real>(levels: &BandSpectrum<T>) -> T {
    let peak = levels.max();
    if peak == T::neg_infinity() {
        return peak;
    }
    let ten = T::of(10.0);
    let acc: T = levels
        .iter()
        .map(|l| ten.powf((l - peak) / ten))
        .sum();
    peak + ten * acc.log10()
}

impl<T> Index<usize> for BandSpectrum<T> {
    type Output = T;
    fn index(&self, band: usize) -> &T {
        &self.0[band]
    }
}

impl<T> IndexMut<usize> for BandSpectrum<T> {
    fn index_mut(&mut self, band: usize) -> &mut T {
        &mut self.0[band]
    }
}

impl<T: Real> Add for BandSpectrum<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.zip_with(&rhs, |a, b| a + b)
    }
}

impl<T: Real> Sub for BandSpectrum<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.zip_with(&rhs, |a, b| a - b)
    }
}

impl<T: Real> Serialize for BandSpectrum<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<f64> = self.0.iter().map(|x| x.f64()).collect();
        v.serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for BandSpectrum<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        let v: Vec<T> = v.into_iter().map(T::of).collect();
        Self::from_slice(&v).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centers_double() {
        let c = OctaveBands::centers();
        assert_eq!(c.len(), 6);
        for w in c.windows(2) {
            assert_eq!(w[1], 2.0 * w[0]);
        }
    }

    #[test]
    fn single_contributor() {
        let s = BandSpectrum([60.0, f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY]);
        assert!((band_sum_db(&s) - 60.0).abs() < 1e-12);
    }

    #[test]
    fn two_equal_bands() {
        let mut s = BandSpectrum::splat(f64::NEG_INFINITY);
        s[0] = 60.0;
        s[3] = 60.0;
        assert!((band_sum_db(&s) - 63.0103).abs() < 1e-4);
    }

    #[test]
    fn six_equal_bands() {
        let s = BandSpectrum::splat(60.0f64);
        assert!((band_sum_db(&s) - 67.7815).abs() < 1e-4);
        assert!((band_sum_db(&s) - (60.0 + 10.0 * 6f64.log10())).abs() < 1e-9);
    }

    #[test]
    fn rejects_non_finite_and_wrong_length() {
        assert!(BandSpectrum::<f64>::new([0.0, f64::NAN, 0.0, 0.0, 0.0, 0.0]).is_err());
        assert!(BandSpectrum::<f64>::from_slice(&[1.0; 5]).is_err());
        let r: std::result::Result<BandSpectrum<f64>, _> = serde_json::from_str("[1,2,3]");
        assert!(r.is_err());
    }

    #[test]
    fn f32_band_sum() {
        let s = BandSpectrum::<f32>::splat(40.0);
        assert!((s.band_sum_db() - 47.7815).abs() < 1e-3);
    }
}
