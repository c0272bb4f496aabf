//! Surface materials: per-band absorption and optional transmission loss.
//!
//! The built-in database covers the blind's indoor/outdoor finishes and the
//! low/high insulation and absorption variants. Partition-only constructions
//! (`hardboard`, `single_stud_resilient_channel_wall`) carry no tabulated
//! absorption and are stored with α = 0; the faces they build take their α
//! from the lining materials.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::acoustics::transmission_coefficient;
use crate::bands::{BandSpectrum, OctaveBands};
use crate::error::{Error, Result};

const BUILTIN_JSON: &str = include_str!("../fixtures/materials.json");

#[derive(Debug, Clone, PartialEq)]
pub struct Material {
    pub name: String,
    pub alpha: BandSpectrum,
    pub tl_db: Option<BandSpectrum>,
}

/// On-disk form of a material; the name is the map key.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaterialRecord {
    alpha: BandSpectrum,
    tl_db: Option<BandSpectrum>,
}

impl Material {
    /// Validates a material, clamping α values above 1 with a warning.
    pub fn new(name: impl Into<String>, alpha: BandSpectrum, tl_db: Option<BandSpectrum>) -> Result<Self> {
        Self::build(name.into(), alpha, tl_db, log::Level::Warn)
    }

    fn build(name: String, mut alpha: BandSpectrum, tl_db: Option<BandSpectrum>, clamp_level: log::Level) -> Result<Self> {
        let invalid = |reason: String| Error::InvalidMaterial { name: name.clone(), reason };
        for b in 0..alpha.0.len() {
            let a = alpha[b];
            if a < 0.0 {
                return Err(invalid(format!("alpha {a} < 0 at {} Hz", OctaveBands::label(b))));
            }
            if a > 1.0 {
                log::log!(
                    clamp_level,
                    "material `{name}`: alpha {a} at {} Hz exceeds 1, clamped to 1.0",
                    OctaveBands::label(b)
                );
                alpha[b] = 1.0;
            }
        }
        if let Some(tl) = &tl_db {
            for b in 0..tl.0.len() {
                let tau = transmission_coefficient(tl[b]).map_err(|e| invalid(e.to_string()))?;
                if alpha[b] + tau > 1.0 + 1e-12 {
                    return Err(invalid(format!(
                        "absorbed + transmitted fraction {:.4} exceeds 1 at {} Hz",
                        alpha[b] + tau,
                        OctaveBands::label(b)
                    )));
                }
            }
        }
        Ok(Self { name, alpha, tl_db })
    }

    /// Per-band transmission coefficient; zero for materials without TL data.
    pub fn tau(&self) -> BandSpectrum {
        match &self.tl_db {
            Some(tl) => tl.map(|t| transmission_coefficient(t).expect("validated on construction")),
            None => BandSpectrum::zeros(),
        }
    }
}

/// Name-indexed material collection.
#[derive(Debug, Clone, Default)]
pub struct MaterialDb {
    materials: BTreeMap<String, Material>,
}

impl MaterialDb {
    /// The bundled table. Its known clamps are logged at info level.
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_JSON, log::Level::Info).expect("built-in material table is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::parse(text, log::Level::Warn)
    }

    fn parse(text: &str, clamp_level: log::Level) -> Result<Self> {
        let records: BTreeMap<String, MaterialRecord> = serde_json::from_str(text)?;
        let mut db = Self::default();
        for (name, rec) in records {
            db.register(Material::build(name, rec.alpha, rec.tl_db, clamp_level)?);
        }
        Ok(db)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        let records: BTreeMap<&str, MaterialRecord> = self
            .materials
            .iter()
            .map(|(k, m)| {
                (
                    k.as_str(),
                    MaterialRecord { alpha: m.alpha, tl_db: m.tl_db },
                )
            })
            .collect();
        Ok(serde_json::to_string_pretty(&records)?)
    }

    /// Adds or replaces a material.
    pub fn register(&mut self, material: Material) {
        self.materials.insert(material.name.clone(), material);
    }

    /// Merges another database on top of this one.
    pub fn extend(&mut self, other: MaterialDb) {
        self.materials.extend(other.materials);
    }

    pub fn lookup(&self, name: &str) -> Result<&Material> {
        self.materials.get(name).ok_or_else(|| Error::UnknownMaterial {
            name: name.to_string(),
            available: self.names().map(str::to_string).collect(),
        })
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.materials.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Material> {
        self.materials.values()
    }

    pub fn len(&self) -> usize {
        self.materials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.materials.is_empty()
    }
}

/// Looks a material up in the built-in database.
pub fn material_lookup(name: &str) -> Result<Material> {
    MaterialDb::builtin().lookup(name).cloned()
}
