//! Declarative scene description, scenario presets and voxelization.

mod presets;
mod voxel;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use presets::{
    build_scenario, reference_bnl, speech_spectrum, BlindSize, ScenarioId, ScenarioVariables,
    SpeechClass,
};
pub use voxel::{
    fluid_components, subdomain_stats, voxelize, Axis, CellClass, FaceGroup, FaceKind, FaceSet, FaceTag, Surface,
    SubdomainStats, VoxelGrid, EXTERIOR, INTERIOR, NO_SUBDOMAIN,
};

use crate::acoustics::{AirProperties, Radiation, SourceSpec};
use crate::analysis::ReceiverLine;
use crate::bands::BandSpectrum;
use crate::error::{Error, Result};
use crate::materials::MaterialDb;

pub type Point3 = [f64; 3];

const GEOM_EPS: f64 = 1e-9;

/// Axis-aligned box, `min < max` componentwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisBox {
    pub min: Point3,
    pub max: Point3,
}

impl AxisBox {
    pub fn new(min: Point3, max: Point3) -> Result<Self> {
        let b = Self { min, max };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        for a in 0..3 {
            if !(self.min[a] < self.max[a]) || !self.min[a].is_finite() || !self.max[a].is_finite() {
                return Err(Error::InvalidScene(format!(
                    "box min {:?} must be below max {:?} on every axis",
                    self.min, self.max
                )));
            }
        }
        Ok(())
    }

    pub fn size(&self) -> Point3 {
        [0, 1, 2].map(|a| self.max[a] - self.min[a])
    }

    pub fn volume(&self) -> f64 {
        let s = self.size();
        s[0] * s[1] * s[2]
    }

    pub fn surface_area(&self) -> f64 {
        let s = self.size();
        2.0 * (s[0] * s[1] + s[1] * s[2] + s[0] * s[2])
    }

    /// Closed containment with a small tolerance.
    pub fn contains(&self, p: Point3) -> bool {
        (0..3).all(|a| p[a] >= self.min[a] - GEOM_EPS && p[a] <= self.max[a] + GEOM_EPS)
    }

    /// Open containment: the point is away from every face.
    pub fn contains_strictly(&self, p: Point3) -> bool {
        (0..3).all(|a| p[a] > self.min[a] + GEOM_EPS && p[a] < self.max[a] - GEOM_EPS)
    }

    pub fn contains_box(&self, other: &AxisBox) -> bool {
        self.contains(other.min) && self.contains(other.max)
    }

    pub fn center(&self) -> Point3 {
        [0, 1, 2].map(|a| 0.5 * (self.min[a] + self.max[a]))
    }
}

/// Vertical face of the blind shell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShellFace {
    XMin,
    XMax,
    YMin,
    YMax,
}

impl ShellFace {
    /// Axis normal to the face.
    pub fn normal_axis(self) -> usize {
        match self {
            ShellFace::XMin | ShellFace::XMax => 0,
            ShellFace::YMin | ShellFace::YMax => 1,
        }
    }

    /// Horizontal in-plane axis; `v` is always height.
    pub fn u_axis(self) -> usize {
        1 - self.normal_axis()
    }

    pub fn is_max(self) -> bool {
        matches!(self, ShellFace::XMax | ShellFace::YMax)
    }

    /// Outward unit normal.
    pub fn outward_normal(self) -> Point3 {
        let mut n = [0.0; 3];
        n[self.normal_axis()] = if self.is_max() { 1.0 } else { -1.0 };
        n
    }
}

/// Rectangle on a shell face: `u` runs horizontally from the shell's min
/// corner, `v` is height above the shell floor. Meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaceRect {
    pub u: [f64; 2],
    pub v: [f64; 2],
}

impl FaceRect {
    pub fn short_edge(&self) -> f64 {
        (self.u[1] - self.u[0]).min(self.v[1] - self.v[0])
    }

    pub fn area(&self) -> f64 {
        (self.u[1] - self.u[0]) * (self.v[1] - self.v[0])
    }

    fn overlaps(&self, other: &FaceRect) -> bool {
        self.u[0] < other.u[1] - GEOM_EPS
            && other.u[0] < self.u[1] - GEOM_EPS
            && self.v[0] < other.v[1] - GEOM_EPS
            && other.v[0] < self.v[1] - GEOM_EPS
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowState {
    Open,
    Closed,
}

/// How an open window couples the blind to the outdoors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpenWindowModel {
    /// Energy density is continuous across the opening.
    #[default]
    Aperture,
    /// The opening is a perfect absorber on both sides; nothing passes.
    Absorber,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    pub face: ShellFace,
    pub rect: FaceRect,
    pub state: WindowState,
    pub material: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoorSpec {
    pub face: ShellFace,
    pub rect: FaceRect,
    pub material: String,
}

/// Bench plus seated people, modelled as an absorbing solid box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OccupancySpec {
    pub region: AxisBox,
    pub material: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlindSpec {
    pub shell: AxisBox,
    pub windows: Vec<WindowSpec>,
    pub door: Option<DoorSpec>,
    pub wall_indoor_material: String,
    pub wall_outdoor_material: String,
    /// Construction whose TL applies to the walls.
    pub wall_tl_material: String,
    pub ceiling_indoor_material: String,
    pub ceiling_outdoor_material: String,
    pub ceiling_tl_material: String,
    pub floor_material: String,
    pub occupancy: Option<OccupancySpec>,
}

impl BlindSpec {
    /// Extent of a shell face in (u, v) coordinates.
    pub fn face_extent(&self, face: ShellFace) -> [f64; 2] {
        let s = self.shell.size();
        [s[face.u_axis()], s[2]]
    }

    /// Maps a face-local (u, v) to scene coordinates.
    pub fn face_point(&self, face: ShellFace, u: f64, v: f64) -> Point3 {
        let mut p = [0.0; 3];
        let n = face.normal_axis();
        p[n] = if face.is_max() { self.shell.max[n] } else { self.shell.min[n] };
        p[face.u_axis()] = self.shell.min[face.u_axis()] + u;
        p[2] = self.shell.min[2] + v;
        p
    }

    fn openings(&self) -> impl Iterator<Item = (ShellFace, &FaceRect, String)> {
        let windows = self
            .windows
            .iter()
            .enumerate()
            .map(|(i, w)| (w.face, &w.rect, format!("window {i}")));
        let door = self.door.iter().map(|d| (d.face, &d.rect, "door".to_string()));
        windows.chain(door)
    }

    fn validate(&self, db: &MaterialDb) -> Result<()> {
        self.shell.validate()?;
        let openings: Vec<_> = self.openings().collect();
        for (i, (face, rect, what)) in openings.iter().enumerate() {
            let ext = self.face_extent(*face);
            let ok = rect.u[0] >= -GEOM_EPS
                && rect.u[1] <= ext[0] + GEOM_EPS
                && rect.v[0] >= -GEOM_EPS
                && rect.v[1] <= ext[1] + GEOM_EPS
                && rect.u[0] < rect.u[1]
                && rect.v[0] < rect.v[1];
            if !ok {
                return Err(Error::InvalidScene(format!(
                    "{what} rectangle {rect:?} does not fit its {face:?} face ({} x {} m)",
                    ext[0], ext[1]
                )));
            }
            for (other_face, other, other_what) in &openings[i + 1..] {
                if other_face == face && rect.overlaps(other) {
                    return Err(Error::InvalidScene(format!("{what} overlaps {other_what}")));
                }
            }
        }
        for name in [
            &self.wall_indoor_material,
            &self.wall_outdoor_material,
            &self.wall_tl_material,
            &self.ceiling_indoor_material,
            &self.ceiling_outdoor_material,
            &self.ceiling_tl_material,
            &self.floor_material,
        ] {
            db.lookup(name)?;
        }
        for w in &self.windows {
            let m = db.lookup(&w.material)?;
            if w.state == WindowState::Closed && m.tl_db.is_none() {
                return Err(Error::InvalidScene(format!(
                    "closed window material `{}` has no transmission loss data",
                    w.material
                )));
            }
        }
        if let Some(d) = &self.door {
            if db.lookup(&d.material)?.tl_db.is_none() {
                return Err(Error::InvalidScene(format!(
                    "door material `{}` has no transmission loss data",
                    d.material
                )));
            }
        }
        for name in [&self.wall_tl_material, &self.ceiling_tl_material] {
            if db.lookup(name)?.tl_db.is_none() {
                return Err(Error::InvalidScene(format!(
                    "`{name}` is used for partition insulation but has no transmission loss data"
                )));
            }
        }
        if let Some(occ) = &self.occupancy {
            occ.region.validate()?;
            db.lookup(&occ.material)?;
            if !self.shell.contains_box(&occ.region) {
                return Err(Error::InvalidScene("occupancy box must lie inside the shell".into()));
            }
        }
        Ok(())
    }
}

/// Complete input for one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    #[serde(default)]
    pub name: Option<String>,
    pub domain: AxisBox,
    pub ground_material: String,
    #[serde(default = "default_hull_alpha")]
    pub outer_boundary_alpha: BandSpectrum,
    pub blind: Option<BlindSpec>,
    pub sources: Vec<SourceSpec>,
    /// Background noise level, dB per band.
    pub bnl: BandSpectrum,
    pub mesh_h: f64,
    pub receiver: ReceiverLine,
    #[serde(default)]
    pub air: AirProperties,
    #[serde(default)]
    pub open_window: OpenWindowModel,
    #[serde(default)]
    pub radiation: Radiation,
}

fn default_hull_alpha() -> BandSpectrum {
    BandSpectrum::splat(1.0)
}

impl SceneSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Checks every scene invariant against a material database.
    pub fn validate(&self, db: &MaterialDb) -> Result<()> {
        self.domain.validate()?;
        self.air.validate()?;
        if !(self.mesh_h > 0.0 && self.mesh_h.is_finite()) {
            return Err(Error::InvalidScene(format!("mesh_h must be positive, got {}", self.mesh_h)));
        }
        db.lookup(&self.ground_material)?;
        if self.outer_boundary_alpha.iter().any(|a| !(0.0..=1.0).contains(&a)) {
            return Err(Error::InvalidScene("outer_boundary_alpha must lie in [0, 1]".into()));
        }
        if let Some(blind) = &self.blind {
            blind.validate(db)?;
            let s = &blind.shell;
            let inside = (0..2).all(|a| s.min[a] > self.domain.min[a] + GEOM_EPS && s.max[a] < self.domain.max[a] - GEOM_EPS)
                && s.max[2] < self.domain.max[2] - GEOM_EPS;
            if !inside {
                return Err(Error::OutsideDomain("blind shell must lie strictly inside the domain".into()));
            }
            if (s.min[2] - self.domain.min[2]).abs() > GEOM_EPS {
                return Err(Error::InvalidScene("blind must rest on the ground plane".into()));
            }
        }
        for (i, src) in self.sources.iter().enumerate() {
            let p = src.position;
            match &self.blind {
                Some(blind) => {
                    if !blind.shell.contains_strictly(p) {
                        return Err(Error::InvalidScene(format!("source {i} at {p:?} is not inside the blind")));
                    }
                    if let Some(occ) = &blind.occupancy {
                        if occ.region.contains(p) {
                            return Err(Error::InvalidScene(format!("source {i} at {p:?} is inside the occupancy box")));
                        }
                    }
                }
                None => {
                    if !self.domain.contains_strictly(p) {
                        return Err(Error::OutsideDomain(format!("source {i} at {p:?}")));
                    }
                }
            }
        }
        self.receiver.validate()?;
        for (_, p) in self.receiver.points() {
            if !self.domain.contains(p) {
                return Err(Error::OutsideDomain(format!("receiver sample {p:?}")));
            }
        }
        Ok(())
    }
}
