//! The fourteen SS/MS scenario presets.
//!
//! Each preset combines a blind size (small: 2.5 × 3 × 2.7 m with four
//! windows and two talkers, medium: 2.5 × 6 × 2.7 m with eight windows and
//! four talkers) with a window state, an insulation variant, an absorption
//! variant and a vocal effort.
//!
//! Layout, in scene coordinates (x points away from the window façade):
//!
//! - outdoor box `[0, 35] × [0, 15] × [0, 10]`
//! - shell `x ∈ [0.5, 3.0]`, centred on `y = 7.5`, resting on `z = 0`
//! - windows 0.5 × 0.4 m on the `x = 3.0` façade, sill at 1.0 m
//! - door 0.9 × 2.0 m on the `y = min` side wall
//! - bench + people box against the back wall
//! - talkers 1.0 m high, 0.5 m behind the façade, in front of every other window
//! - receiver line from 1.5 m in front of the façade, 0.2 m high, 30 m long

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::Deserialize;

use super::{
    AxisBox, BlindSpec, DoorSpec, FaceRect, OccupancySpec, OpenWindowModel, SceneSpec, ShellFace,
    WindowSpec, WindowState,
};
use crate::acoustics::{AirProperties, Radiation, SourceSpec};
use crate::analysis::ReceiverLine;
use crate::bands::{BandSpectrum, BAND_COUNT};
use crate::error::Error;

const SPEECH_JSON: &str = include_str!("../../fixtures/speech_spectra.json");
const BNL_JSON: &str = include_str!("../../fixtures/bnl_forest.json");

pub const DOMAIN_SIZE: [f64; 3] = [35.0, 15.0, 10.0];
const SHELL_X: [f64; 2] = [0.5, 3.0];
const SHELL_HEIGHT: f64 = 2.7;
const CENTER_Y: f64 = 7.5;
const WINDOW_U: [[f64; 2]; 4] = [[0.2, 0.7], [0.9, 1.4], [1.6, 2.1], [2.3, 2.8]];
const WINDOW_V: [f64; 2] = [1.0, 1.4];
const DOOR_U: [f64; 2] = [0.8, 1.7];
const DOOR_V: [f64; 2] = [0.0, 2.0];
const OCCUPANCY_DEPTH: f64 = 0.5;
const OCCUPANCY_HEIGHT: f64 = 1.2;
const SOURCE_HEIGHT: f64 = 1.0;
const SOURCE_SETBACK: f64 = 0.5;
const RECEIVER_OFFSET: f64 = 1.5;
const RECEIVER_HEIGHT: f64 = 0.2;
pub const DEFAULT_MESH_H: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BlindSize {
    Small,
    Medium,
}

impl BlindSize {
    pub fn width(self) -> f64 {
        match self {
            BlindSize::Small => 3.0,
            BlindSize::Medium => 6.0,
        }
    }

    pub fn window_count(self) -> usize {
        match self {
            BlindSize::Small => 4,
            BlindSize::Medium => 8,
        }
    }

    pub fn talkers(self) -> usize {
        self.window_count() / 2
    }

    fn bench_length(self) -> f64 {
        match self {
            BlindSize::Small => 2.0,
            BlindSize::Medium => 4.0,
        }
    }

    fn prefix(self) -> &'static str {
        match self {
            BlindSize::Small => "SS",
            BlindSize::Medium => "MS",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpeechClass {
    Soft,
    Normal,
    Loud,
}

impl SpeechClass {
    pub fn overall_db(self) -> f64 {
        speech_table().get(self).overall_db
    }
}

#[derive(Deserialize)]
struct SpeechEntry {
    overall_db: f64,
    shape_db: [f64; BAND_COUNT],
}

#[derive(Deserialize)]
struct SpeechTable {
    classes: SpeechClasses,
}

#[derive(Deserialize)]
struct SpeechClasses {
    soft: SpeechEntry,
    normal: SpeechEntry,
    loud: SpeechEntry,
}

impl SpeechTable {
    fn get(&self, class: SpeechClass) -> &SpeechEntry {
        match class {
            SpeechClass::Soft => &self.classes.soft,
            SpeechClass::Normal => &self.classes.normal,
            SpeechClass::Loud => &self.classes.loud,
        }
    }
}

fn speech_table() -> &'static SpeechTable {
    static TABLE: OnceLock<SpeechTable> = OnceLock::new();
    TABLE.get_or_init(|| serde_json::from_str(SPEECH_JSON).expect("speech fixture is valid"))
}

/// Per-band SPL at 1 m of one talker, normalized so the band sum equals the
/// class's overall level.
pub fn speech_spectrum(class: SpeechClass) -> BandSpectrum {
    let entry = speech_table().get(class);
    let shape = BandSpectrum(entry.shape_db);
    let offset = entry.overall_db - shape.band_sum_db();
    shape.map(|l| l + offset)
}

#[derive(Deserialize)]
struct BnlFixture {
    bnl_db: [f64; BAND_COUNT],
}

/// Forest background-noise spectrum used by the presets.
pub fn reference_bnl() -> BandSpectrum {
    static BNL: OnceLock<BandSpectrum> = OnceLock::new();
    *BNL.get_or_init(|| {
        let f: BnlFixture = serde_json::from_str(BNL_JSON).expect("BNL fixture is valid");
        BandSpectrum(f.bnl_db)
    })
}

/// Table row of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScenarioVariables {
    pub windows_open: bool,
    pub high_tl: bool,
    pub high_ac: bool,
    pub speech: SpeechClass,
}

/// One of `SS01..SS07`, `MS01..MS07`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ScenarioId {
    size: BlindSize,
    number: u8,
}

impl ScenarioId {
    pub fn new(size: BlindSize, number: u8) -> Option<Self> {
        (1..=7).contains(&number).then_some(Self { size, number })
    }

    /// All fourteen scenarios, SS01..SS07 then MS01..MS07.
    pub fn all() -> Vec<ScenarioId> {
        [BlindSize::Small, BlindSize::Medium]
            .into_iter()
            .flat_map(|size| (1..=7).map(move |number| ScenarioId { size, number }))
            .collect()
    }

    pub fn size(self) -> BlindSize {
        self.size
    }

    pub fn number(self) -> u8 {
        self.number
    }

    /// Same analysis number on the other blind size.
    pub fn counterpart(self) -> ScenarioId {
        let size = match self.size {
            BlindSize::Small => BlindSize::Medium,
            BlindSize::Medium => BlindSize::Small,
        };
        ScenarioId { size, number: self.number }
    }

    pub fn variables(self) -> ScenarioVariables {
        let (windows_open, high_tl, high_ac, speech) = match self.number {
            1 => (true, false, false, SpeechClass::Loud),
            2 => (true, false, false, SpeechClass::Normal),
            3 => (true, false, false, SpeechClass::Soft),
            4 => (false, false, false, SpeechClass::Loud),
            5 => (false, false, true, SpeechClass::Loud),
            6 => (false, true, false, SpeechClass::Loud),
            7 => (false, true, true, SpeechClass::Loud),
            _ => unreachable!("number validated on construction"),
        };
        ScenarioVariables { windows_open, high_tl, high_ac, speech }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:02}", self.size.prefix(), self.number)
    }
}

impl FromStr for ScenarioId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let upper = s.trim().to_ascii_uppercase();
        let size = match upper.get(..2) {
            Some("SS") => BlindSize::Small,
            Some("MS") => BlindSize::Medium,
            _ => return Err(Error::UnknownScenario(s.to_string())),
        };
        let number: u8 = upper
            .get(2..)
            .filter(|n| n.len() == 2)
            .and_then(|n| n.parse().ok())
            .ok_or_else(|| Error::UnknownScenario(s.to_string()))?;
        ScenarioId::new(size, number).ok_or_else(|| Error::UnknownScenario(s.to_string()))
    }
}

/// Builds the full scene for a preset.
pub fn build_scenario(id: ScenarioId) -> SceneSpec {
    let vars = id.variables();
    let size = id.size();
    let width = size.width();
    let y0 = CENTER_Y - 0.5 * width;
    let shell = AxisBox {
        min: [SHELL_X[0], y0, 0.0],
        max: [SHELL_X[1], y0 + width, SHELL_HEIGHT],
    };

    let (wall_tl, glass, door) = if vars.high_tl {
        ("single_stud_resilient_channel_wall", "heavy_glass", "solid_timber_door")
    } else {
        ("hardboard", "ordinary_glass", "hollow_core_door")
    };
    let lining = if vars.high_ac { "perforated_wood" } else { "unperforated_wood" };
    let state = if vars.windows_open { WindowState::Open } else { WindowState::Closed };

    let window_u: Vec<[f64; 2]> = (0..size.window_count())
        .map(|i| {
            let base = WINDOW_U[i % 4];
            let shift = 3.0 * (i / 4) as f64;
            [base[0] + shift, base[1] + shift]
        })
        .collect();
    let windows = window_u
        .iter()
        .map(|&u| WindowSpec {
            face: ShellFace::XMax,
            rect: FaceRect { u, v: WINDOW_V },
            state,
            material: glass.to_string(),
        })
        .collect();

    let bench = size.bench_length();
    let occupancy = OccupancySpec {
        region: AxisBox {
            min: [SHELL_X[0], CENTER_Y - 0.5 * bench, 0.0],
            max: [SHELL_X[0] + OCCUPANCY_DEPTH, CENTER_Y + 0.5 * bench, OCCUPANCY_HEIGHT],
        },
        material: "wooden_bench_person".to_string(),
    };

    let blind = BlindSpec {
        shell,
        windows,
        door: Some(DoorSpec {
            face: ShellFace::YMin,
            rect: FaceRect { u: DOOR_U, v: DOOR_V },
            material: door.to_string(),
        }),
        wall_indoor_material: lining.to_string(),
        wall_outdoor_material: "chipboard_mineral_wool".to_string(),
        wall_tl_material: wall_tl.to_string(),
        ceiling_indoor_material: lining.to_string(),
        ceiling_outdoor_material: "chipboard_mineral_wool".to_string(),
        ceiling_tl_material: wall_tl.to_string(),
        floor_material: "linoleum_on_concrete".to_string(),
        occupancy: Some(occupancy),
    };

    let level = speech_spectrum(vars.speech);
    let sources = window_u
        .iter()
        .step_by(2)
        .map(|u| {
            let y = y0 + 0.5 * (u[0] + u[1]);
            SourceSpec::new([SHELL_X[1] - SOURCE_SETBACK, y, SOURCE_HEIGHT], level)
        })
        .collect();

    SceneSpec {
        name: Some(id.to_string()),
        domain: AxisBox { min: [0.0; 3], max: DOMAIN_SIZE },
        ground_material: "soil_vegetation".to_string(),
        outer_boundary_alpha: BandSpectrum::splat(1.0),
        blind: Some(blind),
        sources,
        bnl: reference_bnl(),
        mesh_h: DEFAULT_MESH_H,
        receiver: ReceiverLine {
            start: [SHELL_X[1] + RECEIVER_OFFSET, CENTER_Y, RECEIVER_HEIGHT],
            direction: [1.0, 0.0, 0.0],
            length: 30.0,
            step: 0.5,
        },
        air: AirProperties::default(),
        open_window: OpenWindowModel::Aperture,
        radiation: Radiation::Spherical,
    }
}
