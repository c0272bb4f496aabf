#![allow(dead_code)]

use blind_acoustics::acoustics::{AirProperties, Radiation, SourceSpec};
use blind_acoustics::analysis::ReceiverLine;
use blind_acoustics::bands::BandSpectrum;
use blind_acoustics::materials::{Material, MaterialDb};
use blind_acoustics::scene::{
    AxisBox, BlindSpec, DoorSpec, FaceRect, OpenWindowModel, SceneSpec, ShellFace, WindowSpec, WindowState,
};

pub const UNIFORM: &str = "test_uniform";

/// Built-in materials plus a uniform absorber named [`UNIFORM`].
pub fn db_with_uniform(alpha: f64) -> MaterialDb {
    let mut db = MaterialDb::builtin();
    db.register(Material::new(UNIFORM, BandSpectrum::splat(alpha), None).unwrap());
    db
}

/// Closed box with every face absorbing `alpha` ([`UNIFORM`] must be registered).
pub fn sealed_room(size: [f64; 3], alpha: f64, sources: Vec<SourceSpec>, h: f64) -> SceneSpec {
    SceneSpec {
        name: Some("room".into()),
        domain: AxisBox { min: [0.0; 3], max: size },
        ground_material: UNIFORM.into(),
        outer_boundary_alpha: BandSpectrum::splat(alpha),
        blind: None,
        sources,
        bnl: BandSpectrum::splat(0.0),
        mesh_h: h,
        receiver: ReceiverLine {
            start: [0.5 * size[0], 0.25 * size[1], 0.5 * size[2]],
            direction: [0.0, 1.0, 0.0],
            length: 0.5 * size[1],
            step: 0.25 * size[1],
        },
        air: AirProperties::default(),
        open_window: OpenWindowModel::Aperture,
        radiation: Radiation::Spherical,
    }
}

pub fn flat_source(position: [f64; 3], level: f64) -> SourceSpec {
    SourceSpec::new(position, BandSpectrum::splat(level))
}

/// 8 × 4 × 3 m domain with a 2 × 2 × 2 m blind; one window on +x and a door on -y.
pub fn small_scene(window: WindowState, high_tl: bool) -> SceneSpec {
    let (wall, glass, door) = if high_tl {
        ("single_stud_resilient_channel_wall", "heavy_glass", "solid_timber_door")
    } else {
        ("hardboard", "ordinary_glass", "hollow_core_door")
    };
    SceneSpec {
        name: Some("small".into()),
        domain: AxisBox { min: [0.0; 3], max: [8.0, 4.0, 3.0] },
        ground_material: "soil_vegetation".into(),
        outer_boundary_alpha: BandSpectrum::splat(1.0),
        blind: Some(BlindSpec {
            shell: AxisBox { min: [1.0, 1.0, 0.0], max: [3.0, 3.0, 2.0] },
            windows: vec![WindowSpec {
                face: ShellFace::XMax,
                rect: FaceRect { u: [0.5, 1.5], v: [1.0, 1.5] },
                state: window,
                material: glass.into(),
            }],
            door: Some(DoorSpec {
                face: ShellFace::YMin,
                rect: FaceRect { u: [0.5, 1.0], v: [0.0, 1.5] },
                material: door.into(),
            }),
            wall_indoor_material: "unperforated_wood".into(),
            wall_outdoor_material: "chipboard_mineral_wool".into(),
            wall_tl_material: wall.into(),
            ceiling_indoor_material: "unperforated_wood".into(),
            ceiling_outdoor_material: "chipboard_mineral_wool".into(),
            ceiling_tl_material: wall.into(),
            floor_material: "linoleum_on_concrete".into(),
            occupancy: None,
        }),
        sources: vec![flat_source([2.0, 2.0, 1.0], 70.0)],
        bnl: BandSpectrum::splat(20.0),
        mesh_h: 0.25,
        receiver: ReceiverLine {
            start: [4.0, 2.0, 0.2],
            direction: [1.0, 0.0, 0.0],
            length: 3.5,
            step: 0.5,
        },
        air: AirProperties::default(),
        open_window: OpenWindowModel::Aperture,
        radiation: Radiation::Spherical,
    }
}
