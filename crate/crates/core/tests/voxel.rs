mod common;

use blind_acoustics::acoustics::AirProperties;
use blind_acoustics::materials::MaterialDb;
use blind_acoustics::scene::{
    build_scenario, fluid_components, subdomain_stats, voxelize, CellClass, FaceGroup, FaceKind, FaceTag,
    OpenWindowModel, SceneSpec, WindowState, EXTERIOR, INTERIOR,
};
use blind_acoustics::Error;

use common::{db_with_uniform, flat_source, sealed_room, small_scene};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn ss_without_occupancy() -> SceneSpec {
    let mut scene = build_scenario("SS04".parse().unwrap());
    scene.blind.as_mut().unwrap().occupancy = None;
    scene
}

#[test]
fn small_blind_interior_statistics() {
    let db = MaterialDb::builtin();
    let (grid, faces) = voxelize(&ss_without_occupancy(), &db, 0.1).unwrap();
    let stats = subdomain_stats(&grid, &faces, &AirProperties::default()).unwrap();
    let inner = &stats[INTERIOR as usize];
    // 2.5 × 3 × 2.7 m shell.
    assert!(close(inner.volume, 20.25, 1e-9), "{}", inner.volume);
    assert!(close(inner.surface, 44.7, 1e-9), "{}", inner.surface);
    assert!(close(inner.mean_free_path, 1.8121, 1e-4));
    assert!(close(inner.diffusion, 207.18, 0.01));
}

#[test]
fn unit_cube_room_mean_free_path() {
    let db = db_with_uniform(0.2);
    let scene = sealed_room([1.0; 3], 0.2, vec![flat_source([0.5; 3], 60.0)], 0.25);
    let (grid, faces) = voxelize(&scene, &db, 0.25).unwrap();
    let stats = subdomain_stats(&grid, &faces, &AirProperties::default()).unwrap();
    assert_eq!(stats.len(), 1);
    assert!(close(stats[0].mean_free_path, 4.0 / 6.0, 1e-12));
}

#[test]
fn outdoor_subdomain_matches_analytic_tally() {
    let db = MaterialDb::builtin();
    let mut scene = ss_without_occupancy();
    scene.domain.max = [33.5, 15.0, 10.0];
    scene.receiver.length = 25.0;
    let analytic_v = 33.5 * 15.0 * 10.0 - 2.5 * 3.0 * 2.7;
    let hull = 2.0 * (33.5 * 15.0 + 33.5 * 10.0 + 15.0 * 10.0);
    let analytic_s = hull - 2.5 * 3.0 + (44.7 - 2.5 * 3.0);

    let (grid, faces) = voxelize(&scene, &db, 0.1).unwrap();
    let stats = subdomain_stats(&grid, &faces, &AirProperties::default()).unwrap();
    let out = &stats[EXTERIOR as usize];
    assert!(close(out.volume, analytic_v, 1e-6), "{}", out.volume);
    assert!(close(out.surface, analytic_s, 1e-6), "{}", out.surface);

    // At h = 0.25 the 2.7 m ceiling snaps to 2.75 m; the tally may differ by
    // one cell volume per boundary cell of the shell.
    let h = 0.25;
    let (grid, faces) = voxelize(&scene, &db, h).unwrap();
    let stats = subdomain_stats(&grid, &faces, &AirProperties::default()).unwrap();
    let out = &stats[EXTERIOR as usize];
    let shell_faces = (2.5 * 3.0 + 2.0 * (2.5 + 3.0) * 2.75) / (h * h);
    assert!(close(out.volume, analytic_v, shell_faces * h * h * h), "{}", out.volume);
    assert!(close(out.surface, analytic_s, 4.0 * (2.5 + 3.0) * h), "{}", out.surface);
}

#[test]
fn voxelization_is_conservative() {
    let db = MaterialDb::builtin();
    for id in ["SS01", "MS07"] {
        let scene = build_scenario(id.parse().unwrap());
        let (grid, _) = voxelize(&scene, &db, 0.25).unwrap();
        let total: f64 = (0..grid.len()).map(|_| grid.cell_volume()).sum();
        let exact = 35.0 * 15.0 * 10.0;
        assert!((total - exact).abs() <= grid.len() as f64 * f64::EPSILON * exact, "{id}: {total}");
    }
}

#[test]
fn occupancy_cells_are_solid() {
    let db = MaterialDb::builtin();
    let scene = build_scenario("SS04".parse().unwrap());
    let (grid, faces) = voxelize(&scene, &db, 0.1).unwrap();
    // 0.5 × 2.0 × 1.2 m bench box.
    assert_eq!(grid.count(CellClass::Solid), 1200);
    // Top plus three sides; the fourth side lies on the back wall.
    let exposed: f64 = (0.5 * 2.0 + 2.0 * 0.5 * 1.2 + 2.0 * 1.2) / 0.01;
    assert_eq!(faces.group_count(FaceGroup::Occupancy), exposed.round() as usize);
}

#[test]
fn window_and_door_face_counts() {
    let db = MaterialDb::builtin();
    let (_, open) = voxelize(&small_scene(WindowState::Open, false), &db, 0.25).unwrap();
    assert_eq!(open.aperture_count(), 8);
    assert_eq!(open.group_count(FaceGroup::Window), 0);
    assert_eq!(open.group_count(FaceGroup::Door), 12);

    let (_, closed) = voxelize(&small_scene(WindowState::Closed, false), &db, 0.25).unwrap();
    assert_eq!(closed.aperture_count(), 0);
    assert_eq!(closed.group_count(FaceGroup::Window), 8);
    // 2 × 2 m shell: 4 walls of 4 m², ceiling 4 m², minus window and door.
    let total_partition = (4.0 * 4.0 + 4.0) / 0.0625;
    assert_eq!(closed.partition_count(), total_partition as usize);
}

#[test]
fn absorber_mode_closes_the_opening() {
    let db = MaterialDb::builtin();
    let mut scene = small_scene(WindowState::Open, false);
    scene.open_window = OpenWindowModel::Absorber;
    let (grid, faces) = voxelize(&scene, &db, 0.25).unwrap();
    assert_eq!(faces.aperture_count(), 0);
    assert_eq!(faces.group_count(FaceGroup::Opening), 8);
    assert_eq!(fluid_components(&grid, &faces), 2);
    let opening = faces
        .surfaces()
        .iter()
        .find(|s| s.group() == FaceGroup::Opening)
        .unwrap();
    match opening {
        blind_acoustics::scene::Surface::Partition { alpha_neg, alpha_pos, tau, .. } => {
            assert!(alpha_neg.iter().chain(alpha_pos.iter()).all(|a| a == 1.0));
            assert!(tau.iter().all(|t| t == 0.0));
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn refinement_preserves_topology() {
    let db = MaterialDb::builtin();
    for (state, components) in [(WindowState::Open, 1), (WindowState::Closed, 2)] {
        let scene = small_scene(state, true);
        let (g1, f1) = voxelize(&scene, &db, 0.25).unwrap();
        let (g2, f2) = voxelize(&scene, &db, 0.125).unwrap();
        assert_eq!(fluid_components(&g1, &f1), components);
        assert_eq!(fluid_components(&g2, &f2), components);
        let a1 = f1.partition_count() as f64 * 0.25 * 0.25;
        let a2 = f2.partition_count() as f64 * 0.125 * 0.125;
        assert!(close(a1, a2, 1e-12), "{a1} vs {a2}");
    }

    // Snapped geometry: SS01 ceiling at 2.7 m on 0.25 m and 0.125 m grids.
    let scene = build_scenario("SS01".parse().unwrap());
    let (g1, f1) = voxelize(&scene, &db, 0.25).unwrap();
    let (g2, f2) = voxelize(&scene, &db, 0.125).unwrap();
    assert_eq!(fluid_components(&g1, &f1), fluid_components(&g2, &f2));
    let a1 = f1.partition_count() as f64 * 0.0625;
    let a2 = f2.partition_count() as f64 * 0.125 * 0.125;
    let perimeter = 4.0 * (2.5 + 3.0 + 2.7);
    assert!(close(a1, a2, 2.0 * 0.25 * perimeter), "{a1} vs {a2}");
}

#[test]
fn scene_without_blind_has_one_subdomain() {
    let db = db_with_uniform(0.3);
    let scene = sealed_room([2.0, 3.0, 1.5], 0.3, vec![flat_source([1.0, 1.0, 0.7], 60.0)], 0.25);
    let (grid, faces) = voxelize(&scene, &db, 0.25).unwrap();
    assert_eq!(grid.subdomain_count(), 1);
    assert_eq!(grid.count(CellClass::Exterior), grid.len());
    assert_eq!(faces.partition_count(), 0);
    assert_eq!(fluid_components(&grid, &faces), 1);
    for axis in 0..3 {
        for (n, tag) in faces.tags(axis).iter().enumerate() {
            let mut dims = grid.dims;
            dims[axis] += 1;
            let c = [n % dims[0], (n / dims[0]) % dims[1], n / (dims[0] * dims[1])];
            let on_hull = c[axis] == 0 || c[axis] == grid.dims[axis];
            match faces.kind(*tag) {
                FaceKind::Fluid => assert!(!on_hull),
                FaceKind::Surface(s) => {
                    assert!(on_hull);
                    let expect = if axis == 2 && c[2] == 0 { FaceGroup::Ground } else { FaceGroup::Hull };
                    assert_eq!(s.group(), expect);
                }
                other => panic!("unexpected {other:?}"),
            }
        }
    }
}

#[test]
fn points_on_grid_planes_belong_to_the_upper_cell() {
    let db = db_with_uniform(0.3);
    let scene = sealed_room([2.0; 3], 0.3, vec![flat_source([1.1; 3], 60.0)], 0.5);
    let (grid, _) = voxelize(&scene, &db, 0.5).unwrap();
    assert_eq!(grid.locate([0.5, 0.0, 0.0]), Some(grid.index(1, 0, 0)));
    assert_eq!(grid.locate([2.0, 2.0, 2.0]), Some(grid.index(3, 3, 3)));
    assert_eq!(grid.locate([2.1, 1.0, 1.0]), None);
    assert_eq!(grid.locate([-0.1, 1.0, 1.0]), None);
}

#[test]
fn narrow_opening_requires_refinement() {
    let db = MaterialDb::builtin();
    let scene = small_scene(WindowState::Open, false);
    match voxelize(&scene, &db, 0.6) {
        Err(Error::RefinementRequired { edge, h, .. }) => {
            assert!(close(edge, 0.5, 1e-12));
            assert!(close(h, 0.6, 1e-12));
        }
        other => panic!("expected RefinementRequired, got {other:?}"),
    }
}

#[test]
fn shell_snapped_onto_the_hull_is_rejected() {
    let db = MaterialDb::builtin();
    let mut scene = small_scene(WindowState::Closed, false);
    scene.blind.as_mut().unwrap().shell.min[0] = 0.1;
    scene.sources[0].position = [1.5, 2.0, 1.0];
    assert!(matches!(voxelize(&scene, &db, 0.25), Err(Error::OutsideDomain(_))));
}

#[test]
fn invalid_scenes_are_rejected() {
    let db = MaterialDb::builtin();

    let mut overlap = small_scene(WindowState::Closed, false);
    let mut second = overlap.blind.as_ref().unwrap().windows[0].clone();
    second.rect.u = [1.0, 1.8];
    overlap.blind.as_mut().unwrap().windows.push(second);
    assert!(matches!(voxelize(&overlap, &db, 0.25), Err(Error::InvalidScene(_))));

    let mut unknown = small_scene(WindowState::Closed, false);
    unknown.ground_material = "moss".into();
    assert!(matches!(voxelize(&unknown, &db, 0.25), Err(Error::UnknownMaterial { .. })));

    let mut outside = small_scene(WindowState::Closed, false);
    outside.sources[0].position = [5.0, 2.0, 1.0];
    assert!(matches!(voxelize(&outside, &db, 0.25), Err(Error::InvalidScene(_))));

    let mut no_tl = small_scene(WindowState::Closed, false);
    no_tl.blind.as_mut().unwrap().windows[0].material = "linoleum_on_concrete".into();
    assert!(matches!(voxelize(&no_tl, &db, 0.25), Err(Error::InvalidScene(_))));

    let mut far = small_scene(WindowState::Closed, false);
    far.receiver.length = 10.0;
    assert!(matches!(voxelize(&far, &db, 0.25), Err(Error::OutsideDomain(_))));
}

#[test]
fn scene_json_round_trip() {
    for id in ["SS01", "MS06"] {
        let scene = build_scenario(id.parse().unwrap());
        let back = SceneSpec::from_json(&scene.to_json().unwrap()).unwrap();
        assert_eq!(scene, back);
    }
    let bad = r#"{"domain": {"min": [0,0,0], "max": [1,1,1]}, "extra": 1}"#;
    assert!(SceneSpec::from_json(bad).is_err());
}

#[test]
fn fluid_faces_join_like_cells() {
    let db = MaterialDb::builtin();
    let (grid, faces) = voxelize(&build_scenario("SS01".parse().unwrap()), &db, 0.25).unwrap();
    for axis in 0..3 {
        let s = grid.stride(axis);
        for idx in 0..grid.len() {
            let c = grid.coords(idx);
            if c[axis] == 0 {
                continue;
            }
            let tag = faces.tag(axis, c);
            let (lo, hi) = (grid.class(idx - s), grid.class(idx));
            if tag == FaceTag::FLUID {
                assert_eq!(lo, hi);
                assert!(lo.is_fluid());
            }
            if tag == FaceTag::APERTURE {
                assert_ne!(lo, hi);
            }
        }
    }
}

#[test]
fn occupancy_against_the_shell_shows_the_outer_wall() {
    let db = MaterialDb::builtin();
    let scene = build_scenario("SS04".parse().unwrap());
    let (grid, faces) = voxelize(&scene, &db, 0.1).unwrap();
    let outdoor = db.lookup("chipboard_mineral_wool").unwrap().alpha;
    // x = 0.5 m plane, inside the bench footprint.
    let c = [5, 75, 5];
    let (lo, hi) = (grid.index(4, 75, 5), grid.index(5, 75, 5));
    assert_eq!(grid.class(lo), CellClass::Exterior);
    assert_eq!(grid.class(hi), CellClass::Solid);
    match faces.kind(faces.tag(0, c)) {
        FaceKind::Surface(blind_acoustics::scene::Surface::Boundary { group, alpha }) => {
            assert_eq!(*group, FaceGroup::Wall);
            assert_eq!(*alpha, outdoor);
        }
        other => panic!("unexpected {other:?}"),
    }
}
