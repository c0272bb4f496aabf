use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn blindsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blindsim")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// The last stderr line, parsed as the JSON error object.
fn error_json(o: &Output) -> serde_json::Value {
    let err = String::from_utf8_lossy(&o.stderr);
    let line = err.lines().last().expect("stderr has an error line");
    serde_json::from_str(line).unwrap_or_else(|e| panic!("not JSON ({e}): {line}"))
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn run_coarse(tmp: &TempDir, name: &str, input: &[&str], extra: &[&str]) -> PathBuf {
    let out = tmp.path().join(name);
    let mut args = vec!["run"];
    args.extend_from_slice(input);
    args.extend_from_slice(&["--h", "0.25", "--out", path(&out)]);
    args.extend_from_slice(extra);
    let o = blindsim(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

fn read(p: PathBuf) -> String {
    fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[test]
fn help_and_version_exit_cleanly() {
    assert!(blindsim(&["--help"]).status.success());
    assert!(blindsim(&["--version"]).status.success());
}

#[test]
fn run_writes_a_sixty_one_row_profile() {
    let tmp = TempDir::new().unwrap();
    let out = run_coarse(&tmp, "ss01", &["--scenario", "SS01"], &["--slice", "z=0.2", "--slice", "y=7.6"]);
    let profile = read(out.join("profile.csv"));
    let rows: Vec<&str> = profile.lines().collect();
    assert_eq!(rows.len(), 62);
    assert!(rows[0].starts_with("distance_m,spl_125"));
    assert!(rows[1].starts_with("0.000,"));
    assert!(rows[61].starts_with("30.000,"));

    let crossings = read(out.join("crossings.csv"));
    assert_eq!(crossings.lines().count(), 8);

    let report: serde_json::Value = serde_json::from_str(&read(out.join("run_report.json"))).unwrap();
    assert_eq!(report["run"]["scene"], "SS01");
    assert_eq!(report["run"]["bands"].as_array().unwrap().len(), 6);
    for b in report["energy_balance"].as_array().unwrap() {
        assert!(b["imbalance"].as_f64().unwrap() < 0.005);
    }

    let pgm = fs::read(out.join("slice_z0.200_overall.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n140 60\n255\n"));
    assert_eq!(pgm.len(), b"P5\n140 60\n255\n".len() + 140 * 60);
    assert!(out.join("slice_y7.600_overall.csv").exists());
    let scene = read(out.join("scene.json"));
    assert!(scene.contains("\"mesh_h\": 0.25"));
}

#[test]
fn export_toggles_skip_files() {
    let tmp = TempDir::new().unwrap();
    let out = run_coarse(&tmp, "r", &["--scenario", "SS06"], &["--no-crossings", "--no-report"]);
    assert!(out.join("profile.csv").exists());
    assert!(!out.join("crossings.csv").exists());
    assert!(!out.join("run_report.json").exists());
}

#[test]
fn scene_and_scenario_together_is_invalid() {
    let tmp = TempDir::new().unwrap();
    let scene = tmp.path().join("s.json");
    assert!(blindsim(&["scenario", "dump", "SS01", "--out", path(&scene)]).status.success());
    let o = blindsim(&["run", "--scenario", "SS01", "--scene", path(&scene)]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["error"], "usage");

    let o = blindsim(&["run"]);
    assert_eq!(o.status.code(), Some(2));
    let o = blindsim(&["run", "--scenario", "SS08"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["error"], "unknown_scenario");
    let o = blindsim(&["run", "--frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["exit_code"], 2);
}

#[test]
fn materials_show_table_rows() {
    let o = blindsim(&["materials", "show", "heavy_glass"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let tl: Vec<&str> = text.lines().find(|l| l.starts_with("tl_db")).unwrap().split_whitespace().skip(1).collect();
    assert_eq!(tl, ["29", "34", "35", "35", "34", "45"]);

    let text = stdout(&blindsim(&["materials", "show", "soil_vegetation"]));
    let alpha: Vec<&str> = text.lines().find(|l| l.starts_with("alpha")).unwrap().split_whitespace().skip(1).collect();
    assert_eq!(alpha, ["0.39", "0.68", "0.78", "0.94", "0.95", "0.83"]);

    let list = stdout(&blindsim(&["materials", "list"]));
    assert!(list.lines().filter(|l| l.ends_with("alpha")).count() >= 12);

    let o = blindsim(&["materials", "show", "balsa"]);
    assert_eq!(o.status.code(), Some(2));
    let err = error_json(&o);
    assert_eq!(err["error"], "unknown_material");
    assert!(err["details"]["available"].as_array().unwrap().len() >= 12);
}

#[test]
fn user_materials_extend_the_database() {
    let tmp = TempDir::new().unwrap();
    let file = tmp.path().join("m.json");
    fs::write(&file, r#"{"foam": {"alpha": [0.2, 0.5, 0.9, 1.0, 1.0, 1.0], "tl_db": null}}"#).unwrap();
    let o = blindsim(&["materials", "show", "foam", "--materials", path(&file)]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("0.9"));
    fs::write(&file, r#"{"bad": {"alpha": [-0.2, 0.5, 0.9, 1.0, 1.0, 1.0], "tl_db": null}}"#).unwrap();
    let o = blindsim(&["materials", "list", "--materials", path(&file)]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["error"], "invalid_material");
}

#[test]
fn dumped_scene_reproduces_the_preset_bit_for_bit() {
    let tmp = TempDir::new().unwrap();
    let scene = tmp.path().join("ss04.json");
    assert!(blindsim(&["scenario", "dump", "SS04", "--out", path(&scene)]).status.success());
    let a = run_coarse(&tmp, "preset", &["--scenario", "SS04"], &[]);
    let b = run_coarse(&tmp, "file", &["--scene", path(&scene)], &[]);
    let c = run_coarse(&tmp, "again", &["--scenario", "SS04"], &[]);
    let d = run_coarse(&tmp, "threads", &["--scenario", "SS04"], &["--threads", "3"]);
    for name in ["profile.csv", "crossings.csv"] {
        let reference = fs::read(a.join(name)).unwrap();
        assert_eq!(reference, fs::read(b.join(name)).unwrap(), "{name} from file");
        assert_eq!(reference, fs::read(c.join(name)).unwrap(), "{name} repeated");
        assert_eq!(reference, fs::read(d.join(name)).unwrap(), "{name} threaded");
    }
}

#[test]
fn compare_identical_and_doubled_runs() {
    let tmp = TempDir::new().unwrap();
    let base = run_coarse(&tmp, "base", &["--scenario", "SS01"], &[]);

    let mut scene: serde_json::Value = serde_json::from_str(&stdout(&blindsim(&["scenario", "dump", "SS01"]))).unwrap();
    let sources = scene["sources"].as_array().unwrap().clone();
    scene["sources"].as_array_mut().unwrap().extend(sources);
    let doubled_file = tmp.path().join("doubled.json");
    fs::write(&doubled_file, scene.to_string()).unwrap();
    let doubled = run_coarse(&tmp, "doubled", &["--scene", path(&doubled_file)], &[]);

    let cmp = tmp.path().join("cmp");
    let o = blindsim(&["compare", path(&doubled), path(&base), "--out", path(&cmp)]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("+3.01 dB"));
    let table = read(cmp.join("compare.csv"));
    assert_eq!(table.lines().count(), 62);
    for row in table.lines().skip(1) {
        for cell in row.split(',').skip(1) {
            let v: f64 = cell.parse().unwrap();
            assert!((v - 3.0103).abs() <= 2e-4, "{row}");
        }
    }

    let same = tmp.path().join("same");
    assert!(blindsim(&["compare", path(&base), path(&base), "--out", path(&same)]).status.success());
    for row in read(same.join("compare.csv")).lines().skip(1) {
        assert!(row.split(',').skip(1).all(|c| c == "0.0000"), "{row}");
    }
}

#[test]
fn compare_rejects_mismatched_grids() {
    let tmp = TempDir::new().unwrap();
    let base = run_coarse(&tmp, "base", &["--scenario", "SS02"], &["--no-report"]);
    let short = tmp.path().join("short.csv");
    let text = read(base.join("profile.csv"));
    fs::write(&short, text.lines().take(20).collect::<Vec<_>>().join("\n")).unwrap();
    let o = blindsim(&["compare", path(&base), path(&short)]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["error"], "grid_mismatch");
    let o = blindsim(&["compare", path(&base), path(&tmp.path().join("missing"))]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn solver_failure_exits_with_three() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("r");
    let o = blindsim(&[
        "run", "--scenario", "SS01", "--h", "0.25", "--out", path(&out),
        "--preconditioner", "jacobi", "--max-iterations", "1",
    ]);
    assert_eq!(o.status.code(), Some(3));
    let err = error_json(&o);
    assert_eq!(err["error"], "non_convergence");
    assert_eq!(err["details"]["iterations"], 1);
}

#[test]
fn unwritable_output_exits_with_four() {
    let tmp = TempDir::new().unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let o = blindsim(&["run", "--scenario", "SS01", "--h", "0.5", "--out", path(&blocker.join("sub"))]);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(error_json(&o)["error"], "io");
}

#[test]
fn validate_reports_geometry() {
    let tmp = TempDir::new().unwrap();
    let file = tmp.path().join("ms01.json");
    assert!(blindsim(&["scenario", "dump", "MS01", "--out", path(&file)]).status.success());
    let o = blindsim(&["validate", path(&file), "--h", "0.25"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["valid"], true);
    assert_eq!(v["receivers"], 61);
    assert_eq!(v["sources"], 4);
    assert!(v["aperture_faces"].as_u64().unwrap() > 0);

    let o = blindsim(&["validate", path(&file), "--h", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["error"], "refinement_required");

    let mut scene: serde_json::Value = serde_json::from_str(&read(file.clone())).unwrap();
    scene["sources"][0]["position"] = serde_json::json!([20.0, 7.5, 1.0]);
    fs::write(&file, scene.to_string()).unwrap();
    let o = blindsim(&["validate", path(&file)]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["error"], "invalid_scene");

    fs::write(&file, "{ not json").unwrap();
    let o = blindsim(&["validate", path(&file)]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["error"], "json");
}

#[test]
fn single_precision_run_tracks_double() {
    // Open windows keep the indoor/outdoor level range small enough for f32.
    let tmp = TempDir::new().unwrap();
    let a = run_coarse(&tmp, "f64", &["--scenario", "MS01"], &["--no-report"]);
    let b = run_coarse(&tmp, "f32", &["--scenario", "MS01"], &["--no-report", "--precision", "f32", "--tolerance", "1e-5"]);
    let (a, b) = (read(a.join("profile.csv")), read(b.join("profile.csv")));
    for (ra, rb) in a.lines().zip(b.lines()).skip(1) {
        for (x, y) in ra.split(',').zip(rb.split(',')).skip(1).take(7) {
            let (x, y): (f64, f64) = (x.parse().unwrap(), y.parse().unwrap());
            assert!((x - y).abs() < 0.02, "{ra} vs {rb}");
        }
    }
}

#[test]
fn scenario_list_names_all_presets() {
    let text = stdout(&blindsim(&["scenario", "list"]));
    for n in 1..=7 {
        assert!(text.contains(&format!("SS0{n}")) && text.contains(&format!("MS0{n}")));
    }
}
