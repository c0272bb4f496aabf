use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use blind_acoustics::analysis::{
    compare as compare_profiles, read_profile_csv, slice_map, write_compare_csv, write_crossings_csv,
    write_profile_csv, write_slice_csv, write_slice_pgm, BandSelection, CrossingReport, LineProfile,
};
use blind_acoustics::bands::{OctaveBands, BAND_COUNT};
use blind_acoustics::materials::MaterialDb;
use blind_acoustics::reproduce::{
    check_diffuse_room, check_doubling, check_grid_convergence, evaluate_sweep, CheckResult, ScenarioRun, Sweep,
};
use blind_acoustics::run::{run_scene, RunOutput};
use blind_acoustics::scene::{build_scenario, voxelize, CellClass, ScenarioId, SceneSpec};
use blind_acoustics::solver::{energy_balance, RunReport, SolveOptions};
use blind_acoustics::Real;

use crate::error::CliError;
use crate::{CompareArgs, MaterialsAction, Precision, ReproduceArgs, RunArgs, ScenarioAction, SolveArgs};

type CliResult<T = ()> = Result<T, CliError>;

fn load_db(extra: Option<&Path>) -> CliResult<MaterialDb> {
    let mut db = MaterialDb::builtin();
    if let Some(path) = extra {
        db.extend(MaterialDb::load(path)?);
    }
    Ok(db)
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(&path.display().to_string(), e))
}

fn ensure_dir(dir: &Path) -> CliResult {
    fs::create_dir_all(dir).map_err(|e| CliError::io(&dir.display().to_string(), e))
}

fn solve_options(args: &SolveArgs) -> CliResult<SolveOptions> {
    if args.threads == 0 {
        return Err(CliError::invalid("invalid_options", "--threads must be at least 1"));
    }
    let opts = SolveOptions {
        boundary_model: args.boundary.into(),
        rel_tolerance: args.tolerance,
        max_iterations: args.max_iterations,
        threads: args.threads,
        preconditioner: args.preconditioner.into(),
    };
    opts.validate()?;
    Ok(opts)
}

/// Applies command-line overrides to a scene.
fn apply_overrides(scene: &mut SceneSpec, args: &SolveArgs) -> CliResult {
    if let Some(h) = args.h {
        if !(h > 0.0 && h.is_finite()) {
            return Err(CliError::invalid("invalid_options", format!("--h must be positive, got {h}")));
        }
        scene.mesh_h = h;
    }
    if let Some(o) = args.open_window {
        scene.open_window = o.into();
    }
    if let Some(r) = args.radiation {
        scene.radiation = r.into();
    }
    Ok(())
}

fn parse_scenario(id: &str) -> CliResult<ScenarioId> {
    Ok(id.parse::<ScenarioId>()?)
}

fn resolve_scene(args: &RunArgs) -> CliResult<SceneSpec> {
    let mut scene = match (&args.scenario, &args.scene) {
        (Some(id), None) => build_scenario(parse_scenario(id)?),
        (None, Some(path)) => SceneSpec::load(path)?,
        (Some(_), Some(_)) => {
            return Err(CliError::invalid("usage", "give either --scenario or --scene, not both"));
        }
        (None, None) => return Err(CliError::invalid("usage", "one of --scenario or --scene is required")),
    };
    apply_overrides(&mut scene, &args.solve)?;
    Ok(scene)
}

fn parse_slice(spec: &str) -> CliResult<(usize, f64)> {
    let bad = || CliError::invalid("invalid_options", format!("slice `{spec}` is not of the form axis=offset"));
    let (axis, offset) = spec.split_once('=').ok_or_else(bad)?;
    let axis = match axis.trim() {
        "x" => 0,
        "y" => 1,
        "z" => 2,
        _ => return Err(bad()),
    };
    let offset: f64 = offset.trim().parse().map_err(|_| bad())?;
    Ok((axis, offset))
}

fn parse_band(spec: &str) -> CliResult<BandSelection> {
    if spec.eq_ignore_ascii_case("overall") {
        return Ok(BandSelection::Overall);
    }
    spec.trim_end_matches("Hz")
        .trim()
        .parse::<f64>()
        .ok()
        .and_then(OctaveBands::index_of)
        .map(BandSelection::Band)
        .ok_or_else(|| CliError::invalid("invalid_options", format!("unknown band `{spec}`")))
}

fn print_crossings(crossings: &CrossingReport) {
    for (b, c) in crossings.bands.iter().enumerate() {
        let d = c.interpolated.map(|d| format!("{d:.1} m")).unwrap_or_else(|| "not reached".into());
        outln!("  {:>5} Hz  background {:>5.1} dB  crossing {d}", OctaveBands::label(b), crossings.bnl[b]);
    }
    let all = crossings.all_bands().map(|d| format!("{d:.1} m")).unwrap_or_else(|| "not reached".into());
    outln!("  all bands below background beyond {all}");
}

pub fn run(args: &RunArgs) -> CliResult {
    let scene = resolve_scene(args)?;
    let db = load_db(args.solve.materials.as_deref())?;
    let options = solve_options(&args.solve)?;
    let slices = args.slices.iter().map(|s| parse_slice(s)).collect::<CliResult<Vec<_>>>()?;
    let band = parse_band(&args.slice_band)?;
    scene.validate(&db)?;
    ensure_dir(&args.out)?;
    match args.precision {
        Precision::F64 => write_run(run_scene::<f64>(&scene, &db, None, &options)?, &scene, &options, args, &slices, band),
        Precision::F32 => write_run(run_scene::<f32>(&scene, &db, None, &options)?, &scene, &options, args, &slices, band),
    }
}

fn write_run<T: Real>(
    out: RunOutput<T>,
    scene: &SceneSpec,
    options: &SolveOptions,
    args: &RunArgs,
    slices: &[(usize, f64)],
    band: BandSelection,
) -> CliResult {
    let started = Instant::now();
    let dir = &args.out;
    let mut scene_file = create(&dir.join("scene.json"))?;
    writeln!(scene_file, "{}", scene.to_json()?).map_err(|e| CliError::io("scene.json", e))?;
    if !args.no_profile {
        write_profile_csv(&out.profile, &scene.bnl, create(&dir.join("profile.csv"))?)?;
    }
    if !args.no_crossings {
        write_crossings_csv(&out.crossings, create(&dir.join("crossings.csv"))?)?;
    }
    let axis_name = ["x", "y", "z"];
    let band_name = match band {
        BandSelection::Overall => "overall".to_string(),
        BandSelection::Band(b) => OctaveBands::label(b),
    };
    for &(axis, offset) in slices {
        let map = slice_map(&out.field, axis, offset, band, &scene.air)?;
        let stem = format!("slice_{}{offset:.3}_{band_name}", axis_name[axis]);
        let (lo, hi) = (0..map.values.len())
            .filter(|&i| map.classes[i] == CellClass::Exterior)
            .map(|i| map.values[i].f64())
            .fold((f64::MAX, f64::MIN), |(lo, hi), v| (lo.min(v), hi.max(v)));
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 1.0, lo + 1.0) };
        write_slice_pgm(&map, lo, hi, create(&dir.join(format!("{stem}.pgm")))?)?;
        write_slice_csv(&map, create(&dir.join(format!("{stem}.csv")))?)?;
    }
    if !args.no_report {
        let report = RunReport::new(scene.name.clone(), &out.field, options);
        let json = serde_json::json!({
            "run": report,
            "energy_balance": energy_balance(&out.field, &out.mesh, &scene.air),
            "crossings_m": out.crossings.bands.iter().map(|c| c.interpolated).collect::<Vec<_>>(),
            "all_bands_m": out.crossings.all_bands(),
        });
        let mut f = create(&dir.join("run_report.json"))?;
        writeln!(f, "{}", serde_json::to_string_pretty(&json).expect("report serializes"))
            .map_err(|e| CliError::io("run_report.json", e))?;
    }
    log::info!("artifacts written in {:.2} s", started.elapsed().as_secs_f64());

    let name = scene.name.as_deref().unwrap_or("scene");
    let iters: Vec<usize> = out.field.diagnostics.iter().map(|d| d.iterations).collect();
    outln!("{name}: h = {} m, {} cells, iterations per band {iters:?}", out.mesh.grid.h, out.mesh.grid.len());
    if let Some(first) = out.profile.samples.first() {
        outln!("  overall at the first receiver {:.1} dB", first.overall.f64());
    }
    print_crossings(&out.crossings);
    outln!("  output in {}", dir.display());
    Ok(())
}

fn load_profile(path: &Path) -> CliResult<LineProfile<f64>> {
    let file: PathBuf = if path.is_dir() { path.join("profile.csv") } else { path.to_path_buf() };
    let f = File::open(&file).map_err(|e| CliError::io(&file.display().to_string(), e))?;
    Ok(read_profile_csv(f)?)
}

pub fn compare(args: &CompareArgs) -> CliResult {
    let a = load_profile(&args.run_a)?;
    let b = load_profile(&args.run_b)?;
    let delta = compare_profiles(&a, &b)?;
    if let Some(dir) = &args.out {
        ensure_dir(dir)?;
        write_compare_csv(&delta, create(&dir.join("compare.csv"))?)?;
    }
    let (lo, hi) = (args.from, args.to);
    let show = |v: Option<f64>| v.map(|v| format!("{v:+.2} dB")).unwrap_or_else(|| "n/a".into());
    outln!("mean delta overall, {lo}-{hi} m: {}", show(delta.mean_overall(lo, hi)));
    for b in 0..BAND_COUNT {
        outln!("  {:>5} Hz: {}", OctaveBands::label(b), show(delta.mean_band(b, lo, hi)));
    }
    let end = a.samples.last().map(|s| s.distance).unwrap_or(0.0);
    outln!("mean delta overall, whole line: {}", show(delta.mean_overall(0.0, end)));
    Ok(())
}

pub fn reproduce(args: &ReproduceArgs) -> CliResult {
    let db = load_db(args.solve.materials.as_deref())?;
    let options = solve_options(&args.solve)?;
    if let Some(dir) = &args.out {
        ensure_dir(dir)?;
    }
    let mut sweep = Sweep::new();
    let mut first_error: Option<CliError> = None;
    for id in ScenarioId::all() {
        let started = Instant::now();
        let mut scene = build_scenario(id);
        apply_overrides(&mut scene, &args.solve)?;
        match ScenarioRun::from_scene(id, &scene, &db, None, &options) {
            Ok(run) => {
                log::info!("{id} solved in {:.1} s", started.elapsed().as_secs_f64());
                if let Some(dir) = &args.out {
                    let sub = dir.join(id.to_string());
                    ensure_dir(&sub)?;
                    write_profile_csv(&run.profile, &scene.bnl, create(&sub.join("profile.csv"))?)?;
                    write_crossings_csv(&run.crossings, create(&sub.join("crossings.csv"))?)?;
                }
                sweep.insert(id, run);
            }
            Err(e) => {
                let err = CliError::from(e);
                eprintln!("{id} failed: {}", err.message);
                first_error.get_or_insert(err);
            }
        }
    }

    let table = summary_table(&sweep);
    out!("{table}");
    if let Some(dir) = &args.out {
        let mut f = create(&dir.join("summary.txt"))?;
        f.write_all(table.as_bytes()).map_err(|e| CliError::io("summary.txt", e))?;
    }

    let mut checks = evaluate_sweep(&sweep);
    if let Some(base) = sweep.get(&"SS01".parse().expect("id")) {
        checks.push(check_doubling(base, &db, &options)?);
    }
    checks.push(check_diffuse_room()?);
    checks.push(grid_check(&sweep, &db, &options)?);
    checks.sort_by_key(|c| c.number);
    outln!("");
    for c in &checks {
        outln!("[{}] {:>2}  {}: {}", c.status(), c.number, c.title, c.detail);
    }
    match first_error {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

const CONVERGENCE_TITLE: &str = "SS04 overall changes < 0.5 dB between h = 0.2 and 0.1 m";

fn grid_check(sweep: &Sweep, db: &MaterialDb, options: &SolveOptions) -> CliResult<CheckResult> {
    let id: ScenarioId = "SS04".parse().expect("id");
    match sweep.get(&id) {
        Some(fine) if (fine.h - 0.1).abs() < 1e-9 => {
            let coarse = ScenarioRun::from_scene(id, &build_scenario(id), db, Some(0.2), options)?;
            Ok(check_grid_convergence(&coarse, fine)?)
        }
        Some(run) => Ok(CheckResult::skipped(9, CONVERGENCE_TITLE, format!("sweep ran at h = {}; needs h = 0.1", run.h))),
        None => Ok(CheckResult::skipped(9, CONVERGENCE_TITLE, "SS04 missing")),
    }
}

fn summary_table(sweep: &Sweep) -> String {
    let mut s = String::new();
    s.push_str("scenario  L_first  L_10m  L_30m");
    for b in 0..BAND_COUNT {
        s.push_str(&format!("  x{:<5}", OctaveBands::label(b)));
    }
    s.push_str("  x_all\n");
    let show = |d: Option<f64>| d.map(|d| format!("{d:.1}")).unwrap_or_else(|| "-".into());
    for run in sweep.values() {
        s.push_str(&format!(
            "{:<8}  {:>7.1}  {:>5.1}  {:>5.1}",
            run.id.to_string(),
            run.overall_at(0.0),
            run.overall_at(10.0),
            run.overall_at(30.0)
        ));
        for c in &run.crossings.bands {
            s.push_str(&format!("  {:>6}", show(c.interpolated)));
        }
        s.push_str(&format!("  {:>5}\n", show(run.crossings.all_bands())));
    }
    s
}

fn row(values: impl Iterator<Item = f64>) -> String {
    values.map(|v| format!("{v:>6}")).collect::<Vec<_>>().join(" ")
}

pub fn materials(action: &MaterialsAction, extra: Option<&Path>) -> CliResult {
    let db = load_db(extra)?;
    match action {
        MaterialsAction::List => {
            outln!("{:<36} {}", "name", row(OctaveBands::CENTERS_HZ.iter().copied()));
            for m in db.iter() {
                outln!("{:<36} {}  alpha", m.name, row(m.alpha.iter()));
                if let Some(tl) = &m.tl_db {
                    outln!("{:<36} {}  tl_db", "", row(tl.iter()));
                }
            }
        }
        MaterialsAction::Show { name } => {
            let m = db.lookup(name)?;
            outln!("{}", m.name);
            outln!("band_hz {}", row(OctaveBands::CENTERS_HZ.iter().copied()));
            outln!("alpha   {}", row(m.alpha.iter()));
            match &m.tl_db {
                Some(tl) => outln!("tl_db   {}", row(tl.iter())),
                None => outln!("tl_db   -"),
            }
        }
    }
    Ok(())
}

pub fn scenario(action: &ScenarioAction) -> CliResult {
    match action {
        ScenarioAction::List => {
            outln!("id    windows  insulation  absorption  speech");
            for id in ScenarioId::all() {
                let v = id.variables();
                outln!(
                    "{id}  {:<7}  {:<10}  {:<10}  {:?}",
                    if v.windows_open { "open" } else { "closed" },
                    if v.high_tl { "high" } else { "low" },
                    if v.high_ac { "high" } else { "low" },
                    v.speech
                );
            }
        }
        ScenarioAction::Dump { id, out } => {
            let json = build_scenario(parse_scenario(id)?).to_json()?;
            match out {
                Some(path) => {
                    let mut f = create(path)?;
                    writeln!(f, "{json}").map_err(|e| CliError::io(&path.display().to_string(), e))?;
                    f.flush().map_err(|e| CliError::io(&path.display().to_string(), e))?;
                }
                None => outln!("{json}"),
            }
        }
    }
    Ok(())
}

pub fn validate(path: &Path, materials: Option<&Path>, h: Option<f64>) -> CliResult {
    let scene = SceneSpec::load(path)?;
    let db = load_db(materials)?;
    scene.validate(&db)?;
    let h = h.unwrap_or(scene.mesh_h);
    let (grid, faces) = voxelize(&scene, &db, h)?;
    let summary = serde_json::json!({
        "valid": true,
        "name": scene.name,
        "h": h,
        "cells": grid.len(),
        "exterior_cells": grid.count(CellClass::Exterior),
        "interior_cells": grid.count(CellClass::Interior),
        "solid_cells": grid.count(CellClass::Solid),
        "partition_faces": faces.partition_count(),
        "aperture_faces": faces.aperture_count(),
        "sources": scene.sources.len(),
        "receivers": scene.receiver.sample_count(),
    });
    outln!("{summary}");
    Ok(())
}
