//! `blindsim`: run, compare and export blind noise simulations.

/// `println!` that exits quietly when stdout has been closed.
macro_rules! outln {
    ($($arg:tt)*) => {
        $crate::emit(format_args!("{}\n", format_args!($($arg)*)))
    };
}

/// `print!` counterpart of [`outln!`].
macro_rules! out {
    ($($arg:tt)*) => {
        $crate::emit(format_args!($($arg)*))
    };
}

mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use blind_acoustics::acoustics::Radiation;
use blind_acoustics::scene::OpenWindowModel;
use blind_acoustics::solver::{BoundaryModel, PreconditionerKind};

use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "blindsim", version, about = "Diffusion-equation noise maps around photography blinds")]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one scene and write profiles, crossings, slices and a run report.
    Run(RunArgs),
    /// Level difference between two runs (run directories or profile CSVs).
    Compare(CompareArgs),
    /// Run all fourteen presets and print the summary table and checks.
    ReproducePaper(ReproduceArgs),
    /// Inspect the material database.
    Materials {
        #[command(subcommand)]
        action: MaterialsAction,
        /// Extra materials JSON, merged over the built-in set.
        #[arg(long, global = true)]
        materials: Option<PathBuf>,
    },
    /// Preset scenarios.
    Scenario {
        #[command(subcommand)]
        action: ScenarioAction,
    },
    /// Check a scene file and its voxelization without solving.
    Validate {
        scene: PathBuf,
        #[arg(long)]
        materials: Option<PathBuf>,
        /// Mesh size to voxelize at, m (defaults to the scene's).
        #[arg(long)]
        h: Option<f64>,
    },
}

#[derive(Debug, Subcommand)]
enum MaterialsAction {
    List,
    Show { name: String },
}

#[derive(Debug, Subcommand)]
enum ScenarioAction {
    List,
    /// Print a preset as scene JSON.
    Dump {
        id: String,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BoundaryArg {
    Sabine,
    Eyring,
    Modified,
}

impl From<BoundaryArg> for BoundaryModel {
    fn from(b: BoundaryArg) -> Self {
        match b {
            BoundaryArg::Sabine => BoundaryModel::Sabine,
            BoundaryArg::Eyring => BoundaryModel::Eyring,
            BoundaryArg::Modified => BoundaryModel::Modified,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OpenWindowArg {
    Aperture,
    Absorber,
}

impl From<OpenWindowArg> for OpenWindowModel {
    fn from(o: OpenWindowArg) -> Self {
        match o {
            OpenWindowArg::Aperture => OpenWindowModel::Aperture,
            OpenWindowArg::Absorber => OpenWindowModel::Absorber,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RadiationArg {
    Spherical,
    Hemispherical,
}

impl From<RadiationArg> for Radiation {
    fn from(r: RadiationArg) -> Self {
        match r {
            RadiationArg::Spherical => Radiation::Spherical,
            RadiationArg::Hemispherical => Radiation::Hemispherical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PreconditionerArg {
    Multigrid,
    Jacobi,
}

impl From<PreconditionerArg> for PreconditionerKind {
    fn from(p: PreconditionerArg) -> Self {
        match p {
            PreconditionerArg::Multigrid => PreconditionerKind::Multigrid,
            PreconditionerArg::Jacobi => PreconditionerKind::Jacobi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Precision {
    F64,
    F32,
}

/// Options shared by every command that solves.
#[derive(Debug, Clone, Args)]
struct SolveArgs {
    /// Mesh size, m.
    #[arg(long)]
    h: Option<f64>,
    #[arg(long, value_enum, default_value = "sabine")]
    boundary: BoundaryArg,
    /// Overrides the scene's open-window model.
    #[arg(long, value_enum)]
    open_window: Option<OpenWindowArg>,
    /// Overrides the scene's source radiation.
    #[arg(long, value_enum)]
    radiation: Option<RadiationArg>,
    /// Bands solved concurrently.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long, value_enum, default_value = "multigrid")]
    preconditioner: PreconditionerArg,
    /// Relative residual at which the solver stops.
    #[arg(long, default_value_t = 1e-8)]
    tolerance: f64,
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Extra materials JSON, merged over the built-in set.
    #[arg(long)]
    materials: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
struct RunArgs {
    /// Preset id, SS01..SS07 or MS01..MS07.
    #[arg(long)]
    scenario: Option<String>,
    /// Scene JSON file.
    #[arg(long)]
    scene: Option<PathBuf>,
    #[command(flatten)]
    solve: SolveArgs,
    /// Field precision.
    #[arg(long, value_enum, default_value = "f64")]
    precision: Precision,
    /// Output directory.
    #[arg(long, default_value = "blindsim-out")]
    out: PathBuf,
    #[arg(long)]
    no_profile: bool,
    #[arg(long)]
    no_crossings: bool,
    #[arg(long)]
    no_report: bool,
    /// Horizontal or vertical slice to export, `axis=offset` (e.g. `z=1.2`); repeatable.
    #[arg(long = "slice")]
    slices: Vec<String>,
    /// Band shown in slices: `overall` or a centre frequency.
    #[arg(long, default_value = "overall")]
    slice_band: String,
}

#[derive(Debug, Clone, Args)]
struct CompareArgs {
    run_a: PathBuf,
    run_b: PathBuf,
    /// Directory to write `compare.csv` into.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Headline averaging window, m.
    #[arg(long, default_value_t = 0.0)]
    from: f64,
    #[arg(long, default_value_t = 10.0)]
    to: f64,
}

#[derive(Debug, Clone, Args)]
struct ReproduceArgs {
    #[command(flatten)]
    solve: SolveArgs,
    /// Write every preset's artifacts and the summary table here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(args: std::fmt::Arguments<'_>) {
    use std::io::Write;
    if let Err(e) = std::io::stdout().lock().write_fmt(args) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        panic!("writing to stdout: {e}");
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return CliError::usage(e.render().to_string()).report(),
    };
    init_logging(cli.verbose);
    let result = match cli.command {
        Command::Run(args) => commands::run(&args),
        Command::Compare(args) => commands::compare(&args),
        Command::ReproducePaper(args) => commands::reproduce(&args),
        Command::Materials { action, materials } => commands::materials(&action, materials.as_deref()),
        Command::Scenario { action } => commands::scenario(&action),
        Command::Validate { scene, materials, h } => commands::validate(&scene, materials.as_deref(), h),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => e.report(),
    }
}
