use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("invalid material `{name}`: {reason}")]
    InvalidMaterial { name: String, reason: String },

    #[error("unknown material `{name}`; available: {}", available.join(", "))]
    UnknownMaterial { name: String, available: Vec<String> },

    #[error("transmission loss must be non-negative, got {0} dB")]
    NegativeTransmissionLoss(f64),

    #[error("invalid air properties: {0}")]
    InvalidAir(String),

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("geometry outside domain: {0}")]
    OutsideDomain(String),

    #[error("mesh too coarse: {what} has a {edge} m edge but h = {h} m; refine the mesh")]
    RefinementRequired { what: String, edge: f64, h: f64 },

    #[error("subdomain {0} has no bounding surface")]
    DegenerateSubdomain(usize),

    #[error("invalid solver options: {0}")]
    InvalidOptions(String),

    #[error("inconsistent system: {0}")]
    Nonconforming(String),

    #[error(
        "solver did not converge{}: relative residual {residual:.3e} after {iterations} iterations",
        band.map(|b| format!(" in the {} Hz band", crate::bands::OctaveBands::label(b))).unwrap_or_default()
    )]
    NonConvergence {
        band: Option<usize>,
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("sample point ({:.3}, {:.3}, {:.3}) lies outside the grid", .0[0], .0[1], .0[2])]
    SampleOutsideGrid([f64; 3]),

    #[error("sampling grids differ: {0}")]
    GridMismatch(String),

    #[error("unknown scenario `{0}` (expected SS01..SS07 or MS01..MS07)")]
    UnknownScenario(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}
