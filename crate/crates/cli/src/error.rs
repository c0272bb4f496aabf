use std::process::ExitCode;

use blind_acoustics::Error;

pub const EXIT_INVALID: u8 = 2;
pub const EXIT_NONCONVERGENCE: u8 = 3;
pub const EXIT_IO: u8 = 4;

/// Failure reported as one JSON object on stderr.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub kind: &'static str,
    pub message: String,
    pub details: serde_json::Value,
}

impl CliError {
    pub fn invalid(kind: &'static str, message: impl Into<String>) -> Self {
        Self { code: EXIT_INVALID, kind, message: message.into(), details: serde_json::Value::Null }
    }

    pub fn usage(message: String) -> Self {
        Self::invalid("usage", message.trim_end().to_string())
    }

    pub fn io(context: &str, err: std::io::Error) -> Self {
        Self {
            code: EXIT_IO,
            kind: "io",
            message: format!("{context}: {err}"),
            details: serde_json::Value::Null,
        }
    }

    pub fn report(&self) -> ExitCode {
        let mut obj = serde_json::json!({
            "error": self.kind,
            "exit_code": self.code,
            "message": self.message,
        });
        if !self.details.is_null() {
            obj["details"] = self.details.clone();
        }
        eprintln!("{obj}");
        ExitCode::from(self.code)
    }
}

fn kind_of(e: &Error) -> &'static str {
    match e {
        Error::InvalidSpectrum(_) => "invalid_spectrum",
        Error::InvalidMaterial { .. } => "invalid_material",
        Error::UnknownMaterial { .. } => "unknown_material",
        Error::NegativeTransmissionLoss(_) => "negative_transmission_loss",
        Error::InvalidAir(_) => "invalid_air",
        Error::InvalidScene(_) => "invalid_scene",
        Error::OutsideDomain(_) => "outside_domain",
        Error::RefinementRequired { .. } => "refinement_required",
        Error::DegenerateSubdomain(_) => "degenerate_subdomain",
        Error::InvalidOptions(_) => "invalid_options",
        Error::Nonconforming(_) => "nonconforming",
        Error::NonConvergence { .. } => "non_convergence",
        Error::SampleOutsideGrid(_) => "sample_outside_grid",
        Error::GridMismatch(_) => "grid_mismatch",
        Error::UnknownScenario(_) => "unknown_scenario",
        Error::Io(_) => "io",
        Error::Json(_) => "json",
        Error::Csv(_) => "csv",
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::NonConvergence { .. } => EXIT_NONCONVERGENCE,
            Error::Io(_) => EXIT_IO,
            Error::Json(j) if j.is_io() => EXIT_IO,
            Error::Csv(c) if c.is_io_error() => EXIT_IO,
            _ => EXIT_INVALID,
        };
        let details = match &e {
            Error::NonConvergence { band, iterations, residual, .. } => serde_json::json!({
                "band_index": band,
                "iterations": iterations,
                "residual": residual,
            }),
            Error::UnknownMaterial { available, .. } => serde_json::json!({ "available": available }),
            _ => serde_json::Value::Null,
        };
        Self { code, kind: kind_of(&e), message: e.to_string(), details }
    }
}
