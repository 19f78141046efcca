use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not unitary: ||U^dagger U - I||_F = {deviation:.3e}")]
    NotUnitary { deviation: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("mode {mode} out of range for a {m}-mode mesh")]
    ModeOutOfRange { mode: usize, m: usize },

    #[error("photon number mismatch: input has {input}, output has {output}")]
    PhotonMismatch { input: usize, output: usize },

    #[error("{what} of size {size} exceeds the cap of {cap}")]
    TooLarge {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("no closed form available: {0}")]
    NoClosedForm(String),

    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
    },

    #[error("fit failed for cell (layer {layer}, row {row}): {reason}")]
    FitFailed {
        layer: usize,
        row: usize,
        reason: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short machine-readable tag used in CLI error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotUnitary { .. } => "not_unitary",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::ModeOutOfRange { .. } => "mode_out_of_range",
            Error::PhotonMismatch { .. } => "photon_mismatch",
            Error::TooLarge { .. } => "too_large",
            Error::NoClosedForm(_) => "no_closed_form",
            Error::Inconsistent(_) => "inconsistent",
            Error::NoConvergence { .. } => "no_convergence",
            Error::FitFailed { .. } => "fit_failed",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
