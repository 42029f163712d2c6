use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid argument or incompatible inputs.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("connectivity unattainable after {attempts} draws; increase the edge probability or degree")]
    Connectivity { attempts: u32 },

    #[error("graph generation failed: {0}")]
    Generation(String),

    /// An input failed validation that an operation requires.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// Generated data cannot produce a well-posed suite; regenerate with another seed.
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("minimizer oracle failed: {0}")]
    OracleFailure(String),

    /// A theoretical bound was requested outside the parameter range where it is claimed.
    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("iterates diverged at iteration {iteration} (norm {norm:e})")]
    Divergence { iteration: usize, norm: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
