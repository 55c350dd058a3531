use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported derivative order {0} (expected 1 or 2)")]
    UnsupportedOrder(u32),

    #[error("time step {dt} violates the stability bound dt*k_max^2 < pi (value {value:.4})")]
    Unstable { dt: f64, value: f64 },

    #[error("non-finite field encountered at t = {time}")]
    NonFinite { time: f64 },

    #[error("dilation by {param} would alias: spectral energy fraction {fraction:.3e} above the squeezed Nyquist limit")]
    Aliasing { param: f64, fraction: f64 },

    #[error("negative density sample {value} at index {index}")]
    NegativeDensity { index: usize, value: f64 },

    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid run: {failed} of {total} trajectories failed (budget is < 1%)")]
    InvalidRun { failed: usize, total: usize },

    #[error("branch supports overlap: {0}")]
    BranchOverlap(String),

    #[error("config validation failed:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("{context}: {source}")]
    Experiment {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed file {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by bad input rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Config(_)
            | Error::InvalidGrid(_)
            | Error::InvalidArgument(_)
            | Error::UnsupportedOrder(_)
            | Error::InvalidState(_)
            | Error::NotUnitary(_)
            | Error::BranchOverlap(_)
            | Error::GridMismatch(_)
            | Error::Parse { .. } => true,
            Error::Experiment { source, .. } => source.is_validation(),
            _ => false,
        }
    }
}
