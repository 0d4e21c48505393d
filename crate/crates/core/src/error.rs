use thiserror::Error;

/// Errors raised by the planning library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("expansion margin must be non-negative, got {0}")]
    NegativeMargin(f64),
    #[error("clusters {0} and {1} touch (witness distance {2:e}); clustering is inconsistent")]
    ClusteringInconsistency(usize, usize, f64),
    #[error("cell of cluster {0} is empty after clipping")]
    EmptyCell(usize),
    #[error("roadmap graph has no edges")]
    EmptyGraph,
    #[error("no feasible passage between start and goal")]
    NoPath,
    #[error("degenerate segment: {0}")]
    DegenerateSegment(String),
    #[error("not a proper rotation (orthonormality residual {0:e})")]
    NotARotation(f64),
    #[error("invalid trajectory input: {0}")]
    InvalidTrajectory(String),
    #[error("raw trajectory collides with obstacle {obstacle} at sample {sample}")]
    RawTrajectoryCollides { sample: usize, obstacle: usize },
    #[error("{path}: {message}")]
    Validation { path: String, message: String },
    #[error("unknown benchmark '{name}' (valid: {valid})")]
    UnknownBenchmark { name: String, valid: String },
    #[error("malformed file: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            path: path.into(),
            message: message.into(),
        }
    }
}
