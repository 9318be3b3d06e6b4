use thiserror::Error;

/// Errors raised by the toolkit.
///
/// Variants are grouped by the exit-code class the CLI maps them to:
/// parameter/config problems, numerical failures, geometric construction
/// failures.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unsupported cloud structure: {0}")]
    Unsupported(String),
    #[error("degenerate pair ({0}, {1}): coincident points")]
    DegeneratePair(usize, usize),
    #[error("instance too large for exact oracle: {vars} variables (limit {limit})")]
    Size { vars: usize, limit: usize },
    #[error("cover construction failed: {0}")]
    Cover(String),
    #[error("chain construction failed after {balls} balls: {reason}")]
    Chain { balls: usize, reason: String },
    #[error("no admissible reflected ball for whitney ball {index}: {reason}")]
    Reflection { index: usize, reason: String },
    #[error("resolution too coarse: {0}")]
    Resolution(String),
    #[error("lp solver: {0}")]
    Solver(String),
    #[error("io: {0}")]
    Io(String),
    #[error("format: {0}")]
    Format(String),
}

impl Error {
    /// True for failures of geometric constructions (covers, chains, plans).
    pub fn is_geometric(&self) -> bool {
        matches!(self, Error::Cover(_) | Error::Chain { .. } | Error::Reflection { .. })
    }

    /// True for numerical failures (uncertified solves, resolution).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Solver(_) | Error::Resolution(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
