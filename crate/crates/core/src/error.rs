use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("series too short: need at least {required} samples, have {actual}")]
    SeriesTooShort { required: usize, actual: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("series is empty")]
    EmptySeries,

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("trajectory diverged at step {step}")]
    Divergence { step: usize },

    #[error("series has zero variance")]
    ZeroVariance,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("no interior minimum within tau_max = {tau_max}")]
    NoMinimum { tau_max: usize },

    #[error("no zero crossing within tau_max = {tau_max}")]
    NoZeroCrossing { tau_max: usize },

    #[error("no embedding found up to m = {m_max}: false-neighbor fractions {fractions:?}")]
    NoEmbeddingFound { m_max: usize, fractions: Vec<f64> },

    #[error("no admissible neighbor for the query point")]
    NoAdmissibleNeighbor,

    #[error("no valid cell in parameter grid")]
    EmptyGrid,

    #[error("at test position {position}: {source}")]
    AtPosition {
        position: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than by the computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::SeriesTooShort { .. }
                | Error::LengthMismatch { .. }
                | Error::DimensionMismatch { .. }
                | Error::EmptySeries
                | Error::NonFinite(_)
                | Error::Parse { .. }
        )
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
