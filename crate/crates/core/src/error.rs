use thiserror::Error;

/// Errors raised by evaluation, scans and parsing.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TakagiError {
    #[error("translate index k = {k} is outside 0..2^{m}")]
    IndexOutOfRange { m: u32, k: i128 },

    #[error("scheme only defines generations below depth {depth}, but level {requested} was requested")]
    DepthExceeded { requested: u32, depth: u32 },

    #[error("level {level} exceeds the supported maximum {max}")]
    LevelTooLarge { level: u32, max: u32 },

    #[error("level must be at least 1")]
    ZeroLevel,

    #[error("point {0} lies outside [0, 1]")]
    OutsideUnitInterval(String),

    #[error("point {t} is not on the dyadic grid of level {level}")]
    NotOnGrid { t: String, level: u32 },

    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(String),

    #[error("tolerance {0} is below the resolution reachable at the maximum level")]
    ToleranceTooSmall(String),

    #[error("{0} is not of the form (3j +/- 1) / (3 * 2^n)")]
    NotThirdsPoint(String),

    #[error("exact thirds evaluation is not available for scheme {0}")]
    UnsupportedFunction(String),

    #[error("step h = {0} must satisfy 0 < h <= 1")]
    InvalidStep(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl TakagiError {
    /// True for errors caused by asking a finite coefficient table for more
    /// generations than it holds.
    pub fn is_depth_error(&self) -> bool {
        matches!(self, TakagiError::DepthExceeded { .. })
    }
}

pub type Result<T, E = TakagiError> = std::result::Result<T, E>;
