use thiserror::Error;

/// Errors produced by transforms, estimators and the simulation harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("input is empty")]
    Empty,

    #[error("non-finite value {0}")]
    NonFinite(f64),

    #[error("value {value} is outside the domain of the {family} transform")]
    Domain { family: &'static str, value: f64 },

    #[error("value {value} is outside the range of the {family} transform at lambda = {lambda}")]
    Range {
        family: &'static str,
        lambda: f64,
        value: f64,
    },

    #[error("invalid rectification knot {knot} for the {family} transform: {reason}")]
    Knot {
        family: &'static str,
        knot: f64,
        reason: &'static str,
    },

    #[error("degenerate scale: the data has zero median absolute deviation")]
    DegenerateScale,

    #[error("too few observations: need at least {needed}, got {got}")]
    TooFewObservations { needed: usize, got: f64 },

    #[error("probability {0} is outside (0, 1)")]
    Probability(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("objective is non-finite at every grid point")]
    NoFiniteObjective,
}

pub type Result<T> = std::result::Result<T, Error>;
