use thiserror::Error;

pub type Result<T> = std::result::Result<T, JunctionError>;

#[derive(Debug, Error)]
pub enum JunctionError {
    #[error("site {site} is outside 1..={n_sites}")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("invalid model specification: {0}")]
    InvalidSpec(String),

    #[error("device table field `{field}`: {message}")]
    TableParse { field: String, message: String },

    #[error("excitation number {excitations} outside 0..={max} for this chain")]
    SectorOutOfRange { excitations: usize, max: usize },

    #[error("operation requires the {expected}-excitation sector, basis holds {actual}")]
    WrongSector { expected: usize, actual: usize },

    #[error("occupation {0:?} is not a member of the sector")]
    InvalidOccupation(Vec<u8>),

    #[error("state belongs to a different basis")]
    BasisMismatch,

    #[error("time step must be positive and finite, got {0}")]
    NonPositiveStep(f64),

    #[error("sample times must be ascending and start at or after the initial time")]
    UnorderedSamples,

    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),

    #[error("step-count probe stalled at {steps} steps/period (difference {difference:e}, tolerance {tolerance:e})")]
    NotConverged {
        steps: usize,
        difference: f64,
        tolerance: f64,
    },

    #[error("matrix is not unitary (deviation {0:e})")]
    NonUnitary(f64),

    #[error("eigen-decomposition did not converge")]
    EigenFailure,

    #[error("need at least 3 levels for gap ratios, got {0}")]
    TooFewLevels(usize),

    #[error("ratio {0} is outside the density's domain")]
    RatioOutOfDomain(f64),

    #[error("probabilities sum to {0}, expected 1")]
    InvalidProbabilities(f64),

    #[error("sites must differ, got {0} twice")]
    SameSite(usize),

    #[error("empty sample")]
    EmptySample,

    #[error("realization {index} failed: {source}")]
    Realization {
        index: usize,
        #[source]
        source: Box<JunctionError>,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl JunctionError {
    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        match self {
            JunctionError::NotConverged { .. }
            | JunctionError::NonUnitary(_)
            | JunctionError::EigenFailure => true,
            JunctionError::Realization { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
