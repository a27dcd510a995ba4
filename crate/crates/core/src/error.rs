use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("out of domain: {0}")]
    Domain(String),

    #[error("out of calibration: {0}")]
    OutOfCalibration(String),

    #[error("unknown {kind} `{name}` (known: {known})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        known: String,
    },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("rank-deficient design: {0}")]
    RankDeficient(String),

    #[error("sample {index} is not strictly positive (x = {x}, F = {force})")]
    NonPositiveSample { index: usize, x: f64, force: f64 },

    #[error("line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("row {row}: {message}")]
    Csv { row: usize, message: String },

    #[error("simulation: {0}")]
    Simulation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
