use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no calibration points")]
    NoCalibrationPoints,

    #[error("label {0} outside [0, 1]")]
    InvalidLabel(f64),

    #[error("non-finite value {0}")]
    NonFinite(f64),

    #[error("invalid interval: low {low} > high {high}")]
    InvalidInterval { low: f64, high: f64 },

    #[error("empty residual set")]
    EmptyResiduals,

    #[error("insufficient calibration data for ε = {epsilon} (q = {q})")]
    InsufficientCalibration { epsilon: f64, q: usize },

    #[error("significance level {0} outside (0, 1)")]
    InvalidEpsilon(f64),

    #[error("calibrator does not match mode: {0}")]
    ModeMismatch(String),

    #[error("classification target must be 0 or 1, found {value} at row {row}")]
    NonBinaryTarget { row: usize, value: f64 },

    #[error("instance has {got} features, model expects {expected}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("no score for instance {}", .0.map_or_else(|| "<unnamed>".to_string(), |id| id.to_string()))]
    MissingScore(Option<u64>),

    #[error("no scores")]
    NoScores,

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("target column `{0}` not found")]
    MissingTargetColumn(String),

    #[error("requested {requested} rows but dataset has {available}")]
    SplitTooLarge { requested: usize, available: usize },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("alternatives require rescoring")]
    AlternativesRequireRescoring,

    #[error("unsupported conjunction order {0} (maximum is 2)")]
    UnsupportedConjunctionOrder(usize),

    #[error("conjunctions can only be added to alternative explanations")]
    NotAlternative,

    #[error("undefined taxonomy for a prediction of exactly 0.5")]
    UndefinedTaxonomy,

    #[error("global map requires probabilistic mode")]
    NotProbabilistic,

    #[error("instance {0} is not in the test set")]
    UnknownInstance(u64),

    #[error("ranking weight {0} outside [-1, 1]")]
    InvalidWeight(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether the error stems from user configuration rather than the run.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::InvalidWeight(_)
                | Error::InvalidEpsilon(_)
                | Error::SplitTooLarge { .. }
                | Error::MissingTargetColumn(_)
                | Error::NotProbabilistic
        )
    }
}
