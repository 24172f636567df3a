use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised across the analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// The input header is missing a mandatory column.
    #[error("schema error: missing column `{0}`")]
    MissingColumn(String),

    /// A row could not be used and strict mode turns that into a hard failure.
    #[error("row {row}: {reason}")]
    InvalidRow { row: u64, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// The data carry no information for the requested statistic.
    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("constant covariate column `{0}`")]
    ConstantColumn(String),

    #[error("covariates `{0}` and `{1}` are exactly collinear")]
    Collinear(String, String),

    #[error("singular information matrix; involved covariates: {}", .0.join(", "))]
    Singular(Vec<String>),

    /// Coefficients run off to infinity (monotone likelihood / perfect separation).
    #[error("likelihood is monotone in covariates: {}", .0.join(", "))]
    Divergence(Vec<String>),

    #[error("fit did not converge: {0}")]
    NotConverged(String),

    /// Model and patient data disagree on the covariates they carry.
    #[error("patient data lack model covariates: {}", .0.join(", "))]
    CovariateMismatch(Vec<String>),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
