use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("unparseable cell at row {row}, column '{column}': {value:?}")]
    ParseCell {
        row: usize,
        column: String,
        value: String,
    },

    #[error("duplicate column name '{0}'")]
    DuplicateColumn(String),

    #[error("duplicate sample id '{0}'")]
    DuplicateSample(String),

    #[error("activity column '{0}' not found")]
    MissingActivity(String),

    #[error("invalid dataset: {0}")]
    InvalidData(String),

    #[error("zero-variance descriptor columns: {}", .0.join(", "))]
    ZeroVariance(Vec<String>),

    #[error("shape mismatch: expected {expected}, got {actual}")]
    Shape { expected: String, actual: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("n_latent = {requested} is out of range [1, {max}]")]
    LatentCount { requested: usize, max: usize },

    #[error("fold too small: {train} training samples cannot support {n_latent} latent variables")]
    FoldTooSmall { train: usize, n_latent: usize },

    #[error("r² undefined: observed response is constant")]
    ConstantResponse,

    #[error("all weights are zero")]
    ZeroWeights,

    #[error("{failed} of {total} resampled fits failed (limit {limit}); first failure: {first}")]
    TooManyFailures {
        failed: usize,
        total: usize,
        limit: usize,
        first: String,
    },

    #[error("no sampling run produced a finite RMSECV")]
    NoValidRun,
}
