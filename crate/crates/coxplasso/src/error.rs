use thiserror::Error;

/// Errors surfaced while validating data, building designs, or fitting models.
#[derive(Debug, Error)]
pub enum Error {
    #[error("no failures in dataset (all observations censored)")]
    NoFailures,
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("observation weights must be positive and finite")]
    NegativeWeight,
    #[error("event indicators must be 0 or 1")]
    InvalidStatus,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("column {index} of {matrix} is constant; cannot standardize")]
    ConstantColumn { matrix: &'static str, index: usize },
    #[error("modifier Gram matrix is singular even after ridge regularization")]
    SingularGram,
    #[error("column {0} has zero weighted norm")]
    DegenerateColumn(usize),
    #[error("proximal step size underflow in block {0}")]
    StepUnderflow(usize),
    #[error("lambda_max is undefined at alpha = 1 (no group penalty on main effects)")]
    AlphaOne,
    #[error("a cross-validation fold has no failures; lower nfolds")]
    FoldWithoutFailures,
    #[error("scenario requires p >= {p} and nz >= {nz}")]
    PatternNeedsDims { p: usize, nz: usize },
    #[error("model schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("AUC is undefined when only one outcome class is present")]
    OneClassOnly,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("csv error: {0}")]
    Csv(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
