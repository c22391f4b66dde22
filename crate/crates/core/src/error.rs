use thiserror::Error;

/// Errors raised by the explanation pipeline.
#[derive(Debug, Error)]
pub enum CatError {
    #[error("text is empty after normalization")]
    EmptyText,

    #[error("invalid edit: {0}")]
    InvalidEdit(String),

    #[error("word `{0}` rejected by a closed-vocabulary backend")]
    OovPolicyViolation(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("attribute banks differ: {0}")]
    MismatchedBanks(String),

    #[error("degenerate dataset: {0}")]
    DegenerateDataset(String),

    #[error("backend does not expose gradients")]
    NonDifferentiableBackend,

    #[error("no contrast found within an edit budget of {budget}")]
    NoContrastFound { budget: usize },

    #[error("nothing to evaluate")]
    EmptyEvaluation,

    #[error("embedding has zero norm")]
    DegenerateEmbedding,

    #[error("language-model loss of the input is zero")]
    DegenerateLoss,

    #[error("unpaired inputs: {0}")]
    UnpairedInputs(String),

    #[error("malformed record at line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },

    #[error("duplicate id `{id}` at line {line}")]
    DuplicateId { id: String, line: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid checkpoint: {0}")]
    Checkpoint(String),

    #[error("invalid hyperparameters: {0}")]
    InvalidParams(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = CatError> = std::result::Result<T, E>;
