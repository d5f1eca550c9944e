use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("line {line}: comment {comment} has invalid timestamp {t}")]
    InvalidTimestamp { line: usize, comment: String, t: f64 },

    #[error("line {line}: duplicate post id {id}")]
    DuplicatePost { line: usize, id: String },

    #[error("post {post}: duplicate comment id {comment}")]
    DuplicateComment { post: String, comment: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("vocabulary is empty after min-count filtering")]
    EmptyVocabulary,

    #[error("embedding file line {line}: {msg}")]
    Embedding { line: usize, msg: String },

    #[error("both classes must be present ({0})")]
    SingleClass(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("feature layout fingerprint mismatch: model {model}, input {input}")]
    LayoutMismatch { model: String, input: String },

    #[error("unknown feature group '{0}'")]
    UnknownGroup(String),

    #[error("missing resource: {0}")]
    MissingResource(String),

    #[error("observed comment count {k} out of range for post with {n} comments")]
    ObservedOutOfRange { k: usize, n: usize },

    #[error("post {0} has no hostile comment within the series window")]
    NoHostileComment(String),

    #[error("series has zero norm")]
    ZeroNorm,

    #[error("need at least {needed} series, got {got}")]
    TooFewSeries { needed: usize, got: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by invalid parameters rather than by the data.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig(_) | Error::UnknownGroup(_) | Error::MissingResource(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
