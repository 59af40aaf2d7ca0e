use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("variable index {index} out of range for {n_vars} variables")]
    InvalidVariable { index: usize, n_vars: usize },

    #[error("incompatible rings: {0}")]
    IncompatibleRing(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("budget exceeded: {what} needs {required}, cap is {cap}")]
    BudgetExceeded {
        what: &'static str,
        required: String,
        cap: u64,
    },

    #[error("field error: {0}")]
    Field(String),

    #[error("invalid block partition: {0}")]
    InvalidPartition(String),

    #[error("invalid local model: {0}")]
    InvalidModel(String),

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("pipeline stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid family spec: {0}")]
    InvalidFamily(String),
}

impl Error {
    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Walks through stage wrappers to the underlying error.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}
