use thiserror::Error;

/// Errors surfaced by the toolkit.
#[derive(Error, Debug)]
pub enum Error {
    #[error("index out of range: {context} index {index} (size {size})")]
    IndexOutOfRange {
        context: &'static str,
        index: usize,
        size: usize,
    },

    #[error("systems are not serial composable: output label `{label}` of the first system is not an input of the second")]
    NotSerialComposable { label: String },

    #[error("systems are not feedback composable: {reason}")]
    NotFeedbackComposable { reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("relation check for {relation_type} failed: counterexample {counterexample}")]
    RelationDoesNotHold {
        relation_type: String,
        counterexample: String,
    },

    #[error("parameter inequality violated: {name} ({lhs} > {rhs})")]
    ParameterViolation { name: String, lhs: f64, rhs: f64 },

    #[error("sub-grid cover infeasible: {0}")]
    CoverInfeasible(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
