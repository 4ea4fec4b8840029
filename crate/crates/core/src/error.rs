use thiserror::Error;

/// Errors raised by the simulator.
///
/// Variants fall into two families: rejected input (the caller passed something
/// invalid) and internal consistency (a computed state violated a density
/// invariant, which indicates a convention bug rather than bad input).
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {detail}")]
    DimensionMismatch { op: &'static str, detail: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-unitary tactic: max deviation of U\u{2020}U from identity is {deviation:e}")]
    NonUnitary { deviation: f64 },

    #[error("internal consistency violation: {0}")]
    Consistency(String),

    #[error("syntax error at line {line}, column {column}: {message}")]
    SpecSyntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("schema violation at `{path}`: {message}")]
    SpecSchema { path: String, message: String },

    #[error("semantic violation: {0}")]
    SpecSemantic(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Coarse classification used for exit codes and by callers that only care
/// which family an error belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    RejectedInput,
    Syntax,
    Schema,
    Semantic,
    InternalConsistency,
    Io,
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::DimensionMismatch { .. } | Error::InvalidInput(_) | Error::NonUnitary { .. } => {
                ErrorCategory::RejectedInput
            }
            Error::Consistency(_) => ErrorCategory::InternalConsistency,
            Error::SpecSyntax { .. } => ErrorCategory::Syntax,
            Error::SpecSchema { .. } => ErrorCategory::Schema,
            Error::SpecSemantic(_) => ErrorCategory::Semantic,
            Error::Io(_) => ErrorCategory::Io,
        }
    }

    /// Process exit code: 2 for internal-consistency failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self.category() {
            ErrorCategory::InternalConsistency => 2,
            _ => 1,
        }
    }

    pub(crate) fn dims(op: &'static str, detail: impl Into<String>) -> Self {
        Error::DimensionMismatch {
            op,
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
