use thiserror::Error;

/// A single violated scenario invariant, named by the field it concerns.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl Violation {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("point lies on the polygon boundary (distance {distance:e})")]
    AmbiguousPosition { distance: f64 },

    #[error("form evaluated at a pole: {0}")]
    PoleEvaluation(String),

    #[error("path error: {0}")]
    Path(String),

    #[error("numerical failure at parameter {at}: {message}")]
    Numerical { at: f64, message: String },

    #[error("degenerate configuration: {0}")]
    Degeneracy(String),

    #[error("scenario validation failed with {} violation(s)", .0.len())]
    Validation(Vec<Violation>),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_)
            | Error::Input(_)
            | Error::AmbiguousPosition { .. }
            | Error::PoleEvaluation(_)
            | Error::Path(_)
            | Error::Degeneracy(_) => 1,
            Error::Numerical { .. } => 2,
            Error::Parse(_) | Error::Io(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
