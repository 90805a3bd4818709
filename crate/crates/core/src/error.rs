use thiserror::Error;

use crate::model::ModelError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("parse error at `{path}` (line {line}, column {column}): {message}")]
    Parse { path: String, line: usize, column: usize, message: String },
    #[error("unsupported {kind} format version {found} (this build reads {expected})")]
    Version { kind: &'static str, found: u32, expected: u32 },
    #[error("expected a `{expected}` document, found `{found}`")]
    DocumentKind { expected: &'static str, found: String },
    #[error("reference error: {0}")]
    Reference(String),
    #[error("generation error: {0}")]
    Generation(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("instance too large for exhaustive search: {0}")]
    Size(String),
    #[error("freeze conflict: {0}")]
    FreezeConflict(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("conflicting branching decision: {0}")]
    Decision(String),
    #[error("infeasible roster: {0}")]
    InfeasibleRoster(String),
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),
    #[error("build error: {0}")]
    Build(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable name of the error category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Model(_) => "model",
            Error::Parse { .. } => "parse",
            Error::Version { .. } => "version",
            Error::DocumentKind { .. } => "document_kind",
            Error::Reference(_) => "reference",
            Error::Generation(_) => "generation",
            Error::Parameter(_) => "parameter",
            Error::Size(_) => "size",
            Error::FreezeConflict(_) => "freeze_conflict",
            Error::Numeric(_) => "numeric",
            Error::Contract(_) => "contract",
            Error::Decision(_) => "decision",
            Error::InfeasibleRoster(_) => "infeasible_roster",
            Error::UndefinedMetric(_) => "undefined_metric",
            Error::Build(_) => "build",
            Error::Io(_) => "io",
        }
    }

    /// True when the error stems from user-supplied input rather than a defect.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Numeric(_) | Error::Contract(_) | Error::Io(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
