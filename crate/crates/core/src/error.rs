use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QsrError {
    #[error("label collision: {0}")]
    LabelCollision(String),
    #[error("unknown label: {0}")]
    UnknownLabel(String),
    #[error("invalid layout: {0}")]
    InvalidLayout(String),
    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),
    #[error("invariant violated: {what} (residual {residual:e})")]
    Invariant { what: String, residual: f64 },
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("memory cap exceeded: {0}")]
    MemoryCap(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("schema violation in field `{field}`: {msg}")]
    Schema { field: String, msg: String },
    #[error("no feasible point: {0}")]
    Infeasible(String),
}

pub type Result<T> = std::result::Result<T, QsrError>;

pub(crate) fn invariant(what: impl Into<String>, residual: f64) -> QsrError {
    QsrError::Invariant { what: what.into(), residual }
}
