use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeomError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("singular point: {0}")]
    Singular(String),
    #[error("degenerate: {0}")]
    Degenerate(String),
    #[error("knot rejected: {0}")]
    Rejected(String),
    #[error("evaluation failed: {0}")]
    Evaluation(String),
}

pub type Result<T> = core::result::Result<T, GeomError>;
