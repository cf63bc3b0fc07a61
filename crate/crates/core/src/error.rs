use thiserror::Error;

use crate::decoherence::ConsistencyReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("unknown label: {0}")]
    Lookup(String),

    /// A family failed the completeness precondition of the decoherence
    /// functional; carries the completeness residual ‖Σ C_α − I‖.
    #[error("incomplete family: completeness residual {residual:.3e}")]
    Incomplete { residual: f64 },

    /// Probability assignment refused because the family is inconsistent.
    #[error("inconsistent family: {0}")]
    Inconsistent(ConsistencyReport),

    /// Operation defined only for product families.
    #[error("unsupported structure: {0}")]
    UnsupportedStructure(String),

    #[error("validation failed:\n{0}")]
    Validation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
