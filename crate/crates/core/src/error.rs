use thiserror::Error;

/// Errors raised by the library. Predicates never fail; constructors and
/// solvers report the violated condition.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix order {order} exceeds the configured maximum {max}")]
    Size { order: usize, max: usize },

    #[error("malformed matrix: {0}")]
    Malformed(String),

    #[error("order mismatch: expected {expected}, found {found}")]
    OrderMismatch { expected: usize, found: usize },

    #[error("operand is not a contraction: largest singular value {singular_value}")]
    ContractionViolation { singular_value: f64 },

    #[error("degenerate {axis} entry at index {index}: modulus below 1e-12")]
    DegenerateEntry { axis: &'static str, index: usize },

    #[error("block is not unitary: max |M*M - I| = {residual:e}")]
    NotUnitary { residual: f64 },

    #[error("isometry relation {relation} violated: residual {residual:e}")]
    IsometryViolation { relation: &'static str, residual: f64 },

    #[error("a = {a} is not coprime to n = {n}")]
    NotCoprime { a: i64, n: usize },

    #[error("not a conference matrix: {0}")]
    ConferenceViolation(String),

    #[error("unknown catalog id `{0}`")]
    UnknownCatalogId(String),

    #[error("wrong parameter count: expected {expected}, found {found}")]
    ParamCount { expected: usize, found: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("point is not a solution: max residual {max_abs:e}")]
    NotAtSolution { max_abs: f64 },

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("size limit: {0}")]
    SizeLimit(String),

    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    /// Stable machine-readable tag, used by the CLI error stream.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Size { .. } => "size",
            Error::Malformed(_) => "malformed",
            Error::OrderMismatch { .. } => "order_mismatch",
            Error::ContractionViolation { .. } => "contraction_violation",
            Error::DegenerateEntry { .. } => "degenerate_entry",
            Error::NotUnitary { .. } => "not_unitary",
            Error::IsometryViolation { .. } => "isometry_violation",
            Error::NotCoprime { .. } => "not_coprime",
            Error::ConferenceViolation(_) => "conference_violation",
            Error::UnknownCatalogId(_) => "unknown_catalog_id",
            Error::ParamCount { .. } => "param_count",
            Error::Domain(_) => "domain",
            Error::NotAtSolution { .. } => "not_at_solution",
            Error::NumericFailure(_) => "numeric_failure",
            Error::SizeLimit(_) => "size_limit",
            Error::Format(_) => "format",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
