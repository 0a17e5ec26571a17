use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The result would overflow the floating-point range.
    #[error("range error: {0}")]
    Range(String),
    /// A quadrature or series failed to reach its tolerance.
    #[error("numerical error: {0}")]
    Numerical(String),
    /// Not enough (or degenerate) data for a statistical estimate.
    #[error("precision error: {0}")]
    Precision(String),
    /// The marked point sits on the discretized path, so the winding number is undefined.
    #[error("point-on-path: distance {distance:e} to the loop is below {threshold:e}")]
    PointOnPath { distance: f64, threshold: f64 },
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn precision(msg: impl Into<String>) -> Error {
    Error::Precision(msg.into())
}
