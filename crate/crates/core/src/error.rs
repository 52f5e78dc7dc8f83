use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),
    /// An input matrix or index set violates a structural invariant.
    #[error("validation error: {0}")]
    Validation(String),
    /// The spectrum of Ωσ did not split into ± pairs within tolerance.
    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn validation(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}
