use alloc::string::String;

/// Errors raised by the lattice toolkit.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("field does not belong to the given domain")]
    DomainMismatch,
    #[error("free boundary is empty")]
    EmptyFreeBoundary,
    #[error("no qualifying nodes: {0}")]
    NoQualifyingNodes(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("point leaves the domain: {0}")]
    OutsideDomain(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
