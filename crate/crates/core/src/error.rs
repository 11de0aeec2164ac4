use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unsupported parameter: {0}")]
    Unsupported(String),
    #[error("invalid format: {0}")]
    InvalidFormat(String),
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    #[error("degenerate channel: {0}")]
    ChannelDegenerate(String),
    #[error("codebook constructions disagree for m = {0}")]
    ConstructionMismatch(u32),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
