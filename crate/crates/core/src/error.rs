use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid qubit selection: {0}")]
    InvalidQubits(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("size cap exceeded: {0}")]
    CapExceeded(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("partition mismatch: {0}")]
    PartitionMismatch(String),
    #[error("wrong protocol: expected {expected}, found {found}")]
    WrongProtocol { expected: String, found: String },
    #[error("estimate undefined: {reason} ({diagnostics})")]
    Undefined { reason: String, diagnostics: String },
    #[error("malformed dataset at line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
