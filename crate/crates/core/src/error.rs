use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("usage error: {0}")]
    Usage(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("singular generator matrix")]
    Singular,

    #[error("mixed quadratic fields: sqrt({0}) and sqrt({1}) in one matrix")]
    MixedField(u32, u32),

    #[error("nonlattice packing: {0}")]
    NonLattice(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("even root of a negative value")]
    NegativeRoot,

    #[error("no certified root: {0}")]
    NoRoot(String),

    #[error("certification failed: {0}")]
    Certification(String),

    #[error("unknown catalog entry: {0}")]
    UnknownName(String),

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("degenerate tie: {0}")]
    Degenerate(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
