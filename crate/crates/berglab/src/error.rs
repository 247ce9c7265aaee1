//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unsupported quadrature order: {0}")]
    UnsupportedOrder(String),
    #[error("syntax error at offset {offset}: {message}")]
    SyntaxError { offset: usize, message: String },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("bad arity at offset {offset}: {message}")]
    BadArity { offset: usize, message: String },
    #[error("bad exponent at offset {offset}: {message}")]
    BadExponent { offset: usize, message: String },
    #[error("division by near-zero denominator (|den| = {0:.3e})")]
    DivisionByNearZero(f64),
    #[error("unsupported basis index: {0}")]
    UnsupportedIndex(String),
    #[error("unsupported domain: {0}")]
    UnsupportedDomain(String),
    #[error("truncation insufficient: {0}")]
    TruncationInsufficient(String),
    #[error("quadrature too coarse: {0}")]
    QuadratureTooCoarse(String),
    #[error("symbol is not a holomorphic polynomial: {0}")]
    NonHolomorphicSymbol(String),
    #[error("eigen-solver failed to converge: {0}")]
    NoConvergence(String),
    #[error("patch is disconnected: {0}")]
    DisconnectedPatch(String),
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("config error: {0}")]
    ConfigError(String),
    #[error("assertion failure: {0}")]
    AssertionFailure(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
