use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("variable x{index} out of range for {arity} generator(s)")]
    VariableOutOfRange { index: usize, arity: usize },

    #[error("domain error: {primitive} is undefined at {value}")]
    Domain { primitive: &'static str, value: f64 },

    #[error("order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },

    #[error("element with real part {real} is not nilpotent")]
    NotNilpotent { real: f64 },

    #[error("element with real part {real} is not invertible")]
    NotInvertible { real: f64 },

    #[error("metric is singular at this point (det = {det})")]
    SingularMetric { det: f64 },

    #[error("arity mismatch: expected {expected}, got {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("truncation order {target} exceeds element order {order}")]
    TruncationOutOfRange { target: usize, order: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Errors that originate from evaluating something outside its domain, as
    /// opposed to malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Domain { .. }
                | Error::OrderMismatch { .. }
                | Error::NotNilpotent { .. }
                | Error::NotInvertible { .. }
                | Error::SingularMetric { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
