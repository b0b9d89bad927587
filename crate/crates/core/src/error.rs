use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A scalar function was evaluated outside its domain.
    #[error("domain error: {context} undefined at eigenvalue {eigenvalue:e}")]
    Domain { context: String, eigenvalue: f64 },

    #[error("singular input: {0}")]
    Singular(String),

    #[error("indefinite matrix: quadratic form {value:e} is negative")]
    Indefinite { value: f64 },

    #[error("{solver} did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("unbounded domain: {0}")]
    Unbounded(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("round {round} is outside the generator range 1..={max}")]
    RoundOutOfRange { round: usize, max: usize },
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
        if expected == got {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, got })
        }
    }
}
