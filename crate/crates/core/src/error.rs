use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{op}: dimension mismatch, left is {left_rows}x{left_cols}, right is {right_rows}x{right_cols}")]
    DimensionMismatch {
        op: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A data structure broke the rules of the machine it runs on
    /// (word overflow, address out of range, probe outside its declared schedule).
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// The decoder could not make sense of a message.
    #[error("protocol violation: {0}")]
    ProtocolViolation(String),

    /// A data structure or circuit returned a wrong answer.
    #[error("correctness failure: {0}")]
    Correctness(String),

    #[error("no factorization with at most {s_max} middle gates")]
    NoFactorization { s_max: usize },

    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
}

impl Error {
    pub(crate) fn parse(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            col,
            msg: msg.into(),
        }
    }
}
