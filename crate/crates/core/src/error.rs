use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("division by the zero transfer function")]
    DivisionByZero,
    #[error("degenerate transfer function: {0}")]
    Degenerate(&'static str),
    #[error("zero polynomial has no stability verdict")]
    ZeroPolynomial,
    #[error("polynomial degree {0} is below the required minimum")]
    DegreeTooLow(usize),
    #[error("transfer function is unstable; its L1 norm diverges")]
    Unstable,
    #[error("transfer function must be strictly proper")]
    NotStrictlyProper,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("matrix is singular")]
    Singular,
    #[error("lifted map lacks full row rank (rank {rank} < {rows})")]
    RankDeficient { rank: usize, rows: usize },
    #[error("quadratic program is infeasible (constraint {constraint} cannot be satisfied)")]
    Infeasible { constraint: usize },
    #[error("iteration cap of {0} exceeded")]
    IterationLimit(usize),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("simulation diverged at t = {time} s on axis {axis}")]
    Diverged { time: f64, axis: usize },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn ensure_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
