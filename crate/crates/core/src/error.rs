use thiserror::Error;

/// Errors raised by the set engine and the verifiers built on it.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("window of {needed} positions exceeds the cap of {cap}")]
    WindowCap { needed: u128, cap: usize },
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("dilation by zero")]
    ZeroDilation,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("step limit of {0} exhausted")]
    StepLimit(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
