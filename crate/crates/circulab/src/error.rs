use thiserror::Error;

/// Failure modes shared across the crate.
///
/// `ContractViolation` means the caller broke a documented precondition and
/// the computation was refused; `NumericFailure` means an iterative kernel
/// gave up (context names the kernel and the offending shape).
#[derive(Debug, Error)]
pub enum Error {
    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("numeric failure in {kernel} on {rows}x{cols} input: {detail}")]
    NumericFailure {
        kernel: &'static str,
        rows: usize,
        cols: usize,
        detail: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn contract(msg: impl Into<String>) -> Self {
        Error::ContractViolation(msg.into())
    }

    /// Process exit code the CLI maps this error to.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::ContractViolation(_) => 2,
            _ => 1,
        }
    }
}
