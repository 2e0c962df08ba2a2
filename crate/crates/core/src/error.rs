use std::fmt;

/// Failure modes shared by every module. The CLI maps `Validation` to exit
/// code 2 and `NonConvergence` to exit code 3.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    NonConvergence(String),
}

impl Error {
    pub fn validation(msg: impl fmt::Display) -> Self {
        Error::Validation(msg.to_string())
    }

    pub fn nonconvergence(msg: impl fmt::Display) -> Self {
        Error::NonConvergence(msg.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) => 2,
            Error::NonConvergence(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Validation(_) => "validation",
            Error::NonConvergence(_) => "non_convergence",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err($crate::error::Error::validation(format!($($arg)+)));
        }
    };
}
pub(crate) use ensure;
