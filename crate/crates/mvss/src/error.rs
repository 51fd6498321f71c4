use thiserror::Error;

/// Failure categories; the CLI maps each to a distinct exit status.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MvssError {
    /// Malformed or inconsistent input data.
    #[error("input error: {0}")]
    Input(String),
    /// A structural identity that must hold did not (for example `∂∘∂ ≠ 0`).
    #[error("invariant violation: {0}")]
    Invariant(String),
    /// A mathematical hypothesis of an operation is not met by the data.
    #[error("hypothesis failure: {0}")]
    Hypothesis(String),
}

impl MvssError {
    pub fn input(msg: impl Into<String>) -> Self {
        Self::Input(msg.into())
    }

    pub fn invariant(msg: impl Into<String>) -> Self {
        Self::Invariant(msg.into())
    }

    pub fn hypothesis(msg: impl Into<String>) -> Self {
        Self::Hypothesis(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Input(_) => 2,
            Self::Invariant(_) => 3,
            Self::Hypothesis(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Input(_) => "input",
            Self::Invariant(_) => "invariant",
            Self::Hypothesis(_) => "hypothesis",
        }
    }
}

pub type Result<T> = std::result::Result<T, MvssError>;
