use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] condflow_core::Error),
}

impl CliError {
    /// 2 for bad input, 3 for numeric failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Output { .. } => 2,
            CliError::Core(e) if e.is_numeric() => 3,
            CliError::Core(_) => 2,
        }
    }
}

macro_rules! from_core {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Core(e.into())
            }
        }
    )*};
}

from_core!(
    condflow_core::ScaleError,
    condflow_core::TransformError,
    condflow_core::SimError,
    condflow_core::ConditioningError,
    condflow_core::ModelError
);
