use q2ma_core::Error;

/// Failure of a subcommand, mapped onto the process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("structural error: {0}")]
    Structural(Error),
    #[error("annealing aborted: {0}")]
    Aborted(Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 1 config, 2 structural, 3 aborted anneal.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Structural(_) => 2,
            CliError::Aborted(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::SizeOutOfRange { .. } | Error::DimensionTooLarge { .. } => {
                CliError::Config(e.to_string())
            }
            Error::AnnealAborted { .. } => CliError::Aborted(e),
            _ => CliError::Structural(e),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}
