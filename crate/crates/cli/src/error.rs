use std::path::Path;

/// Command failure, classified by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, configuration or input contents.
    #[error("{0}")]
    Validation(String),
    /// A calibration point has every bin clicking on every shot.
    #[error("{0}")]
    Saturation(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Saturation(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    /// Prefixes the message with the file it concerns.
    pub fn at(self, path: &Path) -> Self {
        let p = path.display();
        match self {
            CliError::Validation(m) => CliError::Validation(format!("{p}: {m}")),
            CliError::Saturation(m) => CliError::Saturation(format!("{p}: {m}")),
            CliError::Io(m) => CliError::Io(format!("{p}: {m}")),
        }
    }
}

impl From<clickstat::Error> for CliError {
    fn from(e: clickstat::Error) -> Self {
        match e {
            clickstat::Error::Saturation { .. } => CliError::Saturation(e.to_string()),
            clickstat::Error::Io(_) => CliError::Io(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn invalid<T>(message: impl Into<String>) -> CliResult<T> {
    Err(CliError::Validation(message.into()))
}
