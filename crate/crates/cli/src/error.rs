use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Instability(String),
    #[error("{0}")]
    Integration(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Instability(_) => 3,
            CliError::Integration(_) => 4,
            CliError::Validation(_) => 5,
            CliError::Io { .. } => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

impl From<tll_cd::Error> for CliError {
    fn from(e: tll_cd::Error) -> Self {
        use tll_cd::Error as E;
        match e {
            E::LuttingerInstability(_) | E::CdInstability(_) => CliError::Instability(e.to_string()),
            E::Integration { .. } => CliError::Integration(e.to_string()),
            E::CutoffUnsafe { .. } => CliError::Validation(e.to_string()),
            E::Contract(_) | E::Range(_) => CliError::Config(e.to_string()),
        }
    }
}
