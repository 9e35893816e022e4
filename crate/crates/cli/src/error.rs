use std::path::Path;
use std::process::ExitCode;

use thiserror::Error;

/// Failure of a command; the variant fixes the exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or malformed input (exit 2).
    #[error("{0}")]
    Input(String),
    /// Valid input rejected by the domain logic or configuration (exit 3).
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    pub fn input(msg: impl std::fmt::Display) -> Self {
        Self::Input(msg.to_string())
    }

    pub fn domain(msg: impl std::fmt::Display) -> Self {
        Self::Domain(msg.to_string())
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            Self::Input(_) => ExitCode::from(2),
            Self::Domain(_) => ExitCode::from(3),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))
}

pub fn read_text(path: &Path) -> Result<String> {
    let bytes = read_bytes(path)?;
    String::from_utf8(bytes).map_err(|_| CliError::input(format!("{} is not valid UTF-8", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::input(format!("cannot create {}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))
}
