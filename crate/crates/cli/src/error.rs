//! CLI error type with documented exit codes.
//!
//! 0 = success, 2 = configuration error, 3 = sampling error,
//! 4 = analysis error, 5 = I/O error.

use std::fmt;
use std::path::{Path, PathBuf};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SAMPLING: i32 = 3;
pub const EXIT_ANALYSIS: i32 = 4;
pub const EXIT_IO: i32 = 5;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(oamsim_core::Error),
    Io(PathBuf, std::io::Error),
}

impl CliError {
    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Io(path.to_path_buf(), err)
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Core(e) => match e {
                oamsim_core::Error::Domain(_) | oamsim_core::Error::GridMismatch(_) => EXIT_CONFIG,
                oamsim_core::Error::Sampling(_) => EXIT_SAMPLING,
                oamsim_core::Error::Analysis(_)
                | oamsim_core::Error::IndeterminateWinding { .. }
                | oamsim_core::Error::AmbiguousSort { .. } => EXIT_ANALYSIS,
            },
            CliError::Io(_, _) => EXIT_IO,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(path, e) => write!(f, "io error at {}: {e}", path.display()),
        }
    }
}

impl std::error::Error for CliError {}

impl From<oamsim_core::Error> for CliError {
    fn from(e: oamsim_core::Error) -> Self {
        CliError::Core(e)
    }
}
