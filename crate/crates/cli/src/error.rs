//! Failure kinds of a command and the exit code each maps to.

use std::path::PathBuf;

use qwalk_core::io::IoError;
use qwalk_core::{ParseDiagnostic, WalkError};
use thiserror::Error;

/// Success.
pub const EXIT_OK: i32 = 0;
/// Bad flags, configuration values or protocol source.
pub const EXIT_CONFIG: i32 = 2;
/// Numerical or lattice-extent failure during a run.
pub const EXIT_NUMERIC: i32 = 3;
/// File could not be read or written.
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{origin}:{diag}")]
    Parse {
        origin: String,
        diag: ParseDiagnostic,
    },
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Data { path: PathBuf, source: IoError },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Parse { .. } => EXIT_CONFIG,
            CliError::Walk(e) => walk_code(e),
            CliError::Io { .. } => EXIT_IO,
            CliError::Data { source, .. } => data_code(source),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn data(path: impl Into<PathBuf>, source: IoError) -> Self {
        CliError::Data {
            path: path.into(),
            source,
        }
    }
}

fn walk_code(e: &WalkError) -> i32 {
    match e {
        WalkError::NonFiniteAngle(_)
        | WalkError::InvalidExtent(_)
        | WalkError::EmptyProtocol
        | WalkError::InvalidSteps(_)
        | WalkError::NoInputSites
        | WalkError::InvalidParameter(_) => EXIT_CONFIG,
        WalkError::ExtentOverflow { .. }
        | WalkError::SiteOutOfExtent(_)
        | WalkError::NotNormalized(_)
        | WalkError::ExtentMismatch
        | WalkError::LengthMismatch { .. }
        | WalkError::DisplayRange { .. }
        | WalkError::NoEvents => EXIT_NUMERIC,
    }
}

fn data_code(e: &IoError) -> i32 {
    match e {
        IoError::Io(_) => EXIT_IO,
        IoError::Csv(c) if c.is_io_error() => EXIT_IO,
        IoError::Json(j) if j.is_io() => EXIT_IO,
        IoError::Csv(_) | IoError::Json(_) | IoError::Format { .. } => EXIT_CONFIG,
        IoError::Walk(w) => walk_code(w),
    }
}

pub type CliResult<T> = Result<T, CliError>;
