//! CLI error taxonomy mapped onto distinct process exit codes.

use std::fmt;

use butterfly_core::analysis::AnalysisError;
use butterfly_core::beamform::BeamformError;
use butterfly_core::netmodel::ModelError;
use butterfly_core::schemes::SchemeError;

/// What went wrong, bucketed by exit code: 1 for I/O, 2 for configuration,
/// 3 for numerical degeneracy, 4 for a failed verification check.
#[derive(Debug)]
pub enum CliError {
    Io(String),
    Config(String),
    Degenerate(String),
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Degenerate(_) => 3,
            CliError::Verification(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(msg) => write!(f, "io error: {msg}"),
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Degenerate(msg) => write!(f, "degenerate channel: {msg}"),
            CliError::Verification(msg) => write!(f, "verification failed: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<SchemeError> for CliError {
    fn from(e: SchemeError) -> Self {
        match e {
            SchemeError::DegenerateChannel { detail } => CliError::Degenerate(detail),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<BeamformError> for CliError {
    fn from(e: BeamformError) -> Self {
        match e {
            BeamformError::DegenerateChannel { detail } => CliError::Degenerate(detail),
            BeamformError::VerificationFailed { detail } => CliError::Verification(detail),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::ResamplingExhausted { .. } => CliError::Degenerate(e.to_string()),
            AnalysisError::Scheme(inner) => inner.into(),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Config(e.to_string())
    }
}
