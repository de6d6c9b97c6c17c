use std::process::ExitCode;

use mcc_core::algebra::AlgebraError;
use mcc_core::envelope::EnvelopeError;
use mcc_core::htpre::HtpreError;
use mcc_core::protocol::ProtocolError;
use thiserror::Error;

use crate::vectors::VectorError;

/// Every failure the CLI reports. The exit code depends only on the variant.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, unreadable or mistyped inputs.
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Envelope(#[from] EnvelopeError),
    /// Structurally valid inputs that the scheme rejects.
    #[error(transparent)]
    Scheme(#[from] HtpreError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    /// A result that could not be decoded as a small integer.
    #[error("{0}")]
    Decode(AlgebraError),
    #[error(transparent)]
    Vectors(#[from] VectorError),
    /// A check over a completed run failed.
    #[error("{0}")]
    Verification(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    /// 0 success, 1 verification or computation failure, 2 usage or type
    /// error.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Envelope(_) | CliError::Io { .. } => 2,
            // the scheme only rejects inputs, never a well-formed computation
            CliError::Scheme(_) => 2,
            CliError::Vectors(VectorError::Malformed(_)) => 2,
            CliError::Vectors(_) => 1,
            CliError::Protocol(_) | CliError::Decode(_) | CliError::Verification(_) => 1,
        }
    }
}

impl From<AlgebraError> for CliError {
    fn from(e: AlgebraError) -> Self {
        match e {
            AlgebraError::NotFound { .. } => CliError::Decode(e),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<CliError> for ExitCode {
    fn from(e: CliError) -> Self {
        ExitCode::from(e.exit_code())
    }
}
