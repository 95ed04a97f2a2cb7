use std::path::PathBuf;

use cosetforge::addcomb::AddCombError;
use cosetforge::decompose::DecomposeError;
use cosetforge::func::FunctionError;
use cosetforge::group::GroupError;
use cosetforge::io::IoError;
use cosetforge::spectral::SpectralError;
use cosetforge::tree::TreeError;
use serde_json::{json, Value};
use thiserror::Error;

/// Every failure the binary reports, each with its own exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot write {path}: {message}")]
    Write { path: PathBuf, message: String },
    #[error(transparent)]
    Io(IoError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Function(#[from] FunctionError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    AddComb(#[from] AddCombError),
    #[error("unknown suite {0:?}; expected one of all, split, banach, coset-norm, cover, cs, ct")]
    SuiteUnknown(String),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("verification failed")]
    VerifyFailed(Value),
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        // surface wrapped library errors under their own codes
        match e {
            IoError::Group(e) => CliError::Group(e),
            IoError::Function(e) => CliError::Function(e),
            IoError::Tree(e) => CliError::Tree(e),
            IoError::Decompose(e) => CliError::Decompose(e),
            other => CliError::Io(other),
        }
    }
}

impl CliError {
    /// Process exit code; 2 is left to argument parsing.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Write { .. } => 3,
            CliError::Io(IoError::Read { .. }) => 3,
            CliError::Io(IoError::Parse { .. }) => 4,
            CliError::Io(IoError::UnknownGroup(_)) => 5,
            CliError::Io(_) => 4,
            CliError::Group(_) => 6,
            CliError::Function(_) => 7,
            CliError::Spectral(_) => 8,
            CliError::Decompose(_) => 9,
            CliError::Tree(_) => 10,
            CliError::AddComb(_) => 11,
            CliError::SuiteUnknown(_) => 12,
            CliError::NotPrime(_) => 13,
            CliError::Invalid(_) => 14,
            CliError::VerifyFailed(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Write { .. } | CliError::Io(IoError::Read { .. }) => "io",
            CliError::Io(IoError::UnknownGroup(_)) => "unknown_group",
            CliError::Io(_) => "parse",
            CliError::Group(_) => "group",
            CliError::Function(_) => "function",
            CliError::Spectral(_) => "spectral",
            CliError::Decompose(_) => "decompose",
            CliError::Tree(_) => "tree",
            CliError::AddComb(_) => "addcomb",
            CliError::SuiteUnknown(_) => "suite_unknown",
            CliError::NotPrime(_) => "not_prime",
            CliError::Invalid(_) => "invalid_argument",
            CliError::VerifyFailed(_) => "verify_failed",
        }
    }

    pub fn to_json(&self) -> Value {
        let mut body = json!({
            "kind": self.kind(),
            "code": self.exit_code(),
            "message": self.to_string(),
        });
        if let CliError::VerifyFailed(report) = self {
            body["report"] = report.clone();
        }
        json!({ "error": body })
    }
}
