use std::path::PathBuf;

use ckm_core::model::Violation;
use ckm_core::Error;

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum ExitCode {
    Success = 0,
    Usage = 1,
    InvalidInstance = 2,
    Infeasible = 3,
    VerifierFailure = 4,
    NumericalMargin = 5,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("cannot parse {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },

    #[error("invalid instance: {0}")]
    Format(String),

    #[error("verifier rejected {context}: {detail}")]
    Verifier { context: String, detail: String },

    #[error("generator gave up after {attempts} draws: {reason}")]
    Generator { attempts: usize, reason: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::Usage,
            CliError::Read { .. } | CliError::Write { .. } | CliError::Csv(_) => ExitCode::Usage,
            CliError::Parse { .. } | CliError::Format(_) => ExitCode::InvalidInstance,
            CliError::Generator { .. } => ExitCode::Infeasible,
            CliError::Verifier { .. } => ExitCode::VerifierFailure,
            CliError::Core(e) => core_exit_code(e),
        }
    }
}

fn core_exit_code(e: &Error) -> ExitCode {
    match e {
        Error::AlphaTooSmall(_) | Error::TooLarge { .. } => ExitCode::Usage,
        // An otherwise well-formed instance whose only defect is Σd > kM
        // cannot be served at all.
        Error::InvalidInstance(report)
            if report
                .violations
                .iter()
                .all(|v| matches!(v, Violation::DemandExceedsCapacity { .. })) =>
        {
            ExitCode::Infeasible
        }
        Error::InvalidInstance(_) | Error::Dimension { .. } => ExitCode::InvalidInstance,
        Error::Infeasible | Error::Unbounded => ExitCode::Infeasible,
        Error::Internal(_) | Error::Precondition(_) => ExitCode::VerifierFailure,
        Error::NumericalMargin(_) | Error::IterationLimit(_) => ExitCode::NumericalMargin,
    }
}
