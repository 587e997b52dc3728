use std::io;
use std::path::Path;

use thiserror::Error;
use vaultchain_core::chain::{ChainError, GenesisError, ReplayError, SubmitError};
use vaultchain_core::RejectReason;

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECTED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INTEGRITY: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments, missing home, wrong passphrase, lock held elsewhere.
    #[error("{0}")]
    Usage(String),
    /// The ledger said no. `code` is a reject code or a CLI-level code such
    /// as `duplicate-transaction`.
    #[error("rejected: {code}{}", detail.as_deref().map(|d| format!(" ({d})")).unwrap_or_default())]
    Rejected {
        code: String,
        detail: Option<String>,
    },
    /// Ledger or home contents do not verify.
    #[error("integrity failure: {0}")]
    Integrity(String),
    #[error("{context}: {source}")]
    Io { context: String, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Rejected { .. } => EXIT_REJECTED,
            CliError::Integrity(_) | CliError::Io { .. } => EXIT_INTEGRITY,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn rejected(code: impl Into<String>, detail: impl Into<String>) -> Self {
        CliError::Rejected {
            code: code.into(),
            detail: Some(detail.into()),
        }
    }

    pub fn io(context: impl AsRef<Path>, source: io::Error) -> Self {
        CliError::Io {
            context: context.as_ref().display().to_string(),
            source,
        }
    }

    /// Reject code, when this is a rejection.
    pub fn reject_code(&self) -> Option<&str> {
        match self {
            CliError::Rejected { code, .. } => Some(code),
            _ => None,
        }
    }
}

impl From<RejectReason> for CliError {
    fn from(r: RejectReason) -> Self {
        CliError::Rejected {
            code: r.code().to_owned(),
            detail: None,
        }
    }
}

impl From<SubmitError> for CliError {
    fn from(e: SubmitError) -> Self {
        match e {
            SubmitError::Rejected(r) => r.into(),
            SubmitError::Duplicate(id) => {
                CliError::rejected("duplicate-transaction", id.to_string())
            }
            SubmitError::Malformed(m) => CliError::Usage(format!("malformed transaction: {m}")),
        }
    }
}

impl From<ReplayError> for CliError {
    fn from(e: ReplayError) -> Self {
        match e {
            ReplayError::Io(source) => CliError::Io {
                context: "reading ledger".into(),
                source,
            },
            other => CliError::Integrity(other.to_string()),
        }
    }
}

impl From<GenesisError> for CliError {
    fn from(e: GenesisError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<ChainError> for CliError {
    fn from(e: ChainError) -> Self {
        match e {
            ChainError::Genesis(g) => g.into(),
            ChainError::Replay(r) => r.into(),
            ChainError::Io(source) => CliError::Io {
                context: "writing ledger".into(),
                source,
            },
        }
    }
}
