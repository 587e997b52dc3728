//! Transaction validation and application, maturation, and balance queries.

mod account;
mod query;
mod reject;
mod state;

pub use account::{Account, PendingTransfer, TransferStatus, VaultState};
pub use query::{BalanceReport, PendingSummary, PendingView};
pub use reject::{Receipt, RejectReason, UnknownRejectCode};
pub use state::{EngineParams, LedgerState, StateDigest, DEFAULT_THETA_MAX};

#[cfg(test)]
mod tests;
