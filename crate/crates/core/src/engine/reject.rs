use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Why the engine refused a transaction. The kebab-case codes are stable:
/// they are persisted in block receipts and printed verbatim by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Error)]
pub enum RejectReason {
    #[error("bad-signature")]
    BadSignature,
    #[error("bad-nonce")]
    BadNonce,
    #[error("unknown-account")]
    UnknownAccount,
    #[error("wrong-account-kind")]
    WrongAccountKind,
    #[error("insufficient-spendable")]
    InsufficientSpendable,
    #[error("unknown-target-tx")]
    UnknownTargetTx,
    #[error("revoke-window-expired")]
    RevokeWindowExpired,
    #[error("vault-frozen")]
    VaultFrozen,
    #[error("self-retrieval")]
    SelfRetrieval,
    #[error("duplicate-address")]
    DuplicateAddress,
    #[error("delay-out-of-range")]
    DelayOutOfRange,
    /// Target already revoked.
    #[error("target-not-pending")]
    TargetNotPending,
    /// Revoke signed by a vault that does not own the target transfer.
    #[error("wrong-vault")]
    WrongVault,
    /// Closing a vault that still has transfers in flight.
    #[error("pending-transfers-exist")]
    PendingTransfersExist,
    #[error("retrieval-rebind")]
    RetrievalRebind,
    #[error("vault-closed")]
    VaultClosed,
    /// The public key does not hash to the sender address.
    #[error("key-mismatch")]
    KeyMismatch,
    /// The sender exists but never registered a public key.
    #[error("key-not-registered")]
    KeyNotRegistered,
    #[error("issuance-outside-genesis")]
    IssuanceOutsideGenesis,
    #[error("amount-overflow")]
    AmountOverflow,
}

impl RejectReason {
    pub const ALL: [RejectReason; 20] = [
        RejectReason::BadSignature,
        RejectReason::BadNonce,
        RejectReason::UnknownAccount,
        RejectReason::WrongAccountKind,
        RejectReason::InsufficientSpendable,
        RejectReason::UnknownTargetTx,
        RejectReason::RevokeWindowExpired,
        RejectReason::VaultFrozen,
        RejectReason::SelfRetrieval,
        RejectReason::DuplicateAddress,
        RejectReason::DelayOutOfRange,
        RejectReason::TargetNotPending,
        RejectReason::WrongVault,
        RejectReason::PendingTransfersExist,
        RejectReason::RetrievalRebind,
        RejectReason::VaultClosed,
        RejectReason::KeyMismatch,
        RejectReason::KeyNotRegistered,
        RejectReason::IssuanceOutsideGenesis,
        RejectReason::AmountOverflow,
    ];

    pub fn code(self) -> &'static str {
        match self {
            RejectReason::BadSignature => "bad-signature",
            RejectReason::BadNonce => "bad-nonce",
            RejectReason::UnknownAccount => "unknown-account",
            RejectReason::WrongAccountKind => "wrong-account-kind",
            RejectReason::InsufficientSpendable => "insufficient-spendable",
            RejectReason::UnknownTargetTx => "unknown-target-tx",
            RejectReason::RevokeWindowExpired => "revoke-window-expired",
            RejectReason::VaultFrozen => "vault-frozen",
            RejectReason::SelfRetrieval => "self-retrieval",
            RejectReason::DuplicateAddress => "duplicate-address",
            RejectReason::DelayOutOfRange => "delay-out-of-range",
            RejectReason::TargetNotPending => "target-not-pending",
            RejectReason::WrongVault => "wrong-vault",
            RejectReason::PendingTransfersExist => "pending-transfers-exist",
            RejectReason::RetrievalRebind => "retrieval-rebind",
            RejectReason::VaultClosed => "vault-closed",
            RejectReason::KeyMismatch => "key-mismatch",
            RejectReason::KeyNotRegistered => "key-not-registered",
            RejectReason::IssuanceOutsideGenesis => "issuance-outside-genesis",
            RejectReason::AmountOverflow => "amount-overflow",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown reject code {0:?}")]
pub struct UnknownRejectCode(pub String);

impl FromStr for RejectReason {
    type Err = UnknownRejectCode;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RejectReason::ALL
            .into_iter()
            .find(|r| r.code() == s)
            .ok_or_else(|| UnknownRejectCode(s.to_owned()))
    }
}

impl Serialize for RejectReason {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.code())
    }
}

impl<'de> Deserialize<'de> for RejectReason {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Outcome of one transaction inside a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Receipt {
    Applied,
    Rejected(RejectReason),
}

impl Receipt {
    pub fn is_applied(&self) -> bool {
        matches!(self, Receipt::Applied)
    }
}

impl fmt::Display for Receipt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Receipt::Applied => f.write_str("applied"),
            Receipt::Rejected(r) => write!(f, "rejected({r})"),
        }
    }
}

impl From<Result<(), RejectReason>> for Receipt {
    fn from(r: Result<(), RejectReason>) -> Self {
        match r {
            Ok(()) => Receipt::Applied,
            Err(e) => Receipt::Rejected(e),
        }
    }
}
