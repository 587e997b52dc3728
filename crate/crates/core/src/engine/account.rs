use serde::{Deserialize, Serialize};

use crate::address::{AccountKind, Address};
use crate::amount::Amount;
use crate::crypto::PublicKey;
use crate::tx::TxId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransferStatus {
    Pending,
    Matured,
    Revoked,
}

impl TransferStatus {
    pub fn is_terminal(self) -> bool {
        !matches!(self, TransferStatus::Pending)
    }

    pub(crate) fn tag(self) -> u8 {
        match self {
            TransferStatus::Pending => 0,
            TransferStatus::Matured => 1,
            TransferStatus::Revoked => 2,
        }
    }
}

/// One revocable transfer in flight, or its terminal record until the vault
/// is cleared. The amount left the vault's spendable balance at issuance.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PendingTransfer {
    pub source_tx: TxId,
    pub amount: Amount,
    pub dest: Address,
    pub init_height: u64,
    pub maturity_height: u64,
    pub status: TransferStatus,
}

impl PendingTransfer {
    pub fn is_live(&self) -> bool {
        self.status == TransferStatus::Pending
    }

    /// A revoke at `height` is inside the window iff `height < maturity_height`.
    pub fn revocable_at(&self, height: u64) -> bool {
        self.is_live() && height < self.maturity_height
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VaultState {
    /// Receives every revoked transfer, and the balance when the vault closes.
    pub retrieval: Address,
    /// Height of the last vault clear; 0 if never cleared.
    pub clear_height: u64,
    /// Outgoing revocable transfers in issuance order.
    pub pending: Vec<PendingTransfer>,
    /// Set by the first successful revoke; blocks new revocable payments.
    pub frozen: bool,
    pub closed: bool,
}

impl VaultState {
    pub fn new(retrieval: Address) -> Self {
        VaultState {
            retrieval,
            clear_height: 0,
            pending: Vec::new(),
            frozen: false,
            closed: false,
        }
    }

    pub fn live_pending(&self) -> impl Iterator<Item = &PendingTransfer> {
        self.pending.iter().filter(|p| p.is_live())
    }

    pub fn pending_out_total(&self) -> Amount {
        Amount::new(self.live_pending().map(|p| p.amount.atoms()).sum())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Account {
    pub address: Address,
    pub pubkey: Option<PublicKey>,
    pub nonce: u64,
    pub spendable: Amount,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Present exactly when the address is a vault address.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vault: Option<VaultState>,
}

impl Account {
    pub fn standard(address: Address) -> Self {
        debug_assert_eq!(address.kind(), AccountKind::Standard);
        Account {
            address,
            pubkey: None,
            nonce: 0,
            spendable: Amount::ZERO,
            label: None,
            vault: None,
        }
    }

    pub fn vault(address: Address, pubkey: PublicKey, retrieval: Address) -> Self {
        debug_assert_eq!(address.kind(), AccountKind::Vault);
        Account {
            address,
            pubkey: Some(pubkey),
            nonce: 0,
            spendable: Amount::ZERO,
            label: None,
            vault: Some(VaultState::new(retrieval)),
        }
    }

    pub fn kind(&self) -> AccountKind {
        self.address.kind()
    }

    pub fn is_closed(&self) -> bool {
        self.vault.as_ref().is_some_and(|v| v.closed)
    }

    /// Spendable plus live outgoing transfers.
    pub fn owned_total(&self) -> u128 {
        u128::from(self.spendable.atoms())
            + self
                .vault
                .as_ref()
                .map_or(0, |v| u128::from(v.pending_out_total().atoms()))
    }
}
