//! Balance views that keep revocable value apart from settled value.

use serde::{Deserialize, Serialize};

use super::reject::RejectReason;
use super::state::LedgerState;
use crate::address::Address;
use crate::amount::Amount;
use crate::tx::TxId;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PendingView {
    pub tx: TxId,
    /// Destination for outgoing entries, source vault for incoming ones.
    pub counterparty: Address,
    pub amount: Amount,
    pub maturity_height: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PendingSummary {
    pub total: Amount,
    pub entries: Vec<PendingView>,
}

impl PendingSummary {
    fn push(&mut self, view: PendingView) {
        self.total = self
            .total
            .checked_add(view.amount)
            .expect("pending sum bounded by issuance");
        self.entries.push(view);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalanceReport {
    pub address: Address,
    pub height: u64,
    /// Settled value the account can move now.
    pub spendable: Amount,
    /// Revocable transfers this vault has issued that are still in flight.
    pub pending_out: PendingSummary,
    /// Revocable transfers addressed to this account that have not matured.
    pub pending_in: PendingSummary,
}

impl LedgerState {
    pub fn balance_query(&self, addr: &Address) -> Result<BalanceReport, RejectReason> {
        let acct = self.account(addr).ok_or(RejectReason::UnknownAccount)?;
        let mut pending_out = PendingSummary::default();
        if let Some(vault) = &acct.vault {
            for p in vault.live_pending() {
                pending_out.push(PendingView {
                    tx: p.source_tx,
                    counterparty: p.dest,
                    amount: p.amount,
                    maturity_height: p.maturity_height,
                });
            }
        }
        let mut pending_in = PendingSummary::default();
        for other in self.accounts() {
            let Some(vault) = &other.vault else { continue };
            for p in vault.live_pending().filter(|p| p.dest == *addr) {
                pending_in.push(PendingView {
                    tx: p.source_tx,
                    counterparty: other.address,
                    amount: p.amount,
                    maturity_height: p.maturity_height,
                });
            }
        }
        Ok(BalanceReport {
            address: *addr,
            height: self.height(),
            spendable: acct.spendable,
            pending_out,
            pending_in,
        })
    }
}
