//! The ledger state machine.
//!
//! Every transaction is checked in full by [`LedgerState::validate`] before
//! [`LedgerState::apply`] touches anything, so a rejected transaction has
//! no effect at all. Revocable payments debit the vault at issuance and
//! park the amount in the vault's pending list; the destination is credited
//! only when [`LedgerState::mature_pending`] runs at the maturity height,
//! which happens before any transaction of that block. A revoke therefore
//! succeeds only at heights strictly below maturity.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::account::{Account, PendingTransfer, TransferStatus, VaultState};
use super::reject::RejectReason;
use crate::address::{AccountKind, Address};
use crate::amount::Amount;
use crate::codec::CanonicalWriter;
use crate::crypto::{PublicKey, SignatureScheme};
use crate::tx::{Payload, Transaction, TxId, TxKind};

pub const DEFAULT_THETA_MAX: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineParams {
    /// Upper bound on a revocable payment's delay, in blocks.
    pub theta_max: u64,
    pub scheme: SignatureScheme,
}

impl Default for EngineParams {
    fn default() -> Self {
        EngineParams {
            theta_max: DEFAULT_THETA_MAX,
            scheme: SignatureScheme::Ed25519,
        }
    }
}

pub type StateDigest = [u8; 32];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LedgerState {
    params: EngineParams,
    height: u64,
    accounts: BTreeMap<Address, Account>,
    issued: Amount,
    /// Revocable payment id -> owning vault.
    revocable_index: HashMap<TxId, Address>,
    /// Maturity height -> revocable payment ids maturing then.
    maturity_queue: BTreeMap<u64, Vec<TxId>>,
}

impl LedgerState {
    pub fn new(params: EngineParams) -> Self {
        LedgerState {
            params,
            height: 0,
            accounts: BTreeMap::new(),
            issued: Amount::ZERO,
            revocable_index: HashMap::new(),
            maturity_queue: BTreeMap::new(),
        }
    }

    pub fn params(&self) -> &EngineParams {
        &self.params
    }

    pub fn height(&self) -> u64 {
        self.height
    }

    pub fn account(&self, addr: &Address) -> Option<&Account> {
        self.accounts.get(addr)
    }

    /// Accounts in address order.
    pub fn accounts(&self) -> impl Iterator<Item = &Account> {
        self.accounts.values()
    }

    pub fn total_issued(&self) -> Amount {
        self.issued
    }

    /// Spendable balances plus live pending transfers across all accounts.
    /// Equals [`Self::total_issued`] in every reachable state.
    pub fn total_value(&self) -> u128 {
        self.accounts.values().map(Account::owned_total).sum()
    }

    /// Locates a pending record by its revocable-payment id.
    pub fn pending_transfer(&self, id: &TxId) -> Option<(&Address, &PendingTransfer)> {
        let vault = self.revocable_index.get(id)?;
        let entry = self
            .accounts
            .get(vault)?
            .vault
            .as_ref()?
            .pending
            .iter()
            .find(|p| p.source_tx == *id)?;
        Some((vault, entry))
    }

    /// Moves the clock to `height` and matures everything due. Heights
    /// never go backwards.
    pub fn begin_block(&mut self, height: u64) -> Vec<TxId> {
        assert!(
            height >= self.height,
            "height went backwards: {} -> {height}",
            self.height
        );
        self.height = height;
        self.mature_pending(height)
    }

    /// Credits destinations of every live transfer with
    /// `maturity_height <= height`. Idempotent for a given height.
    pub fn mature_pending(&mut self, height: u64) -> Vec<TxId> {
        let later = self.maturity_queue.split_off(&(height + 1));
        let due = std::mem::replace(&mut self.maturity_queue, later);
        let mut matured = Vec::new();
        for id in due.into_values().flatten() {
            let Some(vault_addr) = self.revocable_index.get(&id).copied() else {
                continue;
            };
            let vault = self
                .accounts
                .get_mut(&vault_addr)
                .and_then(|a| a.vault.as_mut())
                .expect("indexed vault exists");
            let Some(entry) = vault
                .pending
                .iter_mut()
                .find(|p| p.source_tx == id && p.is_live())
            else {
                continue;
            };
            entry.status = TransferStatus::Matured;
            let (dest, amount) = (entry.dest, entry.amount);
            self.credit(&dest, amount);
            matured.push(id);
        }
        matured
    }

    /// Checks `tx` against the current state at the current height.
    pub fn validate(&self, tx: &Transaction) -> Result<(), RejectReason> {
        if !tx.sender_kind_ok() {
            return Err(RejectReason::WrongAccountKind);
        }
        match &tx.payload {
            Payload::Basic { amount } => self.validate_basic(*amount),
            Payload::AccountSet {
                pubkey, retrieval, ..
            } => self.validate_account_set(tx, pubkey, retrieval.as_ref()),
            _ => {
                let sender = self.authorized_sender(tx)?;
                self.validate_body(tx, sender)
            }
        }
    }

    /// Validates, then applies. On error the state is untouched.
    pub fn apply(&mut self, tx: &Transaction) -> Result<(), RejectReason> {
        self.validate(tx)?;
        match &tx.payload {
            Payload::Basic { amount } => self.apply_basic(&tx.from, *amount),
            Payload::IrrevocablePay { to, amount } => {
                self.apply_irrevocable_pay(&tx.from, to, *amount)
            }
            Payload::AccountSet { pubkey, label, .. } => {
                self.apply_account_set(&tx.from, pubkey, label.as_deref())
            }
            Payload::VaultCreate {
                vault_pubkey,
                retrieval,
                amount,
            } => self.apply_vault_create(&tx.from, vault_pubkey, retrieval, *amount),
            Payload::RevocablePay { to, amount, delay } => {
                self.apply_revocable_pay(tx.id(), &tx.from, to, *amount, *delay)
            }
            Payload::Revoke { target } => self.apply_revoke(&tx.from, target),
            Payload::VaultClear { close } => self.apply_vault_clear(&tx.from, *close),
        }
        if tx.kind() != TxKind::Basic {
            self.account_mut(&tx.from).nonce += 1;
        }
        Ok(())
    }

    /// SHA-256 over accounts in address order. The height is not part of the
    /// digest: an empty block with no maturities leaves it unchanged.
    pub fn state_hash(&self) -> StateDigest {
        let mut w = CanonicalWriter::new();
        w.u64(self.accounts.len() as u64);
        for acct in self.accounts.values() {
            encode_account(&mut w, acct);
        }
        Sha256::digest(w.finish()).into()
    }

    // ---- validation ----

    fn validate_basic(&self, amount: Amount) -> Result<(), RejectReason> {
        if self.height != 0 {
            return Err(RejectReason::IssuanceOutsideGenesis);
        }
        self.issued
            .checked_add(amount)
            .map(|_| ())
            .ok_or(RejectReason::AmountOverflow)
    }

    fn validate_account_set(
        &self,
        tx: &Transaction,
        pubkey: &PublicKey,
        retrieval: Option<&Address>,
    ) -> Result<(), RejectReason> {
        let existing = self.accounts.get(&tx.from);
        if existing.is_none() && tx.from.kind() == AccountKind::Vault {
            return Err(RejectReason::UnknownAccount);
        }
        if existing.is_some_and(Account::is_closed) {
            return Err(RejectReason::VaultClosed);
        }
        if Address::derive(pubkey, tx.from.kind()) != tx.from {
            return Err(RejectReason::KeyMismatch);
        }
        if !tx.verify_with(self.params.scheme, pubkey) {
            return Err(RejectReason::BadSignature);
        }
        if tx.nonce != existing.map_or(0, |a| a.nonce) {
            return Err(RejectReason::BadNonce);
        }
        if let Some(wanted) = retrieval {
            let vault = existing
                .and_then(|a| a.vault.as_ref())
                .ok_or(RejectReason::WrongAccountKind)?;
            if vault.retrieval != *wanted {
                return Err(RejectReason::RetrievalRebind);
            }
        }
        Ok(())
    }

    fn authorized_sender(&self, tx: &Transaction) -> Result<&Account, RejectReason> {
        let sender = self
            .accounts
            .get(&tx.from)
            .ok_or(RejectReason::UnknownAccount)?;
        if sender.is_closed() {
            return Err(RejectReason::VaultClosed);
        }
        let pubkey = sender.pubkey.ok_or(RejectReason::KeyNotRegistered)?;
        if !tx.verify_with(self.params.scheme, &pubkey) {
            return Err(RejectReason::BadSignature);
        }
        if tx.nonce != sender.nonce {
            return Err(RejectReason::BadNonce);
        }
        Ok(sender)
    }

    fn validate_body(&self, tx: &Transaction, sender: &Account) -> Result<(), RejectReason> {
        match &tx.payload {
            Payload::IrrevocablePay { to, amount } => {
                self.check_receiver(to)?;
                check_funds(sender, *amount)
            }
            Payload::VaultCreate {
                vault_pubkey,
                retrieval,
                amount,
            } => {
                let vault_addr = Address::derive(vault_pubkey, AccountKind::Vault);
                if self.accounts.contains_key(&vault_addr) {
                    return Err(RejectReason::DuplicateAddress);
                }
                if *retrieval == vault_addr {
                    return Err(RejectReason::SelfRetrieval);
                }
                self.check_receiver(retrieval)?;
                check_funds(sender, *amount)
            }
            Payload::RevocablePay { to, amount, delay } => {
                let vault = sender
                    .vault
                    .as_ref()
                    .ok_or(RejectReason::WrongAccountKind)?;
                if vault.frozen {
                    return Err(RejectReason::VaultFrozen);
                }
                if !(1..=self.params.theta_max).contains(delay) {
                    return Err(RejectReason::DelayOutOfRange);
                }
                self.check_receiver(to)?;
                check_funds(sender, *amount)
            }
            Payload::Revoke { target } => {
                let owner = self
                    .revocable_index
                    .get(target)
                    .ok_or(RejectReason::UnknownTargetTx)?;
                if *owner != tx.from {
                    return Err(RejectReason::WrongVault);
                }
                let (_, entry) = self
                    .pending_transfer(target)
                    .ok_or(RejectReason::UnknownTargetTx)?;
                match entry.status {
                    TransferStatus::Revoked => Err(RejectReason::TargetNotPending),
                    TransferStatus::Matured => Err(RejectReason::RevokeWindowExpired),
                    TransferStatus::Pending if !entry.revocable_at(self.height) => {
                        Err(RejectReason::RevokeWindowExpired)
                    }
                    TransferStatus::Pending => Ok(()),
                }
            }
            Payload::VaultClear { close } => {
                let vault = sender
                    .vault
                    .as_ref()
                    .ok_or(RejectReason::WrongAccountKind)?;
                if *close && vault.live_pending().next().is_some() {
                    return Err(RejectReason::PendingTransfersExist);
                }
                Ok(())
            }
            Payload::Basic { .. } | Payload::AccountSet { .. } => {
                unreachable!("handled before sender authorization")
            }
        }
    }

    fn check_receiver(&self, addr: &Address) -> Result<(), RejectReason> {
        let acct = self
            .accounts
            .get(addr)
            .ok_or(RejectReason::UnknownAccount)?;
        if acct.is_closed() {
            return Err(RejectReason::VaultClosed);
        }
        Ok(())
    }

    // ---- application; callers have validated ----

    fn account_mut(&mut self, addr: &Address) -> &mut Account {
        self.accounts
            .get_mut(addr)
            .expect("validated account exists")
    }

    fn vault_mut(&mut self, addr: &Address) -> &mut VaultState {
        self.account_mut(addr)
            .vault
            .as_mut()
            .expect("validated vault account")
    }

    // Supply is capped at u64::MAX at issuance and conserved, so no balance
    // can overflow.
    fn credit(&mut self, addr: &Address, amount: Amount) {
        let acct = self.account_mut(addr);
        acct.spendable = acct
            .spendable
            .checked_add(amount)
            .expect("balance bounded by total issuance");
    }

    fn debit(&mut self, addr: &Address, amount: Amount) {
        let acct = self.account_mut(addr);
        acct.spendable = acct
            .spendable
            .checked_sub(amount)
            .expect("validated sufficient balance");
    }

    fn apply_basic(&mut self, to: &Address, amount: Amount) {
        self.accounts
            .entry(*to)
            .or_insert_with(|| Account::standard(*to));
        self.issued = self.issued.checked_add(amount).expect("validated issuance");
        self.credit(to, amount);
    }

    fn apply_irrevocable_pay(&mut self, from: &Address, to: &Address, amount: Amount) {
        self.debit(from, amount);
        self.credit(to, amount);
    }

    fn apply_account_set(&mut self, from: &Address, pubkey: &PublicKey, label: Option<&str>) {
        let acct = self
            .accounts
            .entry(*from)
            .or_insert_with(|| Account::standard(*from));
        acct.pubkey = Some(*pubkey);
        if let Some(label) = label {
            acct.label = Some(label.to_owned());
        }
    }

    fn apply_vault_create(
        &mut self,
        from: &Address,
        vault_pubkey: &PublicKey,
        retrieval: &Address,
        amount: Amount,
    ) {
        let vault_addr = Address::derive(vault_pubkey, AccountKind::Vault);
        self.debit(from, amount);
        self.accounts.insert(
            vault_addr,
            Account::vault(vault_addr, *vault_pubkey, *retrieval),
        );
        self.credit(&vault_addr, amount);
    }

    fn apply_revocable_pay(
        &mut self,
        id: TxId,
        from: &Address,
        to: &Address,
        amount: Amount,
        delay: u64,
    ) {
        let init_height = self.height;
        let maturity_height = init_height + delay;
        self.debit(from, amount);
        self.vault_mut(from).pending.push(PendingTransfer {
            source_tx: id,
            amount,
            dest: *to,
            init_height,
            maturity_height,
            status: TransferStatus::Pending,
        });
        self.revocable_index.insert(id, *from);
        self.maturity_queue
            .entry(maturity_height)
            .or_default()
            .push(id);
    }

    fn apply_revoke(&mut self, from: &Address, target: &TxId) {
        let vault = self.vault_mut(from);
        vault.frozen = true;
        let retrieval = vault.retrieval;
        let entry = vault
            .pending
            .iter_mut()
            .find(|p| p.source_tx == *target)
            .expect("validated revoke target");
        entry.status = TransferStatus::Revoked;
        let amount = entry.amount;
        self.credit(&retrieval, amount);
    }

    fn apply_vault_clear(&mut self, from: &Address, close: bool) {
        let height = self.height;
        let vault = self.vault_mut(from);
        let mut cleared = Vec::new();
        vault.pending.retain(|p| {
            if p.status.is_terminal() {
                cleared.push(p.source_tx);
                false
            } else {
                true
            }
        });
        vault.clear_height = height;
        let retrieval = vault.retrieval;
        if close {
            vault.closed = true;
        }
        for id in cleared {
            self.revocable_index.remove(&id);
        }
        if close {
            let balance = self.account_mut(from).spendable;
            self.debit(from, balance);
            self.credit(&retrieval, balance);
        }
    }
}

fn check_funds(sender: &Account, amount: Amount) -> Result<(), RejectReason> {
    if sender.spendable < amount {
        Err(RejectReason::InsufficientSpendable)
    } else {
        Ok(())
    }
}

fn encode_account(w: &mut CanonicalWriter, a: &Account) {
    w.address(&a.address)
        .option(a.pubkey.as_ref(), |w, pk| {
            w.pubkey(pk);
        })
        .u64(a.nonce)
        .amount(a.spendable)
        .option(a.label.as_ref(), |w, l| {
            w.str(l);
        })
        .option(a.vault.as_ref(), |w, v| {
            w.address(&v.retrieval)
                .u64(v.clear_height)
                .bool(v.frozen)
                .bool(v.closed)
                .u32(v.pending.len() as u32);
            for p in &v.pending {
                w.str(p.source_tx.prefix().as_str())
                    .raw(p.source_tx.hash())
                    .amount(p.amount)
                    .address(&p.dest)
                    .u64(p.init_height)
                    .u64(p.maturity_height)
                    .u8(p.status.tag());
            }
        });
}
