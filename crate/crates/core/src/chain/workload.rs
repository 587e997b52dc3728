//! Seeded random transaction workloads for tests, benchmarks, and demos.
//!
//! The generator keeps a scratch copy of the state so that most of what it
//! emits is valid, then deliberately mixes in overspends, expired or
//! repeated revokes, zero delays, and forged signatures so blocks carry
//! rejection receipts too.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::GenesisConfig;
use crate::address::{AccountKind, Address};
use crate::amount::Amount;
use crate::crypto::{KeyPair, SignatureScheme};
use crate::engine::LedgerState;
use crate::tx::{Payload, Transaction, TxId};

#[derive(Debug, Clone)]
pub struct WorkloadConfig {
    pub accounts: usize,
    pub seed: u64,
    pub scheme: SignatureScheme,
    pub initial_balance: u64,
    pub max_delay: u64,
    pub txs_per_block: usize,
}

impl Default for WorkloadConfig {
    fn default() -> Self {
        WorkloadConfig {
            accounts: 50,
            seed: 0,
            scheme: SignatureScheme::Ed25519,
            initial_balance: 1_000_000,
            max_delay: 8,
            txs_per_block: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Register,
    CreateVaults,
    Random,
}

pub struct Workload {
    cfg: WorkloadConfig,
    rng: ChaCha8Rng,
    keys: Vec<KeyPair>,
    phase: Phase,
    revocable: Vec<(Address, TxId)>,
}

impl Workload {
    pub fn new(cfg: WorkloadConfig) -> Self {
        assert!(cfg.accounts >= 2, "workload needs at least two accounts");
        let keys = (0..cfg.accounts)
            .map(|i| {
                let mut h = Sha256::new();
                h.update(b"workload-key");
                h.update(cfg.seed.to_be_bytes());
                h.update((i as u64).to_be_bytes());
                KeyPair::from_seed(cfg.scheme, h.finalize().into())
            })
            .collect();
        Workload {
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            cfg,
            keys,
            phase: Phase::Register,
            revocable: Vec::new(),
        }
    }

    pub fn keys(&self) -> &[KeyPair] {
        &self.keys
    }

    pub fn standard(&self, i: usize) -> Address {
        Address::derive(self.keys[i].public(), AccountKind::Standard)
    }

    pub fn vault(&self, i: usize) -> Address {
        Address::derive(self.keys[i].public(), AccountKind::Vault)
    }

    pub fn genesis(&self, chain_id: &str) -> GenesisConfig {
        let mut cfg = GenesisConfig::new(chain_id);
        cfg.signature_scheme = self.cfg.scheme;
        cfg.theta_max = self.cfg.max_delay.max(1);
        for i in 0..self.keys.len() {
            cfg = cfg.allocate(self.standard(i), self.cfg.initial_balance);
        }
        cfg
    }

    /// Transactions for the block after `state`'s height.
    pub fn next_block(&mut self, state: &LedgerState) -> Vec<Transaction> {
        let mut scratch = state.clone();
        scratch.begin_block(state.height() + 1);
        let mut out = Vec::new();
        match self.phase {
            Phase::Register => {
                for i in 0..self.keys.len() {
                    let tx = self.sign_next(
                        &scratch,
                        i,
                        self.standard(i),
                        Payload::AccountSet {
                            pubkey: *self.keys[i].public(),
                            label: None,
                            retrieval: None,
                        },
                    );
                    let _ = scratch.apply(&tx);
                    out.push(tx);
                }
                self.phase = Phase::CreateVaults;
            }
            Phase::CreateVaults => {
                let n = self.keys.len();
                for i in (0..n).step_by(2) {
                    let amount = scratch
                        .account(&self.standard(i))
                        .map_or(0, |a| a.spendable.atoms() / 2);
                    let tx = self.sign_next(
                        &scratch,
                        i,
                        self.standard(i),
                        Payload::VaultCreate {
                            vault_pubkey: *self.keys[i].public(),
                            retrieval: self.standard((i + 1) % n),
                            amount: Amount::new(amount),
                        },
                    );
                    let _ = scratch.apply(&tx);
                    out.push(tx);
                }
                self.phase = Phase::Random;
            }
            Phase::Random => {
                for _ in 0..self.cfg.txs_per_block {
                    let tx = self.random_tx(&scratch);
                    if scratch.apply(&tx).is_ok() {
                        if let Payload::RevocablePay { .. } = tx.payload {
                            self.revocable.push((tx.from, tx.id()));
                        }
                    }
                    out.push(tx);
                }
                if self.revocable.len() > 256 {
                    self.revocable.drain(..128);
                }
            }
        }
        out
    }

    fn sign_next(
        &self,
        scratch: &LedgerState,
        signer: usize,
        from: Address,
        payload: Payload,
    ) -> Transaction {
        let nonce = scratch.account(&from).map_or(0, |a| a.nonce);
        Transaction::unsigned(from, nonce, payload).sign(&self.keys[signer])
    }

    fn random_amount(&mut self, spendable: u64) -> Amount {
        // Up to 10% above the balance, so some payments overspend.
        let cap = spendable + spendable / 10 + 1;
        Amount::new(self.rng.random_range(0..=cap))
    }

    fn random_destination(&mut self, scratch: &LedgerState) -> Address {
        let i = self.rng.random_range(0..self.keys.len());
        let vault = self.vault(i);
        if self.rng.random_bool(0.25) && scratch.account(&vault).is_some() {
            vault
        } else {
            self.standard(i)
        }
    }

    fn random_tx(&mut self, scratch: &LedgerState) -> Transaction {
        let n = self.keys.len();
        let owner = self.rng.random_range(0..n);
        let vault_owner = owner & !1;
        let roll: f64 = self.rng.random();
        if roll < 0.35 {
            let from = self.standard(owner);
            let spendable = scratch.account(&from).map_or(0, |a| a.spendable.atoms());
            let to = self.random_destination(scratch);
            let amount = self.random_amount(spendable);
            self.sign_next(scratch, owner, from, Payload::IrrevocablePay { to, amount })
        } else if roll < 0.70 {
            let from = self.vault(vault_owner);
            let spendable = scratch.account(&from).map_or(0, |a| a.spendable.atoms());
            let to = self.random_destination(scratch);
            let amount = self.random_amount(spendable / 4);
            let delay = if self.rng.random_bool(0.02) {
                0
            } else {
                self.rng.random_range(1..=self.cfg.max_delay.max(1))
            };
            self.sign_next(
                scratch,
                vault_owner,
                from,
                Payload::RevocablePay { to, amount, delay },
            )
        } else if roll < 0.80 {
            // Revoke something recent; may be matured, revoked, or foreign.
            match self.revocable.choose(&mut self.rng).copied() {
                Some((vault, target)) => {
                    let signer = self
                        .keys
                        .iter()
                        .position(|k| Address::derive(k.public(), AccountKind::Vault) == vault)
                        .expect("workload vault");
                    self.sign_next(scratch, signer, vault, Payload::Revoke { target })
                }
                None => self.sign_next(
                    scratch,
                    vault_owner,
                    self.vault(vault_owner),
                    Payload::VaultClear { close: false },
                ),
            }
        } else if roll < 0.88 {
            let close = self.rng.random_bool(0.05);
            self.sign_next(
                scratch,
                vault_owner,
                self.vault(vault_owner),
                Payload::VaultClear { close },
            )
        } else if roll < 0.94 {
            let label = format!("acct-{}", self.rng.random_range(0..1000u32));
            let from = if self.rng.random_bool(0.5) {
                self.vault(vault_owner)
            } else {
                self.standard(vault_owner)
            };
            self.sign_next(
                scratch,
                vault_owner,
                from,
                Payload::AccountSet {
                    pubkey: *self.keys[vault_owner].public(),
                    label: Some(label),
                    retrieval: None,
                },
            )
        } else {
            // Signed by the wrong key.
            let from = self.standard(owner);
            let forger = (owner + 1) % n;
            let to = self.standard(forger);
            self.sign_next(
                scratch,
                forger,
                from,
                Payload::IrrevocablePay {
                    to,
                    amount: Amount::new(1),
                },
            )
        }
    }
}
