use std::collections::HashMap;

use sha2::{Digest, Sha256};

use super::*;
use crate::address::{AccountKind, Address};
use crate::amount::Amount;
use crate::crypto::{KeyPair, SignatureScheme};
use crate::tx::{Payload, Transaction, TxId};

struct Harness {
    st: LedgerState,
    keys: HashMap<&'static str, KeyPair>,
}

fn key(name: &str) -> KeyPair {
    KeyPair::from_seed(
        SignatureScheme::Null,
        Sha256::digest(name.as_bytes()).into(),
    )
}

fn std_addr(name: &str) -> Address {
    Address::derive(key(name).public(), AccountKind::Standard)
}

fn vlt_addr(name: &str) -> Address {
    Address::derive(key(name).public(), AccountKind::Vault)
}

impl Harness {
    fn genesis(allocs: &[(&'static str, u64)]) -> Self {
        let params = EngineParams {
            theta_max: DEFAULT_THETA_MAX,
            scheme: SignatureScheme::Null,
        };
        let mut h = Harness {
            st: LedgerState::new(params),
            keys: HashMap::new(),
        };
        for (name, amount) in allocs {
            h.keys.insert(name, key(name));
            let tx = Transaction::unsigned(
                std_addr(name),
                0,
                Payload::Basic {
                    amount: Amount::new(*amount),
                },
            );
            h.st.apply(&tx).unwrap();
        }
        for (name, _) in allocs {
            h.register(name).unwrap();
        }
        h
    }

    fn build(&self, signer: &str, from: Address, payload: Payload) -> Transaction {
        let nonce = self.st.account(&from).map_or(0, |a| a.nonce);
        Transaction::unsigned(from, nonce, payload).sign(&key(signer))
    }

    fn submit(
        &mut self,
        signer: &str,
        from: Address,
        payload: Payload,
    ) -> Result<TxId, RejectReason> {
        let tx = self.build(signer, from, payload);
        let before = self.st.clone();
        let res = self.st.apply(&tx);
        if res.is_err() {
            assert_eq!(self.st, before, "rejected tx mutated state");
        }
        res.map(|()| tx.id())
    }

    fn register(&mut self, name: &str) -> Result<TxId, RejectReason> {
        self.submit(
            name,
            std_addr(name),
            Payload::AccountSet {
                pubkey: *key(name).public(),
                label: None,
                retrieval: None,
            },
        )
    }

    fn pay(&mut self, from: &str, to: Address, amount: u64) -> Result<TxId, RejectReason> {
        self.submit(
            from,
            std_addr(from),
            Payload::IrrevocablePay {
                to,
                amount: Amount::new(amount),
            },
        )
    }

    fn create_vault(
        &mut self,
        owner: &str,
        retrieval: Address,
        amount: u64,
    ) -> Result<TxId, RejectReason> {
        self.submit(
            owner,
            std_addr(owner),
            Payload::VaultCreate {
                vault_pubkey: *key(owner).public(),
                retrieval,
                amount: Amount::new(amount),
            },
        )
    }

    fn rpay(
        &mut self,
        owner: &str,
        to: Address,
        amount: u64,
        delay: u64,
    ) -> Result<TxId, RejectReason> {
        self.submit(
            owner,
            vlt_addr(owner),
            Payload::RevocablePay {
                to,
                amount: Amount::new(amount),
                delay,
            },
        )
    }

    fn revoke(&mut self, owner: &str, target: TxId) -> Result<TxId, RejectReason> {
        self.submit(owner, vlt_addr(owner), Payload::Revoke { target })
    }

    fn clear(&mut self, owner: &str, close: bool) -> Result<TxId, RejectReason> {
        self.submit(owner, vlt_addr(owner), Payload::VaultClear { close })
    }

    fn advance_to(&mut self, height: u64) {
        for h in self.st.height() + 1..=height {
            self.st.begin_block(h);
            assert_eq!(
                self.st.total_value(),
                u128::from(self.st.total_issued().atoms())
            );
        }
    }

    fn spendable(&self, addr: Address) -> u64 {
        self.st.account(&addr).unwrap().spendable.atoms()
    }

    fn entry(&self, id: &TxId) -> PendingTransfer {
        self.st.pending_transfer(id).unwrap().1.clone()
    }
}

/// alice: 100 in a vault with retrieval bob; carol is a payee at 0.
fn vault_fixture() -> Harness {
    let mut h = Harness::genesis(&[("alice", 100), ("bob", 0), ("carol", 0)]);
    h.create_vault("alice", std_addr("bob"), 100).unwrap();
    h
}

#[test]
fn irrevocable_pay_arithmetic() {
    let mut h = Harness::genesis(&[("a", 100), ("b", 0)]);
    h.advance_to(1);
    h.pay("a", std_addr("b"), 40).unwrap();
    assert_eq!(h.spendable(std_addr("a")), 60);
    assert_eq!(h.spendable(std_addr("b")), 40);
}

#[test]
fn irrevocable_pay_zero_is_recorded() {
    let mut h = Harness::genesis(&[("a", 100), ("b", 0)]);
    let nonce = h.st.account(&std_addr("a")).unwrap().nonce;
    h.pay("a", std_addr("b"), 0).unwrap();
    assert_eq!(h.spendable(std_addr("a")), 100);
    assert_eq!(h.st.account(&std_addr("a")).unwrap().nonce, nonce + 1);
}

#[test]
fn irrevocable_pay_boundary() {
    let mut h = Harness::genesis(&[("a", 100), ("b", 0)]);
    assert_eq!(
        h.pay("a", std_addr("b"), 101),
        Err(RejectReason::InsufficientSpendable)
    );
    h.pay("a", std_addr("b"), 100).unwrap();
}

#[test]
fn irrevocable_pay_needs_existing_destination() {
    let mut h = Harness::genesis(&[("a", 100)]);
    assert_eq!(
        h.pay("a", std_addr("nobody"), 1),
        Err(RejectReason::UnknownAccount)
    );
}

#[test]
fn irrevocable_pay_from_vault_is_wrong_kind() {
    let mut h = vault_fixture();
    let r = h.submit(
        "alice",
        vlt_addr("alice"),
        Payload::IrrevocablePay {
            to: std_addr("carol"),
            amount: Amount::new(1),
        },
    );
    assert_eq!(r, Err(RejectReason::WrongAccountKind));
}

#[test]
fn vault_create_arithmetic() {
    let mut h = Harness::genesis(&[("alice", 100), ("bob", 0)]);
    h.create_vault("alice", std_addr("bob"), 70).unwrap();
    assert_eq!(h.spendable(vlt_addr("alice")), 70);
    assert_eq!(h.spendable(std_addr("alice")), 30);
    let v = h.st.account(&vlt_addr("alice")).unwrap();
    let vault = v.vault.as_ref().unwrap();
    assert_eq!(vault.retrieval, std_addr("bob"));
    assert!(vault.pending.is_empty());
    assert!(!vault.frozen);
}

#[test]
fn vault_create_self_retrieval() {
    let mut h = Harness::genesis(&[("alice", 100)]);
    assert_eq!(
        h.create_vault("alice", vlt_addr("alice"), 10),
        Err(RejectReason::SelfRetrieval)
    );
}

#[test]
fn vault_create_zero_and_duplicate() {
    let mut h = Harness::genesis(&[("alice", 100), ("bob", 0)]);
    h.create_vault("alice", std_addr("bob"), 0).unwrap();
    assert_eq!(h.spendable(vlt_addr("alice")), 0);
    assert_eq!(
        h.create_vault("alice", std_addr("bob"), 1),
        Err(RejectReason::DuplicateAddress)
    );
}

#[test]
fn vault_create_insufficient_and_unknown_retrieval() {
    let mut h = Harness::genesis(&[("alice", 100)]);
    assert_eq!(
        h.create_vault("alice", std_addr("ghost"), 1),
        Err(RejectReason::UnknownAccount)
    );
    h.register("bob").unwrap();
    assert_eq!(
        h.create_vault("alice", std_addr("bob"), 101),
        Err(RejectReason::InsufficientSpendable)
    );
}

#[test]
fn revocable_pay_deducts_at_issuance() {
    let mut h = vault_fixture();
    h.advance_to(10);
    let id = h.rpay("alice", std_addr("carol"), 30, 5).unwrap();
    assert_eq!(h.spendable(vlt_addr("alice")), 70);
    assert_eq!(h.spendable(std_addr("carol")), 0);
    let e = h.entry(&id);
    assert_eq!(e.init_height, 10);
    assert_eq!(e.maturity_height, 15);
    assert_eq!(e.status, TransferStatus::Pending);
    assert!(id.to_string().starts_with("REVOCABLEPAY-"));
}

#[test]
fn revocable_pay_cannot_spend_twice() {
    let mut h = vault_fixture();
    h.rpay("alice", std_addr("carol"), 60, 3).unwrap();
    assert_eq!(
        h.rpay("alice", std_addr("carol"), 60, 3),
        Err(RejectReason::InsufficientSpendable)
    );
}

#[test]
fn revocable_pay_delay_bounds() {
    let mut h = vault_fixture();
    assert_eq!(
        h.rpay("alice", std_addr("carol"), 1, 0),
        Err(RejectReason::DelayOutOfRange)
    );
    assert_eq!(
        h.rpay("alice", std_addr("carol"), 1, DEFAULT_THETA_MAX + 1),
        Err(RejectReason::DelayOutOfRange)
    );
    h.rpay("alice", std_addr("carol"), 1, DEFAULT_THETA_MAX)
        .unwrap();
}

#[test]
fn revocable_pay_from_standard_is_wrong_kind() {
    let mut h = vault_fixture();
    let r = h.submit(
        "carol",
        std_addr("carol"),
        Payload::RevocablePay {
            to: std_addr("bob"),
            amount: Amount::new(1),
            delay: 1,
        },
    );
    assert_eq!(r, Err(RejectReason::WrongAccountKind));
}

#[test]
fn revoke_inside_window_goes_to_retrieval() {
    let mut h = vault_fixture();
    h.advance_to(10);
    let id = h.rpay("alice", std_addr("carol"), 30, 5).unwrap();
    h.advance_to(12);
    let rid = h.revoke("alice", id).unwrap();
    assert!(rid.to_string().starts_with("REVOKE-"));
    assert_eq!(h.spendable(std_addr("bob")), 30);
    assert_eq!(h.spendable(std_addr("carol")), 0);
    assert_eq!(h.spendable(vlt_addr("alice")), 70);
    assert_eq!(h.entry(&id).status, TransferStatus::Revoked);
    // nothing arrives later either
    h.advance_to(20);
    assert_eq!(h.spendable(std_addr("carol")), 0);
    assert_eq!(h.spendable(std_addr("bob")), 30);
}

#[test]
fn revoke_twice_is_terminal() {
    let mut h = vault_fixture();
    let id = h.rpay("alice", std_addr("carol"), 30, 5).unwrap();
    h.revoke("alice", id).unwrap();
    assert_eq!(h.revoke("alice", id), Err(RejectReason::TargetNotPending));
    assert_eq!(h.spendable(std_addr("bob")), 30);
}

#[test]
fn revoke_at_maturity_is_expired() {
    let mut h = vault_fixture();
    h.advance_to(10);
    let id = h.rpay("alice", std_addr("carol"), 30, 5).unwrap();
    h.advance_to(15);
    assert_eq!(
        h.revoke("alice", id),
        Err(RejectReason::RevokeWindowExpired)
    );
    assert_eq!(h.spendable(std_addr("carol")), 30);
}

#[test]
fn revoke_window_check_without_maturation() {
    // validate() alone also refuses at height >= maturity, even if the
    // block's maturation phase has not yet run.
    let mut h = vault_fixture();
    let id = h.rpay("alice", std_addr("carol"), 30, 2).unwrap();
    let revoke = h.build("alice", vlt_addr("alice"), Payload::Revoke { target: id });
    let mut st = h.st.clone();
    st.begin_block(1);
    assert_eq!(st.validate(&revoke), Ok(()));
    let mut st = h.st.clone();
    st.begin_block(2);
    assert_eq!(st.validate(&revoke), Err(RejectReason::RevokeWindowExpired));
}

#[test]
fn revoke_same_block_as_pay() {
    let mut h = vault_fixture();
    h.advance_to(4);
    let id = h.rpay("alice", std_addr("carol"), 10, 1).unwrap();
    h.revoke("alice", id).unwrap();
    assert_eq!(h.spendable(std_addr("bob")), 10);
}

#[test]
fn revoke_unknown_and_wrong_vault() {
    let mut h = Harness::genesis(&[("alice", 100), ("bob", 50), ("carol", 0)]);
    h.create_vault("alice", std_addr("bob"), 100).unwrap();
    h.create_vault("bob", std_addr("carol"), 50).unwrap();
    let id = h.rpay("alice", std_addr("carol"), 10, 3).unwrap();
    assert_eq!(h.revoke("bob", id), Err(RejectReason::WrongVault));
    let bogus = TxId::new(crate::tx::TxPrefix::RevocablePay, [0; 32]);
    assert_eq!(h.revoke("alice", bogus), Err(RejectReason::UnknownTargetTx));
}

#[test]
fn freeze_after_revoke() {
    let mut h = vault_fixture();
    let a = h.rpay("alice", std_addr("carol"), 10, 5).unwrap();
    let b = h.rpay("alice", std_addr("carol"), 20, 5).unwrap();
    h.revoke("alice", a).unwrap();
    assert!(
        h.st.account(&vlt_addr("alice"))
            .unwrap()
            .vault
            .as_ref()
            .unwrap()
            .frozen
    );
    assert_eq!(
        h.rpay("alice", std_addr("carol"), 1, 5),
        Err(RejectReason::VaultFrozen)
    );
    // earlier transfers still need their own revoke
    h.revoke("alice", b).unwrap();
    assert_eq!(h.spendable(std_addr("bob")), 30);
}

#[test]
fn maturity_credits_destination_exactly_once() {
    let mut h = vault_fixture();
    h.advance_to(10);
    let id = h.rpay("alice", std_addr("carol"), 30, 5).unwrap();
    h.advance_to(14);
    assert_eq!(h.spendable(std_addr("carol")), 0);
    h.advance_to(15);
    assert_eq!(h.spendable(std_addr("carol")), 30);
    assert_eq!(h.entry(&id).status, TransferStatus::Matured);
    let before = h.st.clone();
    assert!(h.st.mature_pending(15).is_empty());
    assert_eq!(h.st, before);
    h.advance_to(30);
    assert_eq!(h.spendable(std_addr("carol")), 30);
}

#[test]
fn two_maturities_same_destination() {
    // Oracle: replay each transfer alone and sum the destination credits.
    let single = |amount| {
        let mut h = vault_fixture();
        h.advance_to(10);
        h.rpay("alice", std_addr("carol"), amount, 5).unwrap();
        h.advance_to(15);
        h.spendable(std_addr("carol"))
    };
    let expected = single(10) + single(20);

    let mut h = vault_fixture();
    h.advance_to(10);
    h.rpay("alice", std_addr("carol"), 10, 5).unwrap();
    h.rpay("alice", std_addr("carol"), 20, 5).unwrap();
    h.advance_to(15);
    assert_eq!(h.spendable(std_addr("carol")), expected);
    assert_eq!(expected, 30);
}

#[test]
fn vault_clear_filters_terminal_entries() {
    let mut h = vault_fixture();
    h.rpay("alice", std_addr("carol"), 5, 1).unwrap();
    h.rpay("alice", std_addr("carol"), 5, 1).unwrap();
    let live = h.rpay("alice", std_addr("carol"), 5, 50).unwrap();
    h.advance_to(7);
    h.clear("alice", false).unwrap();
    let vault =
        h.st.account(&vlt_addr("alice"))
            .unwrap()
            .vault
            .clone()
            .unwrap();
    assert_eq!(vault.pending.len(), 1);
    assert_eq!(vault.pending[0].source_tx, live);
    assert_eq!(vault.clear_height, 7);
    assert_eq!(h.st.total_value(), 100);
}

#[test]
fn vault_close_guard_and_sweep() {
    let mut h = vault_fixture();
    let id = h.rpay("alice", std_addr("carol"), 30, 5).unwrap();
    assert_eq!(
        h.clear("alice", true),
        Err(RejectReason::PendingTransfersExist)
    );
    h.advance_to(5);
    assert_eq!(h.entry(&id).status, TransferStatus::Matured);
    h.clear("alice", true).unwrap();
    assert_eq!(h.spendable(std_addr("bob")), 70);
    assert_eq!(h.spendable(vlt_addr("alice")), 0);
    assert!(h.st.account(&vlt_addr("alice")).unwrap().is_closed());
    assert_eq!(h.clear("alice", false), Err(RejectReason::VaultClosed));
    assert_eq!(
        h.pay("carol", vlt_addr("alice"), 1),
        Err(RejectReason::VaultClosed)
    );
}

#[test]
fn account_set_registers_key() {
    let mut h = Harness::genesis(&[("a", 10)]);
    // Fund an address whose owner has not registered yet.
    h.keys.insert("late", key("late"));
    let mut st = LedgerState::new(*h.st.params());
    st.apply(&Transaction::unsigned(
        std_addr("late"),
        0,
        Payload::Basic {
            amount: Amount::new(5),
        },
    ))
    .unwrap();
    st.apply(&Transaction::unsigned(
        std_addr("a"),
        0,
        Payload::Basic {
            amount: Amount::new(0),
        },
    ))
    .unwrap();
    h.st = st;
    assert_eq!(
        h.pay("late", std_addr("a"), 1),
        Err(RejectReason::KeyNotRegistered)
    );
    h.register("late").unwrap();
    h.pay("late", std_addr("a"), 1).unwrap();
}

#[test]
fn account_set_cannot_rebind_retrieval() {
    let mut h = vault_fixture();
    let r = h.submit(
        "alice",
        vlt_addr("alice"),
        Payload::AccountSet {
            pubkey: *key("alice").public(),
            label: None,
            retrieval: Some(std_addr("carol")),
        },
    );
    assert_eq!(r, Err(RejectReason::RetrievalRebind));
    // naming the current binding is not a change
    h.submit(
        "alice",
        vlt_addr("alice"),
        Payload::AccountSet {
            pubkey: *key("alice").public(),
            label: Some("cold storage".into()),
            retrieval: Some(std_addr("bob")),
        },
    )
    .unwrap();
    let acct = h.st.account(&vlt_addr("alice")).unwrap();
    assert_eq!(acct.label.as_deref(), Some("cold storage"));
    assert_eq!(acct.vault.as_ref().unwrap().retrieval, std_addr("bob"));
}

#[test]
fn account_set_reregistration_changes_only_nonce() {
    let mut h = Harness::genesis(&[("a", 10)]);
    let before = h.st.account(&std_addr("a")).unwrap().clone();
    h.register("a").unwrap();
    let after = h.st.account(&std_addr("a")).unwrap();
    assert_eq!(after.pubkey, before.pubkey);
    assert_eq!(after.spendable, before.spendable);
    assert_eq!(after.nonce, before.nonce + 1);
}

#[test]
fn account_set_key_must_match_address() {
    let mut h = Harness::genesis(&[("a", 10)]);
    let r = h.submit(
        "b",
        std_addr("a"),
        Payload::AccountSet {
            pubkey: *key("b").public(),
            label: None,
            retrieval: None,
        },
    );
    assert_eq!(r, Err(RejectReason::KeyMismatch));
}

#[test]
fn signature_and_nonce_checks() {
    let mut h = Harness::genesis(&[("a", 10), ("b", 0)]);
    let payload = Payload::IrrevocablePay {
        to: std_addr("b"),
        amount: Amount::new(1),
    };
    let forged = h.build("b", std_addr("a"), payload.clone());
    assert_eq!(h.st.apply(&forged), Err(RejectReason::BadSignature));
    let nonce = h.st.account(&std_addr("a")).unwrap().nonce;
    let stale = Transaction::unsigned(std_addr("a"), nonce + 1, payload.clone()).sign(&key("a"));
    assert_eq!(h.st.apply(&stale), Err(RejectReason::BadNonce));
    let good = h.build("a", std_addr("a"), payload);
    h.st.apply(&good).unwrap();
    assert_eq!(h.st.apply(&good), Err(RejectReason::BadNonce));
}

#[test]
fn issuance_only_at_genesis() {
    let mut h = Harness::genesis(&[("a", 10)]);
    h.advance_to(1);
    let tx = Transaction::unsigned(
        std_addr("a"),
        0,
        Payload::Basic {
            amount: Amount::new(5),
        },
    );
    assert_eq!(h.st.apply(&tx), Err(RejectReason::IssuanceOutsideGenesis));
}

#[test]
fn issuance_cannot_overflow() {
    let mut st = LedgerState::new(EngineParams::default());
    let basic = |b: u8, amount| {
        Transaction::unsigned(
            Address::from_parts(AccountKind::Standard, [b; 20]),
            0,
            Payload::Basic {
                amount: Amount::new(amount),
            },
        )
    };
    st.apply(&basic(1, u64::MAX)).unwrap();
    assert_eq!(st.apply(&basic(2, 1)), Err(RejectReason::AmountOverflow));
}

#[test]
fn balance_query_running_example() {
    let mut h = vault_fixture();
    h.advance_to(10);
    let id = h.rpay("alice", std_addr("carol"), 30, 5).unwrap();
    let v = h.st.balance_query(&vlt_addr("alice")).unwrap();
    assert_eq!(v.spendable.atoms(), 70);
    assert_eq!(v.pending_out.total.atoms(), 30);
    assert_eq!(v.pending_out.entries[0].tx, id);
    assert_eq!(v.pending_in.total.atoms(), 0);

    let d = h.st.balance_query(&std_addr("carol")).unwrap();
    assert_eq!(d.spendable.atoms(), 0);
    assert_eq!(d.pending_out.total.atoms(), 0);
    assert_eq!(d.pending_in.total.atoms(), 30);
    assert_eq!(d.pending_in.entries[0].maturity_height, 15);
    assert_eq!(d.pending_in.entries[0].counterparty, vlt_addr("alice"));

    h.advance_to(15);
    let d = h.st.balance_query(&std_addr("carol")).unwrap();
    assert_eq!(d.spendable.atoms(), 30);
    assert_eq!(d.pending_in.total.atoms(), 0);
    assert!(d.pending_in.entries.is_empty());

    assert_eq!(
        h.st.balance_query(&std_addr("nobody")),
        Err(RejectReason::UnknownAccount)
    );
}

#[test]
fn state_hash_order_independent_and_sensitive() {
    let build = |order: &[(&'static str, u64)]| {
        let h = Harness::genesis(order);
        h.st.state_hash()
    };
    assert_eq!(build(&[("a", 1), ("b", 2)]), build(&[("b", 2), ("a", 1)]));
    assert_ne!(build(&[("a", 1), ("b", 2)]), build(&[("a", 1), ("b", 3)]));
}

#[test]
fn empty_block_keeps_digest() {
    let mut h = vault_fixture();
    let d0 = h.st.state_hash();
    h.advance_to(3);
    assert_eq!(h.st.state_hash(), d0);
    h.rpay("alice", std_addr("carol"), 1, 2).unwrap();
    let d1 = h.st.state_hash();
    h.advance_to(4);
    assert_eq!(h.st.state_hash(), d1);
    h.advance_to(5);
    assert_ne!(h.st.state_hash(), d1);
}
