//! Transactions, their canonical encoding, and prefixed identifiers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::address::{AccountKind, Address};
use crate::amount::Amount;
use crate::codec::CanonicalWriter;
use crate::crypto::{KeyPair, PublicKey, Signature, SignatureScheme};

/// Leading byte of every canonical transaction encoding.
pub const ENCODING_VERSION: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TxKind {
    Basic,
    IrrevocablePay,
    AccountSet,
    VaultCreate,
    RevocablePay,
    Revoke,
    VaultClear,
}

impl TxKind {
    pub const ALL: [TxKind; 7] = [
        TxKind::Basic,
        TxKind::IrrevocablePay,
        TxKind::AccountSet,
        TxKind::VaultCreate,
        TxKind::RevocablePay,
        TxKind::Revoke,
        TxKind::VaultClear,
    ];

    pub fn tag(self) -> u8 {
        match self {
            TxKind::Basic => 0,
            TxKind::IrrevocablePay => 1,
            TxKind::AccountSet => 2,
            TxKind::VaultCreate => 3,
            TxKind::RevocablePay => 4,
            TxKind::Revoke => 5,
            TxKind::VaultClear => 6,
        }
    }

    /// Vault creation shares the account-setting prefix.
    pub fn prefix(self) -> TxPrefix {
        match self {
            TxKind::Basic => TxPrefix::Basic,
            TxKind::IrrevocablePay => TxPrefix::InrevocablePay,
            TxKind::AccountSet | TxKind::VaultCreate => TxPrefix::AccountSet,
            TxKind::RevocablePay => TxPrefix::RevocablePay,
            TxKind::Revoke => TxPrefix::Revoke,
            TxKind::VaultClear => TxPrefix::VaultClear,
        }
    }

    /// Kind of account allowed to sign this transaction; `None` means either.
    pub fn required_sender(self) -> Option<AccountKind> {
        match self {
            TxKind::Basic | TxKind::IrrevocablePay | TxKind::VaultCreate => {
                Some(AccountKind::Standard)
            }
            TxKind::RevocablePay | TxKind::Revoke | TxKind::VaultClear => Some(AccountKind::Vault),
            TxKind::AccountSet => None,
        }
    }
}

impl fmt::Display for TxKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TxKind::Basic => "basic",
            TxKind::IrrevocablePay => "irrevocable_pay",
            TxKind::AccountSet => "account_set",
            TxKind::VaultCreate => "vault_create",
            TxKind::RevocablePay => "revocable_pay",
            TxKind::Revoke => "revoke",
            TxKind::VaultClear => "vault_clear",
        })
    }
}

/// The six identifier prefixes. The spelling `INREVOCABLEPAY` is the
/// established wire form and is kept as-is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TxPrefix {
    Basic,
    InrevocablePay,
    AccountSet,
    RevocablePay,
    Revoke,
    VaultClear,
}

impl TxPrefix {
    pub const ALL: [TxPrefix; 6] = [
        TxPrefix::Basic,
        TxPrefix::InrevocablePay,
        TxPrefix::AccountSet,
        TxPrefix::RevocablePay,
        TxPrefix::Revoke,
        TxPrefix::VaultClear,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TxPrefix::Basic => "BASIC",
            TxPrefix::InrevocablePay => "INREVOCABLEPAY",
            TxPrefix::AccountSet => "ACCOUNTSET",
            TxPrefix::RevocablePay => "REVOCABLEPAY",
            TxPrefix::Revoke => "REVOKE",
            TxPrefix::VaultClear => "VAULTCLEAR",
        }
    }
}

impl FromStr for TxPrefix {
    type Err = TxIdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TxPrefix::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| TxIdError::UnknownPrefix(s.to_owned()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TxIdError {
    #[error("transaction id has no '-' separator: {0:?}")]
    MissingSeparator(String),
    #[error("unknown transaction prefix {0:?}")]
    UnknownPrefix(String),
    #[error("transaction hash must be 64 lowercase hex characters")]
    BadHash,
}

/// `PREFIX-<sha256 of the unsigned canonical encoding>`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TxId {
    prefix: TxPrefix,
    hash: [u8; 32],
}

impl TxId {
    pub fn new(prefix: TxPrefix, hash: [u8; 32]) -> Self {
        TxId { prefix, hash }
    }

    pub fn prefix(&self) -> TxPrefix {
        self.prefix
    }

    pub fn hash(&self) -> &[u8; 32] {
        &self.hash
    }
}

impl fmt::Display for TxId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.prefix.as_str(), hex::encode(self.hash))
    }
}

impl fmt::Debug for TxId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TxId({self})")
    }
}

impl FromStr for TxId {
    type Err = TxIdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (prefix, body) = s
            .split_once('-')
            .ok_or_else(|| TxIdError::MissingSeparator(s.to_owned()))?;
        let prefix = prefix.parse()?;
        if body.len() != 64 || !body.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f')) {
            return Err(TxIdError::BadHash);
        }
        let mut hash = [0u8; 32];
        hex::decode_to_slice(body, &mut hash).map_err(|_| TxIdError::BadHash)?;
        Ok(TxId { prefix, hash })
    }
}

impl Serialize for TxId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TxId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    /// Genesis issuance to the sender's own address.
    Basic {
        amount: Amount,
    },
    IrrevocablePay {
        to: Address,
        amount: Amount,
    },
    /// Registers the sender's key, and optionally sets a label. Carrying a
    /// `retrieval` that differs from the bound one is rejected.
    AccountSet {
        pubkey: PublicKey,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        retrieval: Option<Address>,
    },
    VaultCreate {
        vault_pubkey: PublicKey,
        retrieval: Address,
        amount: Amount,
    },
    RevocablePay {
        to: Address,
        amount: Amount,
        delay: u64,
    },
    Revoke {
        target: TxId,
    },
    VaultClear {
        #[serde(default)]
        close: bool,
    },
}

impl Payload {
    pub fn kind(&self) -> TxKind {
        match self {
            Payload::Basic { .. } => TxKind::Basic,
            Payload::IrrevocablePay { .. } => TxKind::IrrevocablePay,
            Payload::AccountSet { .. } => TxKind::AccountSet,
            Payload::VaultCreate { .. } => TxKind::VaultCreate,
            Payload::RevocablePay { .. } => TxKind::RevocablePay,
            Payload::Revoke { .. } => TxKind::Revoke,
            Payload::VaultClear { .. } => TxKind::VaultClear,
        }
    }

    fn encode_into(&self, w: &mut CanonicalWriter) {
        match self {
            Payload::Basic { amount } => {
                w.amount(*amount);
            }
            Payload::IrrevocablePay { to, amount } => {
                w.address(to).amount(*amount);
            }
            Payload::AccountSet {
                pubkey,
                label,
                retrieval,
            } => {
                w.pubkey(pubkey)
                    .option(label.as_ref(), |w, l| {
                        w.str(l);
                    })
                    .option(retrieval.as_ref(), |w, a| {
                        w.address(a);
                    });
            }
            Payload::VaultCreate {
                vault_pubkey,
                retrieval,
                amount,
            } => {
                w.pubkey(vault_pubkey).address(retrieval).amount(*amount);
            }
            Payload::RevocablePay { to, amount, delay } => {
                w.address(to).amount(*amount).u64(*delay);
            }
            Payload::Revoke { target } => {
                w.str(target.prefix().as_str()).raw(target.hash());
            }
            Payload::VaultClear { close } => {
                w.bool(*close);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Transaction {
    pub from: Address,
    pub nonce: u64,
    #[serde(flatten)]
    pub payload: Payload,
    pub signature: Signature,
}

impl Transaction {
    pub fn unsigned(from: Address, nonce: u64, payload: Payload) -> Self {
        Transaction {
            from,
            nonce,
            payload,
            signature: Signature::EMPTY,
        }
    }

    pub fn kind(&self) -> TxKind {
        self.payload.kind()
    }

    /// Canonical encoding of everything except the signature.
    pub fn canonical_encode(&self) -> Vec<u8> {
        let mut w = CanonicalWriter::new();
        w.u8(ENCODING_VERSION)
            .u8(self.kind().tag())
            .address(&self.from)
            .u64(self.nonce);
        self.payload.encode_into(&mut w);
        w.finish()
    }

    pub fn id(&self) -> TxId {
        let hash: [u8; 32] = Sha256::digest(self.canonical_encode()).into();
        TxId::new(self.kind().prefix(), hash)
    }

    pub fn sign(mut self, keypair: &KeyPair) -> Self {
        self.signature = keypair.sign(&self.canonical_encode());
        self
    }

    pub fn verify_with(&self, scheme: SignatureScheme, pubkey: &PublicKey) -> bool {
        scheme.verify(pubkey, &self.canonical_encode(), &self.signature)
    }

    /// Sender kind check that needs no ledger state.
    pub fn sender_kind_ok(&self) -> bool {
        self.kind()
            .required_sender()
            .is_none_or(|k| k == self.from.kind())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("transaction serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}
