//! Account addresses.
//!
//! An address is the first 20 bytes of `SHA-256(public key)`, rendered as
//! lowercase hex behind a three-letter prefix naming the account kind:
//! `std` for standard accounts, `vlt` for vault accounts. The same key
//! therefore owns one address of each kind, differing only in the prefix.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::crypto::PublicKey;

pub const ADDRESS_BODY_LEN: usize = 20;

const STANDARD_PREFIX: &str = "std";
const VAULT_PREFIX: &str = "vlt";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AccountKind {
    Standard,
    Vault,
}

impl AccountKind {
    pub fn prefix(self) -> &'static str {
        match self {
            AccountKind::Standard => STANDARD_PREFIX,
            AccountKind::Vault => VAULT_PREFIX,
        }
    }

    pub(crate) fn tag(self) -> u8 {
        match self {
            AccountKind::Standard => 0,
            AccountKind::Vault => 1,
        }
    }
}

impl fmt::Display for AccountKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AccountKind::Standard => "standard",
            AccountKind::Vault => "vault",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AddressError {
    #[error("unknown address prefix in {0:?}")]
    UnknownPrefix(String),
    #[error("address body must be {expected} lowercase hex characters, got {got:?}")]
    BadBody { expected: usize, got: String },
}

/// Field order is (kind, body), so the derived `Ord` agrees with the
/// lexicographic order of the text form ("std" < "vlt", then hex body).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Address {
    kind: AccountKind,
    body: [u8; ADDRESS_BODY_LEN],
}

impl Address {
    pub const fn from_parts(kind: AccountKind, body: [u8; ADDRESS_BODY_LEN]) -> Self {
        Address { kind, body }
    }

    pub fn derive(pubkey: &PublicKey, kind: AccountKind) -> Self {
        let digest = Sha256::digest(pubkey.as_bytes());
        let mut body = [0u8; ADDRESS_BODY_LEN];
        body.copy_from_slice(&digest[..ADDRESS_BODY_LEN]);
        Address { kind, body }
    }

    pub fn kind(&self) -> AccountKind {
        self.kind
    }

    pub fn body(&self) -> &[u8; ADDRESS_BODY_LEN] {
        &self.body
    }

    pub fn is_vault(&self) -> bool {
        self.kind == AccountKind::Vault
    }

    /// The address of the same key under the other account kind.
    pub fn with_kind(&self, kind: AccountKind) -> Self {
        Address {
            kind,
            body: self.body,
        }
    }
}

/// Derives the address owned by `pubkey` for an account of `kind`.
pub fn derive_address(pubkey: &PublicKey, kind: AccountKind) -> Address {
    Address::derive(pubkey, kind)
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind.prefix())?;
        f.write_str(&hex::encode(self.body))
    }
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Address({self})")
    }
}

impl FromStr for Address {
    type Err = AddressError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, rest) = if let Some(rest) = s.strip_prefix(STANDARD_PREFIX) {
            (AccountKind::Standard, rest)
        } else if let Some(rest) = s.strip_prefix(VAULT_PREFIX) {
            (AccountKind::Vault, rest)
        } else {
            return Err(AddressError::UnknownPrefix(s.to_owned()));
        };
        let bad = || AddressError::BadBody {
            expected: ADDRESS_BODY_LEN * 2,
            got: rest.to_owned(),
        };
        // Uppercase hex would parse but not round-trip.
        if rest.len() != ADDRESS_BODY_LEN * 2
            || !rest
                .bytes()
                .all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b))
        {
            return Err(bad());
        }
        let mut body = [0u8; ADDRESS_BODY_LEN];
        hex::decode_to_slice(rest, &mut body).map_err(|_| bad())?;
        Ok(Address { kind, body })
    }
}

impl Serialize for Address {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Address {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
