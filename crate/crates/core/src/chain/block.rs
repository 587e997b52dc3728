use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::codec::CanonicalWriter;
use crate::engine::{LedgerState, Receipt};
use crate::tx::{Transaction, TxId};

/// Version of the ledger line format.
pub const LEDGER_SCHEMA: u32 = 1;

/// A SHA-256 output, rendered as lowercase hex.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Digest32(pub [u8; 32]);

impl fmt::Display for Digest32 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.0))
    }
}

impl fmt::Debug for Digest32 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest32({self})")
    }
}

impl FromStr for Digest32 {
    type Err = hex::FromHexError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.bytes().any(|b| b.is_ascii_uppercase()) {
            return Err(hex::FromHexError::InvalidHexCharacter {
                c: s.chars().find(char::is_ascii_uppercase).unwrap_or('?'),
                index: 0,
            });
        }
        let mut out = [0u8; 32];
        hex::decode_to_slice(s, &mut out)?;
        Ok(Digest32(out))
    }
}

impl Serialize for Digest32 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Digest32 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockEntry {
    pub tx: Transaction,
    pub receipt: Receipt,
}

/// One line of the ledger file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub schema: u32,
    pub chain_id: String,
    pub height: u64,
    pub parent: Digest32,
    /// Revocable payments credited by this block's maturation phase.
    pub matured: Vec<TxId>,
    pub entries: Vec<BlockEntry>,
    /// State digest after maturation and every applied entry.
    pub state_digest: Digest32,
    /// Hash over every field above.
    pub hash: Digest32,
}

impl Block {
    pub(crate) fn seal(
        chain_id: &str,
        height: u64,
        parent: Digest32,
        matured: Vec<TxId>,
        entries: Vec<BlockEntry>,
        state_digest: Digest32,
    ) -> Block {
        let mut block = Block {
            schema: LEDGER_SCHEMA,
            chain_id: chain_id.to_owned(),
            height,
            parent,
            matured,
            entries,
            state_digest,
            hash: Digest32::default(),
        };
        block.hash = block.compute_hash();
        block
    }

    pub fn compute_hash(&self) -> Digest32 {
        let mut w = CanonicalWriter::new();
        w.u32(self.schema)
            .str(&self.chain_id)
            .u64(self.height)
            .raw(&self.parent.0)
            .u32(self.matured.len() as u32);
        for id in &self.matured {
            w.str(id.prefix().as_str()).raw(id.hash());
        }
        w.u32(self.entries.len() as u32);
        for e in &self.entries {
            w.bytes(&e.tx.canonical_encode())
                .raw(e.tx.signature.as_bytes())
                .str(match e.receipt {
                    Receipt::Applied => "applied",
                    Receipt::Rejected(r) => r.code(),
                });
        }
        w.raw(&self.state_digest.0);
        Digest32(Sha256::digest(w.finish()).into())
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("block serializes")
    }

    pub fn applied(&self) -> impl Iterator<Item = &BlockEntry> {
        self.entries.iter().filter(|e| e.receipt.is_applied())
    }

    pub fn rejected(&self) -> impl Iterator<Item = &BlockEntry> {
        self.entries.iter().filter(|e| !e.receipt.is_applied())
    }
}

/// Advances `state` to `height`, matures what is due, then applies `txs` in
/// order. Invalid transactions get a rejection receipt and no effect.
pub fn execute_block(
    state: &mut LedgerState,
    height: u64,
    txs: impl IntoIterator<Item = Transaction>,
) -> (Vec<TxId>, Vec<BlockEntry>) {
    let matured = state.begin_block(height);
    let entries = txs
        .into_iter()
        .map(|tx| {
            let receipt = Receipt::from(state.apply(&tx));
            BlockEntry { tx, receipt }
        })
        .collect();
    (matured, entries)
}
