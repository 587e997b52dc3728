//! Single-proposer chain: mempool, block production, the append-only ledger
//! file, and replay.
//!
//! The ledger file holds one JSON block record per line, genesis first.
//! Replaying it re-executes every block and stops at the first height whose
//! recomputed state digest, receipts, or block hash disagree with the record.

mod block;
mod genesis;
mod mempool;
pub mod workload;

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use thiserror::Error;

pub use block::{execute_block, Block, BlockEntry, Digest32, LEDGER_SCHEMA};
pub use genesis::{Allocation, GenesisConfig, GenesisError};
pub use mempool::Mempool;

use crate::address::Address;
use crate::engine::{LedgerState, RejectReason};
use crate::tx::{Payload, Transaction, TxId};

#[derive(Debug, Error)]
pub enum SubmitError {
    #[error("duplicate transaction {0}")]
    Duplicate(TxId),
    #[error("malformed transaction: {0}")]
    Malformed(String),
    #[error("{0}")]
    Rejected(RejectReason),
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("reading ledger: {0}")]
    Io(#[from] io::Error),
    #[error("corrupt ledger record on line {line}: {reason}")]
    Corrupt { line: usize, reason: String },
    #[error("ledger belongs to chain {found:?}, expected {expected:?}")]
    ChainIdMismatch { expected: String, found: String },
    #[error("unsupported ledger schema {0}")]
    Schema(u32),
    #[error("expected block at height {expected}, found {found}")]
    HeightGap { expected: u64, found: u64 },
    #[error("parent hash mismatch at height {height}")]
    ParentMismatch { height: u64 },
    #[error("state digest mismatch at height {height}: stored {stored}, recomputed {computed}")]
    DigestMismatch {
        height: u64,
        stored: Digest32,
        computed: Digest32,
    },
    #[error("receipt mismatch at height {height}, entry {index}")]
    ReceiptMismatch { height: u64, index: usize },
    #[error("maturity record mismatch at height {height}")]
    MaturedMismatch { height: u64 },
    #[error("block hash mismatch at height {height}")]
    HashMismatch { height: u64 },
    #[error("genesis block does not match the genesis config")]
    GenesisMismatch,
}

impl ReplayError {
    /// Height at which verification failed, when there is one.
    pub fn height(&self) -> Option<u64> {
        match self {
            ReplayError::HeightGap { expected, .. } => Some(*expected),
            ReplayError::ParentMismatch { height }
            | ReplayError::DigestMismatch { height, .. }
            | ReplayError::ReceiptMismatch { height, .. }
            | ReplayError::MaturedMismatch { height }
            | ReplayError::HashMismatch { height } => Some(*height),
            ReplayError::GenesisMismatch => Some(0),
            _ => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum ChainError {
    #[error(transparent)]
    Genesis(#[from] GenesisError),
    #[error(transparent)]
    Replay(#[from] ReplayError),
    #[error("ledger I/O: {0}")]
    Io(#[from] io::Error),
}

/// Where an included transaction lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TxLocation {
    pub height: u64,
    pub index: usize,
}

pub struct Chain {
    genesis: GenesisConfig,
    state: LedgerState,
    blocks: Vec<Block>,
    tx_index: HashMap<TxId, TxLocation>,
    mempool: Mempool,
    ledger: Option<File>,
}

impl std::fmt::Debug for Chain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Chain")
            .field("chain_id", &self.genesis.chain_id)
            .field("height", &self.height())
            .field("mempool", &self.mempool.len())
            .finish_non_exhaustive()
    }
}

impl Chain {
    /// In-memory chain holding only the genesis block.
    pub fn new(genesis: GenesisConfig) -> Result<Self, GenesisError> {
        genesis.validate()?;
        let mut state = LedgerState::new(genesis.params());
        let (matured, entries) = execute_block(&mut state, 0, genesis.issuance_txs());
        let block = Block::seal(
            &genesis.chain_id,
            0,
            Digest32::default(),
            matured,
            entries,
            Digest32(state.state_hash()),
        );
        let mut chain = Chain {
            genesis,
            state,
            blocks: Vec::new(),
            tx_index: HashMap::new(),
            mempool: Mempool::new(),
            ledger: None,
        };
        chain.index_block(block);
        Ok(chain)
    }

    /// Opens the ledger at `path`, replaying and verifying whatever it
    /// holds. An empty or missing file is initialized with the genesis block.
    pub fn open(genesis: GenesisConfig, path: &Path) -> Result<Self, ChainError> {
        let mut file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(path)?;
        let mut chain = Chain::replay(genesis, BufReader::new(&mut file))?;
        let empty = file.metadata()?.len() == 0;
        chain.ledger = Some(file);
        if empty {
            let genesis_block = chain.blocks[0].clone();
            chain.append_line(&genesis_block)?;
        }
        Ok(chain)
    }

    /// Re-executes a ledger from genesis, verifying every stored digest.
    pub fn replay<R: BufRead>(genesis: GenesisConfig, reader: R) -> Result<Self, ReplayError> {
        genesis.validate().map_err(|e| ReplayError::Corrupt {
            line: 0,
            reason: e.to_string(),
        })?;
        let mut chain = Chain::new(genesis).expect("validated genesis");
        let expected_genesis = chain.blocks.pop().expect("genesis block");
        chain.tx_index.clear();
        chain.state = LedgerState::new(chain.genesis.params());

        let mut saw_any = false;
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let block: Block = serde_json::from_str(&line).map_err(|e| ReplayError::Corrupt {
                line: n + 1,
                reason: e.to_string(),
            })?;
            chain.verify_and_apply(block, &expected_genesis)?;
            saw_any = true;
        }
        if !saw_any {
            let mut fresh = Chain::new(chain.genesis).expect("validated genesis");
            fresh.ledger = None;
            return Ok(fresh);
        }
        Ok(chain)
    }

    fn verify_and_apply(
        &mut self,
        block: Block,
        expected_genesis: &Block,
    ) -> Result<(), ReplayError> {
        if block.schema != LEDGER_SCHEMA {
            return Err(ReplayError::Schema(block.schema));
        }
        if block.chain_id != self.genesis.chain_id {
            return Err(ReplayError::ChainIdMismatch {
                expected: self.genesis.chain_id.clone(),
                found: block.chain_id,
            });
        }
        let expected_height = self.blocks.len() as u64;
        if block.height != expected_height {
            return Err(ReplayError::HeightGap {
                expected: expected_height,
                found: block.height,
            });
        }
        let parent = self.blocks.last().map_or(Digest32::default(), |b| b.hash);
        if block.parent != parent {
            return Err(ReplayError::ParentMismatch {
                height: block.height,
            });
        }
        let mut next = self.state.clone();
        let (matured, entries) = execute_block(
            &mut next,
            block.height,
            block.entries.iter().map(|e| e.tx.clone()),
        );
        let computed = Digest32(next.state_hash());
        if computed != block.state_digest {
            return Err(ReplayError::DigestMismatch {
                height: block.height,
                stored: block.state_digest,
                computed,
            });
        }
        if let Some(index) = entries
            .iter()
            .zip(&block.entries)
            .position(|(a, b)| a.receipt != b.receipt)
        {
            return Err(ReplayError::ReceiptMismatch {
                height: block.height,
                index,
            });
        }
        if matured != block.matured {
            return Err(ReplayError::MaturedMismatch {
                height: block.height,
            });
        }
        if block.compute_hash() != block.hash {
            return Err(ReplayError::HashMismatch {
                height: block.height,
            });
        }
        if block.height == 0 && block.hash != expected_genesis.hash {
            return Err(ReplayError::GenesisMismatch);
        }
        self.state = next;
        self.index_block(block);
        Ok(())
    }

    fn index_block(&mut self, block: Block) {
        for (index, e) in block.entries.iter().enumerate() {
            self.tx_index.insert(
                e.tx.id(),
                TxLocation {
                    height: block.height,
                    index,
                },
            );
        }
        self.blocks.push(block);
    }

    fn append_line(&mut self, block: &Block) -> io::Result<()> {
        if let Some(file) = self.ledger.as_mut() {
            let mut line = block.to_line();
            line.push('\n');
            file.write_all(line.as_bytes())?;
            file.flush()?;
            file.sync_data()?;
        }
        Ok(())
    }

    pub fn genesis(&self) -> &GenesisConfig {
        &self.genesis
    }

    pub fn chain_id(&self) -> &str {
        &self.genesis.chain_id
    }

    pub fn state(&self) -> &LedgerState {
        &self.state
    }

    pub fn height(&self) -> u64 {
        self.blocks.len() as u64 - 1
    }

    pub fn head(&self) -> &Block {
        self.blocks.last().expect("chain always has genesis")
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn mempool(&self) -> &Mempool {
        &self.mempool
    }

    pub fn find_tx(&self, id: &TxId) -> Option<(&Block, &BlockEntry)> {
        let loc = self.tx_index.get(id)?;
        let block = &self.blocks[loc.height as usize];
        Some((block, &block.entries[loc.index]))
    }

    /// Stateless admission: duplicate check, sender prefix against
    /// transaction kind, and the signature when the signer's key is already
    /// known. Everything else is decided at block production.
    pub fn submit(&self, tx: Transaction) -> Result<TxId, SubmitError> {
        let id = tx.id();
        if self.tx_index.contains_key(&id) || self.mempool.contains(&id) {
            return Err(SubmitError::Duplicate(id));
        }
        if !tx.sender_kind_ok() {
            return Err(SubmitError::Rejected(RejectReason::WrongAccountKind));
        }
        let scheme = self.genesis.signature_scheme;
        let key = match &tx.payload {
            Payload::Basic { .. } => {
                return Err(SubmitError::Rejected(RejectReason::IssuanceOutsideGenesis))
            }
            Payload::AccountSet { pubkey, .. } => {
                if Address::derive(pubkey, tx.from.kind()) != tx.from {
                    return Err(SubmitError::Rejected(RejectReason::KeyMismatch));
                }
                Some(*pubkey)
            }
            _ => self.state.account(&tx.from).and_then(|a| a.pubkey),
        };
        if let Some(key) = key {
            if !tx.verify_with(scheme, &key) {
                return Err(SubmitError::Rejected(RejectReason::BadSignature));
            }
        }
        if !self.mempool.push(tx) {
            return Err(SubmitError::Duplicate(id));
        }
        Ok(id)
    }

    /// Parses a JSON transaction record, then [`Self::submit`]s it.
    pub fn submit_bytes(&self, bytes: &[u8]) -> Result<TxId, SubmitError> {
        let tx: Transaction =
            serde_json::from_slice(bytes).map_err(|e| SubmitError::Malformed(e.to_string()))?;
        self.submit(tx)
    }

    /// Drains the mempool into a new block at `height + 1`. Deterministic:
    /// the same state and mempool always yield the same block.
    pub fn produce_block(&mut self) -> Result<&Block, ChainError> {
        let height = self.height() + 1;
        let txs = self.mempool.drain();
        let mut next = self.state.clone();
        let (matured, entries) = execute_block(&mut next, height, txs.iter().cloned());
        let block = Block::seal(
            &self.genesis.chain_id,
            height,
            self.head().hash,
            matured,
            entries,
            Digest32(next.state_hash()),
        );
        if let Err(e) = self.append_line(&block) {
            for tx in txs {
                self.mempool.push(tx);
            }
            return Err(e.into());
        }
        self.state = next;
        self.index_block(block);
        Ok(self.head())
    }

    /// Validates `tx` as if it were appended to the current mempool and
    /// included in the next block, without changing anything.
    pub fn dry_run(&self, tx: &Transaction) -> Result<(), RejectReason> {
        let mut probe = self.state.clone();
        probe.begin_block(self.height() + 1);
        for queued in self.mempool.snapshot() {
            let _ = probe.apply(&queued);
        }
        probe.validate(tx)
    }

    /// Next usable nonce for `addr`, counting queued transactions.
    pub fn next_nonce(&self, addr: &Address) -> u64 {
        let base = self.state.account(addr).map_or(0, |a| a.nonce);
        let queued = self
            .mempool
            .snapshot()
            .iter()
            .filter(|t| t.from == *addr && t.kind() != crate::tx::TxKind::Basic)
            .count() as u64;
        base + queued
    }
}

/// Replays the ledger file at `path` and returns the verified final state.
pub fn replay(genesis: GenesisConfig, path: &Path) -> Result<LedgerState, ReplayError> {
    let file = File::open(path)?;
    Ok(Chain::replay(genesis, BufReader::new(file))?.state)
}
