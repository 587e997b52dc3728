//! On-disk layout of a chain home:
//!
//! ```text
//! <home>/genesis.toml    chain parameters and allocations
//! <home>/ledger.jsonl    one block per line, genesis first
//! <home>/mempool.jsonl   submitted transactions not yet in a block
//! <home>/keys/<name>.json
//! <home>/LOCK
//! ```

use std::fs::{self, File, OpenOptions, TryLockError};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use vaultchain_core::chain::{Chain, GenesisConfig, SubmitError};
use vaultchain_core::Transaction;

use crate::error::CliError;
use crate::keystore::KeyStore;

pub struct ChainHome {
    root: PathBuf,
}

/// Held for the life of a command. The OS lock goes away with the file.
#[derive(Debug)]
pub struct HomeLock {
    _file: File,
}

impl ChainHome {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        ChainHome { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn genesis_path(&self) -> PathBuf {
        self.root.join("genesis.toml")
    }

    pub fn ledger_path(&self) -> PathBuf {
        self.root.join("ledger.jsonl")
    }

    pub fn mempool_path(&self) -> PathBuf {
        self.root.join("mempool.jsonl")
    }

    pub fn keystore(&self) -> KeyStore {
        KeyStore::new(self.root.join("keys"))
    }

    pub fn is_initialized(&self) -> bool {
        self.genesis_path().exists()
    }

    /// Exclusive for anything that writes, shared for reads. Never blocks:
    /// a home busy in another process is reported instead.
    pub fn lock(&self, exclusive: bool) -> Result<HomeLock, CliError> {
        if exclusive {
            fs::create_dir_all(&self.root).map_err(|e| CliError::io(&self.root, e))?;
        } else if !self.root.is_dir() {
            return Err(CliError::usage(format!(
                "no chain home at {}",
                self.root.display()
            )));
        }
        let path = self.root.join("LOCK");
        let file = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(&path)
            .map_err(|e| CliError::io(&path, e))?;
        let res = if exclusive {
            file.try_lock()
        } else {
            file.try_lock_shared()
        };
        match res {
            Ok(()) => Ok(HomeLock { _file: file }),
            Err(TryLockError::WouldBlock) => Err(CliError::usage(format!(
                "chain home {} is in use by another process",
                self.root.display()
            ))),
            Err(TryLockError::Error(e)) => Err(CliError::io(&path, e)),
        }
    }

    pub fn load_genesis(&self) -> Result<GenesisConfig, CliError> {
        if !self.is_initialized() {
            return Err(CliError::usage(format!(
                "chain home {} is not initialized; run `init` first",
                self.root.display()
            )));
        }
        GenesisConfig::load(&self.genesis_path()).map_err(CliError::from)
    }

    /// Writes genesis.toml and the genesis block. Refuses an initialized home.
    pub fn initialize(&self, genesis: &GenesisConfig) -> Result<Chain, CliError> {
        if self.is_initialized() {
            return Err(CliError::usage(format!(
                "chain home {} is already initialized",
                self.root.display()
            )));
        }
        genesis.validate()?;
        let ledger = self.ledger_path();
        if ledger.exists() && fs::metadata(&ledger).map_or(0, |m| m.len()) > 0 {
            return Err(CliError::usage(format!(
                "{} already holds a ledger without a genesis config",
                ledger.display()
            )));
        }
        let path = self.genesis_path();
        write_atomic(&path, genesis.to_toml().as_bytes())?;
        Ok(Chain::open(genesis.clone(), &ledger)?)
    }

    /// Replays the ledger and re-queues the persisted mempool. With
    /// `writable` the ledger file stays open for appending blocks.
    pub fn open_chain(&self, writable: bool) -> Result<Chain, CliError> {
        let genesis = self.load_genesis()?;
        let ledger = self.ledger_path();
        let chain = if writable {
            Chain::open(genesis, &ledger)?
        } else {
            let file = File::open(&ledger).map_err(|e| CliError::io(&ledger, e))?;
            Chain::replay(genesis, BufReader::new(file))?
        };
        self.restore_mempool(&chain)?;
        Ok(chain)
    }

    fn restore_mempool(&self, chain: &Chain) -> Result<(), CliError> {
        let path = self.mempool_path();
        let file = match File::open(&path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(()),
            Err(e) => return Err(CliError::io(&path, e)),
        };
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| CliError::io(&path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let tx = Transaction::from_json(&line).map_err(|e| {
                CliError::Integrity(format!("{} line {}: {e}", path.display(), n + 1))
            })?;
            match chain.submit(tx) {
                // Already in a block: the process stopped between appending
                // the block and clearing the mempool file.
                Ok(_) | Err(SubmitError::Duplicate(_)) => {}
                Err(e) => {
                    return Err(CliError::Integrity(format!(
                        "{} line {}: {e}",
                        path.display(),
                        n + 1
                    )))
                }
            }
        }
        Ok(())
    }

    pub fn save_mempool(&self, chain: &Chain) -> Result<(), CliError> {
        let mut buf = String::new();
        for tx in chain.mempool().snapshot() {
            buf.push_str(&tx.to_json());
            buf.push('\n');
        }
        write_atomic(&self.mempool_path(), buf.as_bytes())
    }
}

/// Write to a sibling temp file, sync, then rename over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let tmp = path.with_extension("tmp");
    let mut f = File::create(&tmp).map_err(|e| CliError::io(&tmp, e))?;
    f.write_all(bytes)
        .and_then(|()| f.sync_all())
        .map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}
