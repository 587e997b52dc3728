use std::collections::{HashSet, VecDeque};
use std::sync::Mutex;

use crate::tx::{Transaction, TxId};

#[derive(Debug, Default)]
struct Queue {
    txs: VecDeque<Transaction>,
    ids: HashSet<TxId>,
}

/// FIFO of submitted transactions, deduplicated by id. Submission takes
/// `&self`, so several producers may share one pool.
#[derive(Debug, Default)]
pub struct Mempool {
    inner: Mutex<Queue>,
}

impl Mempool {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns false if a transaction with the same id is already queued.
    pub fn push(&self, tx: Transaction) -> bool {
        let mut q = self.inner.lock().expect("mempool lock poisoned");
        if !q.ids.insert(tx.id()) {
            return false;
        }
        q.txs.push_back(tx);
        true
    }

    pub fn contains(&self, id: &TxId) -> bool {
        self.inner
            .lock()
            .expect("mempool lock poisoned")
            .ids
            .contains(id)
    }

    /// Removes and returns everything, in submission order.
    pub fn drain(&self) -> Vec<Transaction> {
        let mut q = self.inner.lock().expect("mempool lock poisoned");
        q.ids.clear();
        q.txs.drain(..).collect()
    }

    pub fn snapshot(&self) -> Vec<Transaction> {
        let q = self.inner.lock().expect("mempool lock poisoned");
        q.txs.iter().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.inner.lock().expect("mempool lock poisoned").txs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
