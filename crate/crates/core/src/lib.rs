//! Ledger with vault accounts whose outgoing transfers mature after a delay
//! and can be revoked to a bound retrieval account.
//!
//! - [`engine`]: transaction validation and application, maturation, balance queries
//! - [`chain`]: mempool, deterministic block production, ledger file, replay
//! - [`security`]: catch-up probabilities, cascade bounds, Monte Carlo estimators

pub mod address;
pub mod amount;
pub mod chain;
pub mod codec;
pub mod crypto;
pub mod engine;
pub mod security;
pub mod tx;

pub use address::{derive_address, AccountKind, Address, AddressError};
pub use amount::Amount;
pub use chain::{
    Block, BlockEntry, Chain, ChainError, Digest32, GenesisConfig, Mempool, ReplayError,
    SubmitError,
};
pub use crypto::{KeyError, KeyPair, PublicKey, SecretKey, Signature, SignatureScheme};
pub use engine::{
    Account, BalanceReport, EngineParams, LedgerState, PendingTransfer, Receipt, RejectReason,
    TransferStatus, VaultState,
};
pub use security::{
    acceptance_probability_estimate, cascade_breach_exact, cascade_breach_probability,
    catch_up_probability, epsilon_robustness_ratio, model_robustness, simulate_attack,
    AttackParams, ExactDecimal, SecurityError, SimResult,
};
pub use tx::{Payload, Transaction, TxId, TxIdError, TxKind, TxPrefix};
