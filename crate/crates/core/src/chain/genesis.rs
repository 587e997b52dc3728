use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::address::{AccountKind, Address};
use crate::amount::Amount;
use crate::crypto::SignatureScheme;
use crate::engine::{EngineParams, DEFAULT_THETA_MAX};
use crate::tx::{Payload, Transaction};

#[derive(Debug, Error)]
pub enum GenesisError {
    #[error("chain id must be non-empty")]
    EmptyChainId,
    #[error("theta_max must be at least 1")]
    ZeroThetaMax,
    #[error("duplicate allocation for {0}")]
    DuplicateAllocation(Address),
    #[error("genesis allocations must go to standard addresses, got {0}")]
    VaultAllocation(Address),
    #[error("total genesis issuance exceeds u64::MAX")]
    IssuanceOverflow,
    #[error("reading genesis config: {0}")]
    Io(#[from] std::io::Error),
    #[error("parsing genesis config: {0}")]
    Parse(#[from] toml::de::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allocation {
    pub address: Address,
    pub amount: Amount,
}

fn default_theta_max() -> u64 {
    DEFAULT_THETA_MAX
}

/// Chain parameters and initial balances.
///
/// ```toml
/// chain_id = "devnet"
/// theta_max = 10000
/// signature_scheme = "ed25519"
///
/// [[allocations]]
/// address = "std66687aadf862bd776c8fc18b8e9f8e2008971485"
/// amount = 1000
/// ```
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenesisConfig {
    pub chain_id: String,
    #[serde(default = "default_theta_max")]
    pub theta_max: u64,
    #[serde(default)]
    pub signature_scheme: SignatureScheme,
    #[serde(default)]
    pub allocations: Vec<Allocation>,
}

impl GenesisConfig {
    pub fn new(chain_id: impl Into<String>) -> Self {
        GenesisConfig {
            chain_id: chain_id.into(),
            theta_max: DEFAULT_THETA_MAX,
            signature_scheme: SignatureScheme::Ed25519,
            allocations: Vec::new(),
        }
    }

    pub fn allocate(mut self, address: Address, amount: u64) -> Self {
        self.allocations.push(Allocation {
            address,
            amount: Amount::new(amount),
        });
        self
    }

    pub fn params(&self) -> EngineParams {
        EngineParams {
            theta_max: self.theta_max,
            scheme: self.signature_scheme,
        }
    }

    pub fn validate(&self) -> Result<(), GenesisError> {
        if self.chain_id.is_empty() {
            return Err(GenesisError::EmptyChainId);
        }
        if self.theta_max == 0 {
            return Err(GenesisError::ZeroThetaMax);
        }
        let mut seen = BTreeSet::new();
        let mut total = Amount::ZERO;
        for a in &self.allocations {
            if a.address.kind() != AccountKind::Standard {
                return Err(GenesisError::VaultAllocation(a.address));
            }
            if !seen.insert(a.address) {
                return Err(GenesisError::DuplicateAllocation(a.address));
            }
            total = total
                .checked_add(a.amount)
                .ok_or(GenesisError::IssuanceOverflow)?;
        }
        Ok(())
    }

    /// Issuance transactions of the genesis block, in allocation order.
    pub fn issuance_txs(&self) -> Vec<Transaction> {
        self.allocations
            .iter()
            .map(|a| Transaction::unsigned(a.address, 0, Payload::Basic { amount: a.amount }))
            .collect()
    }

    pub fn from_toml(text: &str) -> Result<Self, GenesisError> {
        let cfg: GenesisConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, GenesisError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("genesis config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn addr(b: u8) -> Address {
        Address::from_parts(AccountKind::Standard, [b; 20])
    }

    #[test]
    fn toml_roundtrip_with_defaults() {
        let text = format!(
            "chain_id = \"t\"\n[[allocations]]\naddress = \"{}\"\namount = 5\n",
            addr(1)
        );
        let cfg = GenesisConfig::from_toml(&text).unwrap();
        assert_eq!(cfg.theta_max, DEFAULT_THETA_MAX);
        assert_eq!(cfg.signature_scheme, SignatureScheme::Ed25519);
        assert_eq!(GenesisConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(matches!(
            GenesisConfig::new("").validate(),
            Err(GenesisError::EmptyChainId)
        ));
        let mut zero = GenesisConfig::new("t");
        zero.theta_max = 0;
        assert!(matches!(zero.validate(), Err(GenesisError::ZeroThetaMax)));
        let dup = GenesisConfig::new("t")
            .allocate(addr(1), 1)
            .allocate(addr(1), 2);
        assert!(matches!(
            dup.validate(),
            Err(GenesisError::DuplicateAllocation(_))
        ));
        let vault =
            GenesisConfig::new("t").allocate(Address::from_parts(AccountKind::Vault, [1; 20]), 1);
        assert!(matches!(
            vault.validate(),
            Err(GenesisError::VaultAllocation(_))
        ));
        let big = GenesisConfig::new("t")
            .allocate(addr(1), u64::MAX)
            .allocate(addr(2), 1);
        assert!(matches!(
            big.validate(),
            Err(GenesisError::IssuanceOverflow)
        ));
    }
}
