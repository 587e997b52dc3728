//! Attack and robustness probabilities for the confirmation race.
//!
//! The attacker model is the discrete block race: each new block is the
//! attacker's with probability `q` and the honest network's with `p = 1 - q`.
//! An attacker `z` blocks behind catches up with probability `(q/p)^z` when
//! `q < p`, and surely otherwise.
//!
//! Cascade figures assume each vault level is breached independently with
//! the same probability, so an `n`-level cascade falls with `p^n`.

mod decimal;
mod montecarlo;

pub use decimal::{DecimalError, ExactDecimal};
pub use montecarlo::{acceptance_probability_estimate, simulate_attack, SimResult};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Step budget per simulated walk unless overridden.
pub const DEFAULT_HORIZON: u64 = 10_000;

/// Bitcoin's mean rate of one block per ten minutes.
pub const DEFAULT_LAMBDA: f64 = 1.0 / 600.0;

/// Walks are abandoned once the chance of ever recovering drops below this.
pub const DRIFT_CUTOFF: f64 = 1e-9;

/// Attacker shares at which the simulator is checked against the closed form.
pub const ORACLE_GRID_Q: [f64; 4] = [0.1, 0.2, 0.3, 0.4];

/// Confirmation depths paired with every share in [`ORACLE_GRID_Q`].
pub const ORACLE_GRID_Z: [u64; 8] = [1, 2, 3, 4, 5, 6, 7, 8];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SecurityError {
    #[error("attacker share q must lie in [0, 1), got {0}")]
    AttackerShare(f64),
    #[error("probability must lie in [0, 1], got {0}")]
    Probability(f64),
    #[error("cascade depth n must be at least 1")]
    ZeroDepth,
    #[error("trials must be at least 1")]
    ZeroTrials,
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("mining rate must be positive and finite, got {0}")]
    MiningRate(f64),
    #[error("acceptance probability is zero; ratio undefined")]
    ZeroAcceptance,
    #[error("no per-height probabilities given")]
    EmptyInput,
    #[error(transparent)]
    Decimal(#[from] DecimalError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackParams {
    /// Attacker's share of hash power.
    pub q: f64,
    /// Blocks per second. Only used to convert depths into wait times.
    pub lambda: f64,
    /// Confirmation depth the attacker must overcome.
    pub z: u64,
    /// Vault cascade depth.
    pub n: u32,
    pub trials: u64,
    pub seed: u64,
    /// Maximum steps per simulated walk.
    pub horizon: u64,
}

impl AttackParams {
    pub fn new(q: f64, z: u64, trials: u64, seed: u64) -> Self {
        AttackParams {
            q,
            lambda: DEFAULT_LAMBDA,
            z,
            n: 1,
            trials,
            seed,
            horizon: DEFAULT_HORIZON,
        }
    }

    pub fn validate(&self) -> Result<(), SecurityError> {
        if !(0.0..1.0).contains(&self.q) {
            return Err(SecurityError::AttackerShare(self.q));
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(SecurityError::MiningRate(self.lambda));
        }
        if self.n == 0 {
            return Err(SecurityError::ZeroDepth);
        }
        if self.trials == 0 {
            return Err(SecurityError::ZeroTrials);
        }
        if self.horizon == 0 {
            return Err(SecurityError::ZeroHorizon);
        }
        Ok(())
    }

    /// The closed form describes a vanishing risk only for a minority attacker.
    pub fn closed_form_valid(&self) -> bool {
        self.q < 0.5
    }

    /// Expected seconds for `z` honest blocks at rate `lambda`.
    pub fn confirmation_seconds(&self) -> f64 {
        self.z as f64 / self.lambda
    }
}

/// Probability that an attacker with share `q`, `z` blocks behind, ever
/// draws level with the honest chain.
pub fn catch_up_probability(q: f64, z: u64) -> f64 {
    if z == 0 {
        return 1.0;
    }
    let p = 1.0 - q;
    if q >= p {
        return 1.0;
    }
    let ratio = q / p;
    match i32::try_from(z) {
        Ok(z) => ratio.powi(z),
        Err(_) => ratio.powf(z as f64),
    }
}

fn check_probability(p: f64) -> Result<(), SecurityError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(SecurityError::Probability(p))
    }
}

/// `p_malicious^n`: every one of `n` independent levels must fall.
pub fn cascade_breach_probability(p_malicious: f64, n: u32) -> Result<f64, SecurityError> {
    check_probability(p_malicious)?;
    if n == 0 {
        return Err(SecurityError::ZeroDepth);
    }
    Ok(match i32::try_from(n) {
        Ok(n) => p_malicious.powi(n),
        Err(_) => p_malicious.powf(n as f64),
    })
}

/// Same as [`cascade_breach_probability`] in exact decimal arithmetic, so
/// `0.1` over five levels renders as `1e-5` rather than a float near it.
pub fn cascade_breach_exact(
    p_malicious: &ExactDecimal,
    n: u32,
) -> Result<ExactDecimal, SecurityError> {
    if p_malicious > &ExactDecimal::one() {
        return Err(SecurityError::Probability(p_malicious.to_f64()));
    }
    if n == 0 {
        return Err(SecurityError::ZeroDepth);
    }
    Ok(p_malicious.pow(n))
}

/// `p_malicious / p_accepted`; a transaction is robust at level `ε` when
/// this is below `ε`.
pub fn epsilon_robustness_ratio(p_malicious: f64, p_accepted: f64) -> Result<f64, SecurityError> {
    check_probability(p_malicious)?;
    check_probability(p_accepted)?;
    if p_accepted == 0.0 {
        return Err(SecurityError::ZeroAcceptance);
    }
    Ok(p_malicious / p_accepted)
}

pub fn is_epsilon_robust(
    p_malicious: f64,
    p_accepted: f64,
    epsilon: f64,
) -> Result<bool, SecurityError> {
    Ok(epsilon_robustness_ratio(p_malicious, p_accepted)? < epsilon)
}

/// Mean malicious-acceptance probability over the given heights.
pub fn model_robustness(per_height: &[f64]) -> Result<f64, SecurityError> {
    if per_height.is_empty() {
        return Err(SecurityError::EmptyInput);
    }
    for &p in per_height {
        check_probability(p)?;
    }
    Ok(per_height.iter().sum::<f64>() / per_height.len() as f64)
}

/// Smallest depth whose cascade probability is strictly below `10^-digits`,
/// for `0 < p < 1`. Uses `floor + 1` rather than `ceil` so that a depth
/// landing exactly on the bound (0.1 at six levels) is skipped.
pub fn depth_for_digits(p_malicious: f64, digits: u32) -> Option<u32> {
    if !(p_malicious > 0.0 && p_malicious < 1.0) {
        return None;
    }
    Some((-(digits as f64) / p_malicious.log10()).floor() as u32 + 1)
}

#[cfg(test)]
mod tests;
