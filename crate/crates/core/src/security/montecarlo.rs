use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{AttackParams, SecurityError, DRIFT_CUTOFF};

/// Trials per RNG stream. Chunk `k` always draws from stream `k` of the
/// seeded generator, so the result does not depend on thread scheduling.
const CHUNK: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub estimate: f64,
    /// `sqrt(p(1-p)/trials)` at the estimate.
    pub stderr: f64,
    pub trials: u64,
    pub seed: u64,
    /// Walks that reached level.
    pub successes: u64,
    /// Walks still undecided when the horizon ran out.
    pub horizon_hits: u64,
    /// Walks given up once the remaining chance fell below the drift cutoff.
    pub abandoned: u64,
    /// Largest amount by which cut-short walks could have moved the
    /// estimate, had they been followed to the end.
    pub truncation_bound: f64,
}

impl SimResult {
    fn from_counts(params: &AttackParams, c: Counts, tail: f64) -> Self {
        let n = params.trials as f64;
        let estimate = c.successes as f64 / n;
        SimResult {
            estimate,
            stderr: (estimate * (1.0 - estimate) / n).sqrt(),
            trials: params.trials,
            seed: params.seed,
            successes: c.successes,
            horizon_hits: c.horizon_hits,
            abandoned: c.abandoned,
            truncation_bound: (c.horizon_hits as f64 + c.abandoned as f64 * tail) / n,
        }
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct Counts {
    successes: u64,
    horizon_hits: u64,
    abandoned: u64,
}

impl std::ops::Add for Counts {
    type Output = Counts;
    fn add(self, o: Counts) -> Counts {
        Counts {
            successes: self.successes + o.successes,
            horizon_hits: self.horizon_hits + o.horizon_hits,
            abandoned: self.abandoned + o.abandoned,
        }
    }
}

/// Deficit at which a walk is abandoned, and the exact chance it would still
/// have recovered from there.
fn drift_cutoff(q: f64) -> (u64, f64) {
    let p = 1.0 - q;
    if q >= p {
        return (u64::MAX, 0.0);
    }
    if q == 0.0 {
        return (1, 0.0);
    }
    let ratio = q / p;
    let mut deficit = 1u64;
    let mut tail = ratio;
    while tail >= DRIFT_CUTOFF {
        deficit += 1;
        tail *= ratio;
    }
    (deficit, tail)
}

/// Hands out 32-bit uniforms two per 64-bit draw.
struct Bits {
    rng: ChaCha8Rng,
    buf: u64,
    left: bool,
}

impl Bits {
    #[inline]
    fn next(&mut self) -> u32 {
        if self.left {
            self.left = false;
            (self.buf >> 32) as u32
        } else {
            self.buf = self.rng.next_u64();
            self.left = true;
            self.buf as u32
        }
    }
}

fn run_chunk(params: &AttackParams, chunk: u64, cutoff: u64, threshold: u64) -> Counts {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(chunk);
    let mut bits = Bits {
        rng,
        buf: 0,
        left: false,
    };
    let start = chunk * CHUNK;
    let len = CHUNK.min(params.trials - start);
    let mut c = Counts::default();
    for _ in 0..len {
        let mut deficit = params.z;
        if deficit == 0 {
            c.successes += 1;
            continue;
        }
        let mut steps = 0;
        loop {
            if deficit >= cutoff {
                c.abandoned += 1;
                break;
            }
            if steps == params.horizon {
                c.horizon_hits += 1;
                break;
            }
            steps += 1;
            if u64::from(bits.next()) < threshold {
                deficit -= 1;
                if deficit == 0 {
                    c.successes += 1;
                    break;
                }
            } else {
                deficit += 1;
            }
        }
    }
    c
}

/// Monte Carlo estimate of [`super::catch_up_probability`]. Each trial walks
/// the attacker's deficit from `z`, one block per step, until it reaches
/// zero, runs out of horizon, or drifts so far that recovery is below
/// [`DRIFT_CUTOFF`]. Both kinds of cut-short walk count as failures and are
/// accounted for in `truncation_bound`.
pub fn simulate_attack(params: &AttackParams) -> Result<SimResult, SecurityError> {
    params.validate()?;
    let (cutoff, tail) = drift_cutoff(params.q);
    // Attacker wins a step when a uniform u32 falls below q * 2^32.
    let threshold = (params.q * 4_294_967_296.0) as u64;
    let chunks = params.trials.div_ceil(CHUNK);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|k| run_chunk(params, k, cutoff, threshold))
        .reduce(Counts::default, |a, b| a + b);
    Ok(SimResult::from_counts(params, counts, tail))
}

/// Chance that a transaction `confirmations` blocks deep stays on the
/// prevailing chain, read as the complement of a successful rewrite in the
/// same walk model. An attacker with no hash power never rewrites, so
/// `q = 0` gives exactly 1 at every depth.
pub fn acceptance_probability_estimate(
    q: f64,
    confirmations: u64,
    trials: u64,
    seed: u64,
) -> Result<SimResult, SecurityError> {
    let params = AttackParams::new(q, confirmations, trials, seed);
    params.validate()?;
    if q == 0.0 {
        return Ok(SimResult {
            estimate: 1.0,
            stderr: 0.0,
            trials,
            seed,
            successes: trials,
            horizon_hits: 0,
            abandoned: 0,
            truncation_bound: 0.0,
        });
    }
    let attack = simulate_attack(&params)?;
    Ok(SimResult {
        estimate: 1.0 - attack.estimate,
        successes: trials - attack.successes,
        ..attack
    })
}
