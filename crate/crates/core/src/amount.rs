//! Indivisible asset units.

use std::fmt;
use std::iter::Sum;

use serde::{Deserialize, Serialize};

/// A non-negative count of atoms. Arithmetic is checked; nothing wraps.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Amount(u64);

impl Amount {
    pub const ZERO: Amount = Amount(0);

    pub const fn new(atoms: u64) -> Self {
        Amount(atoms)
    }

    pub const fn atoms(self) -> u64 {
        self.0
    }

    pub fn checked_add(self, rhs: Amount) -> Option<Amount> {
        self.0.checked_add(rhs.0).map(Amount)
    }

    pub fn checked_sub(self, rhs: Amount) -> Option<Amount> {
        self.0.checked_sub(rhs.0).map(Amount)
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl From<u64> for Amount {
    fn from(v: u64) -> Self {
        Amount(v)
    }
}

impl fmt::Display for Amount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Totals over many accounts may exceed `u64`, so sums widen.
impl Sum<Amount> for u128 {
    fn sum<I: Iterator<Item = Amount>>(iter: I) -> u128 {
        iter.map(|a| u128::from(a.0)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn underflow_is_none() {
        assert_eq!(Amount::new(3).checked_sub(Amount::new(4)), None);
        assert_eq!(
            Amount::new(4).checked_sub(Amount::new(4)),
            Some(Amount::ZERO)
        );
    }

    #[test]
    fn overflow_is_none() {
        assert_eq!(Amount::new(u64::MAX).checked_add(Amount::new(1)), None);
    }

    #[test]
    fn wide_sum() {
        let total: u128 = [Amount::new(u64::MAX), Amount::new(1)].into_iter().sum();
        assert_eq!(total, u128::from(u64::MAX) + 1);
    }
}
