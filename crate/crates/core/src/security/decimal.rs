use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecimalError {
    #[error("not a non-negative decimal number: {0:?}")]
    Syntax(String),
    #[error("exponent out of range in {0:?}")]
    Exponent(String),
}

/// Non-negative decimal `mantissa * 10^exponent`, kept with no trailing
/// zeros in the mantissa so equal values compare field-equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExactDecimal {
    mantissa: BigUint,
    exponent: i64,
}

impl ExactDecimal {
    pub fn zero() -> Self {
        ExactDecimal {
            mantissa: BigUint::zero(),
            exponent: 0,
        }
    }

    pub fn one() -> Self {
        ExactDecimal {
            mantissa: BigUint::one(),
            exponent: 0,
        }
    }

    fn normalized(mut mantissa: BigUint, mut exponent: i64) -> Self {
        if mantissa.is_zero() {
            return Self::zero();
        }
        let ten = BigUint::from(10u32);
        while (&mantissa % &ten).is_zero() {
            mantissa /= &ten;
            exponent += 1;
        }
        ExactDecimal { mantissa, exponent }
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn pow(&self, n: u32) -> Self {
        if n == 0 {
            return Self::one();
        }
        Self::normalized(self.mantissa.pow(n), self.exponent * i64::from(n))
    }

    pub fn to_f64(&self) -> f64 {
        let sci = format!("{}e{}", self.mantissa, self.exponent);
        sci.parse().unwrap_or(f64::INFINITY)
    }
}

impl FromStr for ExactDecimal {
    type Err = DecimalError;

    /// Accepts `12`, `0.5`, `.5`, `5.`, `1e-3`, `2.5E+2`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || DecimalError::Syntax(s.to_owned());
        let (body, exp) = match s.find(['e', 'E']) {
            Some(i) => {
                let e: i64 = s[i + 1..].parse().map_err(|_| bad())?;
                (&s[..i], e)
            }
            None => (s, 0),
        };
        let (int, frac) = body.split_once('.').unwrap_or((body, ""));
        let all_digits = |t: &str| t.bytes().all(|b| b.is_ascii_digit());
        if int.is_empty() && frac.is_empty() || !all_digits(int) || !all_digits(frac) {
            return Err(bad());
        }
        let digits = format!("{int}{frac}");
        let mantissa = BigUint::parse_bytes(digits.as_bytes(), 10).ok_or_else(bad)?;
        let exponent = i64::try_from(frac.len())
            .ok()
            .and_then(|f| exp.checked_sub(f))
            .filter(|e| e.unsigned_abs() < 1 << 40)
            .ok_or_else(|| DecimalError::Exponent(s.to_owned()))?;
        Ok(Self::normalized(mantissa, exponent))
    }
}

impl fmt::Display for ExactDecimal {
    /// Plain notation for leading digits between 1e-4 and 1e20, scientific
    /// notation (`1e-5`, `2.43e-6`) outside that range.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let digits = self.mantissa.to_string();
        let len = digits.len() as i64;
        let lead = self.exponent + len - 1;
        if !(-4..21).contains(&lead) {
            f.write_str(&digits[..1])?;
            if len > 1 {
                write!(f, ".{}", &digits[1..])?;
            }
            return write!(f, "e{lead}");
        }
        if self.exponent >= 0 {
            return write!(f, "{digits}{}", "0".repeat(self.exponent as usize));
        }
        let point = len + self.exponent;
        if point > 0 {
            let (a, b) = digits.split_at(point as usize);
            write!(f, "{a}.{b}")
        } else {
            write!(f, "0.{}{digits}", "0".repeat((-point) as usize))
        }
    }
}

impl PartialOrd for ExactDecimal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExactDecimal {
    fn cmp(&self, other: &Self) -> Ordering {
        let shift = |m: &BigUint, by: i64| m * BigUint::from(10u32).pow(by as u32);
        let low = self.exponent.min(other.exponent);
        shift(&self.mantissa, self.exponent - low)
            .cmp(&shift(&other.mantissa, other.exponent - low))
    }
}
