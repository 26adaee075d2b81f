//! Exact arithmetic helpers. Totals and round counts are unbounded integers;
//! averages and thresholds are exact rationals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

pub type Int = BigInt;
pub type Q = BigRational;

pub fn int(n: i64) -> Int {
    BigInt::from(n)
}

pub fn q(num: i64, den: i64) -> Q {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn qi(n: &Int) -> Q {
    BigRational::from_integer(n.clone())
}

/// `total / rounds` as an exact rational. `rounds` must be positive.
pub fn avg(total: &Int, rounds: &Int) -> Q {
    BigRational::new(total.clone(), rounds.clone())
}

pub fn floor_q(x: &Q) -> Int {
    x.numer().div_floor(x.denom())
}

pub fn ceil_q(x: &Q) -> Int {
    -((-x.numer()).div_floor(x.denom()))
}

pub fn abs_int(x: &Int) -> Int {
    x.abs()
}

pub fn clamp_nonneg(x: Int) -> Int {
    if x.is_negative() {
        Int::zero()
    } else {
        x
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal {0:?}")]
pub struct ParseRationalError(pub String);

/// Parses `a`, `-a`, or `a/b` (with `b != 0`).
pub fn parse_q(s: &str) -> Result<Q, ParseRationalError> {
    let err = || ParseRationalError(s.to_string());
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| err())?;
    let den: BigInt = den.parse().map_err(|_| err())?;
    if den.is_zero() {
        return Err(err());
    }
    Ok(BigRational::new(num, den))
}

/// Lossy conversion for display purposes only.
pub fn to_f64(x: &Q) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}
