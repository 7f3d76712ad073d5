//! Exact rationals and the handful of helpers the constructions need.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Q = num_rational::BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qbig(n: BigInt, d: BigInt) -> Q {
    Q::new(n, d)
}

/// 2^-k as an exact rational.
pub fn pow2_neg(k: u32) -> Q {
    Q::new(BigInt::one(), BigInt::one() << k as usize)
}

pub fn floor_big(x: &Q) -> BigInt {
    x.numer().div_floor(x.denom())
}

pub fn to_biguint(x: &BigInt) -> Option<BigUint> {
    match x.sign() {
        Sign::Minus => None,
        _ => Some(x.magnitude().clone()),
    }
}

/// Parses "p/q", "p" or a finite decimal such as "0.25".
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::parse(0, format!("bad rational {s:?}"));
    if let Some((a, b)) = s.split_once('/') {
        let n: BigInt = a.trim().parse().map_err(|_| bad())?;
        let d: BigInt = b.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Q::new(n, d));
    }
    if let Some((a, b)) = s.split_once('.') {
        if b.is_empty() || !b.bytes().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = a.trim_start().starts_with('-');
        let whole: BigInt = if a == "-" || a.is_empty() {
            BigInt::zero()
        } else {
            a.parse().map_err(|_| bad())?
        };
        let frac: BigInt = b.parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), b.len());
        let f = Q::new(frac, scale);
        let w = Q::from_integer(whole.abs());
        let v = w + f;
        return Ok(if neg { -v } else { v });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Q::from_integer(n))
}

/// Decimal rendering truncated toward zero at `digits` places.
pub fn to_decimal(x: &Q, digits: usize) -> String {
    let neg = x.is_negative();
    let a = x.abs();
    let scale = num_traits::pow(BigInt::from(10), digits);
    let scaled = (a.numer() * &scale).div_floor(a.denom());
    let (w, f) = scaled.div_rem(&scale);
    let sign = if neg && !scaled.is_zero() { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{w}")
    } else {
        format!("{sign}{w}.{:0>width$}", f.to_string(), width = digits)
    }
}

/// a + b without reducing to lowest terms. Long sums of rationals with
/// unrelated huge denominators spend nearly all their time in gcds, and
/// comparisons do not need them.
pub fn add_unreduced(a: &Q, b: &Q) -> Q {
    if a.denom() == b.denom() {
        return Q::new_raw(a.numer() + b.numer(), a.denom().clone());
    }
    Q::new_raw(a.numer() * b.denom() + b.numer() * a.denom(), a.denom() * b.denom())
}

/// Pairwise sum, not reduced; see `add_unreduced`.
pub fn sum_unreduced(terms: &[Q]) -> Q {
    match terms.len() {
        0 => Q::zero(),
        1 => terms[0].clone(),
        n => {
            let (a, b) = terms.split_at(n / 2);
            add_unreduced(&sum_unreduced(a), &sum_unreduced(b))
        }
    }
}

pub fn min_q<'a>(a: &'a Q, b: &'a Q) -> &'a Q {
    if a <= b {
        a
    } else {
        b
    }
}

pub fn max_q<'a>(a: &'a Q, b: &'a Q) -> &'a Q {
    if a >= b {
        a
    } else {
        b
    }
}
