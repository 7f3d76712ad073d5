//! Wiggle functions copied onto the plateaus of wiggles, one level per tree
//! node, and the derivation ranks of the resulting functions.
//!
//! Every interval of `C_σ^L` has the same length `λ_σ`, so per-node geometry
//! is a handful of exact numbers; individual intervals are produced only on
//! demand.

mod derive;
mod eval;
mod family;
mod witness;

pub use derive::{numeric_vb_probe, residual_set, site_host, symbolic_derivation, symbolic_derivation_with, DEFAULT_MAX_STAGES, DerivationTrace, Site, Stage, Variant};
pub use eval::{PointEvaluator, Scaled};
pub use family::{
    agreement_defect, g_approximant, g_step_distance, level_range, level_sum, support_intervals, truncated_f,
    FamilyNode, SupportFamily, DEFAULT_MAX_BREAKPOINTS,
};
pub use witness::{variation_witness, Block, VariationWitness};

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::plfun::PLFunction;
use crate::rational::{qi, Q};

/// A closed interval `[lo, hi]` with rational endpoints.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalInterval {
    pub lo: Q,
    pub hi: Q,
}

impl RationalInterval {
    pub fn new(lo: Q, hi: Q) -> Result<Self> {
        if lo > hi {
            return Err(Error::Invalid(format!("empty interval [{lo}, {hi}]")));
        }
        Ok(RationalInterval { lo, hi })
    }

    pub fn unit() -> Self {
        RationalInterval { lo: qi(0), hi: qi(1) }
    }

    pub fn len(&self) -> Q {
        &self.hi - &self.lo
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &Q) -> bool {
        *x >= self.lo && *x <= self.hi
    }

    pub fn contains_interval(&self, o: &RationalInterval) -> bool {
        o.lo >= self.lo && o.hi <= self.hi
    }

    /// `self⟨k⟩`: the interval standing to `k` as `self` stands to [0,1].
    pub fn relocate(&self, k: &RationalInterval) -> RationalInterval {
        let w = k.len();
        RationalInterval { lo: &k.lo + &self.lo * &w, hi: &k.lo + &self.hi * &w }
    }

    pub fn mid(&self) -> Q {
        (&self.lo + &self.hi) / qi(2)
    }
}

impl fmt::Display for RationalInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

pub fn relocate(j: &RationalInterval, k: &RationalInterval) -> RationalInterval {
    j.relocate(k)
}

/// `J_n = [1/(3n+2), 1/(3n+1)]`.
pub fn j_n(n: u64) -> RationalInterval {
    let n = BigInt::from(n);
    let three = BigInt::from(3);
    RationalInterval {
        lo: Q::new(BigInt::one(), &three * &n + 2),
        hi: Q::new(BigInt::one(), &three * &n + 1),
    }
}

/// The least `M` with `2M·len > 1`.
pub fn wiggle_m(len: &Q) -> Result<BigInt> {
    if !len.is_positive() {
        return Err(Error::Invalid("a wiggle needs an interval of positive length".into()));
    }
    let r = (qi(2) * len).recip();
    Ok(r.numer().div_floor(r.denom()) + 1)
}

fn m_usize(j: &RationalInterval) -> Result<usize> {
    let m = wiggle_m(&j.len())?;
    m.to_usize()
        .filter(|&m| m < (1 << 40))
        .ok_or_else(|| Error::Capacity(format!("wiggle on {j} has M = {m}")))
}

/// Breakpoints of W(J) across J, starting and ending at value 0.
pub fn wiggle_bump(j: &RationalInterval) -> Result<Vec<(Q, Q)>> {
    let m = m_usize(j)?;
    let pieces = 4 * m + 1;
    let len = j.len();
    let step = &len / Q::from_integer(BigInt::from(pieces));
    let mut out = Vec::with_capacity(pieces + 1);
    for k in 0..=pieces {
        let x = &j.lo + &step * Q::from_integer(BigInt::from(k));
        let y = if k % 4 >= 2 { len.clone() } else { Q::zero() };
        out.push((x, y));
    }
    Ok(out)
}

/// W(J) as a function on [0,1], zero outside J.
pub fn wiggle(j: &RationalInterval) -> Result<PLFunction> {
    if !RationalInterval::unit().contains_interval(j) {
        return Err(Error::Invalid(format!("{j} is not inside [0,1]")));
    }
    PLFunction::sum_of_bumps([wiggle_bump(j)?.as_slice()])
}

/// ♭(J): the 2M+1 maximal intervals on which W(J) is constant, left to
/// right. Even positions carry value 0, odd positions value |J|.
pub fn flats(j: &RationalInterval) -> Result<Vec<RationalInterval>> {
    let m = m_usize(j)?;
    Ok((0..=2 * m as u64).map(|f| flat(j, &BigInt::from(m), f)).collect())
}

/// The `f`-th flat of an interval whose wiggle has parameter `m`.
pub fn flat(j: &RationalInterval, m: &BigInt, f: u64) -> RationalInterval {
    let p = Q::from_integer(4 * m + 1);
    let w = j.len() / p;
    let lo = &j.lo + &w * qi(2 * f as i64);
    RationalInterval { hi: &lo + &w, lo }
}
