use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::family::SupportFamily;
use super::RationalInterval;
use crate::error::{Error, Result};
use crate::rational::Q;
use crate::treescheme::TreeScheme;

/// A value `|L|·s / (d·p)` of the truncation at the point `L.lo + |L|·a/d`,
/// where `p = |L|/λ` for the deepest interval that contributed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Scaled {
    pub s: u128,
    pub p: u128,
}

#[derive(Clone, Debug)]
struct Fast {
    // 4M + 1 and |L|/λ, when they fit
    pieces: Option<u128>,
    p: Option<u128>,
    pieces_big: BigInt,
    p_big: BigInt,
    child: Vec<Option<usize>>,
}

/// Evaluates a truncation of F(T, L) at single points without building the
/// piecewise-linear function: the point descends through the one interval of
/// each level that can contain it.
///
/// Relative coordinates keep a fixed denominator on the way down, so the
/// work is integer arithmetic; `u128` is used while it does not overflow.
#[derive(Clone, Debug)]
pub struct PointEvaluator {
    host: RationalInterval,
    width: u64,
    nodes: Vec<Fast>,
}

impl PointEvaluator {
    pub fn new(t: &TreeScheme, depth: usize, width: u64, host: &RationalInterval) -> Result<Self> {
        let fam = SupportFamily::build(t, depth, width, host)?;
        Ok(Self::from_family(&fam))
    }

    pub fn from_family(fam: &SupportFamily) -> Self {
        let len = fam.host.len();
        let nodes = fam
            .nodes
            .iter()
            .map(|n| {
                let pieces_big: BigInt = BigInt::from(4) * &n.m + 1;
                let ratio = &len / &n.lambda;
                debug_assert!(ratio.is_integer());
                let p_big = ratio.to_integer();
                let mut child = vec![None; fam.width as usize];
                for &(c, i) in &n.children {
                    child[c as usize] = Some(i);
                }
                Fast { pieces: pieces_big.to_u128(), p: p_big.to_u128(), pieces_big, p_big, child }
            })
            .collect();
        PointEvaluator { host: fam.host.clone(), width: fam.width, nodes }
    }

    pub fn host(&self) -> &RationalInterval {
        &self.host
    }

    /// Value at relative coordinate `a/d` (0 ≤ a ≤ d), or `None` when the
    /// integers outgrow `u128`.
    pub fn eval_scaled(&self, mut a: u128, d: u128) -> Option<Scaled> {
        let mut s = 0u128;
        let mut p_last = 1u128;
        if self.nodes.is_empty() {
            return Some(Scaled { s, p: p_last });
        }
        let mut idx = 0;
        loop {
            let node = &self.nodes[idx];
            let pieces = node.pieces?;
            let u = a.checked_mul(pieces)?;
            let (mut j, mut r) = (u / d, u % d);
            if j == pieces {
                j -= 1;
                r = d;
            }
            let w = match j % 4 {
                0 => 0,
                1 => r,
                2 => d,
                _ => d - r,
            };
            if w != 0 {
                let p = node.p?;
                s = s.checked_mul(p / p_last)?.checked_add(w)?;
                p_last = p;
            }
            if j % 2 == 1 || r == 0 {
                break;
            }
            let n = (d - r) / r.checked_mul(3)?;
            if n >= self.width as u128 {
                break;
            }
            if d > (3 * n + 2).checked_mul(r)? {
                break;
            }
            let Some(c) = node.child[n as usize] else { break };
            a = (r.checked_mul(3 * n + 2)? - d).checked_mul(3 * n + 1)?;
            idx = c;
        }
        Some(Scaled { s, p: p_last })
    }

    /// As [`eval_scaled`](Self::eval_scaled) with unbounded integers;
    /// returns `(s, p)`.
    pub fn eval_scaled_big(&self, a: &BigInt, d: &BigInt) -> (BigInt, BigInt) {
        let mut s = BigInt::zero();
        let mut p_last = BigInt::one();
        if self.nodes.is_empty() {
            return (s, p_last);
        }
        let mut a = a.clone();
        let mut idx = 0;
        loop {
            let node = &self.nodes[idx];
            let u = &a * &node.pieces_big;
            let (mut j, mut r) = u.div_mod_floor(d);
            if j == node.pieces_big {
                j -= 1;
                r = d.clone();
            }
            let jm = (&j % 4u32).to_u32().unwrap();
            let w = match jm {
                0 => BigInt::zero(),
                1 => r.clone(),
                2 => d.clone(),
                _ => d - &r,
            };
            if !w.is_zero() {
                s = s * (&node.p_big / &p_last) + w;
                p_last = node.p_big.clone();
            }
            if jm % 2 == 1 || r.is_zero() {
                break;
            }
            let n = (d - &r) / (BigInt::from(3) * &r);
            let Some(nu) = n.to_u64().filter(|&n| n < self.width) else { break };
            if *d > (BigInt::from(3) * &n + 2) * &r {
                break;
            }
            let Some(c) = node.child[nu as usize] else { break };
            a = (&r * (BigInt::from(3) * &n + 2) - d) * (BigInt::from(3) * &n + 1);
            idx = c;
        }
        (s, p_last)
    }

    /// The truncation's value at `x ∈ [0,1]`.
    pub fn eval(&self, x: &Q) -> Result<Q> {
        if x.is_negative() || *x > Q::one() {
            return Err(Error::Invalid(format!("{x} lies outside [0,1]")));
        }
        if !self.host.contains(x) {
            return Ok(Q::zero());
        }
        let len = self.host.len();
        let rel = (x - &self.host.lo) / &len;
        let (a, d) = (rel.numer(), rel.denom());
        if let (Some(a), Some(d)) = (a.to_u128(), d.to_u128()) {
            if let Some(v) = self.eval_scaled(a, d) {
                return Ok(len * Q::new(BigInt::from(v.s), BigInt::from(d) * BigInt::from(v.p)));
            }
        }
        let (s, p) = self.eval_scaled_big(a, d);
        Ok(len * Q::new(s, d * p))
    }
}
