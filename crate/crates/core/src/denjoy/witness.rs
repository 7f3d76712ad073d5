use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::eval::PointEvaluator;
use super::{flat, j_n, RationalInterval};
use crate::error::{Error, Result};
use crate::rational::{pow2_neg, qi, Q};
use crate::treescheme::{analyze, Foundedness, TreeScheme};

/// One interval H of `C_{Z↾ℓ}` whose flats are all sampled. Point `f` is
/// the left end of the Z-child interval inside the `f`-th flat, the first
/// step of the leftmost descent towards min(P_Z ∩ K).
#[derive(Clone, Debug)]
pub struct Block {
    pub level: usize,
    pub interval: RationalInterval,
    /// Relative coordinate of point `f` is `(a0 + f·step)/d`.
    pub a0: BigInt,
    pub step: BigInt,
    pub d: BigInt,
    pub points: u64,
    /// Sampled blocks sitting inside flat `f`, after point `f`.
    pub children: Vec<(u64, Block)>,
}

impl Block {
    fn count(&self) -> u64 {
        self.points + self.children.iter().map(|(_, b)| b.count()).sum::<u64>()
    }
}

#[derive(Clone, Debug)]
pub struct VariationWitness {
    pub n: u32,
    /// Level of `h0` along Z.
    pub m: usize,
    pub h0: RationalInterval,
    pub root: Block,
    /// Truncation depth the points were evaluated at.
    pub depth: usize,
    pub width: u64,
    pub count: u64,
    /// Σ over the traversed points of |F(x_{i+1}) − F(x_i)|, exact.
    pub variation: Q,
    /// Σ 2M|H| over the sampled blocks.
    pub lower_bound: Q,
    /// Number of intervals of `C_{Z↾(m+n)}` inside `h0`.
    pub target_level_intervals: BigInt,
    tree: TreeScheme,
}

struct PathLevel {
    lambda: Q,
    m: BigInt,
    p: BigInt,
    z: u64,
}

impl VariationWitness {
    /// The sampled points in increasing order.
    pub fn points(&self) -> Vec<Q> {
        let mut out = Vec::with_capacity(self.count.min(1 << 24) as usize);
        emit(&self.root, &mut |a, d| {
            let host = RationalInterval::unit();
            out.push(&host.lo + host.len() * Q::new(a.clone(), d.clone()));
        });
        out
    }

    /// The exact variation of the truncation at `depth` over the same points.
    pub fn variation_at_depth(&self, depth: usize) -> Result<Q> {
        let ev = PointEvaluator::new(&self.tree, depth, self.width, &RationalInterval::unit())?;
        stream_variation(&ev, &self.root)
    }
}

fn emit(b: &Block, out: &mut dyn FnMut(&BigInt, &BigInt)) {
    let mut ci = 0;
    for f in 0..b.points {
        let a = &b.a0 + &b.step * BigInt::from(f);
        out(&a, &b.d);
        while ci < b.children.len() && b.children[ci].0 == f {
            emit(&b.children[ci].1, out);
            ci += 1;
        }
    }
}

enum Prev {
    None,
    Fast { block: usize, s: u128 },
    Exact(Q),
}

struct Acc<'a> {
    ev: &'a PointEvaluator,
    prev: Prev,
    total: Q,
    next_id: usize,
    // per block: accumulator and |L|/(d·P_b)
    blocks: Vec<(u128, Q)>,
}

impl Acc<'_> {
    fn push_exact(&mut self, v: Q) {
        let pv = match &self.prev {
            Prev::None => None,
            Prev::Fast { block, s } => Some(Q::from_integer(BigInt::from(*s)) * &self.blocks[*block].1),
            Prev::Exact(q) => Some(q.clone()),
        };
        if let Some(p) = pv {
            self.total += (&v - p).abs();
        }
        self.prev = Prev::Exact(v);
    }

    fn block(&mut self, b: &Block, p_b: &BigInt) -> Result<()> {
        let id = self.next_id;
        self.next_id += 1;
        let len = self.ev.host().len();
        let scale = &len / Q::from_integer(&b.d * p_b);
        self.blocks.push((0, scale.clone()));
        let fast = (b.a0.to_u128(), b.step.to_u128(), b.d.to_u128(), p_b.to_u128());
        let mut ci = 0;
        for f in 0..b.points {
            let mut done = false;
            if let (Some(a0), Some(st), Some(d), Some(pb)) = fast {
                let a = st.checked_mul(f as u128).and_then(|x| x.checked_add(a0));
                if let Some(v) = a.and_then(|a| self.ev.eval_scaled(a, d)) {
                    if pb % v.p == 0 {
                        if let Some(s) = v.s.checked_mul(pb / v.p) {
                            match self.prev {
                                Prev::Fast { block, s: ps } if block == id => {
                                    let diff = s.abs_diff(ps);
                                    let acc = &mut self.blocks[id].0;
                                    *acc = acc
                                        .checked_add(diff)
                                        .ok_or_else(|| Error::Capacity("variation accumulator overflow".into()))?;
                                    self.prev = Prev::Fast { block: id, s };
                                }
                                _ => {
                                    self.push_exact(Q::from_integer(BigInt::from(s)) * &scale);
                                    self.prev = Prev::Fast { block: id, s };
                                }
                            }
                            done = true;
                        }
                    }
                }
            }
            if !done {
                let a = &b.a0 + &b.step * BigInt::from(f);
                let (s, p) = self.ev.eval_scaled_big(&a, &b.d);
                self.push_exact(&len * Q::new(s, &b.d * p));
            }
            while ci < b.children.len() && b.children[ci].0 == f {
                let child = &b.children[ci].1;
                let pc = child_p(child, &len)?;
                self.block(child, &pc)?;
                ci += 1;
            }
        }
        Ok(())
    }
}

// |L|/λ for the block's interval
fn child_p(b: &Block, len: &Q) -> Result<BigInt> {
    let r = len / b.interval.len();
    if !r.is_integer() {
        return Err(Error::Invalid("block length does not divide the host".into()));
    }
    Ok(r.to_integer())
}

fn stream_variation(ev: &PointEvaluator, root: &Block) -> Result<Q> {
    let mut acc = Acc { ev, prev: Prev::None, total: Q::zero(), next_id: 0, blocks: Vec::new() };
    let p = child_p(root, &ev.host().len())?;
    acc.block(root, &p)?;
    let mut total = acc.total;
    for (a, scale) in &acc.blocks {
        total += Q::from_integer(BigInt::from(*a)) * scale;
    }
    Ok(total)
}

fn path_levels(t: &TreeScheme, z: &[u64]) -> Result<Vec<PathLevel>> {
    let mut out = Vec::new();
    let mut node = t.root_node().ok_or_else(|| Error::Invalid("empty tree".into()))?;
    let mut lambda = qi(1);
    let mut p = BigInt::one();
    for (i, &zi) in z.iter().enumerate() {
        let m = super::wiggle_m(&lambda)?;
        out.push(PathLevel { lambda: lambda.clone(), m: m.clone(), p: p.clone(), z: zi });
        let k: BigInt = BigInt::from(3 * zi + 1) * BigInt::from(3 * zi + 2) * (BigInt::from(4) * &m + 1);
        lambda /= Q::from_integer(k.clone());
        p *= k;
        node = t
            .child(&node, zi)
            .ok_or_else(|| Error::Invalid(format!("path leaves the tree at level {}", i + 1)))?;
    }
    Ok(out)
}

/// Points inside the leftmost interval `h0` of `C_{Z↾m}` on which the
/// variation of F(T, I) is at least 2^n, for an infinite path Z of an
/// ill-founded tree.
///
/// Intervals along Z are sampled level by level, left to right, until the
/// guaranteed total Σ 2M|H| reaches 2^n; the variation is then computed
/// exactly from the truncation at the deepest sampled level.
pub fn variation_witness(t: &TreeScheme, m: usize, n: u32) -> Result<VariationWitness> {
    let path = match analyze(t)? {
        Foundedness::WellFounded => {
            return Err(Error::Invalid("the tree is well-founded, so no infinite path exists".into()))
        }
        Foundedness::IllFounded(p) => p,
    };
    let target = pow2_neg(n).recip();
    // enough levels for any reasonable sampling: each level at least doubles
    let horizon = m + n as usize + 2;
    let z = path.take(horizon + 1);
    let levels = path_levels(t, &z)?;
    let target_level_intervals: BigInt = (m..m + n as usize).map(|l| BigInt::from(2) * &levels[l].m + 1).product();

    // how many blocks to sample at each level
    let mut counts = vec![0u64; horizon + 1];
    counts[m] = 1;
    let gain = |l: usize| qi(2) * Q::from_integer(levels[l].m.clone()) * &levels[l].lambda;
    let mut lower = gain(m);
    let mut deepest = m;
    let mut l = m;
    while lower < target {
        if l + 1 >= horizon {
            return Err(Error::Capacity(format!("no sampling within {horizon} levels reaches 2^{n}")));
        }
        let avail = BigInt::from(counts[l]) * (BigInt::from(2) * &levels[l].m + 1);
        let g = gain(l + 1);
        let need = ((&target - &lower) / &g).ceil().to_integer();
        let take = need.min(avail);
        let take = take.to_u64().ok_or_else(|| Error::Capacity("too many blocks".into()))?;
        counts[l + 1] = take;
        lower += Q::from_integer(BigInt::from(take)) * g;
        l += 1;
        deepest = l;
    }

    // h0: leftmost interval of C_{Z↾m}, through flat 0 at every level
    let mut h0 = RationalInterval::unit();
    for lv in &levels[..m] {
        h0 = j_n(lv.z).relocate(&flat(&h0, &lv.m, 0));
    }
    let mut used = vec![0u64; horizon + 1];
    let root = build_block(&levels, m, h0.clone(), &counts, &mut used, deepest)?;
    let count = root.count();
    if count > 200_000_000 {
        return Err(Error::Capacity(format!("{count} witness points")));
    }
    let width = z[..=deepest].iter().max().copied().unwrap_or(0) + 1;
    let ev = PointEvaluator::new(t, deepest, width, &RationalInterval::unit())?;
    let variation = stream_variation(&ev, &root)?;
    Ok(VariationWitness {
        n,
        m,
        h0,
        root,
        depth: deepest,
        width,
        count,
        variation,
        lower_bound: lower,
        target_level_intervals,
        tree: t.clone(),
    })
}

fn build_block(
    levels: &[PathLevel],
    l: usize,
    h: RationalInterval,
    counts: &[u64],
    used: &mut [u64],
    deepest: usize,
) -> Result<Block> {
    let lv = &levels[l];
    used[l] += 1;
    let c = BigInt::from(3 * lv.z + 2);
    let d: BigInt = &lv.p * (BigInt::from(4) * &lv.m + 1) * &c;
    let rel = &h.lo * Q::from_integer(d.clone());
    if !rel.is_integer() {
        return Err(Error::Invalid("block origin is off the grid".into()));
    }
    let a0 = rel.to_integer() + 1;
    let step = BigInt::from(2) * &c;
    let points = (BigInt::from(2) * &lv.m + 1u32).to_u64().ok_or_else(|| Error::Capacity("block too large".into()))?;
    let mut children = Vec::new();
    if l < deepest {
        let jz = j_n(levels[l].z);
        for f in 0..points {
            if used[l + 1] >= counts[l + 1] {
                break;
            }
            let k = flat(&h, &lv.m, f);
            let child = build_block(levels, l + 1, jz.relocate(&k), counts, used, deepest)?;
            children.push((f, child));
        }
    }
    Ok(Block { level: l, interval: h, a0, step, d, points, children })
}
