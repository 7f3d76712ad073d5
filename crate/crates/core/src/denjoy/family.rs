use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use super::{flat, j_n, wiggle_bump, wiggle_m, RationalInterval};
use crate::error::{Error, Result};
use crate::plfun::{PLFunction, StepFunction};
use crate::rational::{qi, sum_unreduced, Q};
use crate::treescheme::{Node, TreeScheme};

pub const DEFAULT_MAX_BREAKPOINTS: usize = 1_000_000;

const MAX_NODES: usize = 200_000;
const MAX_INTERVALS: usize = 2_000_000;

/// Geometry shared by every interval of `C_σ^L` for one tree node σ.
#[derive(Clone, Debug)]
pub struct FamilyNode {
    pub path: Vec<u64>,
    pub node: Node,
    /// Common length of the intervals.
    pub lambda: Q,
    /// Wiggle parameter for intervals of length `lambda`.
    pub m: BigInt,
    /// Number of intervals, `|C_σ^L|`.
    pub count: BigInt,
    pub parent: Option<usize>,
    pub children: Vec<(u64, usize)>,
}

impl FamilyNode {
    pub fn level(&self) -> usize {
        self.path.len()
    }

    /// Total measure of the risers of the wiggles on these intervals.
    pub fn riser_measure(&self) -> Q {
        let m = Q::from_integer(self.m.clone());
        Q::from_integer(self.count.clone()) * &self.lambda * qi(2) * &m / (qi(4) * &m + qi(1))
    }

    pub fn measure(&self) -> Q {
        Q::from_integer(self.count.clone()) * &self.lambda
    }

    fn breakpoints(&self) -> BigInt {
        &self.count * (BigInt::from(4) * &self.m + 2)
    }
}

/// The nodes of a tree down to `depth` with child indices below `width`,
/// each with the geometry of its support intervals inside `host`.
#[derive(Clone, Debug)]
pub struct SupportFamily {
    pub host: RationalInterval,
    pub depth: usize,
    pub width: u64,
    /// Breadth-first; the root comes first.
    pub nodes: Vec<FamilyNode>,
}

impl SupportFamily {
    pub fn build(t: &TreeScheme, depth: usize, width: u64, host: &RationalInterval) -> Result<Self> {
        if host.is_degenerate() {
            return Err(Error::Invalid(format!("degenerate host interval {host}")));
        }
        let mut nodes = Vec::new();
        if let Some(root) = t.root_node() {
            let lambda = host.len();
            nodes.push(FamilyNode {
                path: vec![],
                node: root,
                m: wiggle_m(&lambda)?,
                lambda,
                count: BigInt::one(),
                parent: None,
                children: vec![],
            });
        }
        let mut i = 0;
        while i < nodes.len() {
            if nodes[i].level() < depth {
                for n in 0..width {
                    let Some(c) = t.child(&nodes[i].node, n) else { continue };
                    if nodes.len() >= MAX_NODES {
                        return Err(Error::Capacity(format!("more than {MAX_NODES} tree nodes")));
                    }
                    let p = &nodes[i];
                    let four_m1 = BigInt::from(4) * &p.m + 1;
                    let k = BigInt::from(3 * n + 1) * BigInt::from(3 * n + 2);
                    let lambda = &p.lambda / Q::from_integer(&k * &four_m1);
                    let mut path = p.path.clone();
                    path.push(n);
                    let child = FamilyNode {
                        path,
                        node: c,
                        m: wiggle_m(&lambda)?,
                        lambda,
                        count: &p.count * (BigInt::from(2) * &p.m + 1),
                        parent: Some(i),
                        children: vec![],
                    };
                    let idx = nodes.len();
                    nodes.push(child);
                    nodes[i].children.push((n, idx));
                }
            }
            i += 1;
        }
        Ok(SupportFamily { host: host.clone(), depth, width, nodes })
    }

    pub fn at_level(&self, level: usize) -> impl Iterator<Item = (usize, &FamilyNode)> + '_ {
        self.nodes.iter().enumerate().filter(move |(_, n)| n.level() == level)
    }

    pub fn find(&self, path: &[u64]) -> Option<usize> {
        self.nodes.iter().position(|n| n.path == path)
    }

    /// max λ over the nodes of a level, or 0 when the level is empty.
    pub fn max_lambda(&self, level: usize) -> Q {
        self.at_level(level).map(|(_, n)| n.lambda.clone()).max().unwrap_or_default()
    }

    fn chain(&self, idx: usize) -> Vec<usize> {
        let mut c = vec![idx];
        while let Some(p) = self.nodes[*c.last().unwrap()].parent {
            c.push(p);
        }
        c.reverse();
        c
    }

    /// The intervals of `C_σ^L` for node `idx`, left to right.
    pub fn intervals(&self, idx: usize) -> Result<Vec<RationalInterval>> {
        let count = self.nodes[idx].count.to_usize().filter(|&c| c <= MAX_INTERVALS);
        if count.is_none() {
            return Err(Error::Capacity(format!(
                "node {:?} has {} support intervals",
                self.nodes[idx].path, self.nodes[idx].count
            )));
        }
        let mut cur = vec![self.host.clone()];
        let chain = self.chain(idx);
        for w in chain.windows(2) {
            let p = &self.nodes[w[0]];
            let n = *self.nodes[w[1]].path.last().unwrap();
            let jn = j_n(n);
            let flats = (BigInt::from(2) * &p.m + 1u32).to_u64().unwrap();
            let mut next = Vec::with_capacity(cur.len() * flats as usize);
            for h in &cur {
                for f in 0..flats {
                    next.push(jn.relocate(&flat(h, &p.m, f)));
                }
            }
            cur = next;
        }
        Ok(cur)
    }

    fn bumps(&self, idxs: &[usize], max_breakpoints: usize) -> Result<PLFunction> {
        let total: BigInt = idxs.iter().map(|&i| self.nodes[i].breakpoints()).sum();
        if total > BigInt::from(max_breakpoints) {
            return Err(Error::Capacity(format!("{total} breakpoints exceed the limit of {max_breakpoints}")));
        }
        let mut bumps = Vec::new();
        for &i in idxs {
            for h in self.intervals(i)? {
                bumps.push(wiggle_bump(&h)?);
            }
        }
        PLFunction::sum_of_bumps(bumps.iter().map(Vec::as_slice))
    }

    /// Σ W(H) over every node of the family.
    pub fn sum(&self, max_breakpoints: usize) -> Result<PLFunction> {
        let all: Vec<usize> = (0..self.nodes.len()).collect();
        self.bumps(&all, max_breakpoints)
    }

    pub fn level_sum(&self, level: usize, max_breakpoints: usize) -> Result<PLFunction> {
        let idxs: Vec<usize> = self.at_level(level).map(|(i, _)| i).collect();
        self.bumps(&idxs, max_breakpoints)
    }
}

fn check_host(l: &RationalInterval) -> Result<()> {
    if !RationalInterval::unit().contains_interval(l) {
        return Err(Error::Invalid(format!("{l} is not inside [0,1]")));
    }
    Ok(())
}

/// Σ W(H) over nodes σ with |σ| ≤ depth and entries below `width`, H ∈ C_σ^L.
pub fn truncated_f(
    t: &TreeScheme,
    depth: usize,
    width: u64,
    l: &RationalInterval,
    max_breakpoints: usize,
) -> Result<PLFunction> {
    check_host(l)?;
    SupportFamily::build(t, depth, width, l)?.sum(max_breakpoints)
}

/// The single level `level` of the truncation.
pub fn level_sum(
    t: &TreeScheme,
    level: usize,
    width: u64,
    l: &RationalInterval,
    max_breakpoints: usize,
) -> Result<PLFunction> {
    check_host(l)?;
    SupportFamily::build(t, level, width, l)?.level_sum(level, max_breakpoints)
}

/// Exact (min, max) of a level sum, from the interval lengths alone: the
/// intervals of one level are disjoint and W(H) takes every value in [0,|H|].
pub fn level_range(t: &TreeScheme, level: usize, width: u64, l: &RationalInterval) -> Result<(Q, Q)> {
    let fam = SupportFamily::build(t, level, width, l)?;
    Ok((Q::zero(), fam.max_lambda(level)))
}

/// `C_σ^L` for the node at `path`.
pub fn support_intervals(t: &TreeScheme, path: &[u64], l: &RationalInterval) -> Result<Vec<RationalInterval>> {
    let width = path.iter().max().map_or(1, |m| m + 1);
    let fam = SupportFamily::build(t, path.len(), width, l)?;
    let idx = fam.find(path).ok_or_else(|| Error::Invalid(format!("{path:?} is not a node of the tree")))?;
    fam.intervals(idx)
}

/// G_ℓ = Σ W(H) over σ with |σ| < ℓ and max σ < ℓ, H ∈ C_σ^I, with its
/// derivative.
pub fn g_approximant(t: &TreeScheme, ell: usize, max_breakpoints: usize) -> Result<(PLFunction, StepFunction)> {
    let g = if ell == 0 {
        PLFunction::zero()
    } else {
        truncated_f(t, ell - 1, ell as u64, &RationalInterval::unit(), max_breakpoints)?
    };
    let d = g.derivative();
    Ok((g, d))
}

fn g_family(t: &TreeScheme, ell: usize) -> Result<SupportFamily> {
    SupportFamily::build(t, ell, ell as u64 + 1, &RationalInterval::unit())
}

// nodes of G_{ℓ+1} that are not in G_ℓ
fn is_new(n: &FamilyNode, ell: usize) -> bool {
    n.level() == ell || n.path.iter().any(|&c| c as usize == ell)
}

/// d(G′_ℓ, G′_{ℓ+1}) in M(I), from the geometry: the new wiggles sit on
/// plateaus of the old ones, so the derivatives have disjoint supports, and
/// |W(H)′| = 4M+1 > 1 on the risers. Not reduced to lowest terms.
pub fn g_step_distance(t: &TreeScheme, ell: usize) -> Result<Q> {
    let fam = g_family(t, ell)?;
    let terms: Vec<Q> = fam.nodes.iter().filter(|n| is_new(n, ell)).map(FamilyNode::riser_measure).collect();
    Ok(sum_unreduced(&terms))
}

/// Measure of the region where G_ℓ and G_{ℓ+1} can differ: the new
/// intervals that are not nested inside other new intervals. Not reduced.
pub fn agreement_defect(t: &TreeScheme, ell: usize) -> Result<Q> {
    let fam = g_family(t, ell)?;
    let terms: Vec<Q> = fam
        .nodes
        .iter()
        .filter(|n| is_new(n, ell) && n.parent.is_none_or(|p| !is_new(&fam.nodes[p], ell)))
        .map(FamilyNode::measure)
        .collect();
    Ok(sum_unreduced(&terms))
}
