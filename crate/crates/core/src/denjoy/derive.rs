use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde_json::{json, Value};

use super::{flat, j_n, wiggle_m, RationalInterval};
use crate::closedset::{cb_derivative, cb_rank, memoize, to_sexpr, ClosedSet, Copies, IndexedTail, Shape, Tower};
use crate::error::{Error, Result};
use crate::ordinal::{Ordinal, SampleWindow};
use crate::plfun::PLFunction;
use crate::rational::Q;
use crate::treescheme::{ls_rank, require_wellfounded, Node, TailRule, TreeScheme};

/// Which notion the derivation removes intervals for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    Vb,
    VbStar,
    Ac,
    AcStar,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Vb, Variant::VbStar, Variant::Ac, Variant::AcStar];
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Vb => "VB",
            Variant::VbStar => "VB*",
            Variant::Ac => "AC",
            Variant::AcStar => "AC*",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "vb" => Ok(Variant::Vb),
            "vbs" | "vb*" => Ok(Variant::VbStar),
            "ac" => Ok(Variant::Ac),
            "acs" | "ac*" => Ok(Variant::AcStar),
            _ => Err(Error::Invalid(format!("unknown variant {s:?}; expected vb, vbs, ac or acs"))),
        }
    }
}

/// Where a piece of a residual set sits, named by the child indices leading
/// from [0,1] to its host interval: the host of `p·n` is J_n⟨K⟩ for the
/// leftmost flat K of the host of `p`. Coordinates are computed on demand
/// since their denominators grow doubly exponentially with the depth.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Site {
    /// min K for the leftmost flat K of the host.
    At(Arc<[u64]>),
    /// The flats of the host; copies are translates of the leftmost.
    Flats(Arc<[u64]>),
}

/// Paths up to this length are displayed with coordinates.
const SHOWN_DEPTH: usize = 3;

/// The host interval reached along `path`.
pub fn site_host(path: &[u64]) -> Result<RationalInterval> {
    let mut l = RationalInterval::unit();
    for &n in path {
        let k0 = flat(&l, &wiggle_m(&l.len())?, 0);
        l = j_n(n).relocate(&k0);
    }
    Ok(l)
}

impl Site {
    pub fn path(&self) -> &[u64] {
        match self {
            Site::At(p) | Site::Flats(p) => p,
        }
    }

    pub fn host(&self) -> Result<RationalInterval> {
        site_host(self.path())
    }

    /// The point of an `At` site, or the left end of a host.
    pub fn point(&self) -> Result<Q> {
        let l = self.host()?;
        Ok(match self {
            Site::At(_) => flat(&l, &wiggle_m(&l.len())?, 0).lo,
            Site::Flats(_) => l.lo,
        })
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path = self.path();
        if path.len() > SHOWN_DEPTH {
            let p: Vec<String> = path.iter().map(u64::to_string).collect();
            return match self {
                Site::At(_) => write!(f, "min K at {}", p.join(".")),
                Site::Flats(_) => write!(f, "flats at {}", p.join(".")),
            };
        }
        let l = self.host().map_err(|_| fmt::Error)?;
        let m = wiggle_m(&l.len()).map_err(|_| fmt::Error)?;
        match self {
            Site::At(_) => write!(f, "{}", flat(&l, &m, 0).lo),
            Site::Flats(_) => write!(f, "{} flats of {l}", BigInt::from(2) * m + 1u32),
        }
    }
}

/// 2M+1 while the host is shallow enough to compute it cheaply.
fn flat_count(path: &[u64]) -> Result<Option<u64>> {
    if path.len() > SHOWN_DEPTH {
        return Ok(None);
    }
    let l = site_host(path)?;
    Ok((BigInt::from(2) * wiggle_m(&l.len())? + 1u32).to_u64())
}

fn residual_node(t: &Arc<TreeScheme>, node: &Node, path: Arc<[u64]>) -> Result<ClosedSet<Site>> {
    let limit = Site::At(path.clone());
    let member = match t.child_map(node) {
        None => ClosedSet::Point(limit),
        Some(map) => {
            let child = {
                let t = t.clone();
                let node = node.clone();
                let path = path.clone();
                move |n: u64| -> Result<ClosedSet<Site>> {
                    match t.child(&node, n) {
                        None => Ok(ClosedSet::Empty),
                        Some(c) => {
                            let mut p = path.to_vec();
                            p.push(n);
                            residual_node(&t, &c, p.into())
                        }
                    }
                }
            };
            let first = map.tail_start();
            let exceptional = (0..first).map(&child).collect::<Result<Vec<_>>>()?;
            let shape = match &map.tail {
                TailRule::Absent => None,
                TailRule::Constant(_) => Some(Shape::Constant),
                TailRule::Periodic(ts) => Some(Shape::Periodic(ts.len() as u64)),
                TailRule::Graded(_) => Some(Shape::Graded),
            };
            let tail = shape.map(|shape| IndexedTail { first, stride: 1, shape, gen: memoize(child) });
            let key = Some(Arc::<str>::from(format!("res:{}", t.node_name(node))));
            ClosedSet::Tower(Arc::new(Tower { limit, key, exceptional, tail }))
        }
    };
    Ok(ClosedSet::Copies(Arc::new(Copies { count: flat_count(&path)?, family: Site::Flats(path), member })))
}

/// The points that can survive the first derivation stage of F(T, I): for
/// each flat K of a host L, min K together with the residual sets of the children
/// placed in J_n⟨K⟩.
pub fn residual_set(t: &TreeScheme) -> Result<ClosedSet<Site>> {
    require_wellfounded(t)?;
    match t.root_node() {
        None => Ok(ClosedSet::Empty),
        Some(root) => residual_node(&Arc::new(t.clone()), &root, Arc::from(Vec::new())),
    }
}

#[derive(Clone, Debug)]
pub struct Stage {
    pub stage: Ordinal,
    pub set: ClosedSet<Site>,
}

/// The stages P^β of the derivation of F(T, I) for finitely many β ≥ 1,
/// and its rank. P^0 is the whole interval.
#[derive(Clone, Debug)]
pub struct DerivationTrace {
    pub variant: Variant,
    pub rank: Ordinal,
    pub residual: ClosedSet<Site>,
    pub stages: Vec<Stage>,
    /// Whether the listed stages reach the empty set.
    pub complete: bool,
}

impl DerivationTrace {
    pub fn to_json(&self, depth: usize) -> Value {
        let mut stages = vec![json!({"stage": "0", "set": RationalInterval::unit().to_string()})];
        for s in &self.stages {
            stages.push(json!({"stage": s.stage.to_string(), "set": to_sexpr(&s.set, depth)}));
        }
        json!({
            "variant": self.variant.to_string(),
            "rank": self.rank.to_string(),
            "complete": self.complete,
            "stages": stages,
        })
    }
}

pub const DEFAULT_MAX_STAGES: u64 = 8;

/// Applies the induction rules to the residual set: a min K point is
/// isolated once the children near it are exhausted, so P^β = D^β(residual)
/// for β ≥ 1 and the rank is the Cantor-Bendixson rank of the residual set.
pub fn symbolic_derivation(t: &TreeScheme, variant: Variant) -> Result<DerivationTrace> {
    symbolic_derivation_with(t, variant, DEFAULT_MAX_STAGES)
}

pub fn symbolic_derivation_with(t: &TreeScheme, variant: Variant, max_stages: u64) -> Result<DerivationTrace> {
    let residual = residual_set(t)?;
    let w = SampleWindow::default();
    if residual.is_empty() {
        // F = 0 is in every class on the whole interval
        return Ok(DerivationTrace {
            variant,
            rank: Ordinal::one(),
            residual: residual.clone(),
            stages: vec![Stage { stage: Ordinal::one(), set: residual }],
            complete: true,
        });
    }
    let rank = cb_rank(&residual)?;
    let ls = ls_rank(t)?;
    if rank != ls {
        return Err(Error::Mismatch(format!("derivation rank {rank} differs from limsup rank {ls}")));
    }
    let mut stages = Vec::new();
    let mut cur = residual.clone();
    let mut complete = false;
    for beta in 1..=max_stages {
        cur = cb_derivative(&cur, w)?;
        let empty = cur.is_empty();
        stages.push(Stage { stage: Ordinal::finite(beta), set: cur.clone() });
        if empty {
            complete = true;
            break;
        }
    }
    Ok(DerivationTrace { variant, rank, residual, stages, complete })
}

/// The plain or starred variation of `f` over the points of `p` inside
/// `window`.
pub fn numeric_vb_probe(f: &PLFunction, p: &[Q], window: &RationalInterval, starred: bool) -> Result<Q> {
    let pts: Vec<Q> = p.iter().filter(|x| window.contains(x)).cloned().collect();
    f.variation_on_finite_set(&pts, starred)
}
