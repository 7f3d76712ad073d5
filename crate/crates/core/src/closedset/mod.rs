//! Countable closed sets described symbolically, with the Cantor-Bendixson
//! derivative and rank.
//!
//! A tower is a limit point together with a sequence of separated children
//! accumulating only at that point. Children past the exceptional prefix come
//! from an indexed tail: a generator called with the child index, plus a
//! shape saying how the children's topological type varies with the index.

mod encode;
mod sexpr;

pub use encode::{binary_truncation, cylinder, hcs_of_tree, hcs_undoubled, BinaryTreeView};
pub use sexpr::{parse_sexpr, to_sexpr};

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::ordinal::{summarize_tail, Ordinal, SampleWindow};

pub trait Label: Clone + fmt::Display + Send + Sync + 'static {}
impl<T: Clone + fmt::Display + Send + Sync + 'static> Label for T {}

pub type Generator<L> = Arc<dyn Fn(u64) -> Result<ClosedSet<L>> + Send + Sync>;

/// How the type of `gen(first + stride*k)` depends on the block index `k`.
/// Children inside one block of `stride` indices are homeomorphic.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    Constant,
    Periodic(u64),
    /// Rank affine in `k` eventually; summarised by sampling.
    Graded,
}

#[derive(Clone)]
pub struct IndexedTail<L> {
    pub first: u64,
    pub stride: u64,
    pub shape: Shape,
    pub gen: Generator<L>,
}

impl<L: Label> IndexedTail<L> {
    fn block(&self, k: u64) -> Result<ClosedSet<L>> {
        (self.gen)(self.first + self.stride * k)
    }

    fn map(&self, f: impl Fn(ClosedSet<L>) -> Result<ClosedSet<L>> + Send + Sync + 'static) -> Self {
        let g = self.gen.clone();
        IndexedTail {
            first: self.first,
            stride: self.stride,
            shape: self.shape,
            gen: memoize(move |m| f(g(m)?)),
        }
    }
}

/// Wraps a generator so each index is produced once.
pub fn memoize<L: Label>(f: impl Fn(u64) -> Result<ClosedSet<L>> + Send + Sync + 'static) -> Generator<L> {
    let memo: Mutex<HashMap<u64, ClosedSet<L>>> = Mutex::new(HashMap::new());
    Arc::new(move |m| {
        if let Some(c) = memo.lock().unwrap().get(&m) {
            return Ok(c.clone());
        }
        let c = f(m)?;
        memo.lock().unwrap().insert(m, c.clone());
        Ok(c)
    })
}

#[derive(Clone)]
pub struct Tower<L> {
    pub limit: L,
    /// Identifies the tower together with its child indexing; towers sharing
    /// a key share ranks and tail decisions.
    pub key: Option<Arc<str>>,
    pub exceptional: Vec<ClosedSet<L>>,
    pub tail: Option<IndexedTail<L>>,
}

/// Pairwise separated homeomorphic copies of `member`, one per element of
/// the family named by `family`.
#[derive(Clone)]
pub struct Copies<L> {
    pub family: L,
    pub count: Option<u64>,
    pub member: ClosedSet<L>,
}

#[derive(Clone)]
pub enum ClosedSet<L> {
    Empty,
    Point(L),
    /// Pairwise separated members.
    Union(Vec<ClosedSet<L>>),
    Copies(Arc<Copies<L>>),
    Tower(Arc<Tower<L>>),
}

impl<L: Label> fmt::Debug for ClosedSet<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", to_sexpr(self, 3))
    }
}

impl<L: Label> ClosedSet<L> {
    pub fn tower(limit: L, exceptional: Vec<ClosedSet<L>>, tail: Option<IndexedTail<L>>) -> Self {
        ClosedSet::Tower(Arc::new(Tower { limit, key: None, exceptional, tail }))
    }

    /// A tower whose tail children are all `child`.
    pub fn constant_tower(limit: L, exceptional: Vec<ClosedSet<L>>, child: ClosedSet<L>) -> Self {
        let first = exceptional.len() as u64;
        let tail = IndexedTail { first, stride: 1, shape: Shape::Constant, gen: Arc::new(move |_| Ok(child.clone())) };
        Self::tower(limit, exceptional, Some(tail))
    }

    /// A tower whose tail repeats `pattern`.
    pub fn periodic_tower(limit: L, exceptional: Vec<ClosedSet<L>>, pattern: Vec<ClosedSet<L>>) -> Self {
        let first = exceptional.len() as u64;
        let p = pattern.len() as u64;
        let tail = IndexedTail {
            first,
            stride: 1,
            shape: Shape::Periodic(p),
            gen: Arc::new(move |m| Ok(pattern[((m - first) % p) as usize].clone())),
        };
        Self::tower(limit, exceptional, Some(tail))
    }

    pub fn is_empty(&self) -> bool {
        match self {
            ClosedSet::Empty => true,
            ClosedSet::Point(_) | ClosedSet::Tower(_) => false,
            ClosedSet::Union(v) => v.iter().all(ClosedSet::is_empty),
            ClosedSet::Copies(c) => c.count == Some(0) || c.member.is_empty(),
        }
    }

    fn union(mut members: Vec<ClosedSet<L>>) -> Self {
        members.retain(|m| !m.is_empty());
        match members.len() {
            0 => ClosedSet::Empty,
            1 => members.pop().unwrap(),
            _ => ClosedSet::Union(members),
        }
    }
}

/// Whether a tail has infinitely many nonempty children; when it does not,
/// the block index after which every child is empty.
fn tail_behaviour<L: Label>(t: &IndexedTail<L>, w: SampleWindow) -> Result<std::result::Result<(), u64>> {
    match t.shape {
        Shape::Constant => Ok(if t.block(0)?.is_empty() { Err(0) } else { Ok(()) }),
        Shape::Periodic(p) => {
            for k in 0..p {
                if !t.block(k)?.is_empty() {
                    return Ok(Ok(()));
                }
            }
            Ok(Err(0))
        }
        Shape::Graded => {
            // move the window outward until the children agree
            let mut lead = w.lead;
            for _ in 0..WINDOW_RETRIES {
                let mut seen = Vec::new();
                for k in lead..lead + w.span {
                    seen.push(!t.block(k)?.is_empty());
                }
                if seen.iter().all(|&b| b) {
                    return Ok(Ok(()));
                }
                if seen.iter().all(|&b| !b) {
                    return Ok(Err(lead));
                }
                lead = 2 * lead + w.span;
            }
            Err(Error::Tail(format!("children keep alternating between empty and nonempty up to block {lead}")))
        }
    }
}

const WINDOW_RETRIES: usize = 4;

fn infinitely_many_nonempty<L: Label>(tail: &Option<IndexedTail<L>>, w: SampleWindow) -> Result<bool> {
    match tail {
        None => Ok(false),
        Some(t) => Ok(tail_behaviour(t, w)?.is_ok()),
    }
}

/// Nonempty children among the first `blocks` blocks of a tail.
fn tail_prefix_children<L: Label>(t: &IndexedTail<L>, blocks: u64) -> Result<Vec<ClosedSet<L>>> {
    let mut out = Vec::new();
    for m in t.first..t.first + t.stride * blocks {
        let c = (t.gen)(m)?;
        if !c.is_empty() {
            out.push(c);
        }
    }
    Ok(out)
}

/// Nonempty tail children of a tail that is eventually empty.
fn finite_tail_children<L: Label>(t: &IndexedTail<L>, w: SampleWindow) -> Result<Vec<ClosedSet<L>>> {
    match tail_behaviour(t, w)? {
        Ok(()) => Err(Error::Invalid("tail has infinitely many nonempty children".into())),
        Err(b) => tail_prefix_children(t, b),
    }
}

/// Tail decisions shared by every tower with the same key during one
/// derivative, so homeomorphic copies are examined once.
#[derive(Default)]
struct Facts {
    behaviour: Mutex<HashMap<Arc<str>, std::result::Result<(), u64>>>,
    no_children: Mutex<HashMap<Arc<str>, bool>>,
}

impl Facts {
    fn behaviour<L: Label>(&self, key: &Option<Arc<str>>, t: &IndexedTail<L>, w: SampleWindow) -> Result<std::result::Result<(), u64>> {
        let Some(k) = key else { return tail_behaviour(t, w) };
        if let Some(b) = self.behaviour.lock().unwrap().get(k) {
            return Ok(*b);
        }
        let b = tail_behaviour(t, w)?;
        self.behaviour.lock().unwrap().insert(k.clone(), b);
        Ok(b)
    }

    fn no_children<L: Label>(&self, key: &Option<Arc<str>>, exc: &[ClosedSet<L>], tail: &Option<IndexedTail<L>>, w: SampleWindow) -> Result<bool> {
        if !exc.iter().all(ClosedSet::is_empty) {
            return Ok(false);
        }
        let Some(t) = tail else { return Ok(true) };
        let Some(k) = key else { return all_children_empty(exc, tail, w) };
        if let Some(b) = self.no_children.lock().unwrap().get(k) {
            return Ok(*b);
        }
        let b = match self.behaviour(key, t, w)? {
            Ok(()) => false,
            Err(blocks) => tail_prefix_children(t, blocks)?.is_empty(),
        };
        self.no_children.lock().unwrap().insert(k.clone(), b);
        Ok(b)
    }
}

fn all_children_empty<L: Label>(exc: &[ClosedSet<L>], tail: &Option<IndexedTail<L>>, w: SampleWindow) -> Result<bool> {
    if !exc.iter().all(ClosedSet::is_empty) {
        return Ok(false);
    }
    match tail {
        None => Ok(true),
        Some(t) => Ok(tail_behaviour(t, w)?.is_err() && finite_tail_children(t, w)?.is_empty()),
    }
}

/// The derivative: isolated points removed.
pub fn cb_derivative<L: Label>(s: &ClosedSet<L>, w: SampleWindow) -> Result<ClosedSet<L>> {
    derive(s, w, &Arc::new(Facts::default()))
}

fn derive<L: Label>(s: &ClosedSet<L>, w: SampleWindow, facts: &Arc<Facts>) -> Result<ClosedSet<L>> {
    Ok(match s {
        ClosedSet::Empty | ClosedSet::Point(_) => ClosedSet::Empty,
        ClosedSet::Union(v) => ClosedSet::union(v.iter().map(|m| derive(m, w, facts)).collect::<Result<_>>()?),
        ClosedSet::Copies(c) => {
            let member = derive(&c.member, w, facts)?;
            if member.is_empty() {
                ClosedSet::Empty
            } else {
                ClosedSet::Copies(Arc::new(Copies { family: c.family.clone(), count: c.count, member }))
            }
        }
        ClosedSet::Tower(t) => {
            let exc: Vec<ClosedSet<L>> = t.exceptional.iter().map(|c| derive(c, w, facts)).collect::<Result<_>>()?;
            let behaviour = match &t.tail {
                None => Err(0),
                Some(tl) => facts.behaviour(&t.key, tl, w)?,
            };
            match behaviour {
                Ok(()) => {
                    let f = facts.clone();
                    let tail = t.tail.as_ref().map(|tl| tl.map(move |c| derive(&c, w, &f)));
                    let key: Option<Arc<str>> = t.key.as_ref().map(|k| Arc::from(format!("D{k}")));
                    if facts.no_children(&key, &exc, &tail, w)? {
                        ClosedSet::Point(t.limit.clone())
                    } else {
                        ClosedSet::Tower(Arc::new(Tower { limit: t.limit.clone(), key, exceptional: exc, tail }))
                    }
                }
                Err(blocks) => {
                    let mut members = exc;
                    if let Some(tl) = &t.tail {
                        for c in tail_prefix_children(tl, blocks)? {
                            members.push(derive(&c, w, facts)?);
                        }
                    }
                    ClosedSet::union(members)
                }
            }
        }
    })
}

/// Rank by the closed-form recursion, memoised on tower keys.
pub struct CbRanker {
    window: SampleWindow,
    memo: HashMap<Arc<str>, Ordinal>,
}

impl CbRanker {
    pub fn new(window: SampleWindow) -> Self {
        CbRanker { window, memo: HashMap::new() }
    }

    pub fn rank<L: Label>(&mut self, s: &ClosedSet<L>) -> Result<Ordinal> {
        match s {
            ClosedSet::Empty => Ok(Ordinal::zero()),
            ClosedSet::Point(_) => Ok(Ordinal::one()),
            ClosedSet::Union(v) => {
                let mut best = Ordinal::zero();
                for m in v {
                    best = best.max(self.rank(m)?);
                }
                Ok(best)
            }
            ClosedSet::Copies(c) => {
                if c.count == Some(0) {
                    Ok(Ordinal::zero())
                } else {
                    self.rank(&c.member)
                }
            }
            ClosedSet::Tower(t) => {
                if let Some(k) = &t.key {
                    if let Some(v) = self.memo.get(k) {
                        return Ok(v.clone());
                    }
                }
                let v = self.tower_rank(t)?;
                if let Some(k) = &t.key {
                    self.memo.insert(k.clone(), v.clone());
                }
                Ok(v)
            }
        }
    }

    fn tower_rank<L: Label>(&mut self, t: &Tower<L>) -> Result<Ordinal> {
        let mut sup = Ordinal::zero();
        for c in &t.exceptional {
            sup = sup.max(self.rank(c)?);
        }
        let limsup = match &t.tail {
            None => Ordinal::zero(),
            Some(tl) => match tl.shape {
                Shape::Constant => self.rank(&tl.block(0)?)?,
                Shape::Periodic(p) => {
                    let mut best = Ordinal::zero();
                    for k in 0..p {
                        best = best.max(self.rank(&tl.block(k)?)?);
                    }
                    best
                }
                Shape::Graded => {
                    let w = self.window;
                    let s = summarize_tail(0, w, |k| {
                        let c = tl.block(k)?;
                        self.rank(&c)
                    })?;
                    sup = sup.max(s.sup);
                    s.limsup
                }
            },
        };
        Ok(sup.max(limsup.clone()).max(limsup.succ()))
    }
}

pub fn cb_rank<L: Label>(s: &ClosedSet<L>) -> Result<Ordinal> {
    CbRanker::new(SampleWindow::default()).rank(s)
}

/// Number of derivative steps until the set is empty, if at most `max_steps`.
pub fn cb_rank_literal<L: Label>(s: &ClosedSet<L>, max_steps: u64, w: SampleWindow) -> Result<Option<u64>> {
    let mut cur = s.clone();
    let mut k = 0;
    while !cur.is_empty() {
        if k == max_steps {
            return Ok(None);
        }
        cur = cb_derivative(&cur, w)?;
        k += 1;
    }
    Ok(Some(k))
}

/// `D^k(s)`.
pub fn cb_derivative_iter<L: Label>(s: &ClosedSet<L>, k: u64, w: SampleWindow) -> Result<ClosedSet<L>> {
    let mut cur = s.clone();
    for _ in 0..k {
        cur = cb_derivative(&cur, w)?;
    }
    Ok(cur)
}

/// Number of points of a finite set; `None` for infinite sets or unknown
/// multiplicities.
pub fn count_points<L: Label>(s: &ClosedSet<L>, w: SampleWindow) -> Result<Option<u64>> {
    Ok(match s {
        ClosedSet::Empty => Some(0),
        ClosedSet::Point(_) => Some(1),
        ClosedSet::Union(v) => {
            let mut total = 0u64;
            for m in v {
                match count_points(m, w)? {
                    Some(c) => total += c,
                    None => return Ok(None),
                }
            }
            Some(total)
        }
        ClosedSet::Copies(c) => match (c.count, count_points(&c.member, w)?) {
            (Some(a), Some(b)) => Some(a * b),
            _ => None,
        },
        ClosedSet::Tower(t) => {
            if infinitely_many_nonempty(&t.tail, w)? {
                return Ok(None);
            }
            let mut total = 1u64;
            let mut kids = t.exceptional.clone();
            if let Some(tl) = &t.tail {
                kids.extend(finite_tail_children(tl, w)?);
            }
            for c in &kids {
                match count_points(c, w)? {
                    Some(n) => total += n,
                    None => return Ok(None),
                }
            }
            Some(total)
        }
    })
}
