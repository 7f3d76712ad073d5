//! Limsup rank and well-founded rank.
//!
//! Both are computed by memoised recursion on generated nodes. A graded tail
//! is summarised by sampling a window of child ranks and fitting an affine
//! template (see [`summarize_tail`]).

use std::collections::{BTreeMap, HashMap, HashSet};

use super::found::require_wellfounded;
use super::{ChildMap, Node, TailRule, TreeScheme};
use crate::error::{Error, Result};
use crate::ordinal::{summarize_tail, AffineOrdinal, Ordinal, SampleWindow};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RankOptions {
    pub window: SampleWindow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Limsup,
    // ρ(node) = sup over children of ρ(child) + 1
    Height,
}

/// A fitted template for how a one-parameter state's rank grows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateTemplate {
    pub state: String,
    pub template: AffineOrdinal,
}

/// Ranks of every node visited, plus the graded tails' templates.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RankAnnotation {
    pub values: BTreeMap<Node, Ordinal>,
    pub tails: Vec<(Node, AffineOrdinal)>,
    pub states: Vec<StateTemplate>,
}

struct Ranker<'a> {
    scheme: &'a TreeScheme,
    kind: Kind,
    opts: RankOptions,
    memo: HashMap<Node, Ordinal>,
    active: HashSet<Node>,
    tails: Vec<(Node, AffineOrdinal)>,
}

impl<'a> Ranker<'a> {
    fn new(scheme: &'a TreeScheme, kind: Kind, opts: RankOptions) -> Self {
        Ranker { scheme, kind, opts, memo: HashMap::new(), active: HashSet::new(), tails: Vec::new() }
    }

    // Value a child contributes to the sequence: its rank for the limsup
    // recursion, ρ + 1 for the height (absent children are skipped there).
    fn child_value(&mut self, child: Option<Node>) -> Result<Option<Ordinal>> {
        match (child, self.kind) {
            (None, Kind::Limsup) => Ok(Some(Ordinal::zero())),
            (None, Kind::Height) => Ok(None),
            (Some(c), Kind::Limsup) => self.rank(&c).map(Some),
            (Some(c), Kind::Height) => self.rank(&c).map(|r| Some(r.succ())),
        }
    }

    fn rank(&mut self, node: &Node) -> Result<Ordinal> {
        if let Some(v) = self.memo.get(node) {
            return Ok(v.clone());
        }
        if !self.active.insert(node.clone()) {
            return Err(Error::IllFounded(format!("node {} repeats", self.scheme.node_name(node))));
        }
        let v = match self.scheme.child_map(node) {
            None => self.combine(Ordinal::zero(), None),
            Some(map) => {
                let map: &ChildMap = map;
                self.node_rank(node, map)?
            }
        };
        self.active.remove(node);
        self.memo.insert(node.clone(), v.clone());
        Ok(v)
    }

    fn combine(&self, sup: Ordinal, limsup: Option<Ordinal>) -> Ordinal {
        match self.kind {
            Kind::Limsup => std::cmp::max(sup, limsup.unwrap_or_default().succ()),
            Kind::Height => sup,
        }
    }

    fn node_rank(&mut self, node: &Node, map: &ChildMap) -> Result<Ordinal> {
        let mut sup = Ordinal::zero();
        for &(i, ref t) in &map.exceptional {
            let c = self.scheme.term_node(node, t, i);
            if let Some(v) = self.child_value(c)? {
                sup = sup.max(v);
            }
        }
        let start = map.tail_start();
        let limsup = match &map.tail {
            TailRule::Absent => None,
            TailRule::Constant(t) => {
                let c = self.scheme.term_node(node, t, start);
                let v = self.child_value(c)?;
                if let Some(v) = &v {
                    sup = sup.max(v.clone());
                }
                v
            }
            TailRule::Periodic(ts) => {
                let mut best: Option<Ordinal> = None;
                for t in ts {
                    let c = self.scheme.term_node(node, t, start);
                    if let Some(v) = self.child_value(c)? {
                        best = Some(best.map_or(v.clone(), |b| b.max(v)));
                    }
                }
                if let Some(b) = &best {
                    sup = sup.max(b.clone());
                }
                best
            }
            TailRule::Graded(t) => {
                let t = t.clone();
                if self.scheme.term_node(node, &t, start).is_none() {
                    None
                } else {
                    let window = self.opts.window;
                    let summary = summarize_tail(start, window, |n| {
                        let c = self.scheme.term_node(node, &t, n);
                        Ok(self.child_value(c)?.unwrap_or_default())
                    })?;
                    self.tails.push((node.clone(), summary.template.clone()));
                    sup = sup.max(summary.sup);
                    Some(summary.limsup)
                }
            }
        };
        Ok(self.combine(sup, limsup))
    }

    fn root_rank(&mut self) -> Result<Ordinal> {
        let Some(root) = self.scheme.root_node() else {
            return Ok(Ordinal::zero());
        };
        let r = self.rank(&root)?;
        Ok(match self.kind {
            Kind::Limsup => r,
            Kind::Height => r.succ(),
        })
    }
}

/// Limsup rank: 0 for the empty tree, otherwise
/// `max(sup_n |T_n|, limsup_n |T_n| + 1)` with absent children counted as 0.
pub fn ls_rank(scheme: &TreeScheme) -> Result<Ordinal> {
    ls_rank_with(scheme, RankOptions::default())
}

pub fn ls_rank_with(scheme: &TreeScheme, opts: RankOptions) -> Result<Ordinal> {
    require_wellfounded(scheme)?;
    Ranker::new(scheme, Kind::Limsup, opts).root_rank()
}

/// Well-founded rank: 0 for the empty tree, otherwise ρ(root) + 1 where
/// ρ(σ) = sup over children of ρ(child) + 1.
pub fn wf_rank(scheme: &TreeScheme) -> Result<Ordinal> {
    wf_rank_with(scheme, RankOptions::default())
}

pub fn wf_rank_with(scheme: &TreeScheme, opts: RankOptions) -> Result<Ordinal> {
    require_wellfounded(scheme)?;
    Ranker::new(scheme, Kind::Height, opts).root_rank()
}

/// Limsup ranks of every node visited while ranking the root, the fitted
/// graded-tail templates, and for every one-parameter state reached a
/// template of its rank as a function of the parameter.
pub fn rank_annotation(scheme: &TreeScheme, opts: RankOptions) -> Result<RankAnnotation> {
    require_wellfounded(scheme)?;
    let mut r = Ranker::new(scheme, Kind::Limsup, opts);
    r.root_rank()?;
    let mut states = Vec::new();
    let mut seen: Vec<usize> = r
        .memo
        .keys()
        .filter_map(|n| match n {
            Node::State(s, p) if p.len() == 1 => Some(*s),
            _ => None,
        })
        .collect();
    seen.sort_unstable();
    seen.dedup();
    for s in seen {
        let summary = summarize_tail(0, opts.window, |p| r.rank(&Node::State(s, vec![p])));
        if let Ok(summary) = summary {
            states.push(StateTemplate { state: scheme.states[s].name.clone(), template: summary.template });
        }
    }
    Ok(RankAnnotation { values: r.memo.into_iter().collect(), tails: r.tails, states })
}
