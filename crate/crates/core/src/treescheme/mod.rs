//! Finitely presented trees T ⊆ ω^{<ω}.
//!
//! A scheme is a set of parametrised states. A state picks the first case
//! whose guard holds (every listed parameter is zero), or its default map
//! otherwise. A child map lists exceptional children by index and a tail
//! rule covering every index after the last exceptional one.

mod found;
mod parse;
mod rank;

pub use found::{analyze, is_wellfounded, Foundedness, InfinitePath};
pub(crate) use found::require_wellfounded;
pub use parse::parse_scheme;
pub use rank::{ls_rank, ls_rank_with, rank_annotation, wf_rank, wf_rank_with, RankAnnotation, RankOptions, StateTemplate};

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ParamExpr {
    Const(u64),
    /// `n + c`, where `n` is the child index.
    Index(u64),
    Param(usize),
    /// `p - 1` with monus.
    Pred(usize),
}

impl ParamExpr {
    fn eval(&self, params: &[u64], n: u64) -> u64 {
        match *self {
            ParamExpr::Const(c) => c,
            ParamExpr::Index(c) => n + c,
            ParamExpr::Param(i) => params[i],
            ParamExpr::Pred(i) => params[i].saturating_sub(1),
        }
    }

    fn uses_index(&self) -> bool {
        matches!(self, ParamExpr::Index(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ChildTerm {
    Absent,
    /// A node without children.
    Leaf,
    Ref { state: usize, args: Vec<ParamExpr> },
}

impl ChildTerm {
    fn uses_index(&self) -> bool {
        match self {
            ChildTerm::Ref { args, .. } => args.iter().any(ParamExpr::uses_index),
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TailRule {
    Absent,
    Constant(ChildTerm),
    Periodic(Vec<ChildTerm>),
    Graded(ChildTerm),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ChildMap {
    /// Sorted by index, indices distinct.
    pub exceptional: Vec<(u64, ChildTerm)>,
    pub tail: TailRule,
}

impl Default for ChildMap {
    fn default() -> Self {
        ChildMap { exceptional: Vec::new(), tail: TailRule::Absent }
    }
}

impl ChildMap {
    /// First index governed by the tail rule.
    pub fn tail_start(&self) -> u64 {
        self.exceptional.last().map(|(i, _)| i + 1).unwrap_or(0)
    }

    /// The term for child `n`.
    pub fn term(&self, n: u64) -> &ChildTerm {
        let start = self.tail_start();
        if n < start {
            return match self.exceptional.binary_search_by_key(&n, |(i, _)| *i) {
                Ok(k) => &self.exceptional[k].1,
                Err(_) => &ChildTerm::Absent,
            };
        }
        match &self.tail {
            TailRule::Absent => &ChildTerm::Absent,
            TailRule::Constant(t) | TailRule::Graded(t) => t,
            TailRule::Periodic(ts) => &ts[((n - start) % ts.len() as u64) as usize],
        }
    }

    fn terms(&self) -> impl Iterator<Item = &ChildTerm> {
        let tail: Vec<&ChildTerm> = match &self.tail {
            TailRule::Absent => vec![],
            TailRule::Constant(t) | TailRule::Graded(t) => vec![t],
            TailRule::Periodic(ts) => ts.iter().collect(),
        };
        self.exceptional.iter().map(|(_, t)| t).chain(tail)
    }

    pub fn has_infinitely_many(&self) -> bool {
        match &self.tail {
            TailRule::Absent => false,
            TailRule::Constant(t) | TailRule::Graded(t) => *t != ChildTerm::Absent,
            TailRule::Periodic(ts) => ts.iter().any(|t| *t != ChildTerm::Absent),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Case {
    /// Parameters that must all be zero.
    pub zeros: Vec<usize>,
    pub body: ChildMap,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StateDef {
    pub name: String,
    pub params: Vec<String>,
    pub cases: Vec<Case>,
    pub otherwise: ChildMap,
}

impl StateDef {
    pub fn arity(&self) -> usize {
        self.params.len()
    }

    /// Index of the selected case (`cases.len()` for the default map).
    pub fn select(&self, params: &[u64]) -> usize {
        self.cases
            .iter()
            .position(|c| c.zeros.iter().all(|&i| params[i] == 0))
            .unwrap_or(self.cases.len())
    }

    pub fn clause(&self, k: usize) -> &ChildMap {
        if k < self.cases.len() {
            &self.cases[k].body
        } else {
            &self.otherwise
        }
    }

    pub fn clause_count(&self) -> usize {
        self.cases.len() + 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TreeScheme {
    pub states: Vec<StateDef>,
    pub root: ChildTerm,
}

/// A node of the generated tree, identified by the state that generates it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Leaf,
    State(usize, Vec<u64>),
}

impl TreeScheme {
    pub fn new(states: Vec<StateDef>, root: ChildTerm) -> Result<Self> {
        let s = TreeScheme { states, root };
        s.validate()?;
        Ok(s)
    }

    /// A scheme whose tree is the single root node.
    pub fn leaf() -> Self {
        TreeScheme { states: Vec::new(), root: ChildTerm::Leaf }
    }

    pub fn empty() -> Self {
        TreeScheme { states: Vec::new(), root: ChildTerm::Absent }
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s.name == name)
    }

    fn validate_term(&self, t: &ChildTerm, arity: usize, ctx: &str) -> Result<()> {
        if let ChildTerm::Ref { state, args } = t {
            let def = self
                .states
                .get(*state)
                .ok_or_else(|| Error::Invalid(format!("{ctx}: unknown state #{state}")))?;
            if def.arity() != args.len() {
                return Err(Error::Invalid(format!(
                    "{ctx}: {} takes {} parameters, got {}",
                    def.name,
                    def.arity(),
                    args.len()
                )));
            }
            for a in args {
                if let ParamExpr::Param(i) | ParamExpr::Pred(i) = a {
                    if *i >= arity {
                        return Err(Error::Invalid(format!("{ctx}: parameter #{i} out of range")));
                    }
                }
            }
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        if self.root.uses_index() {
            return Err(Error::Invalid("root term uses n".into()));
        }
        self.validate_term(&self.root, 0, "root")?;
        for def in &self.states {
            for c in &def.cases {
                if c.zeros.iter().any(|&i| i >= def.arity()) {
                    return Err(Error::Invalid(format!("{}: guard out of range", def.name)));
                }
            }
            for k in 0..def.clause_count() {
                let map = def.clause(k);
                for w in map.exceptional.windows(2) {
                    if w[0].0 >= w[1].0 {
                        return Err(Error::Invalid(format!("{}: exceptional indices not increasing", def.name)));
                    }
                }
                if let TailRule::Periodic(ts) = &map.tail {
                    if ts.is_empty() {
                        return Err(Error::Invalid(format!("{}: empty periodic tail", def.name)));
                    }
                }
                match &map.tail {
                    TailRule::Constant(t) if t.uses_index() => {
                        return Err(Error::Invalid(format!("{}: constant tail uses n", def.name)))
                    }
                    TailRule::Periodic(ts) if ts.iter().any(ChildTerm::uses_index) => {
                        return Err(Error::Invalid(format!("{}: periodic tail uses n", def.name)))
                    }
                    _ => {}
                }
                for t in map.terms() {
                    self.validate_term(t, def.arity(), &def.name)?;
                }
            }
        }
        Ok(())
    }

    fn instantiate(&self, t: &ChildTerm, params: &[u64], n: u64) -> Option<Node> {
        match t {
            ChildTerm::Absent => None,
            ChildTerm::Leaf => Some(Node::Leaf),
            ChildTerm::Ref { state, args } => {
                Some(Node::State(*state, args.iter().map(|a| a.eval(params, n)).collect()))
            }
        }
    }

    pub fn root_node(&self) -> Option<Node> {
        self.instantiate(&self.root, &[], 0)
    }

    /// The child map in force at `node`; `None` for a leaf.
    pub fn child_map(&self, node: &Node) -> Option<&ChildMap> {
        match node {
            Node::Leaf => None,
            Node::State(s, params) => {
                let def = &self.states[*s];
                Some(def.clause(def.select(params)))
            }
        }
    }

    pub fn child(&self, node: &Node, n: u64) -> Option<Node> {
        let Node::State(_, params) = node else { return None };
        let map = self.child_map(node)?;
        self.instantiate(map.term(n), params, n)
    }

    pub(crate) fn term_node(&self, node: &Node, t: &ChildTerm, n: u64) -> Option<Node> {
        let params: &[u64] = match node {
            Node::State(_, p) => p,
            Node::Leaf => &[],
        };
        self.instantiate(t, params, n)
    }

    /// Node reached from the root along `path`.
    pub fn node_at(&self, path: &[u64]) -> Option<Node> {
        let mut node = self.root_node()?;
        for &n in path {
            node = self.child(&node, n)?;
        }
        Some(node)
    }

    pub fn node_name(&self, node: &Node) -> String {
        match node {
            Node::Leaf => "leaf".into(),
            Node::State(s, params) => {
                let name = &self.states[*s].name;
                if params.is_empty() {
                    name.clone()
                } else {
                    let ps: Vec<String> = params.iter().map(u64::to_string).collect();
                    format!("{name}({})", ps.join(","))
                }
            }
        }
    }

    /// Sub-scheme rooted at `node`.
    pub fn rooted_at(&self, node: &Node) -> TreeScheme {
        let root = match node {
            Node::Leaf => ChildTerm::Leaf,
            Node::State(s, params) => ChildTerm::Ref {
                state: *s,
                args: params.iter().map(|&p| ParamExpr::Const(p)).collect(),
            },
        };
        TreeScheme { states: self.states.clone(), root }
    }
}

/// An explicit finite tree, nodes ordered by length then lexicographically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplicitTree {
    nodes: Vec<Vec<u64>>,
}

impl ExplicitTree {
    pub fn from_nodes(nodes: impl IntoIterator<Item = Vec<u64>>) -> Result<Self> {
        let set: BTreeSet<Vec<u64>> = nodes.into_iter().collect();
        for s in &set {
            if !s.is_empty() && !set.contains(&s[..s.len() - 1]) {
                return Err(Error::Invalid(format!("node {s:?} lacks its parent")));
            }
        }
        let mut nodes: Vec<Vec<u64>> = set.into_iter().collect();
        nodes.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        Ok(ExplicitTree { nodes })
    }

    pub fn nodes(&self) -> &[Vec<u64>] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, s: &[u64]) -> bool {
        self.nodes
            .binary_search_by(|x| x.len().cmp(&s.len()).then_with(|| x.as_slice().cmp(s)))
            .is_ok()
    }

    /// Length of the longest node, or `None` when empty.
    pub fn height(&self) -> Option<usize> {
        self.nodes.last().map(Vec::len)
    }
}

impl fmt::Display for ExplicitTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.nodes {
            let parts: Vec<String> = s.iter().map(u64::to_string).collect();
            writeln!(f, "({})", parts.join(","))?;
        }
        Ok(())
    }
}

/// `{σ ∈ T : |σ| ≤ depth, all entries < width}`.
pub fn materialize(scheme: &TreeScheme, depth: usize, width: u64) -> ExplicitTree {
    let mut nodes = Vec::new();
    let Some(root) = scheme.root_node() else {
        return ExplicitTree { nodes };
    };
    let mut frontier = vec![(Vec::new(), root)];
    for level in 0..=depth {
        let mut next = Vec::new();
        for (path, node) in frontier {
            if level < depth {
                for n in 0..width {
                    if let Some(c) = scheme.child(&node, n) {
                        let mut p = path.clone();
                        p.push(n);
                        next.push((p, c));
                    }
                }
            }
            nodes.push(path);
        }
        frontier = next;
    }
    ExplicitTree::from_nodes(nodes).expect("materialized trees are prefix closed")
}
