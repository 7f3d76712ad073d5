//! Well-foundedness.
//!
//! Size-change analysis over the state graph proves termination when every
//! idempotent self-loop strictly decreases some parameter. An argument
//! `p-1` counts as a strict decrease only in clauses where `p > 0` is known
//! from the failed guards before it. When the analysis fails, a bounded
//! search over concrete nodes looks for a repeated node on a path, which is
//! an actual infinite branch.

use std::collections::{HashMap, HashSet};
use std::fmt;

use super::{ChildTerm, Node, ParamExpr, StateDef, TreeScheme};
use crate::error::{Error, Result};

/// An infinite branch: `prefix` followed by `cycle` repeated forever.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InfinitePath {
    pub prefix: Vec<u64>,
    pub cycle: Vec<u64>,
}

impl InfinitePath {
    /// The first `len` entries of the branch.
    pub fn take(&self, len: usize) -> Vec<u64> {
        self.prefix
            .iter()
            .chain(self.cycle.iter().cycle())
            .take(len)
            .copied()
            .collect()
    }
}

impl fmt::Display for InfinitePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let j = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
        write!(f, "({}) then ({}) repeated", j(&self.prefix), j(&self.cycle))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Foundedness {
    WellFounded,
    IllFounded(InfinitePath),
}

// arcs[i][j]: None, Some(false) for `>=`, Some(true) for `>`
#[derive(Clone, PartialEq, Eq, Hash)]
struct SizeGraph {
    from: usize,
    to: usize,
    arcs: Vec<Vec<Option<bool>>>,
}

impl SizeGraph {
    fn compose(&self, g: &SizeGraph) -> SizeGraph {
        let (a, b, c) = (self.arcs.len(), g.arcs.len(), g.arcs.first().map_or(0, Vec::len));
        let mut arcs = vec![vec![None; c]; a];
        for i in 0..a {
            for j in 0..b {
                let Some(s1) = self.arcs[i][j] else { continue };
                for k in 0..c {
                    if let Some(s2) = g.arcs[j][k] {
                        let s = s1 || s2;
                        arcs[i][k] = Some(arcs[i][k].unwrap_or(false) || s);
                    }
                }
            }
        }
        SizeGraph { from: self.from, to: g.to, arcs }
    }
}

/// Parameters known to be positive in clause `k` of `def`.
fn positive_in_clause(def: &StateDef, k: usize) -> Vec<bool> {
    let zero_here: Vec<usize> = if k < def.cases.len() { def.cases[k].zeros.clone() } else { Vec::new() };
    let mut pos = vec![false; def.arity()];
    for earlier in &def.cases[..k.min(def.cases.len())] {
        let left: Vec<usize> = earlier.zeros.iter().copied().filter(|i| !zero_here.contains(i)).collect();
        if let [i] = left.as_slice() {
            pos[*i] = true;
        }
    }
    pos
}

fn edges(scheme: &TreeScheme, reachable: &HashSet<usize>) -> Vec<SizeGraph> {
    let mut out = Vec::new();
    for &s in reachable {
        let def = &scheme.states[s];
        for k in 0..def.clause_count() {
            let pos = positive_in_clause(def, k);
            for t in def.clause(k).terms() {
                let ChildTerm::Ref { state, args } = t else { continue };
                let mut arcs = vec![vec![None; args.len()]; def.arity()];
                for (j, a) in args.iter().enumerate() {
                    match *a {
                        ParamExpr::Param(i) => arcs[i][j] = Some(false),
                        ParamExpr::Pred(i) => arcs[i][j] = Some(pos[i]),
                        _ => {}
                    }
                }
                out.push(SizeGraph { from: s, to: *state, arcs });
            }
        }
    }
    out
}

fn reachable_states(scheme: &TreeScheme) -> HashSet<usize> {
    let mut seen = HashSet::new();
    let mut stack: Vec<usize> = match &scheme.root {
        ChildTerm::Ref { state, .. } => vec![*state],
        _ => vec![],
    };
    while let Some(s) = stack.pop() {
        if !seen.insert(s) {
            continue;
        }
        let def = &scheme.states[s];
        for k in 0..def.clause_count() {
            for t in def.clause(k).terms() {
                if let ChildTerm::Ref { state, .. } = t {
                    stack.push(*state);
                }
            }
        }
    }
    seen
}

fn size_change_terminates(scheme: &TreeScheme) -> bool {
    let reach = reachable_states(scheme);
    let base = edges(scheme, &reach);
    let mut closure: HashSet<SizeGraph> = base.iter().cloned().collect();
    let mut work: Vec<SizeGraph> = closure.iter().cloned().collect();
    while let Some(g) = work.pop() {
        for e in &base {
            if e.from == g.to {
                let h = g.compose(e);
                if closure.insert(h.clone()) {
                    work.push(h);
                }
            }
        }
    }
    closure.iter().filter(|g| g.from == g.to).all(|g| {
        g.compose(g) != *g || (0..g.arcs.len()).any(|i| g.arcs[i][i] == Some(true))
    })
}

const SEARCH_PARAM_BOUND: u64 = 64;
const SEARCH_NODE_BUDGET: usize = 200_000;

enum Lasso {
    Found(InfinitePath),
    /// Every reachable node was visited and none repeats along a branch.
    Exhausted,
    GaveUp,
}

/// Looks for a node repeated along a branch.
fn find_lasso(scheme: &TreeScheme) -> Lasso {
    let Some(root) = scheme.root_node() else { return Lasso::Exhausted };
    // graded tails and skipped nodes leave part of the tree unseen
    let mut complete = true;
    let mut done: HashSet<Node> = HashSet::new();
    let mut on_path: HashMap<Node, usize> = HashMap::new();
    // (node, candidate children, next candidate position)
    let mut stack: Vec<(Node, Vec<u64>, usize)> = Vec::new();
    let mut path: Vec<u64> = Vec::new();
    let candidates = |node: &Node| -> Vec<u64> {
        let Some(map) = scheme.child_map(node) else { return vec![] };
        let mut c: Vec<u64> = map.exceptional.iter().map(|(i, _)| *i).collect();
        let start = map.tail_start();
        let extra = match &map.tail {
            super::TailRule::Absent => 0,
            super::TailRule::Constant(_) => 1,
            super::TailRule::Periodic(ts) => ts.len() as u64,
            super::TailRule::Graded(_) => 3,
        };
        c.extend(start..start + extra);
        c
    };
    let graded = |node: &Node| scheme.child_map(node).is_some_and(|m| matches!(m.tail, super::TailRule::Graded(_)));
    complete &= !graded(&root);
    on_path.insert(root.clone(), 0);
    stack.push((root.clone(), candidates(&root), 0));
    let mut visited = 0usize;
    while let Some((node, cands, pos)) = stack.last_mut() {
        if *pos >= cands.len() {
            let node = node.clone();
            stack.pop();
            on_path.remove(&node);
            done.insert(node);
            path.pop();
            continue;
        }
        let n = cands[*pos];
        *pos += 1;
        let parent = node.clone();
        let Some(child) = scheme.child(&parent, n) else { continue };
        if let Node::State(_, ps) = &child {
            if ps.iter().any(|&p| p > SEARCH_PARAM_BOUND) {
                complete = false;
                continue;
            }
        }
        if let Some(&depth) = on_path.get(&child) {
            let mut full = path.clone();
            full.push(n);
            return Lasso::Found(InfinitePath { prefix: full[..depth].to_vec(), cycle: full[depth..].to_vec() });
        }
        if done.contains(&child) {
            continue;
        }
        visited += 1;
        if visited > SEARCH_NODE_BUDGET {
            return Lasso::GaveUp;
        }
        complete &= !graded(&child);
        path.push(n);
        on_path.insert(child.clone(), path.len());
        let cs = candidates(&child);
        stack.push((child, cs, 0));
    }
    if complete {
        Lasso::Exhausted
    } else {
        Lasso::GaveUp
    }
}

/// Decides whether the generated tree has an infinite branch.
pub fn analyze(scheme: &TreeScheme) -> Result<Foundedness> {
    if size_change_terminates(scheme) {
        return Ok(Foundedness::WellFounded);
    }
    match find_lasso(scheme) {
        Lasso::Found(p) => Ok(Foundedness::IllFounded(p)),
        Lasso::Exhausted => Ok(Foundedness::WellFounded),
        Lasso::GaveUp => Err(Error::Undecided(
            "size-change analysis failed and no repeating branch was found".into(),
        )),
    }
}

pub fn is_wellfounded(scheme: &TreeScheme) -> Result<bool> {
    Ok(analyze(scheme)? == Foundedness::WellFounded)
}

pub(crate) fn require_wellfounded(scheme: &TreeScheme) -> Result<()> {
    match analyze(scheme)? {
        Foundedness::WellFounded => Ok(()),
        Foundedness::IllFounded(p) => Err(Error::IllFounded(p.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treescheme::{materialize, parse_scheme};

    #[test]
    fn examples() {
        assert!(is_wellfounded(&TreeScheme::leaf()).unwrap());
        let lp = parse_scheme("root A\nstate A\n  child 0 A\n").unwrap();
        assert_eq!(
            analyze(&lp).unwrap(),
            Foundedness::IllFounded(InfinitePath { prefix: vec![], cycle: vec![0] })
        );
        let fan = parse_scheme("root Fan(3)\nstate Fan(p)\n  when p = 0\n  otherwise\n    tail const Fan(p-1)\n").unwrap();
        assert!(is_wellfounded(&fan).unwrap());
    }

    #[test]
    fn unguarded_decrement_is_not_progress() {
        // A(0) has child A(0): an infinite branch.
        let s = parse_scheme("root A(2)\nstate A(p)\n  tail const A(p-1)\n").unwrap();
        let Foundedness::IllFounded(p) = analyze(&s).unwrap() else { panic!() };
        assert_eq!(p.prefix, vec![0, 0]);
        assert_eq!(p.cycle, vec![0]);
        let t = materialize(&s, 12, 1);
        assert_eq!(t.height(), Some(12));
    }

    #[test]
    fn graded_reentry() {
        let s = parse_scheme("root A(0)\nstate A(p)\n  child 1 leaf\n  tail graded A(n)\n").unwrap();
        assert!(matches!(analyze(&s).unwrap(), Foundedness::IllFounded(_)));
        let s = parse_scheme("root A(5)\nstate A(p)\n  when p = 0\n  otherwise\n    tail graded B(p-1, n)\nstate B(q, m)\n  when m = 0\n    tail const A(q)\n  otherwise\n    tail const B(q, m-1)\n").unwrap();
        assert!(is_wellfounded(&s).unwrap());
    }

    #[test]
    fn conjunctive_guards() {
        let s = parse_scheme(
            "root Pad(3, 2)\nstate Pad(k, m)\n  when k = 0, m = 0\n  when m = 0\n    tail graded Pad(k-1, n)\n  otherwise\n    tail const Pad(k, m-1)\n",
        )
        .unwrap();
        assert!(is_wellfounded(&s).unwrap());
    }

    #[test]
    fn path_prefix() {
        let p = InfinitePath { prefix: vec![1], cycle: vec![0, 2] };
        assert_eq!(p.take(6), vec![1, 0, 2, 0, 2, 0]);
        assert_eq!(p.to_string(), "(1) then (0,2) repeated");
    }
}
