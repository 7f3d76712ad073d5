//! Invariants of ranks, codings and supports on random tree schemes, plus
//! the counting bound on the shipped corpus.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use proptest::prelude::*;

use denjoy_core::closedset::{
    binary_truncation, cb_derivative, cb_derivative_iter, cb_rank, cb_rank_literal, count_points, cylinder,
    hcs_of_tree,
};
use denjoy_core::denjoy::{flats, level_sum, truncated_f, RationalInterval, SupportFamily};
use denjoy_core::ordinal::SampleWindow;
use denjoy_core::rational::pow2_neg;
use denjoy_core::treescheme::{is_wellfounded, ls_rank, materialize, parse_scheme};
use denjoy_core::{ExplicitTree, Node, Ordinal, TreeScheme, Q};

const EXPRS: [&str; 5] = ["0", "1", "2", "p", "p-1"];

/// Three one-parameter states, each a leaf at p = 0. Children use indices
/// below 3; `tails` allows constant tails.
#[derive(Clone, Debug)]
struct Spec {
    root: usize,
    states: Vec<(Vec<(u64, usize, usize)>, Option<(usize, usize)>)>,
}

impl Spec {
    fn text(&self) -> String {
        let mut s = format!("root S0({})\n", self.root);
        for (i, (children, tail)) in self.states.iter().enumerate() {
            s.push_str(&format!("state S{i}(p)\n  when p = 0\n  otherwise\n"));
            let mut seen = Vec::new();
            for &(k, target, e) in children {
                if !seen.contains(&k) {
                    seen.push(k);
                    s.push_str(&format!("    child {k} S{target}({})\n", EXPRS[e]));
                }
            }
            match tail {
                Some((target, e)) => s.push_str(&format!("    tail const S{target}({})\n", EXPRS[*e])),
                None => s.push_str("    tail absent\n"),
            }
        }
        s
    }

    fn scheme(&self) -> TreeScheme {
        parse_scheme(&self.text()).unwrap()
    }
}

fn spec(tails: bool) -> impl Strategy<Value = Spec> {
    let child = (0u64..3, 0usize..3, 0usize..5);
    let tail = if tails { prop::option::of((0usize..3, 0usize..5)).boxed() } else { Just(None).boxed() };
    let state = (prop::collection::vec(child, 0..3), tail);
    (0usize..3, prop::collection::vec(state, 3)).prop_map(|(root, states)| Spec { root, states })
}

fn well_founded(tails: bool) -> impl Strategy<Value = TreeScheme> {
    spec(tails).prop_map(|s| s.scheme()).prop_filter("ill-founded", |t| is_wellfounded(t).unwrap())
}

// whether some branch below `node` has `d` more edges; child indices past 3
// repeat index 3
fn has_chain(t: &TreeScheme, node: &Node, d: usize, memo: &mut HashMap<(Node, usize), bool>) -> bool {
    if d == 0 {
        return true;
    }
    if let Some(&b) = memo.get(&(node.clone(), d)) {
        return b;
    }
    let b = (0..4).any(|n| t.child(node, n).is_some_and(|c| has_chain(t, &c, d - 1, memo)));
    memo.insert((node.clone(), d), b);
    b
}

// the rank recursion run directly on an explicit finite tree
fn direct_rank(t: &ExplicitTree, node: &[u64]) -> u64 {
    let mut sup = 0;
    let mut c = node.to_vec();
    for n in 0..3 {
        c.push(n);
        if t.contains(&c) {
            sup = sup.max(direct_rank(t, &c));
        }
        c.pop();
    }
    // finitely many children: the limsup is 0
    sup.max(1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ls_rank_is_a_successor_above_children(t in well_founded(true)) {
        let r = ls_rank(&t).unwrap();
        prop_assert!(r.is_successor());
        let root = t.root_node().unwrap();
        for n in 0..5 {
            if let Some(c) = t.child(&root, n) {
                let rc = ls_rank(&t.rooted_at(&c)).unwrap();
                prop_assert!(rc <= r);
                prop_assert!(rc.is_successor());
            }
        }
    }

    #[test]
    fn ls_rank_matches_direct_recursion(t in well_founded(false)) {
        let explicit = materialize(&t, 16, 3);
        prop_assert!(explicit.height().unwrap() < 16);
        prop_assert_eq!(ls_rank(&t).unwrap(), Ordinal::finite(direct_rank(&explicit, &[])));
    }

    #[test]
    fn ill_founded_iff_every_depth(s in spec(true)) {
        let t = s.scheme();
        let wf = is_wellfounded(&t).unwrap();
        let mut memo = HashMap::new();
        for d in 1..=12usize {
            let reached = t.root_node().is_some_and(|r| has_chain(&t, &r, d, &mut memo));
            if d <= 6 {
                prop_assert_eq!(reached, materialize(&t, d, 4).height() == Some(d));
            }
            if !wf {
                prop_assert!(reached, "no chain of length {} in\n{}", d, s.text());
            }
            // paths in a well-founded tree never repeat a (state, parameter) pair
            if wf && d >= 10 {
                prop_assert!(!reached, "chain of length {} in\n{}", d, s.text());
            }
        }
    }

    #[test]
    fn coded_set_has_the_tree_rank(t in well_founded(true)) {
        let s = hcs_of_tree(&t).unwrap();
        let r = cb_rank(&s).unwrap();
        prop_assert_eq!(&r, &ls_rank(&t).unwrap());
        let k = r.as_finite().unwrap();
        let d = cb_derivative(&s, SampleWindow::default()).unwrap();
        prop_assert_eq!(cb_rank(&d).unwrap(), Ordinal::finite(k - 1));
        if k <= 4 {
            prop_assert_eq!(cb_rank_literal(&s, 8, SampleWindow::default()).unwrap(), Some(k));
        }
    }

    #[test]
    fn binary_truncation_is_pruned(t in well_founded(true), len in 1usize..9) {
        let v = binary_truncation(&t, len);
        prop_assert!(v.contains(""));
        for s in v.strings() {
            if !s.is_empty() {
                prop_assert!(v.contains(&s[..s.len() - 1]), "{} lacks its parent", s);
            }
            if s.len() < len {
                let (a, b) = (format!("{s}0"), format!("{s}1"));
                prop_assert!(v.contains(&a) || v.contains(&b), "{} is a dead end", s);
            }
        }
    }

    #[test]
    fn supports_nest_inside_flats(t in well_founded(true)) {
        let fam = SupportFamily::build(&t, 2, 2, &RationalInterval::unit()).unwrap();
        for level in 0..=2 {
            let mut ivs: Vec<RationalInterval> = Vec::new();
            for (idx, node) in fam.at_level(level) {
                let own = fam.intervals(idx).unwrap();
                prop_assert!(own.iter().all(|h| h.len() == node.lambda));
                if let Some(p) = node.parent {
                    let hosts: Vec<RationalInterval> =
                        fam.intervals(p).unwrap().iter().flat_map(|h| flats(h).unwrap()).collect();
                    for h in &own {
                        prop_assert!(hosts.iter().any(|k| k.contains_interval(h) && k != h));
                    }
                }
                ivs.extend(own);
            }
            ivs.sort_by(|a, b| a.lo.cmp(&b.lo));
            prop_assert!(ivs.windows(2).all(|w| w[0].hi < w[1].lo), "level {} intervals overlap", level);
            if level >= 1 {
                prop_assert!(ivs.iter().all(|h| h.len() <= pow2_neg(level as u32)));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn truncations_are_cauchy(t in well_founded(true)) {
        let unit = RationalInterval::unit();
        let cap = 1_000_000;
        for (d, width) in [(0usize, 3u64), (1, 1)] {
            let a = truncated_f(&t, d, width, &unit, cap).unwrap();
            let b = truncated_f(&t, d + 1, width, &unit, cap).unwrap();
            prop_assert!(a.sup_dist(&b) <= pow2_neg(d as u32));
            let top = level_sum(&t, d + 1, width, &unit, cap).unwrap();
            prop_assert!(top.min_value() >= Q::from_integer(0.into()) && top.max_value() <= pow2_neg(d as u32 + 1));
        }
    }
}

// at most k strings σ of one length meet D^α(S_T) when it has k points
#[test]
fn counting_bound_on_small_ranks() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let w = SampleWindow::default();
    let mut checked = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_none_or(|x| x != "scheme") {
            continue;
        }
        let t = parse_scheme(&fs::read_to_string(&p).unwrap()).unwrap();
        let s = hcs_of_tree(&t).unwrap();
        let Some(r) = cb_rank(&s).unwrap().as_finite().filter(|&r| r <= 2) else { continue };
        let alpha = r - 1;
        let k = count_points(&cb_derivative_iter(&s, alpha, w).unwrap(), w).unwrap().expect("finite top stage");
        let view = binary_truncation(&t, 16);
        for n in 0..=16 {
            let meeting = view
                .of_length(n)
                .filter(|sigma| !cb_derivative_iter(&cylinder(&t, sigma).unwrap(), alpha, w).unwrap().is_empty())
                .count() as u64;
            assert!(meeting <= k, "{}: {meeting} strings of length {n} meet the top stage, k = {k}", p.display());
        }
        checked += 1;
    }
    assert!(checked >= 3);
}
