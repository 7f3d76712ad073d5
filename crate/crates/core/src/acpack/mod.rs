//! Finite checks of absolute continuity and of Banach's condition in its
//! interval form, and staircase functions that lose Lusin's condition (N)
//! in the limit.

mod staircase;

pub use staircase::{
    i_n, lusin_witness, parse_schedule, staircase_build, staircase_report, LusinReport, LusinRow, StaircaseSchedule,
    StaircaseState, SubintervalBook,
};

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::plfun::PLFunction;
use crate::rational::{qi, Q};

/// ε, δ and a sequence a_0 ≤ b_0 ≤ a_1 ≤ … ≤ b_k.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ACWitnessQuery {
    pub epsilon: Q,
    pub delta: Q,
    pub sequence: Vec<Q>,
}

impl ACWitnessQuery {
    pub fn new(epsilon: Q, delta: Q, sequence: Vec<Q>) -> Result<Self> {
        if !epsilon.is_positive() || !delta.is_positive() {
            return Err(Error::Invalid("epsilon and delta must be positive".into()));
        }
        if sequence.len() % 2 == 1 {
            return Err(Error::Invalid("the sequence must pair up into intervals".into()));
        }
        if sequence.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Invalid("the sequence must be non-decreasing".into()));
        }
        Ok(ACWitnessQuery { epsilon, delta, sequence })
    }

    pub fn intervals(&self) -> impl Iterator<Item = (&Q, &Q)> {
        self.sequence.chunks(2).map(|c| (&c[0], &c[1]))
    }

    pub fn length_sum(&self) -> Q {
        self.intervals().map(|(a, b)| b - a).sum()
    }

    /// Σ |f(b_i) − f(a_i)|, or Σ ω(f, a_i, b_i) when starred.
    pub fn image_sum(&self, f: &PLFunction, starred: bool) -> Result<Q> {
        let mut total = qi(0);
        for (a, b) in self.intervals() {
            if a == b {
                continue;
            }
            total += if starred { f.oscillation(a, b)? } else { (f.eval(b)? - f.eval(a)?).abs() };
        }
        Ok(total)
    }

    /// Whether the sequence breaks the implication: lengths below δ but the
    /// image sum at least ε.
    pub fn violates(&self, f: &PLFunction, starred: bool) -> Result<bool> {
        Ok(self.length_sum() < self.delta && self.image_sum(f, starred)? >= self.epsilon)
    }
}

#[derive(Clone, Debug)]
pub struct ACCheck {
    pub holds: bool,
    /// Largest image sum met before the search was cut off.
    pub best: Q,
    pub witness: Option<ACWitnessQuery>,
}

const KNAPSACK_NODE_BUDGET: u64 = 20_000_000;

struct Item {
    w: Q,
    v: Q,
    idx: usize,
}

struct Knapsack<'a> {
    items: &'a [Item],
    cap: &'a Q,
    target: &'a Q,
    best: Q,
    best_set: Vec<usize>,
    cur: Vec<usize>,
    nodes: u64,
}

impl Knapsack<'_> {
    // fractional fill of the remaining capacity, and whether the capacity
    // ran out first: then every admissible subset stays strictly below it
    fn bound(&self, i: usize, w: &Q, v: &Q) -> (Q, bool) {
        let mut room = self.cap - w;
        let mut b = v.clone();
        for it in &self.items[i..] {
            if it.w < room {
                room -= &it.w;
                b += &it.v;
            } else {
                b += &it.v * &room / &it.w;
                return (b, true);
            }
        }
        (b, false)
    }

    // true once a subset reaching the target is found
    fn search(&mut self, i: usize, w: Q, v: Q) -> Result<bool> {
        self.nodes += 1;
        if self.nodes > KNAPSACK_NODE_BUDGET {
            return Err(Error::Capacity("absolute continuity search exceeded its node budget".into()));
        }
        if v > self.best {
            self.best = v.clone();
            self.best_set = self.cur.clone();
            if self.best >= *self.target {
                return Ok(true);
            }
        }
        if i == self.items.len() {
            return Ok(false);
        }
        let (b, strict) = self.bound(i, &w, &v);
        if b <= self.best || b < *self.target || (strict && b == *self.target) {
            return Ok(false);
        }
        let it = &self.items[i];
        let w2 = &w + &it.w;
        if w2 < *self.cap {
            self.cur.push(it.idx);
            let v2 = &v + &it.v;
            if self.search(i + 1, w2, v2)? {
                return Ok(true);
            }
            self.cur.pop();
        }
        self.search(i + 1, w, v)
    }
}

/// Decides, over sequences with endpoints in the finite set `e`, whether
/// Σ (b_i − a_i) < δ forces Σ |f(b_i) − f(a_i)| < ε (or Σ ω(f, a_i, b_i) < ε
/// when starred).
///
/// An interval spanning several consecutive points of `e` gains nothing over
/// its pieces, so this is a 0/1 knapsack over consecutive pairs, solved
/// exactly by branch and bound.
pub fn check_ac_on_set(f: &PLFunction, e: &[Q], epsilon: &Q, delta: &Q, starred: bool) -> Result<ACCheck> {
    if !epsilon.is_positive() || !delta.is_positive() {
        return Err(Error::Invalid("epsilon and delta must be positive".into()));
    }
    let mut pts = e.to_vec();
    pts.sort();
    pts.dedup();
    let mut items = Vec::new();
    for (idx, w) in pts.windows(2).enumerate() {
        let v = if starred { f.oscillation(&w[0], &w[1])? } else { (f.eval(&w[1])? - f.eval(&w[0])?).abs() };
        if !v.is_zero() {
            items.push(Item { w: &w[1] - &w[0], v, idx });
        }
    }
    items.sort_by(|a, b| (&b.v * &a.w).cmp(&(&a.v * &b.w)).then(a.idx.cmp(&b.idx)));
    let mut ks = Knapsack {
        items: &items,
        cap: delta,
        target: epsilon,
        best: qi(0),
        best_set: Vec::new(),
        cur: Vec::new(),
        nodes: 0,
    };
    let violated = ks.search(0, qi(0), qi(0))?;
    let witness = if violated {
        let mut chosen = ks.best_set.clone();
        chosen.sort();
        let seq = chosen.iter().flat_map(|&i| [pts[i].clone(), pts[i + 1].clone()]).collect();
        Some(ACWitnessQuery::new(epsilon.clone(), delta.clone(), seq)?)
    } else {
        None
    };
    Ok(ACCheck { holds: !violated, best: ks.best, witness })
}

#[derive(Clone, Debug)]
pub struct SCheck {
    pub holds: bool,
    pub best: Q,
    /// Domain intervals whose images have disjoint interiors, total length
    /// below δ and image sum above ε.
    pub witness: Option<Vec<(Q, Q)>>,
    /// Whether every sequence over the candidate points was examined.
    pub exhaustive: bool,
}

/// Candidate point sets up to this size are searched exhaustively.
pub const EXHAUSTIVE_POINTS: usize = 14;

fn overlaps(a: &(Q, Q), b: &(Q, Q)) -> bool {
    a.0 < b.1 && b.0 < a.1
}

fn image(f: &PLFunction, a: &Q, b: &Q) -> Result<(Q, Q)> {
    let (fa, fb) = (f.eval(a)?, f.eval(b)?);
    Ok(if fa <= fb { (fa, fb) } else { (fb, fa) })
}

struct SSearch<'a> {
    f: &'a PLFunction,
    pts: &'a [Q],
    delta: &'a Q,
    epsilon: &'a Q,
    chosen: Vec<(Q, Q)>,
    images: Vec<(Q, Q)>,
    best: Q,
    found: Option<Vec<(Q, Q)>>,
}

impl SSearch<'_> {
    fn run(&mut self, from: usize, len: Q, sum: Q) -> Result<()> {
        if sum > self.best {
            self.best = sum.clone();
        }
        if sum > *self.epsilon {
            self.found = Some(self.chosen.clone());
            return Ok(());
        }
        for i in from..self.pts.len() {
            for j in i + 1..self.pts.len() {
                let l = &len + &self.pts[j] - &self.pts[i];
                if l >= *self.delta {
                    break;
                }
                let im = image(self.f, &self.pts[i], &self.pts[j])?;
                if im.0 == im.1 || self.images.iter().any(|o| overlaps(o, &im)) {
                    continue;
                }
                let s = &sum + &im.1 - &im.0;
                self.chosen.push((self.pts[i].clone(), self.pts[j].clone()));
                self.images.push(im);
                self.run(j, l, s)?;
                self.chosen.pop();
                self.images.pop();
                if self.found.is_some() {
                    return Ok(());
                }
            }
        }
        Ok(())
    }
}

/// Searches for sequences with endpoints among the breakpoints of `f` and
/// the multiples of `grid` that have total length below δ, images with
/// pairwise disjoint interiors, and image sum above ε.
///
/// A hit is a genuine counterexample: the images can be shrunk to closed
/// disjoint intervals keeping the sum above ε. A miss only says that none
/// was found at this resolution. Small point sets are searched over all
/// sequences; larger ones greedily over consecutive pairs by slope.
pub fn check_interval_s(f: &PLFunction, epsilon: &Q, delta: &Q, grid: &Q) -> Result<SCheck> {
    if !epsilon.is_positive() || !delta.is_positive() {
        return Err(Error::Invalid("epsilon and delta must be positive".into()));
    }
    let mut pts: Vec<Q> = f.sample(grid)?.into_iter().map(|(x, _)| x).collect();
    pts.extend(f.breakpoints().iter().map(|p| p.0.clone()));
    pts.sort();
    pts.dedup();
    if pts.len() <= EXHAUSTIVE_POINTS {
        let mut s = SSearch {
            f,
            pts: &pts,
            delta,
            epsilon,
            chosen: Vec::new(),
            images: Vec::new(),
            best: qi(0),
            found: None,
        };
        s.run(0, qi(0), qi(0))?;
        return Ok(SCheck { holds: s.found.is_none(), best: s.best, witness: s.found, exhaustive: true });
    }
    let mut cells = Vec::new();
    for w in pts.windows(2) {
        let im = image(f, &w[0], &w[1])?;
        if im.0 < im.1 {
            cells.push((w[0].clone(), w[1].clone(), im));
        }
    }
    // steepest first, left to right among equals
    cells.sort_by(|a, b| {
        let (sa, sb) = ((&a.2 .1 - &a.2 .0) * (&b.1 - &b.0), (&b.2 .1 - &b.2 .0) * (&a.1 - &a.0));
        sb.cmp(&sa).then(a.0.cmp(&b.0))
    });
    let mut len = qi(0);
    let mut sum = qi(0);
    let mut chosen: Vec<(Q, Q)> = Vec::new();
    let mut images: Vec<(Q, Q)> = Vec::new();
    for (a, b, im) in cells {
        let l = &len + &b - &a;
        if l >= *delta || images.iter().any(|o| overlaps(o, &im)) {
            continue;
        }
        len = l;
        sum += &im.1 - &im.0;
        chosen.push((a, b));
        images.push(im);
    }
    chosen.sort();
    let holds = sum <= *epsilon;
    Ok(SCheck { holds, best: sum, witness: (!holds).then_some(chosen), exhaustive: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn grid(k: i64) -> Vec<Q> {
        (0..=k).map(|i| q(i, k)).collect()
    }

    fn ramp() -> PLFunction {
        PLFunction::new(vec![(qi(0), qi(0)), (q(1, 100), qi(1)), (qi(1), qi(1))]).unwrap()
    }

    #[test]
    fn ac_examples() {
        let id = PLFunction::identity();
        for eps in [q(1, 10), q(1, 3), qi(1)] {
            assert!(check_ac_on_set(&id, &grid(50), &eps, &eps, false).unwrap().holds);
        }
        let r = check_ac_on_set(&ramp(), &grid(1000), &q(1, 2), &q(1, 100), false).unwrap();
        assert!(!r.holds);
        let w = r.witness.unwrap();
        assert!(w.violates(&ramp(), false).unwrap());
        assert!(w.sequence.iter().all(|x| *x <= q(1, 100)));
        for e in [vec![], vec![q(1, 2)]] {
            assert!(check_ac_on_set(&ramp(), &e, &q(1, 100), &qi(1), true).unwrap().holds);
        }
    }

    #[test]
    fn ac_budget_is_strict() {
        // two gaps of length 1/2 each carry image 1/2
        let e = [qi(0), q(1, 2), qi(1)];
        let id = PLFunction::identity();
        let r = check_ac_on_set(&id, &e, &q(1, 2), &q(1, 2), false).unwrap();
        assert!(r.holds);
        assert_eq!(r.best, qi(0));
        let r = check_ac_on_set(&id, &e, &q(1, 2), &q(51, 100), false).unwrap();
        assert!(!r.holds);
    }

    #[test]
    fn starred_uses_oscillation() {
        let tent = PLFunction::new(vec![(qi(0), qi(0)), (q(1, 2), qi(1)), (qi(1), qi(0))]).unwrap();
        let e = [qi(0), qi(1)];
        assert!(check_ac_on_set(&tent, &e, &q(1, 2), &qi(2), false).unwrap().holds);
        assert!(!check_ac_on_set(&tent, &e, &q(1, 2), &qi(2), true).unwrap().holds);
    }

    #[test]
    fn interval_s_examples() {
        let id = PLFunction::identity();
        for g in [q(1, 4), q(1, 10), q(1, 100)] {
            assert!(check_interval_s(&id, &q(1, 5), &q(1, 5), &g).unwrap().holds);
        }
        assert!(check_interval_s(&PLFunction::constant(q(1, 3)), &q(1, 100), &qi(1), &q(1, 50)).unwrap().holds);
        let r = check_interval_s(&ramp(), &q(1, 2), &q(1, 50), &q(1, 1000)).unwrap();
        assert!(!r.holds && !r.exhaustive);
        let r = check_interval_s(&ramp(), &q(1, 2), &q(1, 50), &q(1, 4)).unwrap();
        assert!(!r.holds && r.exhaustive);
        assert_eq!(r.witness.unwrap(), vec![(qi(0), q(1, 100))]);
    }

    #[test]
    fn folded_images_must_not_overlap() {
        // up by 1 then down by 1 within a short span
        let zig = PLFunction::new(vec![(qi(0), qi(0)), (q(1, 100), qi(1)), (q(2, 100), qi(0)), (qi(1), qi(0))]).unwrap();
        let r = check_interval_s(&zig, &qi(1), &q(1, 10), &q(1, 4)).unwrap();
        assert!(r.exhaustive && r.holds);
        assert_eq!(r.best, qi(1));
    }
}
