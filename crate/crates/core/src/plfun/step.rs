use num_traits::{One, Signed, Zero};

use super::PLFunction;
use crate::error::{Error, Result};
use crate::rational::{qi, Q};

/// A right-open step function on [0,1): value `v_i` on `[c_i, c_{i+1})`.
///
/// Equality is almost-everywhere equality; adjacent steps with the same
/// value are merged on construction.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StepFunction {
    steps: Vec<(Q, Q)>,
}

impl StepFunction {
    pub fn new(steps: Vec<(Q, Q)>) -> Result<Self> {
        if steps.first().is_none_or(|s| !s.0.is_zero()) {
            return Err(Error::Invalid("the first cut must be 0".into()));
        }
        if steps.windows(2).any(|w| w[0].0 >= w[1].0) || steps.last().unwrap().0 >= qi(1) {
            return Err(Error::Invalid("cuts must increase strictly inside [0,1)".into()));
        }
        let mut out: Vec<(Q, Q)> = Vec::with_capacity(steps.len());
        for s in steps {
            if out.last().is_some_and(|l| l.1 == s.1) {
                continue;
            }
            out.push(s);
        }
        Ok(StepFunction { steps: out })
    }

    pub fn constant(v: Q) -> Self {
        StepFunction { steps: vec![(qi(0), v)] }
    }

    pub fn steps(&self) -> &[(Q, Q)] {
        &self.steps
    }

    /// Value at `x`; `x = 1` takes the last value.
    pub fn eval(&self, x: &Q) -> Q {
        let i = self.steps.partition_point(|s| s.0 <= *x);
        self.steps[i.saturating_sub(1)].1.clone()
    }

    /// ∫ over [0,1].
    pub fn integral(&self) -> Q {
        self.segments().iter().map(|s| (&s.x1 - &s.x0) * &s.y0).sum()
    }
}

/// A linear piece on the open interval (x0, x1) with one-sided limits y0, y1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub x0: Q,
    pub x1: Q,
    pub y0: Q,
    pub y1: Q,
}

impl Segment {
    fn at(&self, x: &Q) -> Q {
        &self.y0 + (&self.y1 - &self.y0) * (x - &self.x0) / (&self.x1 - &self.x0)
    }
}

/// Functions on [0,1] that are linear on finitely many open pieces.
pub trait Piecewise {
    /// Consecutive pieces covering [0,1].
    fn segments(&self) -> Vec<Segment>;
}

impl Piecewise for PLFunction {
    fn segments(&self) -> Vec<Segment> {
        self.breakpoints()
            .windows(2)
            .map(|w| Segment { x0: w[0].0.clone(), x1: w[1].0.clone(), y0: w[0].1.clone(), y1: w[1].1.clone() })
            .collect()
    }
}

impl Piecewise for StepFunction {
    fn segments(&self) -> Vec<Segment> {
        let n = self.steps.len();
        (0..n)
            .map(|i| {
                let x1 = if i + 1 < n { self.steps[i + 1].0.clone() } else { qi(1) };
                let v = self.steps[i].1.clone();
                Segment { x0: self.steps[i].0.clone(), x1, y0: v.clone(), y1: v }
            })
            .collect()
    }
}

fn cuts(a: &[Segment], b: &[Segment]) -> Vec<Q> {
    let mut xs: Vec<Q> = a.iter().chain(b).flat_map(|s| [s.x0.clone(), s.x1.clone()]).collect();
    xs.sort();
    xs.dedup();
    xs
}

// segment of `segs` containing the open interval (x0, x1)
fn restrict(segs: &[Segment], x0: &Q, x1: &Q) -> (Q, Q) {
    let i = segs.partition_point(|s| s.x1 <= *x0);
    let s = &segs[i];
    (s.at(x0), s.at(x1))
}

/// ∫ over (x0, x1) of min(1, |h|) for h linear from h0 to h1.
fn clipped_integral(x0: &Q, x1: &Q, h0: &Q, h1: &Q) -> Q {
    // split where h crosses -1, 0 or 1
    let mut ts = vec![qi(0), qi(1)];
    for level in [qi(-1), qi(0), qi(1)] {
        let (a, b) = (h0 - &level, h1 - &level);
        if (a.is_positive() && b.is_negative()) || (a.is_negative() && b.is_positive()) {
            ts.push(&a / (&a - &b));
        }
    }
    ts.sort();
    let w = x1 - x0;
    let mut total = qi(0);
    for t in ts.windows(2) {
        let (ya, yb) = (h0 + (h1 - h0) * &t[0], h0 + (h1 - h0) * &t[1]);
        let mid = (&ya + &yb) / qi(2);
        let len = &w * (&t[1] - &t[0]);
        total += if mid.abs() >= Q::one() { len } else { len * mid.abs() };
    }
    total
}

/// ∫_[0,1] min(1, |f − g|), exact.
pub fn mi_distance<A: Piecewise + ?Sized, B: Piecewise + ?Sized>(f: &A, g: &B) -> Q {
    let (sf, sg) = (f.segments(), g.segments());
    let xs = cuts(&sf, &sg);
    let mut total = qi(0);
    for w in xs.windows(2) {
        let (f0, f1) = restrict(&sf, &w[0], &w[1]);
        let (g0, g1) = restrict(&sg, &w[0], &w[1]);
        total += clipped_integral(&w[0], &w[1], &(f0 - g0), &(f1 - g1));
    }
    total
}
