//! Exact piecewise-linear functions on [0,1], step functions, closed sets
//! given by their complementary gaps, and the metric of M(I).

mod set;
mod step;

pub use set::ClosedRationalSet;
pub use step::{mi_distance, Piecewise, Segment, StepFunction};

use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{parse_q, qi, Q};

/// A continuous function on [0,1], linear between consecutive breakpoints.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PLFunction {
    pts: Vec<(Q, Q)>,
}

fn unit_interval(x: &Q) -> bool {
    !x.is_negative() && *x <= qi(1)
}

fn lerp(x0: &Q, y0: &Q, x1: &Q, y1: &Q, x: &Q) -> Q {
    if x == x0 {
        return y0.clone();
    }
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

impl PLFunction {
    /// Checks that the `x` are strictly increasing from 0 to 1.
    pub fn new(pts: Vec<(Q, Q)>) -> Result<Self> {
        if pts.len() < 2 {
            return Err(Error::Invalid("a PL function needs breakpoints at 0 and 1".into()));
        }
        if !pts[0].0.is_zero() || pts[pts.len() - 1].0 != qi(1) {
            return Err(Error::Invalid("breakpoints must start at 0 and end at 1".into()));
        }
        if pts.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::Invalid("breakpoint abscissae must increase strictly".into()));
        }
        Ok(PLFunction { pts })
    }

    pub fn constant(c: Q) -> Self {
        PLFunction { pts: vec![(qi(0), c.clone()), (qi(1), c)] }
    }

    pub fn zero() -> Self {
        Self::constant(qi(0))
    }

    pub fn identity() -> Self {
        PLFunction { pts: vec![(qi(0), qi(0)), (qi(1), qi(1))] }
    }

    pub fn breakpoints(&self) -> &[(Q, Q)] {
        &self.pts
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Sum of bumps, each given by breakpoints that start and end at value 0
    /// and taken as 0 outside its span. Bumps may overlap.
    pub fn sum_of_bumps<'a, I>(bumps: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [(Q, Q)]>,
    {
        // slope changes, swept left to right
        let mut events: Vec<(Q, Q)> = Vec::new();
        for b in bumps {
            if b.len() < 2 || !b[0].1.is_zero() || !b[b.len() - 1].1.is_zero() {
                return Err(Error::Invalid("a bump must start and end at 0".into()));
            }
            if !unit_interval(&b[0].0) || !unit_interval(&b[b.len() - 1].0) {
                return Err(Error::Invalid("bump outside [0,1]".into()));
            }
            let mut prev = qi(0);
            for w in b.windows(2) {
                let dx = &w[1].0 - &w[0].0;
                if !dx.is_positive() {
                    return Err(Error::Invalid("bump abscissae must increase strictly".into()));
                }
                let s = (&w[1].1 - &w[0].1) / dx;
                events.push((w[0].0.clone(), &s - &prev));
                prev = s;
            }
            events.push((b[b.len() - 1].0.clone(), -prev));
        }
        events.sort_by(|a, b| a.0.cmp(&b.0));
        let mut pts = vec![(qi(0), qi(0))];
        let mut slope = qi(0);
        let mut i = 0;
        while i < events.len() {
            let x = events[i].0.clone();
            let mut ds = qi(0);
            while i < events.len() && events[i].0 == x {
                ds += &events[i].1;
                i += 1;
            }
            if ds.is_zero() {
                continue;
            }
            let (lx, ly) = pts.last().unwrap().clone();
            let y = &ly + &slope * (&x - &lx);
            slope += ds;
            if x.is_zero() {
                continue;
            }
            pts.push((x, y));
        }
        let (lx, ly) = pts.last().unwrap().clone();
        if lx != qi(1) {
            let y = &ly + &slope * (qi(1) - &lx);
            pts.push((qi(1), y));
        }
        Ok(PLFunction { pts })
    }

    /// Drops breakpoints collinear with their neighbours.
    pub fn simplified(&self) -> Self {
        let mut out: Vec<(Q, Q)> = Vec::with_capacity(self.pts.len());
        for p in &self.pts {
            while out.len() >= 2 {
                let (a, b) = (&out[out.len() - 2], &out[out.len() - 1]);
                let lhs = (&b.1 - &a.1) * (&p.0 - &b.0);
                let rhs = (&p.1 - &b.1) * (&b.0 - &a.0);
                if lhs == rhs {
                    out.pop();
                } else {
                    break;
                }
            }
            out.push(p.clone());
        }
        PLFunction { pts: out }
    }

    // index i with pts[i].x <= x < pts[i+1].x, clamped to the last piece
    fn piece(&self, x: &Q) -> usize {
        let i = self.pts.partition_point(|p| p.0 <= *x);
        i.saturating_sub(1).min(self.pts.len() - 2)
    }

    pub fn eval(&self, x: &Q) -> Result<Q> {
        if !unit_interval(x) {
            return Err(Error::Invalid(format!("{x} lies outside [0,1]")));
        }
        let i = self.piece(x);
        let (a, b) = (&self.pts[i], &self.pts[i + 1]);
        Ok(lerp(&a.0, &a.1, &b.0, &b.1, x))
    }

    fn zip_with(&self, g: &PLFunction, op: impl Fn(&Q, &Q) -> Q) -> PLFunction {
        let mut xs: Vec<&Q> = self.pts.iter().chain(&g.pts).map(|p| &p.0).collect();
        xs.sort();
        xs.dedup();
        let pts = xs
            .into_iter()
            .map(|x| {
                let v = op(&self.eval(x).unwrap(), &g.eval(x).unwrap());
                (x.clone(), v)
            })
            .collect();
        PLFunction { pts }
    }

    pub fn add(&self, g: &PLFunction) -> PLFunction {
        self.zip_with(g, |a, b| a + b)
    }

    pub fn sub(&self, g: &PLFunction) -> PLFunction {
        self.zip_with(g, |a, b| a - b)
    }

    pub fn scale(&self, c: &Q) -> PLFunction {
        PLFunction { pts: self.pts.iter().map(|(x, y)| (x.clone(), y * c)).collect() }
    }

    /// max |f − g|, attained at a breakpoint of one of them.
    pub fn sup_dist(&self, g: &PLFunction) -> Q {
        self.sub(g).pts.iter().map(|p| p.1.abs()).max().unwrap_or_default()
    }

    pub fn max_value(&self) -> Q {
        self.pts.iter().map(|p| p.1.clone()).max().unwrap()
    }

    pub fn min_value(&self) -> Q {
        self.pts.iter().map(|p| p.1.clone()).min().unwrap()
    }

    /// Values at `a`, at every breakpoint strictly between, and at `b`.
    fn values_on(&self, a: &Q, b: &Q) -> Vec<Q> {
        let mut v = vec![self.eval(a).unwrap()];
        let lo = self.pts.partition_point(|p| p.0 <= *a);
        let hi = self.pts.partition_point(|p| p.0 < *b);
        v.extend(self.pts[lo..hi.max(lo)].iter().map(|p| p.1.clone()));
        v.push(self.eval(b).unwrap());
        v
    }

    /// sup |f(x) − f(y)| over x, y in (a, b).
    pub fn oscillation(&self, a: &Q, b: &Q) -> Result<Q> {
        if a >= b || !unit_interval(a) || !unit_interval(b) {
            return Err(Error::Invalid(format!("bad interval ({a}, {b})")));
        }
        let v = self.values_on(a, b);
        Ok(v.iter().max().unwrap() - v.iter().min().unwrap())
    }

    /// max and min of f over [a, b].
    pub fn range_on(&self, a: &Q, b: &Q) -> Result<(Q, Q)> {
        if a > b || !unit_interval(a) || !unit_interval(b) {
            return Err(Error::Invalid(format!("bad interval [{a}, {b}]")));
        }
        let v = self.values_on(a, b);
        Ok((v.iter().max().unwrap().clone(), v.iter().min().unwrap().clone()))
    }

    pub fn total_variation(&self, a: &Q, b: &Q) -> Result<Q> {
        if a > b || !unit_interval(a) || !unit_interval(b) {
            return Err(Error::Invalid(format!("bad interval [{a}, {b}]")));
        }
        let v = self.values_on(a, b);
        Ok(v.windows(2).map(|w| (&w[1] - &w[0]).abs()).sum())
    }

    pub fn variation(&self) -> Q {
        self.pts.windows(2).map(|w| (&w[1].1 - &w[0].1).abs()).sum()
    }

    /// Σ |f(e_{i+1}) − f(e_i)|, or Σ ω(f, e_i, e_{i+1}) when starred, over
    /// consecutive points of the sorted list `e`.
    pub fn variation_on_finite_set(&self, e: &[Q], starred: bool) -> Result<Q> {
        if e.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Invalid("points must be sorted".into()));
        }
        let mut total = qi(0);
        for w in e.windows(2) {
            if w[0] == w[1] {
                continue;
            }
            total += if starred {
                self.oscillation(&w[0], &w[1])?
            } else {
                (self.eval(&w[1])? - self.eval(&w[0])?).abs()
            };
        }
        Ok(total)
    }

    /// F_E (or F_{E,*} when starred): equal to `f` on E, linear across each
    /// gap (c, d), and held constant outside the hull of E. The starred form
    /// puts sup f([c,d]) at (2c+d)/3 and inf f([c,d]) at (c+2d)/3.
    pub fn linearize(&self, e: &ClosedRationalSet, starred: bool) -> Result<PLFunction> {
        let Some((lo, hi)) = e.hull() else {
            return Err(Error::Invalid("cannot linearize over an empty set".into()));
        };
        let mut pts = vec![(qi(0), self.eval(lo)?)];
        let mut push = |x: Q, y: Q| {
            if pts.last().unwrap().0 < x {
                pts.push((x, y));
            }
        };
        let mut cursor = lo.clone();
        let inside = |from: &Q, to: &Q, push: &mut dyn FnMut(Q, Q)| {
            push(from.clone(), self.eval(from).unwrap());
            let a = self.pts.partition_point(|p| p.0 <= *from);
            let b = self.pts.partition_point(|p| p.0 < *to);
            for p in &self.pts[a..b.max(a)] {
                push(p.0.clone(), p.1.clone());
            }
            push(to.clone(), self.eval(to).unwrap());
        };
        for (c, d) in e.gaps() {
            inside(&cursor, c, &mut push);
            if starred {
                let (sup, inf) = self.range_on(c, d)?;
                push((qi(2) * c + d) / qi(3), sup);
                push((c + qi(2) * d) / qi(3), inf);
            }
            cursor = d.clone();
        }
        inside(&cursor, hi, &mut push);
        let end = self.eval(hi)?;
        push(qi(1), end);
        PLFunction::new(pts)
    }

    /// The slope on each linear piece.
    pub fn derivative(&self) -> StepFunction {
        let steps = self
            .pts
            .windows(2)
            .map(|w| (w[0].0.clone(), (&w[1].1 - &w[0].1) / (&w[1].0 - &w[0].0)))
            .collect();
        StepFunction::new(steps).expect("breakpoints are sorted")
    }

    /// (x, f(x)) at x = 0, h, 2h, ... up to 1 (1 is always included).
    pub fn sample(&self, h: &Q) -> Result<Vec<(Q, Q)>> {
        if !h.is_positive() {
            return Err(Error::Invalid("grid step must be positive".into()));
        }
        let mut out = Vec::new();
        let mut k = 0i64;
        loop {
            let x = h * qi(k);
            if x >= qi(1) {
                break;
            }
            out.push((x.clone(), self.eval(&x)?));
            k += 1;
        }
        out.push((qi(1), self.eval(&qi(1))?));
        Ok(out)
    }
}

pub fn eval(f: &PLFunction, x: &Q) -> Result<Q> {
    f.eval(x)
}

pub fn oscillation(f: &PLFunction, a: &Q, b: &Q) -> Result<Q> {
    f.oscillation(a, b)
}

pub fn total_variation(f: &PLFunction, a: &Q, b: &Q) -> Result<Q> {
    f.total_variation(a, b)
}

pub fn variation_on_finite_set(f: &PLFunction, e: &[Q], starred: bool) -> Result<Q> {
    f.variation_on_finite_set(e, starred)
}

pub fn linearize_e(f: &PLFunction, e: &ClosedRationalSet, starred: bool) -> Result<PLFunction> {
    f.linearize(e, starred)
}

pub fn pl_derivative(f: &PLFunction) -> StepFunction {
    f.derivative()
}

/// One breakpoint per line, `x y` with exact fractions.
impl fmt::Display for PLFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (x, y) in &self.pts {
            writeln!(f, "{x} {y}")?;
        }
        Ok(())
    }
}

impl FromStr for PLFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut pts = Vec::new();
        for (i, line) in s.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let (Some(x), Some(y), None) = (it.next(), it.next(), it.next()) else {
                return Err(Error::parse(i + 1, "expected `x y`"));
            };
            let x = parse_q(x).map_err(|_| Error::parse(i + 1, format!("bad number {x:?}")))?;
            let y = parse_q(y).map_err(|_| Error::parse(i + 1, format!("bad number {y:?}")))?;
            pts.push((x, y));
        }
        PLFunction::new(pts)
    }
}
