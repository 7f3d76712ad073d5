use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Signed;
use serde_json::{json, Value};

use crate::denjoy::RationalInterval;
use crate::error::{Error, Result};
use crate::plfun::PLFunction;
use crate::rational::{pow2_neg, qi, Q};

/// `I_n = [1/(n+2), 1/(n+1)]`.
pub fn i_n(n: u64) -> RationalInterval {
    let n = BigInt::from(n);
    RationalInterval {
        lo: Q::new(BigInt::from(1), &n + 2),
        hi: Q::new(BigInt::from(1), n + 1),
    }
}

/// Stages at which I_n is refined: an event `(n, s)` builds F_s from
/// F_{s−1}.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StaircaseSchedule {
    events: Vec<(u64, u64)>,
    stages: u64,
}

impl StaircaseSchedule {
    pub fn new(mut events: Vec<(u64, u64)>, stages: u64) -> Result<Self> {
        if let Some(&(n, s)) = events.iter().find(|&&(_, s)| s == 0 || s > stages) {
            return Err(Error::Invalid(format!("event for I_{n} at stage {s} lies outside stages 1..={stages}")));
        }
        events.sort_by_key(|&(n, s)| (s, n));
        events.dedup();
        Ok(StaircaseSchedule { events, stages })
    }

    /// Pairs `(n, stage)` sorted by stage.
    pub fn events(&self) -> &[(u64, u64)] {
        &self.events
    }

    pub fn stages(&self) -> u64 {
        self.stages
    }

    pub fn at_stage(&self, s: u64) -> impl Iterator<Item = u64> + '_ {
        self.events.iter().filter(move |e| e.1 == s).map(|e| e.0)
    }

    /// Indices named by some event, ascending.
    pub fn indices(&self) -> Vec<u64> {
        let set: BTreeSet<u64> = self.events.iter().map(|e| e.0).collect();
        set.into_iter().collect()
    }
}

/// Reads lines `stage n`; `#` starts a comment. Without `stages` the last
/// scheduled stage is used.
pub fn parse_schedule(text: &str, stages: Option<u64>) -> Result<StaircaseSchedule> {
    let mut events = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let nums: Vec<&str> = line.split_whitespace().collect();
        let [s, n] = nums[..] else {
            return Err(Error::parse(i + 1, format!("expected `stage n`, found {line:?}")));
        };
        let s: u64 = s.parse().map_err(|_| Error::parse(i + 1, format!("bad stage {s:?}")))?;
        let n: u64 = n.parse().map_err(|_| Error::parse(i + 1, format!("bad index {n:?}")))?;
        if s == 0 {
            return Err(Error::parse(i + 1, "stages start at 1"));
        }
        events.push((n, s));
    }
    let last = events.iter().map(|e| e.1).max().unwrap_or(0);
    let stages = stages.unwrap_or(last);
    if last > stages {
        return Err(Error::Invalid(format!("an event at stage {last} exceeds the {stages} stages requested")));
    }
    StaircaseSchedule::new(events, stages)
}

/// The pieces of F_s inside one I_n.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubintervalBook {
    pub n: u64,
    pub interval: RationalInterval,
    /// Maximal intervals of slope zero.
    pub zero_slope: Vec<(Q, Q)>,
    /// Maximal linear pieces of positive slope.
    pub positive_slope: Vec<(Q, Q)>,
    pub plateau_values: Vec<Q>,
    /// Stairs placed in I_n when building this stage.
    pub stairs: u64,
}

impl SubintervalBook {
    pub fn zero_measure(&self) -> Q {
        self.zero_slope.iter().map(|(a, b)| b - a).sum()
    }

    pub fn positive_measure(&self) -> Q {
        self.positive_slope.iter().map(|(a, b)| b - a).sum()
    }
}

#[derive(Clone, Debug)]
pub struct StaircaseState {
    pub stage: u64,
    pub f: PLFunction,
    /// One entry per index in the schedule.
    pub books: Vec<SubintervalBook>,
    /// {F_s(x) : F_s'(x) = 0}.
    pub plateau_values: BTreeSet<Q>,
}

impl StaircaseState {
    pub fn book(&self, n: u64) -> Option<&SubintervalBook> {
        self.books.iter().find(|b| b.n == n)
    }
}

fn ceil_q(x: &Q) -> BigInt {
    x.numer().div_ceil(x.denom())
}

/// Replaces each positive-slope piece of `f` inside I_n with the coarsest
/// staircase within `bound` of it. Returns the new function and the number
/// of stairs.
fn refine(f: &PLFunction, n: u64, bound: &Q) -> Result<(PLFunction, u64)> {
    let iv = i_n(n);
    let mut xs: Vec<(Q, Q)> = f.breakpoints().to_vec();
    for x in [&iv.lo, &iv.hi] {
        if !xs.iter().any(|p| p.0 == *x) {
            let y = f.eval(x)?;
            let at = xs.partition_point(|p| p.0 < *x);
            xs.insert(at, (x.clone(), y));
        }
    }
    let mut out = vec![xs[0].clone()];
    let mut stairs = 0u64;
    for w in xs.windows(2) {
        let ((x0, y0), (x1, y1)) = (&w[0], &w[1]);
        let rise = y1 - y0;
        if *x0 < iv.lo || *x1 > iv.hi || !rise.is_positive() {
            out.push(w[1].clone());
            continue;
        }
        // each stair: riser, plateau, riser of equal widths, off by rise/(6N)
        let count = ceil_q(&(&rise / (qi(6) * bound))).max(BigInt::from(1));
        let c = u64::try_from(&count).map_err(|_| Error::Capacity(format!("{count} stairs on one piece")))?;
        if c > 1 << 24 {
            return Err(Error::Capacity(format!("{c} stairs on one piece")));
        }
        stairs += c;
        let cq = Q::from_integer(count);
        let (dx, dy) = ((x1 - x0) / &cq, &rise / &cq);
        let (third, half) = (&dx / qi(3), &dy / qi(2));
        for k in 0..c {
            let xk = x0 + &dx * qi(k as i64);
            let yk = y0 + &dy * qi(k as i64);
            let mid = &yk + &half;
            out.push((&xk + &third, mid.clone()));
            out.push((&xk + &third * qi(2), mid));
            out.push(if k + 1 == c { (x1.clone(), y1.clone()) } else { (&xk + &dx, &yk + &dy) });
        }
    }
    Ok((PLFunction::new(out)?.simplified(), stairs))
}

fn book(f: &PLFunction, n: u64, stairs: u64) -> SubintervalBook {
    let iv = i_n(n);
    let mut zero = Vec::new();
    let mut pos = Vec::new();
    let mut values = BTreeSet::new();
    for w in f.breakpoints().windows(2) {
        let a = w[0].0.clone().max(iv.lo.clone());
        let b = w[1].0.clone().min(iv.hi.clone());
        if a >= b {
            continue;
        }
        if w[0].1 == w[1].1 {
            values.insert(w[0].1.clone());
            zero.push((a, b));
        } else {
            pos.push((a, b));
        }
    }
    SubintervalBook {
        n,
        interval: iv,
        zero_slope: zero,
        positive_slope: pos,
        plateau_values: values.into_iter().collect(),
        stairs,
    }
}

fn plateau_values(f: &PLFunction) -> BTreeSet<Q> {
    f.breakpoints().windows(2).filter(|w| w[0].1 == w[1].1).map(|w| w[0].1.clone()).collect()
}

/// F_0, …, F_S: F_0 is the identity and F_s refines the scheduled I_n of
/// F_{s−1} with staircases within 2^{−(s−1)} of it.
pub fn staircase_build(schedule: &StaircaseSchedule) -> Result<Vec<StaircaseState>> {
    let idx = schedule.indices();
    let state = |stage: u64, f: PLFunction, stairs: &BTreeMap<u64, u64>| StaircaseState {
        stage,
        books: idx.iter().map(|&n| book(&f, n, stairs.get(&n).copied().unwrap_or(0))).collect(),
        plateau_values: plateau_values(&f),
        f,
    };
    let mut out = vec![state(0, PLFunction::identity(), &BTreeMap::new())];
    for s in 1..=schedule.stages() {
        let bound = pow2_neg((s - 1) as u32);
        let mut f = out.last().unwrap().f.clone();
        let mut stairs = BTreeMap::new();
        for n in schedule.at_stage(s) {
            let (g, c) = refine(&f, n, &bound)?;
            f = g;
            stairs.insert(n, c);
        }
        out.push(state(s, f, &stairs));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LusinRow {
    pub stage: u64,
    pub zero_measure: Q,
    pub plateau_count: usize,
    pub stairs: u64,
}

/// Per stage, the measure of I_n where F_s' = 0 and the number of values
/// F_s takes there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LusinReport {
    pub n: u64,
    pub interval: RationalInterval,
    pub rows: Vec<LusinRow>,
}

pub fn lusin_witness(states: &[StaircaseState], n: u64) -> LusinReport {
    let rows = states
        .iter()
        .map(|st| {
            let b = match st.book(n) {
                Some(b) => b.clone(),
                None => book(&st.f, n, 0),
            };
            LusinRow { stage: st.stage, zero_measure: b.zero_measure(), plateau_count: b.plateau_values.len(), stairs: b.stairs }
        })
        .collect();
    LusinReport { n, interval: i_n(n), rows }
}

/// Per stage: the sup distance to the previous stage, the plateau values,
/// and the bookkeeping of each scheduled I_n, as exact fractions.
pub fn staircase_report(states: &[StaircaseState]) -> Value {
    let mut stages = Vec::new();
    for (i, st) in states.iter().enumerate() {
        let sup = if i == 0 { Value::Null } else { json!(states[i - 1].f.sup_dist(&st.f).to_string()) };
        let books: Vec<Value> = st
            .books
            .iter()
            .map(|b| {
                json!({
                    "n": b.n,
                    "interval": b.interval.to_string(),
                    "zero_slope_measure": b.zero_measure().to_string(),
                    "positive_slope_measure": b.positive_measure().to_string(),
                    "plateau_count": b.plateau_values.len(),
                    "stairs": b.stairs,
                })
            })
            .collect();
        stages.push(json!({
            "stage": st.stage,
            "breakpoints": st.f.len(),
            "sup_dist_from_previous": sup,
            "plateau_values": st.plateau_values.len(),
            "intervals": books,
        }));
    }
    json!({ "stages": stages })
}
