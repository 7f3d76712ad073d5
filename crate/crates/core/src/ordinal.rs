//! Ordinals below ω^ω in Cantor normal form.
//!
//! The text form writes `w` for ω: `w^2*3 + w + 4`. A coefficient of one
//! is omitted when printing; the parser accepts it (`w*1`) as well as `ω`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Ordinal {
    // (exponent, coefficient), exponents strictly decreasing, coefficients >= 1
    terms: Vec<(u32, u64)>,
}

impl Ordinal {
    pub fn zero() -> Self {
        Ordinal { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::finite(1)
    }

    pub fn finite(n: u64) -> Self {
        if n == 0 {
            Self::zero()
        } else {
            Ordinal { terms: vec![(0, n)] }
        }
    }

    pub fn omega() -> Self {
        Self::omega_pow(1)
    }

    /// ω^e.
    pub fn omega_pow(e: u32) -> Self {
        Ordinal { terms: vec![(e, 1)] }
    }

    /// ω^e·c.
    pub fn monomial(e: u32, c: u64) -> Self {
        if c == 0 {
            Self::zero()
        } else {
            Ordinal { terms: vec![(e, c)] }
        }
    }

    /// Builds the ordinal sum of the given monomials in order.
    pub fn from_terms(terms: &[(u32, u64)]) -> Self {
        terms
            .iter()
            .fold(Self::zero(), |acc, &(e, c)| acc.add(&Self::monomial(e, c)))
    }

    pub fn terms(&self) -> &[(u32, u64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_successor(&self) -> bool {
        matches!(self.terms.last(), Some((0, _)))
    }

    pub fn is_limit(&self) -> bool {
        !self.is_zero() && !self.is_successor()
    }

    pub fn is_finite(&self) -> bool {
        self.terms.iter().all(|&(e, _)| e == 0)
    }

    pub fn as_finite(&self) -> Option<u64> {
        match self.terms.as_slice() {
            [] => Some(0),
            [(0, c)] => Some(*c),
            _ => None,
        }
    }

    pub fn leading_exponent(&self) -> Option<u32> {
        self.terms.first().map(|t| t.0)
    }

    pub fn coefficient(&self, e: u32) -> u64 {
        self.terms
            .iter()
            .find(|t| t.0 == e)
            .map(|t| t.1)
            .unwrap_or(0)
    }

    /// Ordinal sum; terms of `self` below the leading exponent of `b` vanish.
    pub fn add(&self, b: &Ordinal) -> Ordinal {
        let Some(&(lead, c)) = b.terms.first() else {
            return self.clone();
        };
        let mut terms: Vec<(u32, u64)> =
            self.terms.iter().copied().filter(|t| t.0 >= lead).collect();
        match terms.last_mut() {
            Some(last) if last.0 == lead => last.1 = last.1.checked_add(c).expect("coefficient overflow"),
            _ => terms.push((lead, c)),
        }
        terms.extend_from_slice(&b.terms[1..]);
        Ordinal { terms }
    }

    pub fn succ(&self) -> Ordinal {
        self.add(&Ordinal::one())
    }

    /// Removes one from a successor; `None` for zero and limits.
    pub fn pred(&self) -> Option<Ordinal> {
        let mut terms = self.terms.clone();
        match terms.last_mut() {
            Some((0, c)) => {
                *c -= 1;
                if *c == 0 {
                    terms.pop();
                }
                Some(Ordinal { terms })
            }
            _ => None,
        }
    }
}

impl Ord for Ordinal {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.terms.iter().zip(&other.terms) {
            let o = a.0.cmp(&b.0).then(a.1.cmp(&b.1));
            if o != Ordering::Equal {
                return o;
            }
        }
        self.terms.len().cmp(&other.terms.len())
    }
}

impl PartialOrd for Ordinal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn compare(a: &Ordinal, b: &Ordinal) -> Ordering {
    a.cmp(b)
}

fn fmt_monomial(e: i64, c: &str, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match (e, c) {
        (0, c) => write!(f, "{c}"),
        (1, "1") => write!(f, "w"),
        (1, c) => write!(f, "w*{c}"),
        (e, "1") => write!(f, "w^{e}"),
        (e, c) => write!(f, "w^{e}*{c}"),
    }
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, &(e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            fmt_monomial(e as i64, &c.to_string(), f)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ordinal({self})")
    }
}

fn parse_term(t: &str) -> Result<(u32, u64)> {
    let bad = || Error::parse(1, format!("bad ordinal term {t:?}"));
    let t = t.trim();
    let rest = if let Some(r) = t.strip_prefix('w') {
        r
    } else if let Some(r) = t.strip_prefix('ω') {
        r
    } else {
        return t.parse::<u64>().map(|c| (0, c)).map_err(|_| bad());
    };
    let (exp, coeff) = match rest.split_once('*') {
        Some((a, b)) => (a, Some(b)),
        None => (rest, None),
    };
    let e = match exp.trim() {
        "" => 1,
        x => x
            .strip_prefix('^')
            .ok_or_else(bad)?
            .trim()
            .parse::<u32>()
            .map_err(|_| bad())?,
    };
    let c = match coeff {
        None => 1,
        Some(c) => c.trim().parse::<u64>().map_err(|_| bad())?,
    };
    Ok((e, c))
}

impl FromStr for Ordinal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().is_empty() {
            return Err(Error::parse(1, "empty ordinal"));
        }
        let terms = s.split('+').map(parse_term).collect::<Result<Vec<_>>>()?;
        Ok(Ordinal::from_terms(&terms))
    }
}

/// A coefficient-wise affine family `n ↦ Σ ω^e·(base_e + slope_e·n)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffineOrdinal {
    // exponents strictly decreasing
    pub terms: Vec<AffineTerm>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AffineTerm {
    pub exp: u32,
    pub base: i128,
    pub slope: i128,
}

impl AffineOrdinal {
    pub fn constant(v: &Ordinal) -> Self {
        AffineOrdinal {
            terms: v
                .terms
                .iter()
                .map(|&(exp, c)| AffineTerm { exp, base: c as i128, slope: 0 })
                .collect(),
        }
    }

    /// The affine family through the values at `n` and `n + 1`.
    pub fn through(n: u64, a: &Ordinal, b: &Ordinal) -> Self {
        let mut exps: Vec<u32> = a.terms.iter().chain(&b.terms).map(|t| t.0).collect();
        exps.sort_unstable_by(|x, y| y.cmp(x));
        exps.dedup();
        let terms = exps
            .into_iter()
            .map(|exp| {
                let ca = a.coefficient(exp) as i128;
                let cb = b.coefficient(exp) as i128;
                let slope = cb - ca;
                AffineTerm { exp, base: ca - slope * n as i128, slope }
            })
            .collect();
        AffineOrdinal { terms }
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|t| t.slope == 0)
    }

    /// Value at `n`, or `None` when some coefficient would be negative.
    pub fn at(&self, n: u64) -> Option<Ordinal> {
        let mut terms = Vec::new();
        for t in &self.terms {
            let c = t.base + t.slope * n as i128;
            if c < 0 {
                return None;
            }
            if c > 0 {
                terms.push((t.exp, u64::try_from(c).ok()?));
            }
        }
        Some(Ordinal { terms })
    }

    /// Supremum over all large indices.
    pub fn sup(&self) -> Result<Ordinal> {
        if self.is_constant() {
            return self
                .at(0)
                .ok_or_else(|| Error::Tail("negative constant coefficient".into()));
        }
        let top = self.terms.iter().position(|t| t.slope != 0).unwrap();
        if self.terms[top].slope < 0 {
            return Err(Error::Tail(format!("decreasing template {self}")));
        }
        if self.terms[top + 1..].iter().any(|t| t.slope < 0) {
            return Err(Error::Tail(format!("template {self} eventually negative")));
        }
        let mut fixed = Vec::new();
        for t in &self.terms[..top] {
            if t.base > 0 {
                fixed.push((t.exp, t.base as u64));
            }
        }
        let head = Ordinal::from_terms(&fixed);
        Ok(head.add(&Ordinal::omega_pow(self.terms[top].exp + 1)))
    }

    /// limsup over the indices; equal to the sup for growing families.
    pub fn limsup(&self) -> Result<Ordinal> {
        self.sup()
    }
}

impl fmt::Display for AffineOrdinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for t in &self.terms {
            if t.base == 0 && t.slope == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let c = match (t.base, t.slope) {
                (b, 0) => b.to_string(),
                (0, 1) => "n".to_string(),
                (0, s) => format!("{s}n"),
                (b, 1) => format!("(n{b:+})"),
                (b, s) => format!("({s}n{b:+})"),
            };
            fmt_monomial(t.exp as i64, &c, f)?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Sample window used to summarise an infinite tail from finitely many values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SampleWindow {
    /// Indices skipped before fitting starts.
    pub lead: u64,
    /// Indices on which the fitted template must hold.
    pub span: u64,
}

impl Default for SampleWindow {
    fn default() -> Self {
        SampleWindow { lead: 4, span: 4 }
    }
}

/// Summary of a sequence indexed from `start`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TailSummary {
    pub sup: Ordinal,
    pub limsup: Ordinal,
    pub template: AffineOrdinal,
}

/// Samples `f` on `start .. start + lead + span`, fits an affine template on the
/// last two values and checks it on the span. A failed fit is retried with
/// the window moved further out.
pub fn summarize_tail<F>(start: u64, w: SampleWindow, mut f: F) -> Result<TailSummary>
where
    F: FnMut(u64) -> Result<Ordinal>,
{
    let mut lead = w.lead;
    let mut last = None;
    for _ in 0..3 {
        match summarize_once(start, SampleWindow { lead, span: w.span }, &mut f) {
            Err(e @ Error::Tail(_)) => last = Some(e),
            r => return r,
        }
        lead = 2 * lead + w.span;
    }
    Err(last.unwrap())
}

fn summarize_once<F>(start: u64, w: SampleWindow, f: &mut F) -> Result<TailSummary>
where
    F: FnMut(u64) -> Result<Ordinal>,
{
    let span = w.span.max(2);
    let end = start + w.lead + span;
    let mut values = Vec::with_capacity((end - start) as usize);
    for n in start..end {
        values.push(f(n)?);
    }
    let fit_from = (w.lead) as usize;
    let lead_exps: Vec<Option<u32>> = values[fit_from..].iter().map(|v| v.leading_exponent()).collect();
    if lead_exps.windows(2).all(|p| p[0] < p[1]) {
        return Err(Error::Capacity(format!(
            "child ranks raise their leading exponent at every index from {}; the rank reaches w^w",
            start + w.lead
        )));
    }
    let k = values.len();
    let template = AffineOrdinal::through(end - 2, &values[k - 2], &values[k - 1]);
    for (i, v) in values.iter().enumerate().skip(fit_from) {
        let n = start + i as u64;
        if template.at(n).as_ref() != Some(v) {
            return Err(Error::Tail(format!(
                "template {template} disagrees with value {v} at index {n}"
            )));
        }
    }
    let tsup = template.sup()?;
    let limsup = template.limsup()?;
    let sup = values.iter().cloned().fold(tsup, std::cmp::max);
    Ok(TailSummary { sup, limsup, template })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SeqTail {
    Constant(Ordinal),
    Periodic(Vec<Ordinal>),
    Affine(AffineOrdinal),
}

/// Values at the initial indices, then a rule for every later index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrdinalSeqDescriptor {
    pub exceptional: Vec<Ordinal>,
    pub tail: SeqTail,
}

impl OrdinalSeqDescriptor {
    /// `(sup, limsup)` for constant and periodic tails.
    pub fn sup_limsup(&self) -> Result<(Ordinal, Ordinal)> {
        let limsup = match &self.tail {
            SeqTail::Constant(v) => v.clone(),
            SeqTail::Periodic(vs) => vs
                .iter()
                .max()
                .cloned()
                .ok_or_else(|| Error::Invalid("empty periodic tail".into()))?,
            SeqTail::Affine(_) => {
                return Err(Error::Invalid(
                    "affine tail needs symbolic evaluation".into(),
                ))
            }
        };
        let sup = self.exceptional.iter().cloned().fold(limsup.clone(), std::cmp::max);
        Ok((sup, limsup))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(s: &str) -> Ordinal {
        s.parse().unwrap()
    }

    #[test]
    fn compare_examples() {
        assert_eq!(compare(&o("0"), &o("0")), Ordering::Equal);
        assert_eq!(compare(&o("w"), &o("3")), Ordering::Greater);
        assert_eq!(compare(&o("w*2 + 1"), &o("w*2 + 5")), Ordering::Less);
        assert!(o("w^2") > o("w*100 + 7"));
    }

    #[test]
    fn add_examples() {
        assert_eq!(Ordinal::zero().add(&o("w + 3")), o("w + 3"));
        assert_eq!(o("3").add(&o("w")), o("w"));
        assert_eq!(o("w + 1").add(&o("1")), o("w + 2"));
        assert_eq!(o("w^2 + w*3 + 1").add(&o("w*2 + 5")), o("w^2 + w*5 + 5"));
    }

    #[test]
    fn printing() {
        assert_eq!(o("w*1 + 1").to_string(), "w + 1");
        assert_eq!(o("w^2*3 + w*1 + 4").to_string(), "w^2*3 + w + 4");
        assert_eq!(o("ω^2").to_string(), "w^2");
        assert_eq!(o("3 + w").to_string(), "w");
        assert!("w^".parse::<Ordinal>().is_err());
        assert!("".parse::<Ordinal>().is_err());
        assert!("w*x".parse::<Ordinal>().is_err());
    }

    #[test]
    fn successor_and_pred() {
        assert!(o("w + 1").is_successor());
        assert!(o("w").is_limit());
        assert_eq!(o("w*2 + 1").pred(), Some(o("w*2")));
        assert_eq!(o("w").pred(), None);
    }

    #[test]
    fn seq_examples() {
        let s = OrdinalSeqDescriptor { exceptional: vec![o("3")], tail: SeqTail::Constant(o("1")) };
        assert_eq!(s.sup_limsup().unwrap(), (o("3"), o("1")));
        let s = OrdinalSeqDescriptor {
            exceptional: vec![],
            tail: SeqTail::Periodic(vec![o("1"), o("2")]),
        };
        assert_eq!(s.sup_limsup().unwrap(), (o("2"), o("2")));
        let s = OrdinalSeqDescriptor { exceptional: vec![o("w")], tail: SeqTail::Constant(o("0")) };
        assert_eq!(s.sup_limsup().unwrap(), (o("w"), o("0")));
        let s = OrdinalSeqDescriptor {
            exceptional: vec![],
            tail: SeqTail::Affine(AffineOrdinal::constant(&o("1"))),
        };
        assert!(s.sup_limsup().is_err());
    }

    #[test]
    fn affine_sup() {
        // n + 1 grows to w
        let t = AffineOrdinal::through(3, &o("4"), &o("5"));
        assert_eq!(t.sup().unwrap(), o("w"));
        // w*n + 1 grows to w^2
        let t = AffineOrdinal::through(2, &o("w*2 + 1"), &o("w*3 + 1"));
        assert_eq!(t.sup().unwrap(), o("w^2"));
        assert_eq!(t.at(7).unwrap(), o("w*7 + 1"));
        // w^2 + n grows to w^2 + w
        let t = AffineOrdinal::through(5, &o("w^2 + 5"), &o("w^2 + 6"));
        assert_eq!(t.sup().unwrap(), o("w^2 + w"));
        assert_eq!(t.to_string(), "w^2 + n");
        let t = AffineOrdinal::through(5, &o("9"), &o("8"));
        assert!(t.sup().is_err());
    }

    #[test]
    fn tail_summary() {
        let s = summarize_tail(0, SampleWindow::default(), |n| Ok(Ordinal::finite(n + 1))).unwrap();
        assert_eq!((s.sup, s.limsup), (o("w"), o("w")));
        let s = summarize_tail(0, SampleWindow::default(), |n| {
            Ok(if n == 0 { o("w") } else { o("2") })
        })
        .unwrap();
        assert_eq!((s.sup, s.limsup), (o("w"), o("2")));
        let e = summarize_tail(0, SampleWindow::default(), |n| Ok(Ordinal::omega_pow(n as u32)));
        assert!(matches!(e, Err(Error::Capacity(_))));
        let e = summarize_tail(0, SampleWindow::default(), |n| Ok(Ordinal::finite(n * n)));
        assert!(matches!(e, Err(Error::Tail(_))));
    }
}
