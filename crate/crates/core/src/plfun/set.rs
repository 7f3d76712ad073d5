use num_traits::Signed;

use crate::rational::{qi, Q};

/// A closed subset of [0,1]: the unit interval minus finitely many open
/// gaps, together with finitely many extra points that may sit inside gaps.
///
/// Stored canonically as its hull and the gaps strictly inside the hull.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ClosedRationalSet {
    hull: Option<(Q, Q)>,
    gaps: Vec<(Q, Q)>,
}

impl ClosedRationalSet {
    /// `[0,1] \ ∪ gaps`, plus `points`. Gap endpoints may lie outside [0,1],
    /// which is how 0 or 1 is removed.
    pub fn new(mut gaps: Vec<(Q, Q)>, points: Vec<Q>) -> Self {
        gaps.retain(|(a, b)| a < b);
        gaps.sort();
        let mut merged: Vec<(Q, Q)> = Vec::new();
        for (a, b) in gaps {
            match merged.last_mut() {
                // (a,b) and (b,c) leave b in the set
                Some(last) if a < last.1 => {
                    if b > last.1 {
                        last.1 = b;
                    }
                }
                _ => merged.push((a, b)),
            }
        }
        // split gaps at the extra points
        let mut pts: Vec<Q> = points.into_iter().filter(|p| !p.is_negative() && *p <= qi(1)).collect();
        pts.sort();
        pts.dedup();
        let mut split = Vec::new();
        for (mut a, b) in merged {
            for p in &pts {
                if *p > a && *p < b {
                    split.push((a.clone(), p.clone()));
                    a = p.clone();
                }
            }
            split.push((a, b));
        }
        // pieces of [0,1] left over
        let mut pieces: Vec<(Q, Q)> = Vec::new();
        let mut cursor = qi(0);
        for (a, b) in split {
            if a >= cursor && cursor <= qi(1) {
                pieces.push((cursor.clone(), a.min(qi(1))));
            }
            cursor = cursor.max(b);
        }
        if cursor <= qi(1) {
            pieces.push((cursor, qi(1)));
        }
        let hull = match (pieces.first(), pieces.last()) {
            (Some(f), Some(l)) => Some((f.0.clone(), l.1.clone())),
            _ => None,
        };
        let gaps = pieces.windows(2).filter(|w| w[0].1 < w[1].0).map(|w| (w[0].1.clone(), w[1].0.clone())).collect();
        ClosedRationalSet { hull, gaps }
    }

    pub fn full() -> Self {
        ClosedRationalSet { hull: Some((qi(0), qi(1))), gaps: vec![] }
    }

    pub fn empty() -> Self {
        ClosedRationalSet { hull: None, gaps: vec![] }
    }

    /// A finite set of points of [0,1].
    pub fn finite(mut points: Vec<Q>) -> Self {
        points.retain(|p| !p.is_negative() && *p <= qi(1));
        points.sort();
        points.dedup();
        let hull = match (points.first(), points.last()) {
            (Some(a), Some(b)) => Some((a.clone(), b.clone())),
            _ => None,
        };
        let gaps = points.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect();
        ClosedRationalSet { hull, gaps }
    }

    pub fn is_empty(&self) -> bool {
        self.hull.is_none()
    }

    /// Least and greatest element.
    pub fn hull(&self) -> Option<(&Q, &Q)> {
        self.hull.as_ref().map(|(a, b)| (a, b))
    }

    /// The bounded complementary intervals (c, d), with c and d in the set.
    pub fn gaps(&self) -> &[(Q, Q)] {
        &self.gaps
    }

    pub fn contains(&self, x: &Q) -> bool {
        match &self.hull {
            None => false,
            Some((a, b)) => x >= a && x <= b && !self.gaps.iter().any(|(c, d)| x > c && x < d),
        }
    }

    /// Lebesgue measure.
    pub fn measure(&self) -> Q {
        match &self.hull {
            None => qi(0),
            Some((a, b)) => b - a - self.gaps.iter().map(|(c, d)| d - c).sum::<Q>(),
        }
    }
}
