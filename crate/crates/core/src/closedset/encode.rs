//! The coding T ↦ S_T: the node reached through child indices n_0, ..., n_k
//! owns the strings 0^{2n_0+i_0} 1 ... 0^{2n_k+i_k} 1 0^m with i_j ∈ {0, 1}.

use std::fmt;
use std::sync::Arc;

use super::{ClosedSet, IndexedTail, Shape, Tower};
use crate::error::Result;
use crate::treescheme::{analyze, Foundedness, Node, TailRule, TreeScheme};
use crate::Error;

fn hcs_node(scheme: &Arc<TreeScheme>, node: &Node, prefix: &str, min_m: u64, mult: u64) -> ClosedSet<String> {
    let limit = format!("{prefix}0^w");
    let key = Some(Arc::<str>::from(format!("hcs{mult}:{}:{min_m}", scheme.node_name(node))));
    let Some(map) = scheme.child_map(node) else {
        return ClosedSet::Tower(Arc::new(Tower { limit, key, exceptional: vec![], tail: None }));
    };
    let child_set = {
        let scheme = scheme.clone();
        let node = node.clone();
        let prefix = prefix.to_string();
        move |m: u64| -> ClosedSet<String> {
            if m < min_m {
                return ClosedSet::Empty;
            }
            match scheme.child(&node, m / mult) {
                None => ClosedSet::Empty,
                Some(c) => hcs_node(&scheme, &c, &format!("{prefix}{}1", "0".repeat(m as usize)), 0, mult),
            }
        }
    };
    let first = mult * map.tail_start();
    let shape = match &map.tail {
        TailRule::Absent => None,
        TailRule::Constant(_) => Some(Shape::Constant),
        TailRule::Periodic(ts) => Some(Shape::Periodic(ts.len() as u64)),
        TailRule::Graded(_) => Some(Shape::Graded),
    };
    // children below min_m are cut away; keep the tail homogeneous by
    // starting it at a block boundary past the cut
    let first = if min_m > first { first + mult * (min_m - first).div_ceil(mult) } else { first };
    let exceptional: Vec<ClosedSet<String>> = match shape {
        Some(_) => (0..first).map(&child_set).collect(),
        None => (0..first.max(min_m)).map(&child_set).collect(),
    };
    let tail = shape.map(|shape| IndexedTail {
        first,
        stride: mult,
        shape,
        gen: Arc::new(move |m| Ok(child_set(m))),
    });
    ClosedSet::Tower(Arc::new(Tower { limit, key, exceptional, tail }))
}

fn wellfounded(t: &TreeScheme) -> Result<()> {
    match analyze(t)? {
        Foundedness::WellFounded => Ok(()),
        Foundedness::IllFounded(p) => Err(Error::IllFounded(p.to_string())),
    }
}

/// The symbolic closed set [S_T]; child `m` of a tower is the copy for tree
/// child `m / 2` with `i = m % 2`.
pub fn hcs_of_tree(t: &TreeScheme) -> Result<ClosedSet<String>> {
    wellfounded(t)?;
    let Some(root) = t.root_node() else { return Ok(ClosedSet::Empty) };
    Ok(hcs_node(&Arc::new(t.clone()), &root, "", 0, 2))
}

/// The coding without the doubled children: child `m` is tree child `m`.
pub fn hcs_undoubled(t: &TreeScheme) -> Result<ClosedSet<String>> {
    wellfounded(t)?;
    let Some(root) = t.root_node() else { return Ok(ClosedSet::Empty) };
    Ok(hcs_node(&Arc::new(t.clone()), &root, "", 0, 1))
}

/// [S_T] ∩ [σ] for a binary string σ.
pub fn cylinder(t: &TreeScheme, sigma: &str) -> Result<ClosedSet<String>> {
    wellfounded(t)?;
    let Some(mut node) = t.root_node() else { return Ok(ClosedSet::Empty) };
    let mut zeros = 0u64;
    let mut prefix_len = 0usize;
    for (i, c) in sigma.chars().enumerate() {
        match c {
            '0' => zeros += 1,
            '1' => {
                match t.child(&node, zeros / 2) {
                    None => return Ok(ClosedSet::Empty),
                    Some(n) => node = n,
                }
                zeros = 0;
                prefix_len = i + 1;
            }
            _ => return Err(Error::Invalid(format!("not a binary string: {sigma:?}"))),
        }
    }
    Ok(hcs_node(&Arc::new(t.clone()), &node, &sigma[..prefix_len], zeros, 2))
}

/// Binary strings of length at most `len` extending to paths of [S_T].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryTreeView {
    pub len: usize,
    strings: Vec<String>,
}

impl BinaryTreeView {
    pub fn strings(&self) -> &[String] {
        &self.strings
    }

    pub fn contains(&self, s: &str) -> bool {
        self.strings.binary_search_by(|x| x.len().cmp(&s.len()).then_with(|| x.as_str().cmp(s))).is_ok()
    }

    pub fn of_length(&self, n: usize) -> impl Iterator<Item = &String> {
        self.strings.iter().filter(move |s| s.len() == n)
    }
}

impl fmt::Display for BinaryTreeView {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.strings {
            writeln!(f, "{}", if s.is_empty() { "ε" } else { s })?;
        }
        Ok(())
    }
}

fn unfold(t: &TreeScheme, node: &Node, prefix: &mut String, len: usize, out: &mut Vec<String>) {
    let base = prefix.len();
    for j in 0..=(len - base) {
        out.push(format!("{prefix}{}", "0".repeat(j)));
        if base + j < len {
            if let Some(c) = t.child(node, (j / 2) as u64) {
                prefix.push_str(&"0".repeat(j));
                prefix.push('1');
                unfold(t, &c, prefix, len, out);
                prefix.truncate(base);
            }
        }
    }
}

/// Every string of length at most `len` that is a prefix of a path in S_T.
pub fn binary_truncation(t: &TreeScheme, len: usize) -> BinaryTreeView {
    let mut out = Vec::new();
    if let Some(root) = t.root_node() {
        unfold(t, &root, &mut String::new(), len, &mut out);
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out.dedup();
    BinaryTreeView { len, strings: out }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closedset::{cb_rank, cb_rank_literal};
    use crate::ordinal::{Ordinal, SampleWindow};
    use crate::treescheme::parse_scheme;

    const FAN: &str = "state Fan(p)\n  when p = 0\n  otherwise\n    tail const Fan(p-1)\n";

    fn fan(k: u64) -> TreeScheme {
        parse_scheme(&format!("root Fan({k})\n{FAN}")).unwrap()
    }

    #[test]
    fn hcs_examples() {
        assert!(hcs_of_tree(&TreeScheme::empty()).unwrap().is_empty());
        assert_eq!(cb_rank(&hcs_of_tree(&TreeScheme::leaf()).unwrap()).unwrap(), Ordinal::one());
        assert_eq!(cb_rank(&hcs_of_tree(&fan(1)).unwrap()).unwrap(), Ordinal::finite(2));
        for k in 0..4 {
            let s = hcs_of_tree(&fan(k)).unwrap();
            assert_eq!(cb_rank_literal(&s, 8, SampleWindow::default()).unwrap(), Some(k + 1));
        }
        let lp = parse_scheme("root A\nstate A\n  child 0 A\n").unwrap();
        assert!(matches!(hcs_of_tree(&lp), Err(Error::IllFounded(_))));
    }

    #[test]
    fn truncation_examples() {
        let v = binary_truncation(&TreeScheme::leaf(), 3);
        assert_eq!(v.strings(), ["", "0", "00", "000"]);
        let v = binary_truncation(&fan(1), 2);
        assert_eq!(v.strings(), ["", "0", "1", "00", "01", "10"]);
        assert!(binary_truncation(&TreeScheme::empty(), 5).strings().is_empty());
    }

    #[test]
    fn cylinders() {
        let t = fan(2);
        // past all children the cylinder is only the spine point
        let c = cylinder(&t, "1").unwrap();
        assert_eq!(cb_rank(&c).unwrap(), Ordinal::finite(2));
        let c = cylinder(&t, "11").unwrap();
        assert_eq!(cb_rank(&c).unwrap(), Ordinal::one());
        assert!(cylinder(&t, "111").unwrap().is_empty());
        let c = cylinder(&t, "000").unwrap();
        assert_eq!(cb_rank(&c).unwrap(), Ordinal::finite(3));
    }

    #[test]
    fn display_one_per_line() {
        let v = binary_truncation(&TreeScheme::leaf(), 1);
        assert_eq!(v.to_string(), "ε\n0\n");
    }
}
