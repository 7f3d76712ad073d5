//! Line-oriented scheme text.
//!
//! ```text
//! # comment
//! root Ladder
//! state Fan(p)
//!   when p = 0
//!   otherwise
//!     tail const Fan(p-1)
//! state Ladder
//!   tail graded Fan(n)
//! ```
//!
//! Body lines are `child <k> <term>` and `tail absent | const <term> |
//! periodic <term>; <term>; ... | graded <term>`. A `when` line with no body
//! lines is a leaf case. Terms are `absent`, `leaf`, `Name` or
//! `Name(e, ...)` with `e` one of `c`, `n`, `n+c`, `p`, `p-1`.

use std::fmt;

use super::{Case, ChildMap, ChildTerm, ParamExpr, StateDef, TailRule, TreeScheme};
use crate::error::{Error, Result};

struct RawState {
    name: String,
    params: Vec<String>,
    line: usize,
    // (guard names, body lines); the last entry is the default map
    cases: Vec<(Vec<String>, Vec<(usize, String)>)>,
    otherwise: Vec<(usize, String)>,
    in_default: bool,
}

fn is_ident(s: &str) -> bool {
    let mut c = s.chars();
    matches!(c.next(), Some(x) if x.is_ascii_alphabetic() || x == '_')
        && c.all(|x| x.is_ascii_alphanumeric() || x == '_')
}

fn split_call(s: &str, line: usize) -> Result<(String, Vec<String>)> {
    let s = s.trim();
    match s.find('(') {
        None => {
            if !is_ident(s) {
                return Err(Error::parse(line, format!("bad name {s:?}")));
            }
            Ok((s.to_string(), Vec::new()))
        }
        Some(i) => {
            let name = s[..i].trim();
            let rest = s[i + 1..]
                .strip_suffix(')')
                .ok_or_else(|| Error::parse(line, format!("missing ')' in {s:?}")))?;
            if !is_ident(name) {
                return Err(Error::parse(line, format!("bad name {name:?}")));
            }
            let args = if rest.trim().is_empty() {
                Vec::new()
            } else {
                rest.split(',').map(|a| a.trim().to_string()).collect()
            };
            Ok((name.to_string(), args))
        }
    }
}

struct Resolver<'a> {
    names: Vec<(&'a str, usize)>,
}

impl Resolver<'_> {
    fn expr(&self, e: &str, params: &[String], line: usize) -> Result<ParamExpr> {
        let e: String = e.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::parse(line, format!("bad parameter expression {e:?}"));
        if let Ok(c) = e.parse::<u64>() {
            return Ok(ParamExpr::Const(c));
        }
        if e == "n" {
            return Ok(ParamExpr::Index(0));
        }
        if let Some(c) = e.strip_prefix("n+") {
            return c.parse().map(ParamExpr::Index).map_err(|_| bad());
        }
        let find = |p: &str| params.iter().position(|x| x == p);
        if let Some(p) = e.strip_suffix("-1") {
            return find(p).map(ParamExpr::Pred).ok_or_else(bad);
        }
        find(&e).map(ParamExpr::Param).ok_or_else(bad)
    }

    fn term(&self, t: &str, params: &[String], line: usize) -> Result<ChildTerm> {
        match t.trim() {
            "absent" => return Ok(ChildTerm::Absent),
            "leaf" => return Ok(ChildTerm::Leaf),
            _ => {}
        }
        let (name, args) = split_call(t, line)?;
        let state = self
            .names
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, i)| *i)
            .ok_or_else(|| Error::parse(line, format!("unknown state {name}")))?;
        let args = args
            .iter()
            .map(|a| self.expr(a, params, line))
            .collect::<Result<Vec<_>>>()?;
        Ok(ChildTerm::Ref { state, args })
    }

    fn body(&self, lines: &[(usize, String)], params: &[String]) -> Result<ChildMap> {
        let mut map = ChildMap::default();
        let mut tail_line = None;
        for (line, text) in lines {
            let line = *line;
            let (kw, rest) = text.split_once(char::is_whitespace).unwrap_or((text, ""));
            match kw {
                "child" => {
                    let rest = rest.trim();
                    let (k, t) = rest
                        .split_once(char::is_whitespace)
                        .ok_or_else(|| Error::parse(line, "expected `child <index> <term>`"))?;
                    let k: u64 = k.parse().map_err(|_| Error::parse(line, format!("bad index {k:?}")))?;
                    if map.exceptional.iter().any(|(i, _)| *i == k) {
                        return Err(Error::parse(line, format!("child {k} given twice")));
                    }
                    map.exceptional.push((k, self.term(t, params, line)?));
                }
                "tail" => {
                    if tail_line.is_some() {
                        return Err(Error::parse(line, "second tail rule"));
                    }
                    tail_line = Some(line);
                    let rest = rest.trim();
                    let (kind, t) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
                    map.tail = match kind {
                        "absent" if t.trim().is_empty() => TailRule::Absent,
                        "const" => TailRule::Constant(self.term(t, params, line)?),
                        "graded" => TailRule::Graded(self.term(t, params, line)?),
                        "periodic" => TailRule::Periodic(
                            t.split(';')
                                .map(|x| self.term(x, params, line))
                                .collect::<Result<Vec<_>>>()?,
                        ),
                        _ => return Err(Error::parse(line, format!("bad tail rule {rest:?}"))),
                    };
                }
                _ => return Err(Error::parse(line, format!("unexpected {kw:?}"))),
            }
        }
        map.exceptional.sort_by_key(|(i, _)| *i);
        Ok(map)
    }
}

/// Parses scheme text; validation errors are reported with the offending line.
pub fn parse_scheme(text: &str) -> Result<TreeScheme> {
    let mut root: Option<(usize, String)> = None;
    let mut raw: Vec<RawState> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (kw, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        match kw {
            "root" => {
                if root.is_some() {
                    return Err(Error::parse(line_no, "second root line"));
                }
                root = Some((line_no, rest.to_string()));
            }
            "state" => {
                let (name, params) = split_call(rest, line_no)?;
                if raw.iter().any(|s| s.name == name) {
                    return Err(Error::parse(line_no, format!("state {name} defined twice")));
                }
                for p in &params {
                    if !is_ident(p) || p == "n" {
                        return Err(Error::parse(line_no, format!("bad parameter name {p:?}")));
                    }
                }
                raw.push(RawState {
                    name,
                    params,
                    line: line_no,
                    cases: Vec::new(),
                    otherwise: Vec::new(),
                    in_default: true,
                });
            }
            "when" | "otherwise" | "child" | "tail" => {
                let st = raw
                    .last_mut()
                    .ok_or_else(|| Error::parse(line_no, format!("{kw} outside a state")))?;
                match kw {
                    "when" => {
                        if !st.otherwise.is_empty() && st.in_default {
                            return Err(Error::parse(line_no, "when after default body lines"));
                        }
                        let guards = rest
                            .split(',')
                            .map(|g| {
                                let (p, z) = g
                                    .split_once('=')
                                    .ok_or_else(|| Error::parse(line_no, format!("bad guard {g:?}")))?;
                                if z.trim() != "0" {
                                    return Err(Error::parse(line_no, "guards compare with 0"));
                                }
                                Ok(p.trim().to_string())
                            })
                            .collect::<Result<Vec<_>>>()?;
                        st.cases.push((guards, Vec::new()));
                        st.in_default = false;
                    }
                    "otherwise" => {
                        if !rest.is_empty() {
                            return Err(Error::parse(line_no, "otherwise takes no arguments"));
                        }
                        st.in_default = true;
                    }
                    _ => {
                        let entry = (line_no, line.to_string());
                        if st.in_default {
                            st.otherwise.push(entry);
                        } else {
                            st.cases.last_mut().unwrap().1.push(entry);
                        }
                    }
                }
            }
            _ => return Err(Error::parse(line_no, format!("unknown keyword {kw:?}"))),
        }
    }
    let (root_line, root_text) = root.ok_or_else(|| Error::parse(0, "missing root line"))?;
    let resolver = Resolver {
        names: raw.iter().enumerate().map(|(i, s)| (s.name.as_str(), i)).collect(),
    };
    let mut states = Vec::new();
    for s in &raw {
        let mut cases = Vec::new();
        for (guards, body) in &s.cases {
            let zeros = guards
                .iter()
                .map(|g| {
                    s.params
                        .iter()
                        .position(|p| p == g)
                        .ok_or_else(|| Error::parse(s.line, format!("unknown parameter {g} in guard")))
                })
                .collect::<Result<Vec<_>>>()?;
            cases.push(Case { zeros, body: resolver.body(body, &s.params)? });
        }
        states.push(StateDef {
            name: s.name.clone(),
            params: s.params.clone(),
            cases,
            otherwise: resolver.body(&s.otherwise, &s.params)?,
        });
    }
    let root = resolver.term(&root_text, &[], root_line)?;
    TreeScheme::new(states, root).map_err(|e| match e {
        Error::Invalid(m) => Error::parse(0, m),
        e => e,
    })
}

struct TermFmt<'a>(&'a TreeScheme, &'a ChildTerm, &'a [String]);

impl fmt::Display for TermFmt<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let TermFmt(scheme, t, params) = *self;
        match t {
            ChildTerm::Absent => write!(f, "absent"),
            ChildTerm::Leaf => write!(f, "leaf"),
            ChildTerm::Ref { state, args } => {
                write!(f, "{}", scheme.states[*state].name)?;
                if args.is_empty() {
                    return Ok(());
                }
                let parts: Vec<String> = args
                    .iter()
                    .map(|a| match a {
                        ParamExpr::Const(c) => c.to_string(),
                        ParamExpr::Index(0) => "n".into(),
                        ParamExpr::Index(c) => format!("n+{c}"),
                        ParamExpr::Param(i) => params[*i].clone(),
                        ParamExpr::Pred(i) => format!("{}-1", params[*i]),
                    })
                    .collect();
                write!(f, "({})", parts.join(", "))
            }
        }
    }
}

fn write_body(f: &mut fmt::Formatter<'_>, s: &TreeScheme, m: &ChildMap, params: &[String], indent: &str) -> fmt::Result {
    for (k, t) in &m.exceptional {
        writeln!(f, "{indent}child {k} {}", TermFmt(s, t, params))?;
    }
    match &m.tail {
        TailRule::Absent => Ok(()),
        TailRule::Constant(t) => writeln!(f, "{indent}tail const {}", TermFmt(s, t, params)),
        TailRule::Graded(t) => writeln!(f, "{indent}tail graded {}", TermFmt(s, t, params)),
        TailRule::Periodic(ts) => {
            let parts: Vec<String> = ts.iter().map(|t| TermFmt(s, t, params).to_string()).collect();
            writeln!(f, "{indent}tail periodic {}", parts.join("; "))
        }
    }
}

impl fmt::Display for TreeScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "root {}", TermFmt(self, &self.root, &[]))?;
        for def in &self.states {
            if def.params.is_empty() {
                writeln!(f, "state {}", def.name)?;
            } else {
                writeln!(f, "state {}({})", def.name, def.params.join(", "))?;
            }
            for c in &def.cases {
                let g: Vec<String> = c.zeros.iter().map(|&i| format!("{} = 0", def.params[i])).collect();
                writeln!(f, "  when {}", g.join(", "))?;
                write_body(f, self, &c.body, &def.params, "    ")?;
            }
            if def.cases.is_empty() {
                write_body(f, self, &def.otherwise, &def.params, "  ")?;
            } else {
                writeln!(f, "  otherwise")?;
                write_body(f, self, &def.otherwise, &def.params, "    ")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_multi_parameter() {
        let text = "\
root Omega2
state LadK(k)
  when k = 0
  otherwise
    tail graded Pad(k-1, n)
state Pad(k, m)
  when k = 0, m = 0
  when m = 0
    tail graded Pad(k-1, n)
  otherwise
    tail const Pad(k, m-1)
state Omega2
  child 0 leaf
  child 2 absent
  tail graded LadK(n+1)
";
        let s = parse_scheme(text).unwrap();
        assert_eq!(s.to_string(), text);
        assert_eq!(parse_scheme(&s.to_string()).unwrap(), s);
    }

    #[test]
    fn errors_carry_lines() {
        let e = parse_scheme("root A\nstate A\n  tail const B\n").unwrap_err();
        assert_eq!(e, Error::parse(3, "unknown state B"));
        assert!(matches!(parse_scheme("state A\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_scheme("root A(1, 2)\nstate A(p)\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_scheme("root A\nstate A(p)\n  tail const A(n)\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_scheme("root A\nstate A\n  child 0 leaf\n  child 0 leaf\n"), Err(Error::Parse { line: 4, .. })));
        assert!(matches!(parse_scheme("root leaf\nfrob\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_scheme("root A\nstate A(p)\n  when q = 0\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn comments_and_blank_lines() {
        let s = parse_scheme("# leaf\n\nroot leaf   # the root\n").unwrap();
        assert_eq!(s, TreeScheme::leaf());
    }
}
