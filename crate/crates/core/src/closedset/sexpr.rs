//! S-expression text for closed sets.
//!
//! ```text
//! empty
//! (point "a")
//! (union S ...)
//! (copies "family" 3 S)          ; count may be ?
//! (tower "p" (S ...) none)
//! (tower "p" (S ...) (const S))
//! (tower "p" (S ...) (periodic S ...))
//! ```
//!
//! Graded tails print as `(graded FIRST STRIDE S ...)` listing the first few
//! blocks; that form is output only.

use std::sync::Arc;

use super::{ClosedSet, Copies, Label, Shape};
use crate::error::{Error, Result};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn write<L: Label>(s: &ClosedSet<L>, depth: usize, out: &mut String) {
    match s {
        ClosedSet::Empty => out.push_str("empty"),
        ClosedSet::Point(l) => out.push_str(&format!("(point {})", quote(&l.to_string()))),
        ClosedSet::Union(v) => {
            out.push_str("(union");
            for m in v {
                out.push(' ');
                write(m, depth, out);
            }
            out.push(')');
        }
        ClosedSet::Copies(c) => {
            let count = c.count.map_or("?".to_string(), |n| n.to_string());
            out.push_str(&format!("(copies {} {count} ", quote(&c.family.to_string())));
            write(&c.member, depth, out);
            out.push(')');
        }
        ClosedSet::Tower(t) => {
            if depth == 0 {
                out.push_str(&format!("(tower {} ...)", quote(&t.limit.to_string())));
                return;
            }
            out.push_str(&format!("(tower {} (", quote(&t.limit.to_string())));
            for (i, c) in t.exceptional.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                write(c, depth - 1, out);
            }
            out.push_str(") ");
            let block = |k: u64, out: &mut String| match t.tail.as_ref().unwrap().block(k) {
                Ok(c) => write(&c, depth - 1, out),
                Err(e) => out.push_str(&format!("(error {})", quote(&e.to_string()))),
            };
            match &t.tail {
                None => out.push_str("none"),
                Some(tl) => {
                    let (head, blocks) = match tl.shape {
                        Shape::Constant => ("(const".to_string(), 1),
                        Shape::Periodic(p) => ("(periodic".to_string(), p),
                        Shape::Graded => (format!("(graded {} {}", tl.first, tl.stride), depth as u64 + 1),
                    };
                    out.push_str(&head);
                    for k in 0..blocks {
                        out.push(' ');
                        block(k, out);
                    }
                    out.push(')');
                }
            }
            out.push(')');
        }
    }
}

/// Prints `s`, expanding towers to nesting depth `depth`.
pub fn to_sexpr<L: Label>(s: &ClosedSet<L>, depth: usize) -> String {
    let mut out = String::new();
    write(s, depth, &mut out);
    out
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open,
    Close,
    Str(String),
    Atom(String),
}

fn lex(text: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let mut it = text.chars().peekable();
    while let Some(&c) = it.peek() {
        match c {
            '(' => {
                it.next();
                out.push(Tok::Open);
            }
            ')' => {
                it.next();
                out.push(Tok::Close);
            }
            ';' => {
                while it.next().is_some_and(|c| c != '\n') {}
            }
            '"' => {
                it.next();
                let mut s = String::new();
                loop {
                    match it.next() {
                        None => return Err(Error::parse(1, "unterminated string")),
                        Some('"') => break,
                        Some('\\') => s.push(it.next().ok_or_else(|| Error::parse(1, "dangling escape"))?),
                        Some(c) => s.push(c),
                    }
                }
                out.push(Tok::Str(s));
            }
            c if c.is_whitespace() => {
                it.next();
            }
            _ => {
                let mut s = String::new();
                while let Some(&c) = it.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == '"' {
                        break;
                    }
                    s.push(c);
                    it.next();
                }
                out.push(Tok::Atom(s));
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn next(&mut self) -> Result<Tok> {
        let t = self.toks.get(self.pos).cloned().ok_or_else(|| Error::parse(1, "unexpected end of input"))?;
        self.pos += 1;
        Ok(t)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn expect_close(&mut self) -> Result<()> {
        match self.next()? {
            Tok::Close => Ok(()),
            t => Err(Error::parse(1, format!("expected ')', found {t:?}"))),
        }
    }

    fn label(&mut self) -> Result<String> {
        match self.next()? {
            Tok::Str(s) | Tok::Atom(s) => Ok(s),
            t => Err(Error::parse(1, format!("expected a label, found {t:?}"))),
        }
    }

    fn list(&mut self) -> Result<Vec<ClosedSet<String>>> {
        let mut v = Vec::new();
        while self.peek() != Some(&Tok::Close) {
            v.push(self.set()?);
        }
        Ok(v)
    }

    fn set(&mut self) -> Result<ClosedSet<String>> {
        match self.next()? {
            Tok::Atom(a) if a == "empty" => Ok(ClosedSet::Empty),
            Tok::Open => {
                let head = match self.next()? {
                    Tok::Atom(a) => a,
                    t => return Err(Error::parse(1, format!("expected a keyword, found {t:?}"))),
                };
                let s = match head.as_str() {
                    "point" => ClosedSet::Point(self.label()?),
                    "union" => ClosedSet::Union(self.list()?),
                    "copies" => {
                        let family = self.label()?;
                        let count = match self.label()?.as_str() {
                            "?" => None,
                            c => Some(c.parse().map_err(|_| Error::parse(1, format!("bad count {c:?}")))?),
                        };
                        ClosedSet::Copies(Arc::new(Copies { family, count, member: self.set()? }))
                    }
                    "tower" => {
                        let limit = self.label()?;
                        if self.next()? != Tok::Open {
                            return Err(Error::parse(1, "expected the exceptional list"));
                        }
                        let exc = self.list()?;
                        self.expect_close()?;
                        match self.next()? {
                            Tok::Atom(a) if a == "none" => ClosedSet::tower(limit, exc, None),
                            Tok::Open => {
                                let kind = self.label()?;
                                let items = self.list()?;
                                self.expect_close()?;
                                match (kind.as_str(), items.len()) {
                                    ("const", 1) => ClosedSet::constant_tower(limit, exc, items.into_iter().next().unwrap()),
                                    ("periodic", n) if n > 0 => ClosedSet::periodic_tower(limit, exc, items),
                                    _ => return Err(Error::parse(1, format!("bad tail ({kind} ...)"))),
                                }
                            }
                            t => return Err(Error::parse(1, format!("expected a tail, found {t:?}"))),
                        }
                    }
                    h => return Err(Error::parse(1, format!("unknown form {h:?}"))),
                };
                self.expect_close()?;
                Ok(s)
            }
            t => Err(Error::parse(1, format!("unexpected {t:?}"))),
        }
    }
}

pub fn parse_sexpr(text: &str) -> Result<ClosedSet<String>> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let s = p.set()?;
    if p.pos != p.toks.len() {
        return Err(Error::parse(1, "trailing input"));
    }
    Ok(s)
}
