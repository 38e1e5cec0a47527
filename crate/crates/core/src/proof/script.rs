//! The line-based derivation script format:
//!
//! ```text
//! level lang                  # or bisim; defaults to lang
//! semiring integers
//! alphabet a b c d            # optional, used by the semantic audit
//! def E := mu x. a.(1 * x) + out(1)
//! start b.(2 * $E)
//! step 0 FP
//! step 0 D1 R2L => EXPR       # optional direction and explicit target
//! step root ac => EXPR        # regrouping and reordering of a sum
//! ufix y TEMPLATE at 0 begin  # unique fixpoint; `R2L` before `begin` folds back
//!   step ...                  # the premise, from the subterm to TEMPLATE[subterm/y]
//! end
//! end EXPR
//! ```
//!
//! A reversed `ufix` block starts with `target EXPR`, the expression that
//! replaces the fixpoint. `$NAME` expands to the parenthesized text of an
//! earlier `def`.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::expr::{Expr, ExprParser};
use crate::semiring::Semiring;

use super::{parse_path, AxiomId, Derivation, Direction, Level, Step};

struct Line<'a> {
    no: usize,
    text: &'a str,
}

struct Parser<'a> {
    lines: Vec<Line<'a>>,
    pos: usize,
    defs: HashMap<String, String>,
    semiring: Option<Semiring>,
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::syntax(line, 1, message)
}

fn split_keyword(text: &str) -> (&str, &str) {
    match text.find(char::is_whitespace) {
        Some(i) => (&text[..i], text[i..].trim()),
        None => (text, ""),
    }
}

impl<'a> Parser<'a> {
    fn expand(&self, line: usize, text: &str) -> Result<String> {
        let mut out = String::with_capacity(text.len());
        let mut rest = text;
        while let Some(i) = rest.find('$') {
            out.push_str(&rest[..i]);
            let after = &rest[i + 1..];
            let len = after
                .find(|c: char| !(c.is_alphanumeric() || c == '_' || c == '\''))
                .unwrap_or(after.len());
            let name = &after[..len];
            let body = self
                .defs
                .get(name)
                .ok_or_else(|| err(line, format!("undefined name `${name}`")))?;
            out.push('(');
            out.push_str(body);
            out.push(')');
            rest = &after[len..];
        }
        out.push_str(rest);
        Ok(out)
    }

    fn semiring(&self, line: usize) -> Result<Semiring> {
        self.semiring
            .ok_or_else(|| err(line, "`semiring` must come before the first expression"))
    }

    fn expr(&self, line: usize, text: &str) -> Result<Expr> {
        let s = self.semiring(line)?;
        let expanded = self.expand(line, text)?;
        ExprParser::new(s).parse(&expanded).map_err(|e| match e {
            Error::Syntax { column, message, .. } => Error::Syntax {
                line,
                column,
                message: format!("{message} in `{expanded}`"),
            },
            other => other,
        })
    }

    fn next(&mut self) -> Option<(usize, &'a str)> {
        let l = self.lines.get(self.pos)?;
        self.pos += 1;
        Some((l.no, l.text))
    }

    fn path(line: usize, text: &str) -> Result<Vec<usize>> {
        parse_path(text).ok_or_else(|| err(line, format!("bad path `{text}` (expected `root` or e.g. `0.1`)")))
    }

    fn step(&self, line: usize, rest: &str) -> Result<Step> {
        let (head, target) = match rest.split_once("=>") {
            Some((h, t)) => (h.trim(), Some(self.expr(line, t.trim())?)),
            None => (rest, None),
        };
        let words: Vec<&str> = head.split_whitespace().collect();
        let (path, name, dir) = match words.as_slice() {
            [p, a] => (*p, *a, Direction::L2R),
            [p, a, d] => (
                *p,
                *a,
                match *d {
                    "L2R" => Direction::L2R,
                    "R2L" => Direction::R2L,
                    _ => return Err(err(line, format!("bad direction `{d}` (expected L2R or R2L)"))),
                },
            ),
            _ => return Err(err(line, "expected `step PATH AXIOM [L2R|R2L] [=> EXPR]`")),
        };
        let path = Self::path(line, path)?;
        if name == "ac" {
            let target = target.ok_or_else(|| err(line, "`ac` needs a target (`=> EXPR`)"))?;
            return Ok(Step::Ac { path, target });
        }
        let axiom: AxiomId = name.parse().map_err(|_| err(line, format!("unknown axiom `{name}`")))?;
        Ok(Step::Rewrite {
            path,
            axiom,
            dir,
            target,
        })
    }

    fn ufix(&mut self, line: usize, rest: &str) -> Result<Step> {
        let mut words: Vec<&str> = rest.split_whitespace().collect();
        if words.last() != Some(&"begin") {
            return Err(err(line, "`ufix` header must end with `begin`"));
        }
        words.pop();
        let reverse = words.last() == Some(&"R2L");
        if reverse {
            words.pop();
        }
        let mut path = Vec::new();
        if words.len() >= 2 && words[words.len() - 2] == "at" {
            path = Self::path(line, words[words.len() - 1])?;
            words.truncate(words.len() - 2);
        }
        let (var, template) = match words.split_first() {
            Some((v, t)) if !t.is_empty() => (v.to_string(), self.expr(line, &t.join(" "))?),
            _ => return Err(err(line, "expected `ufix VAR TEMPLATE [at PATH] [R2L] begin`")),
        };
        let reverse_target = if reverse {
            match self.next() {
                Some((no, text)) => match split_keyword(text) {
                    ("target", t) if !t.is_empty() => Some(self.expr(no, t)?),
                    _ => return Err(err(no, "a reversed `ufix` block starts with `target EXPR`")),
                },
                None => return Err(err(line, "unterminated `ufix` block")),
            }
        } else {
            None
        };
        let premise = self.block(Some(line))?;
        Ok(Step::UniqueFix {
            var,
            template,
            path,
            reverse_target,
            premise,
        })
    }

    /// Steps up to a bare `end` (inside a `ufix`) or up to `end EXPR` at
    /// the top level, which is left unconsumed.
    fn block(&mut self, opened: Option<usize>) -> Result<Vec<Step>> {
        let mut steps = Vec::new();
        loop {
            let Some((no, text)) = self.next() else {
                return match opened {
                    Some(l) => Err(err(l, "unterminated `ufix` block")),
                    None => Err(err(self.lines.last().map_or(1, |l| l.no), "missing `end EXPR`")),
                };
            };
            match split_keyword(text) {
                ("step", rest) => steps.push(self.step(no, rest)?),
                ("ufix", rest) => steps.push(self.ufix(no, rest)?),
                ("end", "") if opened.is_some() => return Ok(steps),
                ("end", _) if opened.is_none() => {
                    self.pos -= 1;
                    return Ok(steps);
                }
                ("end", _) => return Err(err(no, "a `ufix` block closes with a bare `end`")),
                (kw, _) => return Err(err(no, format!("unexpected `{kw}` in derivation body"))),
            }
        }
    }
}

/// Parses a derivation script.
pub fn parse_script(text: &str) -> Result<Derivation> {
    let lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| Line {
            no: i + 1,
            text: l.split_once('#').map_or(l, |(code, _)| code).trim(),
        })
        .filter(|l| !l.text.is_empty())
        .collect();
    let mut p = Parser {
        lines,
        pos: 0,
        defs: HashMap::new(),
        semiring: None,
    };
    let mut level = Level::Lang;
    let mut alphabet = None;
    let start = loop {
        let Some((no, text)) = p.next() else {
            return Err(err(1, "missing `start EXPR`"));
        };
        match split_keyword(text) {
            ("level", l) => level = l.parse().map_err(|_| err(no, format!("unknown level `{l}`")))?,
            ("semiring", s) => p.semiring = Some(s.parse().map_err(|e: Error| err(no, e.to_string()))?),
            ("alphabet", a) => alphabet = Some(a.split_whitespace().map(String::from).collect()),
            ("def", rest) => {
                let (name, body) = rest
                    .split_once(":=")
                    .ok_or_else(|| err(no, "expected `def NAME := EXPR`"))?;
                let name = name.trim();
                let body = p.expand(no, body.trim())?;
                p.expr(no, &body)?;
                p.defs.insert(name.to_string(), body);
            }
            ("start", e) => break p.expr(no, e)?,
            (kw, _) => return Err(err(no, format!("unexpected `{kw}` before `start`"))),
        }
    };
    let steps = p.block(None)?;
    let (no, text) = p.next().expect("block stops at `end`");
    let end = p.expr(no, split_keyword(text).1)?;
    if let Some((no, _)) = p.next() {
        return Err(err(no, "text after the final `end`"));
    }
    Ok(Derivation {
        level,
        semiring: p.semiring(no)?,
        alphabet,
        start,
        steps,
        end,
    })
}
