use crate::error::{Error, Result};
use crate::semiring::{Semiring, Weight};

use super::Expr;

const KEYWORDS: [&str; 3] = ["zero", "out", "mu"];

/// Expression parser. By default open expressions are accepted and letters
/// are not checked; [`ExprParser::strict`] and [`ExprParser::alphabet`]
/// tighten both. Unguarded binders are always rejected.
///
/// Over the Boolean semiring the prefix sugar `a.E` (and `a.(E)`) stands for
/// `a.(1 * E)`.
#[derive(Clone, Debug)]
pub struct ExprParser {
    semiring: Semiring,
    alphabet: Option<Vec<String>>,
    strict: bool,
}

/// Parses with default options: open expressions allowed, any letter.
pub fn parse_expr(text: &str, semiring: Semiring) -> Result<Expr> {
    ExprParser::new(semiring).parse(text)
}

impl ExprParser {
    pub fn new(semiring: Semiring) -> Self {
        ExprParser {
            semiring,
            alphabet: None,
            strict: false,
        }
    }

    pub fn alphabet(mut self, letters: &[String]) -> Self {
        self.alphabet = Some(letters.to_vec());
        self
    }

    /// Rejects expressions with free variables.
    pub fn strict(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    pub fn parse(&self, text: &str) -> Result<Expr> {
        let mut cur = Cursor {
            text,
            pos: 0,
            opts: self,
        };
        let e = cur.sum()?;
        cur.skip_ws();
        if cur.pos < text.len() {
            return Err(cur.error("unexpected trailing input"));
        }
        e.check_guarded()?;
        if self.strict {
            if let Some(x) = e.free_vars().into_iter().next() {
                return Err(Error::UnboundVariable(x));
            }
        }
        Ok(e)
    }
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
    opts: &'a ExprParser,
}

impl<'a> Cursor<'a> {
    fn error_at(&self, pos: usize, msg: impl Into<String>) -> Error {
        let before = &self.text[..pos];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().unwrap_or("").chars().count() + 1;
        Error::syntax(line, column, msg)
    }

    fn error(&self, msg: impl Into<String>) -> Error {
        self.error_at(self.pos, msg)
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        let rest = self.rest();
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{c}`")))
        }
    }

    fn ident(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let rest = self.rest();
        let mut chars = rest.char_indices();
        match chars.next() {
            Some((_, c)) if c.is_alphabetic() || c == '_' => {}
            _ => return None,
        }
        let end = chars
            .find(|(_, c)| !(c.is_alphanumeric() || *c == '_' || *c == '\''))
            .map_or(rest.len(), |(i, _)| i);
        self.pos += end;
        Some(&rest[..end])
    }

    /// Raw weight text up to (not including) `stop`.
    fn weight_until(&mut self, stop: char) -> Result<Weight> {
        self.skip_ws();
        let start = self.pos;
        let len = self
            .rest()
            .find(stop)
            .ok_or_else(|| self.error(format!("expected `{stop}` after weight")))?;
        let raw = self.rest()[..len].trim();
        let w = self
            .opts
            .semiring
            .parse_weight(raw)
            .map_err(|e| self.error_at(start, e.to_string()))?;
        self.pos += len;
        Ok(w)
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut e = self.atom()?;
        while self.eat('+') {
            let r = self.atom()?;
            e = Expr::plus(e, r);
        }
        Ok(e)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.sum()?;
                self.expect(')')?;
                return Ok(e);
            }
            None => return Err(self.error("unexpected end of input")),
            _ => {}
        }
        let start = self.pos;
        let Some(id) = self.ident() else {
            return Err(self.error("expected an expression"));
        };
        match id {
            "zero" => Ok(Expr::zero()),
            "out" => {
                self.expect('(')?;
                let w = self.weight_until(')')?;
                self.expect(')')?;
                Ok(Expr::out(w))
            }
            "mu" => {
                let xpos = self.pos;
                let x = self
                    .ident()
                    .ok_or_else(|| self.error("expected a variable after `mu`"))?;
                if KEYWORDS.contains(&x) {
                    return Err(self.error_at(xpos, format!("`{x}` is reserved")));
                }
                self.expect('.')?;
                let body = self.sum()?;
                Ok(Expr::mu(x, body))
            }
            _ if self.peek() == Some('.') => {
                self.pos += 1;
                self.check_letter(id, start)?;
                self.action(id)
            }
            _ => Ok(Expr::var(id)),
        }
    }

    fn check_letter(&self, letter: &str, pos: usize) -> Result<()> {
        match &self.opts.alphabet {
            Some(alpha) if !alpha.iter().any(|a| a == letter) => Err(self.error_at(
                pos,
                format!("letter `{letter}` is not in the alphabet"),
            )),
            _ => Ok(()),
        }
    }

    /// After `letter.`: either `(w * E)` or, over the Booleans, an atom.
    fn action(&mut self, letter: &str) -> Result<Expr> {
        let weighted = self.peek() == Some('(')
            && self.rest()[1..]
                .find(['*', '(', ')'])
                .is_some_and(|i| self.rest().as_bytes()[1 + i] == b'*');
        if weighted {
            self.pos += 1;
            let w = self.weight_until('*')?;
            self.pos += 1;
            let body = self.sum()?;
            self.expect(')')?;
            return Ok(Expr::act(letter, w, body));
        }
        if self.opts.semiring != Semiring::Boolean {
            return Err(self.error(format!("expected `(weight * expr)` after `{letter}.`")));
        }
        let body = self.atom()?;
        Ok(Expr::act(letter, self.opts.semiring.one(), body))
    }
}
