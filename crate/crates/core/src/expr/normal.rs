use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::rc::Rc;

use crate::lincomb::LinComb;
use crate::semiring::{Semiring, Weight};

use super::subst::Canon;
use super::{Expr, Node};

/// An expression in canonical form together with its de Bruijn key.
///
/// The form is a left-associated sum of summands, each of which is `out(r)`
/// (at most one), `a.(r * B)`, a binder or a variable. Action bodies are
/// single summands: `out(t)` under weight 1, an action under weight 1, a
/// binder or a variable. Summands are sorted by kind, then letter, then key,
/// and at most one action exists per letter and body. Equality, ordering and
/// hashing go through the key, so α-equivalent forms are identified.
#[derive(Clone, Debug)]
pub struct NormalExpr {
    expr: Expr,
    key: Expr,
}

impl NormalExpr {
    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn into_expr(self) -> Expr {
        self.expr
    }

    /// The de Bruijn form, see [`Expr::canonical_key`].
    pub fn key(&self) -> &Expr {
        &self.key
    }

    pub fn is_zero(&self) -> bool {
        self.expr.is_zero()
    }

    /// The top-level summands.
    pub fn summands(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        split_sum(&self.expr, &mut out);
        out
    }

    /// Views the form as a linear combination of weight-free summands:
    /// `out(t)` contributes `t·out(1)`, `a.(r * B)` contributes
    /// `r·a.(1 * B)`, binders and variables contribute themselves.
    pub fn decompose(&self, semiring: Semiring) -> LinComb<NormalExpr> {
        let mut out = LinComb::zero(semiring);
        for s in self.summands() {
            let (e, w) = match s.node() {
                Node::Out(t) => (Expr::out(semiring.one()), t.clone()),
                Node::Act(a, r, b) => (Expr::act(a.clone(), semiring.one(), b.clone()), r.clone()),
                _ => (s.clone(), semiring.one()),
            };
            out.add_term_unchecked(normalize(&e, semiring), w);
        }
        out
    }
}

fn split_sum<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
    match e.node() {
        Node::Plus(l, r) => {
            split_sum(l, out);
            split_sum(r, out);
        }
        Node::Zero => {}
        _ => out.push(e),
    }
}

impl PartialEq for NormalExpr {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}

impl Eq for NormalExpr {}

impl Hash for NormalExpr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key.hash(state);
    }
}

impl PartialOrd for NormalExpr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for NormalExpr {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.cmp(&other.key)
    }
}

impl fmt::Display for NormalExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.expr.fmt(f)
    }
}

/// Canonical form under the additive laws, the action laws
/// (zero weight, weight sum, distribution over sums, scalar pushing through
/// nested actions and outputs, zero body). Binder bodies are normalized but
/// never unfolded; a binder is dropped only when its body is zero. Vacuous
/// binders stay, since removing them exposes action chains that each become
/// a separate derivative state. Over the Booleans,
/// repeated binder and variable summands collapse.
///
/// Works on open expressions too; free variables are kept as summands.
pub fn normalize(e: &Expr, semiring: Semiring) -> NormalExpr {
    let mut n = Normalizer {
        s: semiring,
        canon: Canon::default(),
        memo: HashMap::new(),
    };
    let expr = rebuild(&n.norm(e, &mut Vec::new()));
    NormalExpr {
        key: n.canon.key(&expr, &mut Vec::new()),
        expr,
    }
}

#[derive(Clone)]
struct Term {
    expr: Expr,
    /// De Bruijn key under the enclosing binders.
    key: Expr,
}

/// A node together with the binder positions of its free variables.
type Slot = (Expr, Vec<Option<usize>>);

struct Normalizer {
    s: Semiring,
    canon: Canon,
    /// Keyed like [`Canon`]: the summands of a node depend on the binder
    /// stack only through the positions of its free variables.
    memo: HashMap<Slot, Rc<Vec<Term>>>,
}

fn rebuild(terms: &[Term]) -> Expr {
    Expr::sum(terms.iter().map(|t| t.expr.clone()))
}

fn rank(e: &Expr) -> u8 {
    match e.node() {
        Node::Out(_) => 0,
        Node::Act(..) => 1,
        Node::Mu(..) => 2,
        _ => 3,
    }
}

impl Normalizer {
    fn term(&mut self, expr: Expr, env: &[&str]) -> Term {
        // The key borrows names from `expr` only for the duration of the call.
        let mut names: Vec<&str> = env.to_vec();
        let key = self.canon.key(&expr, &mut names);
        Term { expr, key }
    }

    fn norm<'a>(&mut self, e: &'a Expr, env: &mut Vec<&'a str>) -> Rc<Vec<Term>> {
        let proj: Vec<Option<usize>> = e
            .info()
            .free
            .iter()
            .map(|v| env.iter().rposition(|b| b == v).map(|i| env.len() - 1 - i))
            .collect();
        let slot = (e.clone(), proj);
        if let Some(ts) = self.memo.get(&slot) {
            return ts.clone();
        }
        let s = self.s;
        let ts: Vec<Term> = match e.node() {
            Node::Zero => vec![],
            Node::Out(w) if w.is_zero() => vec![],
            Node::Out(_) | Node::Var(_) => vec![self.term(e.clone(), env)],
            Node::Plus(l, r) => {
                let mut ts = (*self.norm(l, env)).clone();
                ts.extend(self.norm(r, env).iter().cloned());
                self.merge(ts, env)
            }
            Node::Act(_, r, _) if r.is_zero() => vec![],
            Node::Act(a, r, b) => {
                let body = self.norm(b, env);
                let mut ts = Vec::with_capacity(body.len());
                for t in body.iter() {
                    let pushed = match t.expr.node() {
                        Node::Out(w) => Expr::act(a.clone(), s.one(), Expr::out(r.times(w))),
                        Node::Act(b2, w, c) => {
                            Expr::act(a.clone(), r.times(w), Expr::act(b2.clone(), s.one(), c.clone()))
                        }
                        _ => Expr::act(a.clone(), r.clone(), t.expr.clone()),
                    };
                    ts.push(self.term(pushed, env));
                }
                self.merge(ts, env)
            }
            Node::Mu(x, b) => {
                env.push(x);
                let body = rebuild(&self.norm(b, env));
                env.pop();
                if body.is_zero() {
                    vec![]
                } else {
                    vec![self.term(Expr::mu(x.clone(), body), env)]
                }
            }
        };
        let ts = Rc::new(ts);
        self.memo.insert(slot, ts.clone());
        ts
    }

    fn merge(&mut self, ts: Vec<Term>, env: &mut Vec<&str>) -> Vec<Term> {
        let s = self.s;
        let mut out_weight = s.zero();
        let mut out_acts: BTreeMap<String, Weight> = BTreeMap::new();
        // (letter, body key) -> (weight, body)
        let mut acts: BTreeMap<(String, Expr), (Weight, Expr)> = BTreeMap::new();
        let mut rest: Vec<Term> = Vec::new();
        for t in ts {
            match t.expr.node() {
                Node::Out(w) => out_weight = out_weight.plus(w),
                Node::Act(a, w, b) => match b.node() {
                    Node::Out(u) => {
                        let acc = out_acts.entry(a.clone()).or_insert_with(|| s.zero());
                        *acc = acc.plus(&w.times(u));
                    }
                    _ => {
                        let Node::Act(_, _, k) = t.key.node() else {
                            unreachable!("an action's key is an action")
                        };
                        let entry = acts
                            .entry((a.clone(), k.clone()))
                            .or_insert_with(|| (s.zero(), b.clone()));
                        entry.0 = entry.0.plus(w);
                    }
                },
                _ => {
                    if s == Semiring::Boolean && rest.iter().any(|r| r.key == t.key) {
                        continue;
                    }
                    rest.push(t);
                }
            }
        }
        let mut result = Vec::new();
        if !out_weight.is_zero() {
            result.push(self.term(Expr::out(out_weight), env));
        }
        for (a, u) in out_acts {
            if !u.is_zero() {
                result.push(self.term(Expr::act(a, s.one(), Expr::out(u)), env));
            }
        }
        for ((a, _), (w, body)) in acts {
            if !w.is_zero() {
                result.push(self.term(Expr::act(a, w, body), env));
            }
        }
        result.extend(rest);
        result.sort_by(|x, y| {
            let part = |t: &Term| -> (u8, Option<String>, Expr) {
                match t.key.node() {
                    Node::Act(a, _, body) => (rank(&t.expr), Some(a.clone()), body.clone()),
                    _ => (rank(&t.expr), None, t.key.clone()),
                }
            };
            part(x).cmp(&part(y))
        });
        result
    }
}
