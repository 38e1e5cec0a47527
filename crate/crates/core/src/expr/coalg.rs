use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::lincomb::LinComb;
use crate::semiring::{Semiring, Weight};

use super::normal::{normalize, NormalExpr};
use super::{Expr, Node};

impl Expr {
    /// The output component of the expression coalgebra.
    pub fn output_weight(&self, semiring: Semiring) -> Result<Weight> {
        self.require_closed()?;
        output(self, semiring)
    }

    /// The `letter`-component of the expression coalgebra: a linear
    /// combination of normalized residual expressions.
    pub fn derivative(&self, letter: &str, semiring: Semiring) -> Result<LinComb<NormalExpr>> {
        self.require_closed()?;
        let mut acc = LinComb::zero(semiring);
        derive(self, letter, semiring, &semiring.one(), &mut acc)?;
        Ok(acc)
    }

    /// The scalar action `r·E`: pushed through sums into outputs and action
    /// weights, unfolding a binder once when it is met at the top.
    pub fn scale(&self, r: &Weight) -> Result<Expr> {
        Ok(match self.node() {
            Node::Zero => Expr::zero(),
            Node::Plus(l, rt) => Expr::plus(l.scale(r)?, rt.scale(r)?),
            Node::Mu(x, b) => b.substitute(x, self).scale(r)?,
            Node::Out(s) => Expr::out(r.mul(s)?),
            Node::Act(a, s, e) => Expr::act(a.clone(), r.mul(s)?, e.clone()),
            Node::Var(x) => return Err(Error::OpenExpression(x.clone())),
        })
    }
}

// Unguarded variables are never reached: the body of `mu x. B` is guarded in
// `x`, so the output of `B[mu x. B / x]` equals that of `B`.
fn output(e: &Expr, s: Semiring) -> Result<Weight> {
    Ok(match e.node() {
        Node::Zero | Node::Act(..) => s.zero(),
        Node::Out(r) => r.clone(),
        Node::Plus(l, r) => output(l, s)?.add(&output(r, s)?)?,
        Node::Mu(_, b) => output(b, s)?,
        Node::Var(x) => return Err(Error::Unguarded(x.clone())),
    })
}

fn derive(e: &Expr, letter: &str, s: Semiring, coeff: &Weight, acc: &mut LinComb<NormalExpr>) -> Result<()> {
    match e.node() {
        Node::Zero | Node::Out(_) => {}
        Node::Plus(l, r) => {
            derive(l, letter, s, coeff, acc)?;
            derive(r, letter, s, coeff, acc)?;
        }
        Node::Act(a, w, body) => {
            if a == letter {
                acc.add_term(normalize(body, s), coeff.mul(w)?)?;
            }
        }
        Node::Mu(x, b) => derive(&b.substitute(x, e), letter, s, coeff, acc)?,
        Node::Var(x) => return Err(Error::Unguarded(x.clone())),
    }
    Ok(())
}

/// The map from heads to expressions: `out(r) + Σ a.(1 * E_a)`, normalized.
/// Letters without a branch contribute nothing.
pub fn build_from_head(r: &Weight, branches: &BTreeMap<String, NormalExpr>, semiring: Semiring) -> NormalExpr {
    let parts = std::iter::once(Expr::out(r.clone())).chain(
        branches
            .iter()
            .map(|(a, e)| Expr::act(a.clone(), semiring.one(), e.expr().clone())),
    );
    normalize(&Expr::sum(parts), semiring)
}

/// Word evaluation by iterated derivatives, memoized per normal form.
///
/// `eval(E, ε) = o(E)` and `eval(E, a·w) = Σ r_j·eval(E_j, w)` where
/// `δ_a(E) = Σ r_j·E_j`.
#[derive(Debug)]
pub struct DerivativeEval {
    semiring: Semiring,
    derivs: HashMap<(NormalExpr, String), LinComb<NormalExpr>>,
    outputs: HashMap<NormalExpr, Weight>,
}

impl DerivativeEval {
    pub fn new(semiring: Semiring) -> Self {
        DerivativeEval {
            semiring,
            derivs: HashMap::new(),
            outputs: HashMap::new(),
        }
    }

    pub fn semiring(&self) -> Semiring {
        self.semiring
    }

    pub fn eval<S: AsRef<str>>(&mut self, e: &Expr, word: &[S]) -> Result<Weight> {
        let Some((first, rest)) = word.split_first() else {
            return e.output_weight(self.semiring);
        };
        let mut lc = e.derivative(first.as_ref(), self.semiring)?;
        for a in rest {
            if lc.is_zero() {
                break;
            }
            lc = self.step(&lc, a.as_ref())?;
        }
        self.output(&lc)
    }

    /// `Σ u(E)·δ_a(E)`.
    pub fn step(&mut self, lc: &LinComb<NormalExpr>, letter: &str) -> Result<LinComb<NormalExpr>> {
        let mut out = LinComb::zero(self.semiring);
        for (e, w) in lc {
            let key = (e.clone(), letter.to_string());
            if !self.derivs.contains_key(&key) {
                let d = e.expr().derivative(letter, self.semiring)?;
                self.derivs.insert(key.clone(), d);
            }
            out.add_scaled(w, &self.derivs[&key])?;
        }
        Ok(out)
    }

    /// `Σ u(E)·o(E)`.
    pub fn output(&mut self, lc: &LinComb<NormalExpr>) -> Result<Weight> {
        let mut acc = self.semiring.zero();
        for (e, w) in lc {
            if !self.outputs.contains_key(e) {
                let o = e.expr().output_weight(self.semiring)?;
                self.outputs.insert(e.clone(), o);
            }
            acc = acc.add(&w.mul(&self.outputs[e])?)?;
        }
        Ok(acc)
    }

    /// Weights of all words up to `max_len`, in shortlex order.
    pub fn weights_up_to(&mut self, e: &Expr, alphabet: &[String], max_len: usize) -> Result<Vec<(Vec<String>, Weight)>> {
        let mut out = vec![(Vec::new(), e.output_weight(self.semiring)?)];
        let start = LinComb::unit(self.semiring, normalize(e, self.semiring));
        let mut layer = vec![(Vec::<String>::new(), start)];
        for _ in 0..max_len {
            let mut next = Vec::with_capacity(layer.len() * alphabet.len());
            for (w, lc) in &layer {
                for a in alphabet {
                    let lc2 = if lc.is_zero() {
                        lc.clone()
                    } else if w.is_empty() {
                        e.derivative(a, self.semiring)?
                    } else {
                        self.step(lc, a)?
                    };
                    let mut w2 = w.clone();
                    w2.push(a.clone());
                    out.push((w2.clone(), self.output(&lc2)?));
                    next.push((w2, lc2));
                }
            }
            layer = next;
        }
        Ok(out)
    }
}
