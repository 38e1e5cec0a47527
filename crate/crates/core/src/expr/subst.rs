use std::collections::{BTreeSet, HashMap};

use super::{Expr, Node};

/// A variant of `base` not in `avoid`, formed by appending primes.
pub(crate) fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    let mut name = format!("{base}'");
    while avoid.contains(&name) {
        name.push('\'');
    }
    name
}

impl Expr {
    /// Capture-avoiding substitution `self[f/x]`: binders that would capture
    /// a free variable of `f` are renamed.
    pub fn substitute(&self, x: &str, f: &Expr) -> Expr {
        let fv = f.free_vars();
        self.subst(x, f, &fv, &mut HashMap::new())
    }

    fn subst(&self, x: &str, f: &Expr, fv_f: &BTreeSet<String>, memo: &mut HashMap<Expr, Expr>) -> Expr {
        if !self.has_free(x) {
            return self.clone();
        }
        if let Some(r) = memo.get(self) {
            return r.clone();
        }
        let r = match self.node() {
            Node::Var(_) => f.clone(),
            Node::Zero | Node::Out(_) => self.clone(),
            Node::Plus(l, r) => Expr::plus(l.subst(x, f, fv_f, memo), r.subst(x, f, fv_f, memo)),
            Node::Act(a, w, b) => Expr::act(a.clone(), w.clone(), b.subst(x, f, fv_f, memo)),
            // `x` is free here, so the binder is not `x`.
            Node::Mu(y, b) if fv_f.contains(y) => {
                let mut avoid = fv_f.clone();
                avoid.extend(b.free_vars());
                avoid.insert(x.to_string());
                let y2 = fresh_name(y, &avoid);
                let renamed = b.substitute(y, &Expr::var(y2.clone()));
                Expr::mu(y2, renamed.subst(x, f, fv_f, memo))
            }
            Node::Mu(y, b) => Expr::mu(y.clone(), b.subst(x, f, fv_f, memo)),
        };
        memo.insert(self.clone(), r.clone());
        r
    }

    /// Textual replacement `self{f/x}` of the free occurrences of `x`. Free
    /// variables of `f` may be captured by binders of `self`; that is the
    /// point of the operation.
    pub fn syntactic_replace(&self, x: &str, f: &Expr) -> Expr {
        self.replace(x, f, &mut HashMap::new())
    }

    fn replace(&self, x: &str, f: &Expr, memo: &mut HashMap<Expr, Expr>) -> Expr {
        if !self.has_free(x) {
            return self.clone();
        }
        if let Some(r) = memo.get(self) {
            return r.clone();
        }
        let r = match self.node() {
            Node::Var(_) => f.clone(),
            Node::Zero | Node::Out(_) => self.clone(),
            Node::Plus(l, r) => Expr::plus(l.replace(x, f, memo), r.replace(x, f, memo)),
            Node::Act(a, w, b) => Expr::act(a.clone(), w.clone(), b.replace(x, f, memo)),
            Node::Mu(y, b) => Expr::mu(y.clone(), b.replace(x, f, memo)),
        };
        memo.insert(self.clone(), r.clone());
        r
    }

    /// Equality up to renaming of bound variables.
    pub fn alpha_eq(&self, other: &Expr) -> bool {
        self == other || self.canonical_key() == other.canonical_key()
    }

    /// The de Bruijn form: every binder becomes `mu #`, a bound variable
    /// `#i` with `i` binders in between, a free variable `x` becomes `$x`.
    /// Two expressions are α-equivalent iff their keys are equal.
    pub fn canonical_key(&self) -> Expr {
        Canon::default().key(self, &mut Vec::new())
    }
}

/// Memoized de Bruijn conversion. The key of a node depends on the binder
/// stack only through the positions of its own free variables.
#[derive(Default)]
pub(crate) struct Canon {
    memo: HashMap<(Expr, Vec<Option<usize>>), Expr>,
}

impl Canon {
    /// The key of `e` under `env`, the enclosing binders, innermost last.
    pub(crate) fn key<'a>(&mut self, e: &'a Expr, env: &mut Vec<&'a str>) -> Expr {
        let proj: Vec<Option<usize>> = e
            .info()
            .free
            .iter()
            .map(|v| env.iter().rposition(|b| b == v).map(|i| env.len() - 1 - i))
            .collect();
        let slot = (e.clone(), proj);
        if let Some(k) = self.memo.get(&slot) {
            return k.clone();
        }
        let k = match e.node() {
            Node::Var(y) => match slot.1[0] {
                Some(i) => Expr::var(format!("#{i}")),
                None => Expr::var(format!("${y}")),
            },
            Node::Zero | Node::Out(_) => e.clone(),
            Node::Plus(l, r) => {
                let l = self.key(l, env);
                Expr::plus(l, self.key(r, env))
            }
            Node::Act(a, w, b) => Expr::act(a.clone(), w.clone(), self.key(b, env)),
            Node::Mu(x, b) => {
                env.push(x);
                let body = self.key(b, env);
                env.pop();
                Expr::mu("#", body)
            }
        };
        self.memo.insert(slot, k.clone());
        k
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use crate::semiring::Semiring;

    fn p(text: &str) -> Expr {
        parse_expr(text, Semiring::Integers).unwrap()
    }

    #[test]
    fn substitution_examples() {
        let f = p("out(1) + y");
        assert_eq!(Expr::var("x").substitute("x", &f), f);
        let bound = p("mu x. a.(1 * x)");
        assert_eq!(bound.substitute("x", &f), bound);
        let e = p("mu y. a.(1 * x)");
        let r = e.substitute("x", &Expr::var("y"));
        match r.node() {
            Node::Mu(y2, body) => {
                assert_ne!(y2, "y");
                assert_eq!(*body, p("a.(1 * y)"));
            }
            _ => panic!("expected a binder, got {r}"),
        }
    }

    #[test]
    fn syntactic_replacement_captures() {
        // x free under the binder for y: the replacement lands under it.
        let e1 = p("mu x. a.(3 * y)");
        let e2 = p("b.(2 * x)");
        assert_eq!(e1.syntactic_replace("y", &e2), p("mu x. a.(3 * b.(2 * x))"));
        assert_eq!(Expr::var("x").syntactic_replace("x", &e2), e2);
        let e = p("x + (mu x. a.(1 * x))");
        assert_eq!(
            e.syntactic_replace("x", &p("out(1)")),
            p("out(1) + (mu x. a.(1 * x))")
        );
    }

    #[test]
    fn alpha_equivalence() {
        assert!(p("mu x. a.(1 * x)").alpha_eq(&p("mu y. a.(1 * y)")));
        assert!(!p("mu x. a.(1 * x)").alpha_eq(&p("mu x. a.(2 * x)")));
        assert!(p("mu x. mu y. a.(1 * x) + b.(1 * y)").alpha_eq(&p("mu u. mu v. a.(1 * u) + b.(1 * v)")));
        assert!(!p("mu x. mu y. a.(1 * x)").alpha_eq(&p("mu x. mu y. a.(1 * y)")));
        assert!(!p("x").alpha_eq(&p("y")));
        assert_eq!(p("mu x. a.(1 * x) + y").canonical_key().to_string(), "mu #. a.(1 * #0) + $y");
    }

    #[test]
    fn substitution_shares_repeated_subterms() {
        // 2^40 occurrences of x as a tree, 41 nodes as a graph.
        let mut e = Expr::var("x");
        for _ in 0..40 {
            e = Expr::plus(e.clone(), e);
        }
        let r = e.substitute("x", &p("out(1)"));
        assert!(r.is_closed());
        assert_eq!(r.size(), e.size());
        assert!(r.alpha_eq(&e.syntactic_replace("x", &p("out(1)"))));
    }
}
