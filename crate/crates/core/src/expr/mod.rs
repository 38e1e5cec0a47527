//! Fixpoint expressions for weighted automata.
//!
//! ```text
//! E ::= x | zero | E + E | out(r) | a.(r * E) | mu x. E
//! ```
//!
//! `mu x. E` requires every free `x` in `E` to sit under an action prefix.
//! Weights carry their semiring, while `zero` and variables are domain-free,
//! so operations that need a domain take it as a parameter.
//!
//! Expressions are immutable and hash-consed: structurally equal expressions
//! share one node, so equality is a pointer comparison and a repeated
//! subterm is stored once. Free variables, guardedness and similar facts are
//! computed when a node is built. Constructions that copy large subterms, as
//! the elimination of automaton states does, therefore stay small as graphs
//! even when their tree unfolding is astronomically large; every traversal
//! in this module memoizes on nodes.

mod coalg;
mod intern;
mod normal;
mod parse;
mod subst;

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::semiring::{Semiring, Weight};

pub use coalg::{build_from_head, DerivativeEval};
pub use normal::{normalize, NormalExpr};
pub use parse::{parse_expr, ExprParser};

/// The shape of an expression node. Children are shared [`Expr`] handles.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Var(String),
    Zero,
    Plus(Expr, Expr),
    Out(Weight),
    Act(String, Weight, Expr),
    Mu(String, Expr),
}

/// A shared handle to an interned expression node.
#[derive(Clone)]
pub struct Expr(Arc<Inner>);

struct Inner {
    node: Node,
    hash: u64,
    info: Info,
}

/// Facts derived bottom-up when a node is built.
struct Info {
    free: Arc<BTreeSet<String>>,
    /// Free variables with an occurrence outside every action prefix.
    unguarded: Arc<BTreeSet<String>>,
    binders: Arc<BTreeSet<String>>,
    letters: Arc<BTreeSet<String>>,
    /// Every binder body is guarded in its variable.
    guarded: bool,
    /// One bit per semiring of the weights in the expression.
    domains: u8,
    complexity: usize,
    mu_depth: usize,
    /// Size of the tree unfolding, saturating.
    size: usize,
}

fn domain_bit(s: Semiring) -> u8 {
    1 << (s as u8)
}

fn union(a: &Arc<BTreeSet<String>>, b: &Arc<BTreeSet<String>>) -> Arc<BTreeSet<String>> {
    if b.is_subset(a) {
        a.clone()
    } else if a.is_subset(b) {
        b.clone()
    } else {
        Arc::new(a.union(b).cloned().collect())
    }
}

fn without(a: &Arc<BTreeSet<String>>, x: &str) -> Arc<BTreeSet<String>> {
    if a.contains(x) {
        let mut s = (**a).clone();
        s.remove(x);
        Arc::new(s)
    } else {
        a.clone()
    }
}

fn with(a: &Arc<BTreeSet<String>>, x: &str) -> Arc<BTreeSet<String>> {
    if a.contains(x) {
        a.clone()
    } else {
        let mut s = (**a).clone();
        s.insert(x.to_string());
        Arc::new(s)
    }
}

impl Info {
    fn of(node: &Node) -> Info {
        let empty = || Arc::new(BTreeSet::new());
        match node {
            Node::Var(x) => {
                let fx = Arc::new(BTreeSet::from([x.clone()]));
                Info {
                    free: fx.clone(),
                    unguarded: fx,
                    binders: empty(),
                    letters: empty(),
                    guarded: true,
                    domains: 0,
                    complexity: 0,
                    mu_depth: 0,
                    size: 1,
                }
            }
            Node::Zero | Node::Out(_) => Info {
                free: empty(),
                unguarded: empty(),
                binders: empty(),
                letters: empty(),
                guarded: true,
                domains: match node {
                    Node::Out(w) => domain_bit(w.semiring()),
                    _ => 0,
                },
                complexity: 0,
                mu_depth: 0,
                size: 1,
            },
            Node::Plus(l, r) => {
                let (l, r) = (l.info(), r.info());
                Info {
                    free: union(&l.free, &r.free),
                    unguarded: union(&l.unguarded, &r.unguarded),
                    binders: union(&l.binders, &r.binders),
                    letters: union(&l.letters, &r.letters),
                    guarded: l.guarded && r.guarded,
                    domains: l.domains | r.domains,
                    complexity: 1 + l.complexity.max(r.complexity),
                    mu_depth: l.mu_depth.max(r.mu_depth),
                    size: l.size.saturating_add(r.size).saturating_add(1),
                }
            }
            Node::Act(a, w, b) => {
                let b = b.info();
                Info {
                    free: b.free.clone(),
                    unguarded: empty(),
                    binders: b.binders.clone(),
                    letters: with(&b.letters, a),
                    guarded: b.guarded,
                    domains: b.domains | domain_bit(w.semiring()),
                    complexity: 0,
                    mu_depth: b.mu_depth,
                    size: b.size.saturating_add(1),
                }
            }
            Node::Mu(x, b) => {
                let b = b.info();
                Info {
                    free: without(&b.free, x),
                    unguarded: without(&b.unguarded, x),
                    binders: with(&b.binders, x),
                    letters: b.letters.clone(),
                    guarded: b.guarded && !b.unguarded.contains(x),
                    domains: b.domains,
                    complexity: 1 + b.complexity,
                    mu_depth: 1 + b.mu_depth,
                    size: b.size.saturating_add(1),
                }
            }
        }
    }
}

impl Expr {
    fn info(&self) -> &Info {
        &self.0.info
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    pub fn var(x: impl Into<String>) -> Self {
        intern::intern(Node::Var(x.into()))
    }

    pub fn zero() -> Self {
        intern::intern(Node::Zero)
    }

    pub fn out(w: Weight) -> Self {
        intern::intern(Node::Out(w))
    }

    pub fn plus(l: Expr, r: Expr) -> Self {
        intern::intern(Node::Plus(l, r))
    }

    pub fn act(letter: impl Into<String>, w: Weight, body: Expr) -> Self {
        intern::intern(Node::Act(letter.into(), w, body))
    }

    pub fn mu(x: impl Into<String>, body: Expr) -> Self {
        intern::intern(Node::Mu(x.into(), body))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.node(), Node::Zero)
    }

    /// Left-associated sum; `zero` when empty.
    pub fn sum(terms: impl IntoIterator<Item = Expr>) -> Self {
        terms.into_iter().reduce(Expr::plus).unwrap_or_else(Expr::zero)
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        (*self.info().free).clone()
    }

    pub fn has_free(&self, x: &str) -> bool {
        self.info().free.contains(x)
    }

    pub fn is_closed(&self) -> bool {
        self.info().free.is_empty()
    }

    pub(crate) fn require_closed(&self) -> Result<()> {
        match self.info().free.iter().next() {
            Some(x) => Err(Error::OpenExpression(x.clone())),
            None => Ok(()),
        }
    }

    /// Every free occurrence of `x` lies under an action prefix.
    pub fn is_guarded(&self, x: &str) -> bool {
        !self.info().unguarded.contains(x)
    }

    /// Checks that every binder `mu x. B` has `B` guarded in `x`; reports
    /// the first offending binder in preorder.
    pub fn check_guarded(&self) -> Result<()> {
        if self.info().guarded {
            return Ok(());
        }
        let mut e = self;
        loop {
            e = match e.node() {
                Node::Mu(x, b) if !b.is_guarded(x) => return Err(Error::Unguarded(x.clone())),
                Node::Plus(l, r) => {
                    if l.info().guarded {
                        r
                    } else {
                        l
                    }
                }
                Node::Act(_, _, b) | Node::Mu(_, b) => b,
                _ => unreachable!("leaves are guarded"),
            };
        }
    }

    /// All weights belong to `semiring`.
    pub fn check_domain(&self, semiring: Semiring) -> Result<()> {
        let others = self.info().domains & !domain_bit(semiring);
        if others == 0 {
            return Ok(());
        }
        let right = [Semiring::Boolean, Semiring::Naturals, Semiring::Integers, Semiring::Rationals]
            .into_iter()
            .find(|s| others & domain_bit(*s) != 0)
            .expect("bit of a semiring");
        Err(Error::DomainMismatch { left: semiring, right })
    }

    /// Letters used in action prefixes.
    pub fn letters(&self) -> BTreeSet<String> {
        (*self.info().letters).clone()
    }

    /// Whether `x` occurs as a binder anywhere in `self`.
    pub fn binds(&self, x: &str) -> bool {
        self.info().binders.contains(x)
    }

    /// The complexity measure: zero on atoms and actions, one more than the
    /// children on sums and binders.
    pub fn complexity(&self) -> usize {
        self.info().complexity
    }

    /// Number of nodes of the tree unfolding, saturating at `usize::MAX`.
    pub fn size(&self) -> usize {
        self.info().size
    }

    /// The text form, refused when the written-out tree would have more
    /// than `max_nodes` nodes. Shared subterms are printed once per
    /// occurrence, so this can be far larger than the graph.
    pub fn render(&self, max_nodes: usize) -> Result<String> {
        match self.size() {
            n if n > max_nodes => Err(Error::TooLarge { nodes: n, limit: max_nodes }),
            _ => Ok(self.to_string()),
        }
    }

    /// Maximum nesting depth of binders.
    pub fn mu_depth(&self) -> usize {
        self.info().mu_depth
    }

    /// Children in path order: `Plus` has 0 and 1, `Act` and `Mu` have 0.
    pub fn children(&self) -> Vec<&Expr> {
        match self.node() {
            Node::Var(_) | Node::Zero | Node::Out(_) => vec![],
            Node::Plus(l, r) => vec![l, r],
            Node::Act(_, _, b) | Node::Mu(_, b) => vec![b],
        }
    }

    pub fn subterm(&self, path: &[usize]) -> Option<&Expr> {
        let Some((&i, rest)) = path.split_first() else {
            return Some(self);
        };
        self.children().get(i)?.subterm(rest)
    }

    /// Replaces the subterm at `path`; `None` if the path does not exist.
    pub fn replace_at(&self, path: &[usize], new: Expr) -> Option<Expr> {
        let Some((&i, rest)) = path.split_first() else {
            return Some(new);
        };
        Some(match (self.node(), i) {
            (Node::Plus(l, r), 0) => Expr::plus(l.replace_at(rest, new)?, r.clone()),
            (Node::Plus(l, r), 1) => Expr::plus(l.clone(), r.replace_at(rest, new)?),
            (Node::Act(a, w, b), 0) => Expr::act(a.clone(), w.clone(), b.replace_at(rest, new)?),
            (Node::Mu(x, b), 0) => Expr::mu(x.clone(), b.replace_at(rest, new)?),
            _ => return None,
        })
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        // Interning makes structural equality and identity coincide.
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

fn rank(n: &Node) -> u8 {
    match n {
        Node::Var(_) => 0,
        Node::Zero => 1,
        Node::Plus(..) => 2,
        Node::Out(_) => 3,
        Node::Act(..) => 4,
        Node::Mu(..) => 5,
    }
}

pub(crate) fn cmp_weight(a: &Weight, b: &Weight) -> Ordering {
    match (a, b) {
        (Weight::Bool(x), Weight::Bool(y)) => x.cmp(y),
        (Weight::Nat(x), Weight::Nat(y)) => x.cmp(y),
        (Weight::Int(x), Weight::Int(y)) => x.cmp(y),
        (Weight::Rat(x), Weight::Rat(y)) => x.cmp(y),
        _ => a.semiring().cmp(&b.semiring()),
    }
}

/// A structural order. Since equal subterms are identical, a comparison
/// follows a single path down both graphs.
impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        if self == other {
            return Ordering::Equal;
        }
        let (a, b) = (self.node(), other.node());
        rank(a).cmp(&rank(b)).then_with(|| match (a, b) {
            (Node::Var(x), Node::Var(y)) => x.cmp(y),
            (Node::Plus(l1, r1), Node::Plus(l2, r2)) => l1.cmp(l2).then_with(|| r1.cmp(r2)),
            (Node::Out(v), Node::Out(w)) => cmp_weight(v, w),
            (Node::Act(a1, v, e1), Node::Act(a2, w, e2)) => a1
                .cmp(a2)
                .then_with(|| cmp_weight(v, w))
                .then_with(|| e1.cmp(e2)),
            (Node::Mu(x, e1), Node::Mu(y, e2)) => x.cmp(y).then_with(|| e1.cmp(e2)),
            _ => Ordering::Equal,
        })
    }
}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Var(x) => f.write_str(x),
            Node::Zero => f.write_str("zero"),
            Node::Out(w) => write!(f, "out({w})"),
            Node::Act(a, w, b) => write!(f, "{a}.({w} * {b})"),
            Node::Mu(x, b) => write!(f, "mu {x}. {b}"),
            Node::Plus(l, r) => {
                // A binder body extends to the right, and `+` associates left.
                match l.node() {
                    Node::Mu(..) => write!(f, "({l})")?,
                    _ => write!(f, "{l}")?,
                }
                f.write_str(" + ")?;
                match r.node() {
                    Node::Mu(..) | Node::Plus(..) => write!(f, "({r})"),
                    _ => write!(f, "{r}"),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(v: i64) -> Weight {
        Semiring::Integers.from_i64(v).unwrap()
    }

    fn x() -> Expr {
        Expr::var("x")
    }

    #[test]
    fn guardedness() {
        assert!(Expr::act("a", z(1), x()).is_guarded("x"));
        assert!(!Expr::plus(x(), Expr::out(z(1))).is_guarded("x"));
        let e = Expr::mu("y", Expr::act("a", z(1), Expr::plus(x(), Expr::var("y"))));
        assert!(e.is_guarded("x"));
        assert!(Expr::mu("x", x()).is_guarded("x"));
        assert_eq!(
            Expr::mu("x", Expr::plus(x(), Expr::out(z(1)))).check_guarded(),
            Err(Error::Unguarded("x".into()))
        );
    }

    #[test]
    fn complexity_examples() {
        assert_eq!(Expr::act("a", z(2), Expr::mu("x", Expr::plus(x(), x()))).complexity(), 0);
        assert_eq!(Expr::zero().complexity(), 0);
        assert_eq!(Expr::out(z(3)).complexity(), 0);
        let b = Expr::act("b", z(1), x());
        let d = Expr::act("d", z(1), Expr::out(z(1)));
        let e = Expr::mu("x", Expr::plus(Expr::plus(b, d), Expr::out(z(1))));
        assert_eq!(e.complexity(), 3);
    }

    #[test]
    fn free_variables() {
        let e = Expr::plus(x(), Expr::mu("y", Expr::act("a", z(1), Expr::plus(Expr::var("y"), Expr::var("w")))));
        assert_eq!(e.free_vars(), ["w", "x"].iter().map(|s| s.to_string()).collect());
        assert!(!e.is_closed());
        assert!(e.has_free("w"));
        assert!(!e.has_free("y"));
    }

    #[test]
    fn paths() {
        let e = Expr::plus(Expr::act("a", z(2), Expr::plus(x(), Expr::zero())), Expr::out(z(1)));
        assert_eq!(e.subterm(&[0, 0, 1]), Some(&Expr::zero()));
        assert_eq!(e.subterm(&[1, 0]), None);
        let r = e.replace_at(&[0, 0, 1], Expr::out(z(5))).unwrap();
        assert_eq!(r.to_string(), "a.(2 * x + out(5)) + out(1)");
        assert!(e.replace_at(&[2], Expr::zero()).is_none());
    }

    #[test]
    fn sharing_and_cached_facts() {
        let m = Expr::mu("x", Expr::act("a", z(1), x()));
        assert_eq!(m, Expr::mu("x", Expr::act("a", z(1), x())));
        assert!(Arc::ptr_eq(&m.0, &Expr::mu("x", Expr::act("a", z(1), x())).0));
        // A chain of doublings: tree size 2^61 - 1, a graph of 60 nodes.
        let mut e = Expr::out(z(1));
        for _ in 0..60 {
            e = Expr::plus(e.clone(), e);
        }
        assert_eq!(e.size(), (1usize << 61) - 1);
        assert_eq!(e.complexity(), 60);
        assert!(e.is_closed());
        assert!(e.check_domain(Semiring::Integers).is_ok());
        assert!(e.check_domain(Semiring::Rationals).is_err());
    }

    #[test]
    fn order_is_structural() {
        let a = Expr::act("a", z(1), x());
        let b = Expr::act("b", z(1), x());
        assert!(a < b);
        assert!(Expr::plus(a.clone(), b.clone()) < Expr::plus(b.clone(), a.clone()));
        assert_eq!(a.cmp(&Expr::act("a", z(1), x())), Ordering::Equal);
    }

    #[test]
    fn display_brackets_binders_and_right_sums() {
        let m = Expr::mu("x", Expr::act("a", z(1), x()));
        let e = Expr::plus(Expr::plus(m.clone(), Expr::out(z(1))), Expr::plus(Expr::zero(), m));
        assert_eq!(
            e.to_string(),
            "(mu x. a.(1 * x)) + out(1) + (zero + (mu x. a.(1 * x)))"
        );
    }
}
