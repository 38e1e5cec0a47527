//! Weighted automata over commutative semirings, a μ-expression calculus for
//! them, and decision procedures for equivalence.

pub mod automaton;
pub mod bisim;
pub mod equivalence;
pub mod error;
pub mod expr;
pub mod kleene;
pub mod lincomb;
pub mod proof;
pub mod semiring;

pub use automaton::{Configuration, Dfa, WeightedAutomaton};
pub use error::{Error, Result};
pub use expr::{normalize, parse_expr, DerivativeEval, Expr, ExprParser, Node, NormalExpr};
pub use lincomb::LinComb;
pub use semiring::{EquivalenceCapability, Semiring, Weight};
