//! Replayable equational derivations.
//!
//! A derivation starts from an expression and applies axioms at explicit
//! subterm positions, or the unique-fixpoint rule with a nested premise, and
//! must arrive at the declared end expression up to renaming of bound
//! variables. Associativity and commutativity are ordinary steps; the `ac`
//! macro only expands into them.

mod axioms;
mod check;
mod script;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::semiring::Semiring;

pub use axioms::{apply_axiom_at, expand_ac};
pub use check::{check_derivation, semantic_audit, AuditReport, Replay};
pub use script::parse_script;

/// Which equivalence a derivation establishes: bisimilarity (`≡`) or
/// language equivalence (`≡_D`, which adds the action laws D1 to D4).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    Bisim,
    Lang,
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bisim" => Ok(Level::Bisim),
            "lang" => Ok(Level::Lang),
            _ => Err(Error::syntax(0, 0, format!("unknown level `{s}` (expected bisim or lang)"))),
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Bisim => "bisim",
            Level::Lang => "lang",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    L2R,
    R2L,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::L2R => "L2R",
            Direction::R2L => "R2L",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AxiomId {
    /// `out(0) = zero`
    OutZero,
    /// `out(r) + out(s) = out(r+s)`
    OutSum,
    /// `zero + E = E`
    PlusUnit,
    /// `E1 + E2 = E2 + E1`
    PlusComm,
    /// `(E1 + E2) + E3 = E1 + (E2 + E3)`
    PlusAssoc,
    /// `a.(0 * E) = zero`
    ActZeroWeight,
    /// `a.(r * E) + a.(s * E) = a.((r+s) * E)`
    ActWeightSum,
    /// `mu x. E = E[mu x. E / x]`
    Fixpoint,
    /// `a.(r * (E1 + E2)) = a.(r * E1) + a.(r * E2)`
    D1,
    /// `a.(r * b.(s * E)) = a.(rs * b.(1 * E))`
    D2,
    /// `a.(r * out(s)) = a.(1 * out(rs))`
    D3,
    /// `a.(r * zero) = zero`
    D4,
    /// `a.(rs * E) = a.(s * rE)` with `rE` the scalar action
    ScalarDot,
    /// Renaming of bound variables.
    Alpha,
    /// `a.(1 * (E1 + E2)) = a.(1 * E1) + a.(1 * E2)`, Booleans only
    TraceDist,
    /// `a.(1 * zero) = zero`, Booleans only
    TraceZero,
}

impl AxiomId {
    pub const ALL: [AxiomId; 16] = [
        AxiomId::OutZero,
        AxiomId::OutSum,
        AxiomId::PlusUnit,
        AxiomId::PlusComm,
        AxiomId::PlusAssoc,
        AxiomId::ActZeroWeight,
        AxiomId::ActWeightSum,
        AxiomId::Fixpoint,
        AxiomId::D1,
        AxiomId::D2,
        AxiomId::D3,
        AxiomId::D4,
        AxiomId::ScalarDot,
        AxiomId::Alpha,
        AxiomId::TraceDist,
        AxiomId::TraceZero,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AxiomId::OutZero => "out-zero",
            AxiomId::OutSum => "out-sum",
            AxiomId::PlusUnit => "plus-unit",
            AxiomId::PlusComm => "plus-comm",
            AxiomId::PlusAssoc => "plus-assoc",
            AxiomId::ActZeroWeight => "act-zero-weight",
            AxiomId::ActWeightSum => "act-weight-sum",
            AxiomId::Fixpoint => "FP",
            AxiomId::D1 => "D1",
            AxiomId::D2 => "D2",
            AxiomId::D3 => "D3",
            AxiomId::D4 => "D4",
            AxiomId::ScalarDot => "scalardot",
            AxiomId::Alpha => "alpha",
            AxiomId::TraceDist => "trace-dist",
            AxiomId::TraceZero => "trace-zero",
        }
    }

    /// Sound for language equivalence but not for bisimilarity.
    pub fn lang_only(self) -> bool {
        matches!(
            self,
            AxiomId::D1
                | AxiomId::D2
                | AxiomId::D3
                | AxiomId::D4
                | AxiomId::ScalarDot
                | AxiomId::TraceDist
                | AxiomId::TraceZero
        )
    }

    pub fn boolean_only(self) -> bool {
        matches!(self, AxiomId::TraceDist | AxiomId::TraceZero)
    }
}

impl FromStr for AxiomId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "fixpoint" {
            return Ok(AxiomId::Fixpoint);
        }
        AxiomId::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::syntax(0, 0, format!("unknown axiom `{s}`")))
    }
}

impl fmt::Display for AxiomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Step {
    /// Rewrites the subterm at `path`. With a `target`, the step must be an
    /// instance of the axiom between the subterm and the target (in the
    /// given direction), and the target becomes the new subterm.
    Rewrite {
        path: Vec<usize>,
        axiom: AxiomId,
        dir: Direction,
        target: Option<Expr>,
    },
    /// Reorders and regroups the sum at `path` into `target`; expands into
    /// commutativity and associativity steps.
    Ac { path: Vec<usize>, target: Expr },
    /// The unique-fixpoint rule `E1 = T[E1/x]  ⟹  E1 = mu x. T`, applied at
    /// `path`. Forward, `E1` is the current subterm and becomes
    /// `mu x. T`; reversed, the current subterm is `mu x. T` and becomes
    /// `reverse_target`. The premise starts from `E1` and must end at
    /// `T[E1/x]`.
    UniqueFix {
        var: String,
        template: Expr,
        path: Vec<usize>,
        reverse_target: Option<Expr>,
        premise: Vec<Step>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Derivation {
    pub level: Level,
    pub semiring: Semiring,
    /// Letters for the semantic audit; inferred from the expressions if absent.
    pub alphabet: Option<Vec<String>>,
    pub start: Expr,
    pub steps: Vec<Step>,
    pub end: Expr,
}

pub fn format_path(path: &[usize]) -> String {
    if path.is_empty() {
        "root".into()
    } else {
        path.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(".")
    }
}

pub fn parse_path(text: &str) -> Option<Vec<usize>> {
    if text == "root" {
        return Some(Vec::new());
    }
    text.split('.').map(|p| p.parse().ok()).collect()
}
