use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::expr::{DerivativeEval, Expr};
use crate::semiring::{Semiring, Weight};

use super::axioms::{apply_axiom_at, expand_ac};
use super::{format_path, Derivation, Direction, Level, Step};

/// One expression in a chain of equalities, tagged with the step that
/// produced it (`"start"` for the first).
#[derive(Clone, Debug)]
pub struct Link {
    pub label: String,
    pub expr: Expr,
}

/// The result of replaying a derivation. `chains[0]` is the main chain;
/// each unique-fixpoint premise contributes its own chain.
#[derive(Clone, Debug, Default)]
pub struct Replay {
    pub trace: Vec<String>,
    pub chains: Vec<Vec<Link>>,
    /// Primitive rewrite steps, counting each expanded `ac` step.
    pub primitive_steps: usize,
}

struct Checker {
    level: Level,
    semiring: Semiring,
    replay: Replay,
}

fn proof_error(label: &str, message: impl Into<String>) -> Error {
    Error::Proof {
        step: label.to_string(),
        message: message.into(),
    }
}

fn relabel(label: &str, e: Error) -> Error {
    match e {
        Error::Proof { step, message } => Error::Proof {
            step: label.to_string(),
            message: format!("{step}: {message}"),
        },
        other => proof_error(label, other.to_string()),
    }
}

impl Checker {
    /// Replays `steps` from `start` and returns the final expression.
    fn run(&mut self, start: Expr, steps: &[Step], prefix: &str, depth: usize) -> Result<Expr> {
        let chain_id = self.replay.chains.len();
        self.replay.chains.push(vec![Link {
            label: if prefix.is_empty() { "start".into() } else { format!("{prefix}.start") },
            expr: start.clone(),
        }]);
        let indent = "  ".repeat(depth);
        let mut cur = start;
        for (i, step) in steps.iter().enumerate() {
            let label = if prefix.is_empty() {
                (i + 1).to_string()
            } else {
                format!("{prefix}.{}", i + 1)
            };
            cur = self.step(&cur, step, &label, depth)?;
            self.replay.trace.push(format!("{indent}{label}: {}  ⊢  {cur}", describe(step)));
            self.replay.chains[chain_id].push(Link {
                label,
                expr: cur.clone(),
            });
        }
        Ok(cur)
    }

    fn step(&mut self, cur: &Expr, step: &Step, label: &str, depth: usize) -> Result<Expr> {
        match step {
            Step::Rewrite {
                path,
                axiom,
                dir,
                target,
            } => {
                self.replay.primitive_steps += 1;
                apply_axiom_at(cur, path, *axiom, *dir, target.as_ref(), self.level, self.semiring)
                    .map_err(|e| relabel(label, e))
            }
            Step::Ac { path, target } => {
                let steps = expand_ac(cur, path, target).map_err(|e| relabel(label, e))?;
                let mut e = cur.clone();
                for s in &steps {
                    let Step::Rewrite { path, axiom, dir, .. } = s else {
                        unreachable!("ac expands to rewrites")
                    };
                    self.replay.primitive_steps += 1;
                    e = apply_axiom_at(&e, path, *axiom, *dir, None, self.level, self.semiring)
                        .map_err(|e| relabel(label, e))?;
                }
                Ok(e)
            }
            Step::UniqueFix {
                var,
                template,
                path,
                reverse_target,
                premise,
            } => {
                self.replay.primitive_steps += 1;
                if !template.is_guarded(var) {
                    return Err(proof_error(label, format!("`{var}` is not guarded in `{template}`")));
                }
                let fixpoint = Expr::mu(var.clone(), template.clone());
                let sub = cur
                    .subterm(path)
                    .ok_or_else(|| proof_error(label, format!("path {} does not exist", format_path(path))))?;
                let (e1, result) = match reverse_target {
                    None => (sub.clone(), fixpoint),
                    Some(t) => {
                        if !sub.alpha_eq(&fixpoint) {
                            return Err(proof_error(
                                label,
                                format!("subterm `{sub}` is not `{fixpoint}`"),
                            ));
                        }
                        (t.clone(), t.clone())
                    }
                };
                self.replay.trace.push(format!(
                    "{}{label}: premise {e1}  =  ({template})[{e1}/{var}]",
                    "  ".repeat(depth)
                ));
                let end = self.run(e1.clone(), premise, label, depth + 1)?;
                let goal = template.substitute(var, &e1);
                if !end.alpha_eq(&goal) {
                    return Err(proof_error(
                        label,
                        format!("premise ends at `{end}`, expected `{goal}`"),
                    ));
                }
                Ok(cur.replace_at(path, result).expect("path exists"))
            }
        }
    }
}

fn describe(step: &Step) -> String {
    match step {
        Step::Rewrite { path, axiom, dir, target } => {
            let t = if target.is_some() { " =>" } else { "" };
            format!("{axiom} {dir} at {}{t}", format_path(path))
        }
        Step::Ac { path, .. } => format!("ac at {}", format_path(path)),
        Step::UniqueFix {
            var,
            path,
            reverse_target,
            ..
        } => {
            let dir = if reverse_target.is_some() { Direction::R2L } else { Direction::L2R };
            format!("ufix {var} {dir} at {}", format_path(path))
        }
    }
}

/// Replays `d` step by step. Every rewrite is re-checked against its axiom
/// and the last expression must equal `d.end` up to bound renaming.
pub fn check_derivation(d: &Derivation) -> Result<Replay> {
    let mut c = Checker {
        level: d.level,
        semiring: d.semiring,
        replay: Replay::default(),
    };
    let last = c.run(d.start.clone(), &d.steps, "", 0)?;
    if !last.alpha_eq(&d.end) {
        return Err(proof_error(
            "end",
            format!("derivation ends at `{last}`, not at the declared `{}`", d.end),
        ));
    }
    Ok(c.replay)
}

/// Evidence that consecutive expressions of a derivation denote the same
/// series on all words up to a length.
#[derive(Clone, Debug)]
pub struct AuditReport {
    pub pairs: usize,
    pub words: usize,
    /// Step label, word and the two weights of each disagreement.
    pub failures: Vec<(String, Vec<String>, Weight, Weight)>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Weights of a link's expression on every audited word.
type WeightTable = Vec<(Vec<String>, Weight)>;

/// Checks `d` and then compares every pair of consecutive closed expressions
/// in its chains on all words of length at most `max_len`. This is
/// independent of the axioms, so it catches an unsound rule.
pub fn semantic_audit(d: &Derivation, max_len: usize) -> Result<AuditReport> {
    let replay = check_derivation(d)?;
    let alphabet: Vec<String> = match &d.alphabet {
        Some(a) => a.clone(),
        None => {
            let mut letters = BTreeSet::new();
            for link in replay.chains.iter().flatten() {
                letters.extend(link.expr.letters());
            }
            letters.into_iter().collect()
        }
    };
    let mut ev = DerivativeEval::new(d.semiring);
    let mut report = AuditReport {
        pairs: 0,
        words: 0,
        failures: Vec::new(),
    };
    for chain in &replay.chains {
        let mut prev: Option<(&Link, WeightTable)> = None;
        for link in chain {
            if !link.expr.is_closed() {
                prev = None;
                continue;
            }
            let table = ev.weights_up_to(&link.expr, &alphabet, max_len)?;
            if let Some((_, before)) = &prev {
                report.pairs += 1;
                report.words += table.len();
                if let Some(((w, x), (_, y))) = before.iter().zip(&table).find(|((_, x), (_, y))| x != y) {
                    report.failures.push((link.label.clone(), w.clone(), x.clone(), y.clone()));
                }
            }
            prev = Some((link, table));
        }
    }
    Ok(report)
}
