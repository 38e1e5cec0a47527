//! Conversions between expressions and automata.
//!
//! Expression to automaton explores the derivatives of an expression
//! breadth-first, identifying residuals by their normal form. Automaton to
//! expression follows the n-step elimination: every state starts as a
//! one-step fixpoint equation, and the variables are then replaced in
//! declaration order by syntactic replacement.

use std::collections::{HashMap, VecDeque};

use crate::automaton::{Configuration, WeightedAutomaton};
use crate::error::{Error, Result};
use crate::expr::{normalize, Expr, NormalExpr};
use crate::lincomb::LinComb;
use crate::semiring::Semiring;

pub const DEFAULT_STATE_BOUND: usize = 10_000;

/// The derivative-closure bound: `WK_STATE_BOUND` if set and valid,
/// otherwise [`DEFAULT_STATE_BOUND`].
pub fn state_bound() -> usize {
    std::env::var("WK_STATE_BOUND")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_STATE_BOUND)
}

/// An automaton whose states are the reachable normal forms of an expression.
#[derive(Clone, Debug)]
pub struct Synthesis {
    pub automaton: WeightedAutomaton,
    /// The unit configuration on the state of the normalized input.
    pub start: Configuration,
    /// `labels[q]` is the normal form that state `q` stands for.
    pub labels: Vec<NormalExpr>,
}

pub fn expr_to_automaton(e: &Expr, semiring: Semiring, alphabet: &[String]) -> Result<Synthesis> {
    expr_to_automaton_bounded(e, semiring, alphabet, state_bound())
}

pub fn expr_to_automaton_bounded(
    e: &Expr,
    semiring: Semiring,
    alphabet: &[String],
    bound: usize,
) -> Result<Synthesis> {
    e.require_closed()?;
    e.check_guarded()?;
    e.check_domain(semiring)?;
    if let Some(a) = e.letters().into_iter().find(|a| !alphabet.contains(a)) {
        return Err(Error::UnknownLetter(a));
    }
    let mut automaton = WeightedAutomaton::new(semiring, alphabet.to_vec())?;

    let root = normalize(e, semiring);
    let mut index: HashMap<NormalExpr, usize> = HashMap::from([(root.clone(), 0)]);
    let mut labels = vec![root];
    let mut outputs = Vec::new();
    let mut trans: Vec<Vec<LinComb<usize>>> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(q) = queue.pop_front() {
        let label = labels[q].clone();
        outputs.push(label.expr().output_weight(semiring)?);
        let mut row = Vec::with_capacity(alphabet.len());
        for a in alphabet {
            let d = label.expr().derivative(a, semiring)?;
            let mut succ = LinComb::zero(semiring);
            for (f, w) in d {
                let id = match index.get(&f) {
                    Some(id) => *id,
                    None => {
                        let id = labels.len();
                        if id >= bound {
                            let frontier: Vec<String> =
                                queue.iter().take(3).map(|q| labels[*q].to_string()).collect();
                            return Err(Error::StateBound {
                                bound,
                                frontier: frontier.join(" | "),
                            });
                        }
                        index.insert(f.clone(), id);
                        labels.push(f);
                        queue.push_back(id);
                        id
                    }
                };
                succ.add_term(id, w)?;
            }
            row.push(succ);
        }
        trans.push(row);
    }

    for (q, o) in outputs.into_iter().enumerate() {
        automaton.add_state(format!("q{q}"), o)?;
    }
    for (q, row) in trans.into_iter().enumerate() {
        for (a, succ) in row.into_iter().enumerate() {
            for (p, w) in succ {
                automaton.add_transition(q, a, w, p)?;
            }
        }
    }
    Ok(Synthesis {
        start: automaton.unit(0),
        automaton,
        labels,
    })
}

fn var_name(j: usize) -> String {
    format!("x{}", j + 1)
}

/// The one-step equation for state `j`:
/// `mu x_j. out(o_j) + Σ_a Σ_k a.(t(j)(a)(k) * x_k)`, zero weights included.
fn initial_equation(aut: &WeightedAutomaton, j: usize) -> Expr {
    let mut parts = vec![Expr::out(aut.output(j).clone())];
    for (a, letter) in aut.alphabet().iter().enumerate() {
        let row = aut.transition(j, a);
        for k in 0..aut.num_states() {
            parts.push(Expr::act(letter.clone(), row.coefficient(&k), Expr::var(var_name(k))));
        }
    }
    Expr::mu(var_name(j), Expr::sum(parts))
}

/// A closed expression denoting the language of `state`, obtained by the
/// n-step elimination. The result is not normalized.
pub fn automaton_to_expr(aut: &WeightedAutomaton, state: usize) -> Result<Expr> {
    let n = aut.num_states();
    if state >= n {
        return Err(Error::UndeclaredState(format!("#{state}")));
    }
    let mut eqs: Vec<Expr> = (0..n).map(|j| initial_equation(aut, j)).collect();
    for k in 0..n {
        let x = var_name(k);
        let replacement = eqs[k].clone();
        let fv = replacement.free_vars();
        if let Some(v) = fv.iter().find(|v| index_of(v) <= k) {
            return Err(Error::Construction(format!(
                "E{}^{k} still has `{v}` free",
                k + 1
            )));
        }
        for (i, e) in eqs.iter_mut().enumerate() {
            if i == k {
                continue;
            }
            let own = var_name(i);
            if let Some(v) = fv.iter().find(|v| **v != own && e.binds(v)) {
                return Err(Error::Construction(format!(
                    "replacing `{x}` in E{}^{k} would capture `{v}`",
                    i + 1
                )));
            }
            *e = e.syntactic_replace(&x, &replacement);
        }
    }
    let result = eqs.swap_remove(state);
    if let Some(v) = result.free_vars().into_iter().next() {
        return Err(Error::Construction(format!("result has `{v}` free")));
    }
    Ok(result)
}

fn index_of(var: &str) -> usize {
    var[1..].parse::<usize>().map_or(usize::MAX, |i| i - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_expr, DerivativeEval};
    use crate::semiring::Weight;

    const Z: Semiring = Semiring::Integers;

    fn letters(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn single_output() {
        let s = expr_to_automaton(&parse_expr("out(5)", Z).unwrap(), Z, &letters("a b")).unwrap();
        assert_eq!(s.automaton.num_states(), 1);
        assert_eq!(s.automaton.output(0), &Z.from_i64(5).unwrap());
        assert!(s.automaton.transition(0, 0).is_zero());
        assert!(s.automaton.transition(0, 1).is_zero());
    }

    #[test]
    fn star_loop() {
        let e = parse_expr("mu x. a.(1 * x) + out(1)", Z).unwrap();
        let s = expr_to_automaton(&e, Z, &letters("a")).unwrap();
        assert_eq!(s.automaton.num_states(), 1);
        assert_eq!(s.automaton.transition(0, 0).to_string(), "{0:1}");
        assert_eq!(s.automaton.output(0), &Z.one());
    }

    #[test]
    fn example_one() {
        let e = parse_expr("a.(2 * mu x. b.(1 * c.(6 * x)) + d.(2 * out(2)) + out(1))", Z).unwrap();
        let s = expr_to_automaton(&e, Z, &letters("a b c d")).unwrap();
        let w = s.automaton.eval_word(&s.start, &["a", "b", "c"]).unwrap();
        assert_eq!(w, Z.from_i64(12).unwrap());
    }

    #[test]
    fn rejects_bad_inputs() {
        let ab = letters("a");
        assert!(matches!(
            expr_to_automaton(&parse_expr("a.(1 * x)", Z).unwrap(), Z, &ab),
            Err(Error::OpenExpression(_))
        ));
        assert!(matches!(
            expr_to_automaton(&parse_expr("b.(1 * out(1))", Z).unwrap(), Z, &ab),
            Err(Error::UnknownLetter(_))
        ));
        let e = parse_expr("a.(1 * b.(1 * out(1)))", Z).unwrap();
        assert!(matches!(
            expr_to_automaton_bounded(&e, Z, &letters("a b"), 2),
            Err(Error::StateBound { bound: 2, .. })
        ));
    }

    #[test]
    fn labels_are_the_expression_coalgebra() {
        let e = parse_expr("mu x. a.(2 * x) + b.(1 * (mu y. a.(1 * y) + out(3))) + out(1)", Z).unwrap();
        let ab = letters("a b");
        let s = expr_to_automaton(&e, Z, &ab).unwrap();
        for (q, label) in s.labels.iter().enumerate() {
            assert_eq!(&label.expr().output_weight(Z).unwrap(), s.automaton.output(q));
            for (ai, a) in ab.iter().enumerate() {
                let d = label.expr().derivative(a, Z).unwrap();
                let mapped = s.automaton.transition(q, ai).map_keys(|p| s.labels[*p].clone());
                assert_eq!(d, mapped);
            }
        }
    }

    fn single_state(out: i64) -> WeightedAutomaton {
        let mut aut = WeightedAutomaton::new(Z, letters("a b")).unwrap();
        aut.add_state("p", Z.from_i64(out).unwrap()).unwrap();
        aut
    }

    #[test]
    fn single_state_elimination() {
        let aut = single_state(4);
        let e = automaton_to_expr(&aut, 0).unwrap();
        assert_eq!(e.to_string(), "mu x1. out(4) + a.(0 * x1) + b.(0 * x1)");
        assert_eq!(normalize(&e, Z).to_string(), "mu x1. out(4)");
    }

    #[test]
    fn three_state_chain_follows_the_displayed_replacements() {
        let text = "semiring integers\nalphabet a\nstate p output 1\nstate q output 2\nstate r output 3\n\
                    trans p a 1 q\ntrans q a 2 r\ntrans r a 3 p\n";
        let aut = WeightedAutomaton::parse(text).unwrap();
        let e = automaton_to_expr(&aut, 0).unwrap();
        // E1^0{E2^1/x2}{E3^2/x3}, computed by hand from the same equations.
        let e0: Vec<Expr> = (0..3).map(|j| initial_equation(&aut, j)).collect();
        let e2_1 = e0[1].syntactic_replace("x1", &e0[0]);
        let e3_1 = e0[2].syntactic_replace("x1", &e0[0]);
        let e3_2 = e3_1.syntactic_replace("x2", &e2_1);
        let by_hand = e0[0].syntactic_replace("x2", &e2_1).syntactic_replace("x3", &e3_2);
        assert_eq!(e, by_hand);
        let mut ev = DerivativeEval::new(Z);
        let start = aut.unit(0);
        for n in 0..8 {
            let word = vec!["a"; n];
            assert_eq!(ev.eval(&e, &word).unwrap(), aut.eval_word(&start, &word).unwrap());
        }
        let out: Weight = ev.eval(&e, &["a", "a", "a"]).unwrap();
        assert_eq!(out, Z.from_i64(6).unwrap());
    }
}
