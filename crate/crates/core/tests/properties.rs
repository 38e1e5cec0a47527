//! Invariants checked on generated inputs. Each property draws a seed and
//! builds its instance with the shared generators, so failures reproduce
//! from the printed seed.

mod common;

use num_rational::BigRational;
use num_traits::Signed;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use wk_core::equivalence::{brute_force_equiv, decide_equiv, linear_closure};
use wk_core::kleene::{automaton_to_expr, expr_to_automaton};
use wk_core::proof::{apply_axiom_at, check_derivation, parse_script, AxiomId, Derivation, Direction, Level, Step};
use wk_core::{
    normalize, Configuration, DerivativeEval, Expr, LinComb, Node, Semiring, Weight, WeightedAutomaton,
};

const DOMAINS: [Semiring; 4] = [Semiring::Boolean, Semiring::Naturals, Semiring::Integers, Semiring::Rationals];

fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn weight(s: Semiring, v: i64) -> Weight {
    match s {
        Semiring::Boolean => s.from_i64((v != 0) as i64).unwrap(),
        Semiring::Naturals => s.from_i64(v.abs()).unwrap(),
        _ => s.from_i64(v).unwrap(),
    }
}

fn config(rng: &mut ChaCha8Rng, aut: &WeightedAutomaton) -> Configuration {
    let s = aut.semiring();
    let mut terms = Vec::new();
    for q in 0..aut.num_states() {
        if rng.gen_bool(0.6) {
            terms.push((q, weight(s, rng.gen_range(-3..=3))));
        }
    }
    LinComb::from_terms(s, terms).unwrap()
}

/// An α-equivalent copy with every binder renamed apart.
fn rename_bound(e: &Expr) -> Expr {
    match e.node() {
        Node::Var(_) | Node::Zero | Node::Out(_) => e.clone(),
        Node::Plus(l, r) => Expr::plus(rename_bound(l), rename_bound(r)),
        Node::Act(a, w, b) => Expr::act(a.clone(), w.clone(), rename_bound(b)),
        Node::Mu(x, b) => {
            let y = format!("{x}_r");
            Expr::mu(y.clone(), rename_bound(&b.substitute(x, &Expr::var(y))))
        }
    }
}

/// Oracle values agree, reading them in 𝔹 via n ↦ n > 0 for the Booleans.
fn same_series(s: Semiring, x: &BigRational, y: &BigRational) -> bool {
    if s == Semiring::Boolean {
        x.is_positive() == y.is_positive()
    } else {
        x == y
    }
}

fn all_paths(e: &Expr) -> Vec<Vec<usize>> {
    let mut paths = vec![Vec::new()];
    let mut i = 0;
    while i < paths.len() {
        let p = paths[i].clone();
        for c in 0..e.subterm(&p).unwrap().children().len() {
            let mut q = p.clone();
            q.push(c);
            paths.push(q);
        }
        i += 1;
    }
    paths
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weights_form_a_commutative_semiring(
        d in 0..4usize, x in -9i64..=9, y in -9i64..=9, z in -9i64..=9,
    ) {
        let s = DOMAINS[d];
        let (x, y, z) = (weight(s, x), weight(s, y), weight(s, z));
        prop_assert_eq!(x.add(&y).unwrap(), y.add(&x).unwrap());
        prop_assert_eq!(x.mul(&y).unwrap(), y.mul(&x).unwrap());
        prop_assert_eq!(x.add(&y).unwrap().add(&z).unwrap(), x.add(&y.add(&z).unwrap()).unwrap());
        prop_assert_eq!(x.mul(&y).unwrap().mul(&z).unwrap(), x.mul(&y.mul(&z).unwrap()).unwrap());
        prop_assert_eq!(
            x.mul(&y.add(&z).unwrap()).unwrap(),
            x.mul(&y).unwrap().add(&x.mul(&z).unwrap()).unwrap()
        );
        prop_assert_eq!(x.add(&s.zero()).unwrap(), x.clone());
        prop_assert_eq!(x.mul(&s.one()).unwrap(), x.clone());
        prop_assert!(x.mul(&s.zero()).unwrap().is_zero());
        prop_assert_eq!(s.parse_weight(&x.to_string()).unwrap(), x);
    }

    #[test]
    fn lincomb_is_a_semimodule(d in 0..4usize, seed in any::<u64>()) {
        let s = DOMAINS[d];
        let mut rng = seeded(seed);
        let aut = random_automaton(&mut rng, s, 4, 1, 0.0);
        let (u, v) = (config(&mut rng, &aut), config(&mut rng, &aut));
        let r = weight(s, rng.gen_range(-3..=3));
        prop_assert_eq!(u.add(&v).unwrap(), v.add(&u).unwrap());
        prop_assert_eq!(u.add(&LinComb::zero(s)).unwrap(), u.clone());
        prop_assert_eq!(u.add(&v).unwrap().scale(&r).unwrap(), u.scale(&r).unwrap().add(&v.scale(&r).unwrap()).unwrap());
        prop_assert!(u.scale(&s.zero()).unwrap().is_zero());
        prop_assert!(u.iter().all(|(_, w)| !w.is_zero()));
    }

    #[test]
    fn step_is_linear(d in 0..4usize, seed in any::<u64>()) {
        let s = DOMAINS[d];
        let mut rng = seeded(seed);
        let size = rng.gen_range(1..=5);
        let aut = random_automaton(&mut rng, s, size, 2, 0.4);
        let (u, v) = (config(&mut rng, &aut), config(&mut rng, &aut));
        let r = weight(s, rng.gen_range(-3..=3));
        for a in ["a", "b"] {
            let su = aut.step(&u, a).unwrap();
            let sv = aut.step(&v, a).unwrap();
            prop_assert_eq!(aut.step(&u.add(&v).unwrap(), a).unwrap(), su.add(&sv).unwrap());
            prop_assert_eq!(aut.step(&u.scale(&r).unwrap(), a).unwrap(), su.scale(&r).unwrap());
        }
    }

    #[test]
    fn eval_unfolds_one_letter(d in 0..4usize, seed in any::<u64>()) {
        let s = DOMAINS[d];
        let mut rng = seeded(seed);
        let size = rng.gen_range(1..=5);
        let aut = random_automaton(&mut rng, s, size, 2, 0.4);
        let u = config(&mut rng, &aut);
        for w in words(aut.alphabet(), 4) {
            let Some((a, rest)) = w.split_first() else { continue };
            let stepped = aut.step(&u, a).unwrap();
            prop_assert_eq!(aut.eval_word(&u, &w).unwrap(), aut.eval_word(&stepped, rest).unwrap());
        }
    }

    #[test]
    fn eval_matches_path_sums(d in 0..4usize, seed in any::<u64>()) {
        let s = DOMAINS[d];
        let mut rng = seeded(seed);
        let size = rng.gen_range(1..=5);
        let aut = random_automaton(&mut rng, s, size, 2, 0.4);
        let q = rng.gen_range(0..aut.num_states());
        for w in words(aut.alphabet(), 4) {
            let got = aut.eval_word(&aut.unit(q), &w).unwrap();
            prop_assert!(agrees(&got, &path_weight(&aut, q, &w)), "{:?}: {}", w, got);
        }
    }

    #[test]
    fn boolean_eval_is_nfa_acceptance(seed in any::<u64>()) {
        let b = Semiring::Boolean;
        let mut rng = seeded(seed);
        let size = rng.gen_range(1..=6);
        let aut = random_automaton(&mut rng, b, size, 2, 0.3);
        for w in words(aut.alphabet(), 6) {
            let got = aut.eval_word(&aut.unit(0), &w).unwrap();
            prop_assert_eq!(got.is_one(), nfa_accepts(&aut, &[0], &w), "{:?}", w);
        }
    }

    #[test]
    fn automaton_text_round_trips(d in 0..4usize, seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let size = rng.gen_range(1..=5);
        let aut = random_automaton(&mut rng, DOMAINS[d], size, 3, 0.3);
        let text = aut.to_text();
        prop_assert_eq!(WeightedAutomaton::parse(&text).unwrap().to_text(), text);
    }

    #[test]
    fn synthesis_agrees_with_derivatives_and_oracle(d in 0..4usize, seed in any::<u64>()) {
        let s = DOMAINS[d];
        let mut rng = seeded(seed);
        let alphabet = letters("a b");
        let size = rng.gen_range(2..=10);
        let e = random_expr(&mut rng, s, &alphabet, size, 2);
        let syn = expr_to_automaton(&e, s, &alphabet).unwrap();
        let mut ev = DerivativeEval::new(s);
        for w in words(&alphabet, 4) {
            let by_aut = syn.automaton.eval_word(&syn.start, &w).unwrap();
            prop_assert_eq!(&by_aut, &ev.eval(&e, &w).unwrap(), "{} on {:?}", e, w);
            prop_assert!(agrees(&by_aut, &expr_weight(&e, &w)), "{} on {:?}", e, w);
        }
        for (q, label) in syn.labels.iter().enumerate() {
            prop_assert_eq!(&label.expr().output_weight(s).unwrap(), syn.automaton.output(q));
        }
    }

    #[test]
    fn normalize_is_sound_and_idempotent(d in 0..4usize, seed in any::<u64>()) {
        let s = DOMAINS[d];
        let mut rng = seeded(seed);
        let alphabet = letters("a b");
        let size = rng.gen_range(1..=12);
        let e = random_expr(&mut rng, s, &alphabet, size, 2);
        let n = normalize(&e, s);
        let twice = normalize(n.expr(), s);
        prop_assert_eq!(n.key(), twice.key(), "{} then {}", n, twice);
        for w in words(&alphabet, 4) {
            let (want, got) = (expr_weight(&e, &w), expr_weight(n.expr(), &w));
            prop_assert!(same_series(s, &want, &got), "{} ↦ {} on {:?}", e, n, w);
        }
    }

    #[test]
    fn guarded_substitution_keeps_complexity(d in 0..4usize, seed in any::<u64>()) {
        let s = DOMAINS[d];
        let mut rng = seeded(seed);
        let alphabet = letters("a b");
        let size = rng.gen_range(1..=10);
        let e1 = random_open_expr(&mut rng, s, &alphabet, size, 2, &["x"]);
        let size = rng.gen_range(1..=10);
        let e2 = random_open_expr(&mut rng, s, &alphabet, size, 2, &["x"]);
        prop_assert!(e1.is_guarded("x"));
        prop_assert_eq!(e1.complexity(), e1.substitute("x", &e2).complexity());
    }

    #[test]
    fn alpha_eq_is_an_equivalence_kept_by_substitution(seed in any::<u64>()) {
        let s = Semiring::Integers;
        let mut rng = seeded(seed);
        let alphabet = letters("a b");
        let size = rng.gen_range(1..=10);
        let e = random_open_expr(&mut rng, s, &alphabet, size, 2, &["y"]);
        let e2 = rename_bound(&e);
        let e3 = rename_bound(&e2);
        prop_assert!(e.alpha_eq(&e));
        prop_assert!(e.alpha_eq(&e2) && e2.alpha_eq(&e));
        prop_assert!(e2.alpha_eq(&e3) && e.alpha_eq(&e3));
        let size = rng.gen_range(1..=6);
        let f = random_open_expr(&mut rng, s, &alphabet, size, 1, &["x1"]);
        prop_assert!(e.substitute("y", &f).alpha_eq(&e2.substitute("y", &f)));
    }

    #[test]
    fn expression_automaton_expression(d in 0..4usize, seed in any::<u64>()) {
        let s = DOMAINS[d];
        let mut rng = seeded(seed);
        let alphabet = letters("a b");
        let size = rng.gen_range(1..=8);
        let e = random_expr(&mut rng, s, &alphabet, size, 2);
        let syn = expr_to_automaton(&e, s, &alphabet).unwrap();
        // The start is a unit configuration, or empty for the zero series.
        let Some((&q, w)) = syn.start.iter().next() else {
            return Ok(());
        };
        prop_assert!(w.is_one());
        let back = automaton_to_expr(&syn.automaton, q).unwrap();
        let mut ev = DerivativeEval::new(s);
        for w in words(&alphabet, 4) {
            prop_assert_eq!(ev.eval(&back, &w).unwrap(), ev.eval(&e, &w).unwrap(), "{} on {:?}", e, w);
        }
    }

    #[test]
    fn reachable_span_is_bounded(d in 1..4usize, seed in any::<u64>()) {
        let s = DOMAINS[d];
        let mut rng = seeded(seed);
        let k = rng.gen_range(1..=3);
        let size = rng.gen_range(1..=5);
        let l = random_automaton(&mut rng, s, size, k, 0.35);
        let size = rng.gen_range(1..=5);
        let r = random_automaton(&mut rng, s, size, k, 0.35);
        let (verdict, dim) = linear_closure(&l, &l.unit(0), &r, &r.unit(0)).unwrap();
        prop_assert!(dim <= l.num_states() + r.num_states());
        let bf = brute_force_equiv(&l, &l.unit(0), &r, &r.unit(0), l.num_states() + r.num_states() - 1).unwrap();
        prop_assert_eq!(verdict, bf);
    }

    #[test]
    fn bisimilar_copies_are_equivalent(d in 0..4usize, seed in any::<u64>()) {
        let s = DOMAINS[d];
        let mut rng = seeded(seed);
        let size = rng.gen_range(1..=4);
        let l = random_automaton(&mut rng, s, size, 2, 0.4);
        let (r, relation) = split_states(&mut rng, &l);
        prop_assert!(wk_core::bisim::check_bisimilarity_implies_language(&l, &r, &relation).unwrap());
        let t = r.state_id(&relation[0].1).unwrap();
        let s0 = l.state_id(&relation[0].0).unwrap();
        prop_assert!(decide_equiv(&l, &l.unit(s0), &r, &r.unit(t)).unwrap().is_equivalent());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Rewriting a subterm in place is the same as rewriting it on its own
    /// and plugging the result back.
    #[test]
    fn rewriting_is_a_congruence(d in 0..4usize, seed in any::<u64>()) {
        let s = DOMAINS[d];
        let mut rng = seeded(seed);
        let size = rng.gen_range(2..=8);
        let e = random_expr(&mut rng, s, &letters("a b"), size, 2);
        for p in all_paths(&e) {
            let sub = e.subterm(&p).unwrap();
            for ax in AxiomId::ALL {
                for dir in [Direction::L2R, Direction::R2L] {
                    let alone = apply_axiom_at(sub, &[], ax, dir, None, Level::Lang, s);
                    let inside = apply_axiom_at(&e, &p, ax, dir, None, Level::Lang, s);
                    match (alone, inside) {
                        (Ok(a), Ok(b)) => prop_assert_eq!(e.replace_at(&p, a).unwrap(), b),
                        (Err(_), Err(_)) => {}
                        (a, b) => prop_assert!(false, "{} {} at {:?} of {}: {:?} vs {:?}", ax, dir, p, e, a, b),
                    }
                }
            }
        }
    }

    /// A derivation accepted for bisimilarity is accepted for language
    /// equivalence, and every rewrite preserves the weights.
    #[test]
    fn bisimulation_derivations_hold_for_languages(d in 0..4usize, seed in any::<u64>()) {
        let s = DOMAINS[d];
        let mut rng = seeded(seed);
        let alphabet = letters("a b");
        let size = rng.gen_range(2..=8);
        let start = random_expr(&mut rng, s, &alphabet, size, 2);
        let (mut cur, mut steps) = (start.clone(), Vec::new());
        let mut ev = DerivativeEval::new(s);
        for _ in 0..rng.gen_range(1..=5) {
            let mut options = Vec::new();
            for p in all_paths(&cur) {
                for ax in AxiomId::ALL {
                    for dir in [Direction::L2R, Direction::R2L] {
                        if let Ok(next) = apply_axiom_at(&cur, &p, ax, dir, None, Level::Bisim, s) {
                            options.push((p.clone(), ax, dir, next));
                        }
                    }
                }
            }
            if options.is_empty() {
                break;
            }
            let (path, axiom, dir, next) = options.swap_remove(rng.gen_range(0..options.len()));
            prop_assert!(!axiom.lang_only() && !axiom.boolean_only());
            for w in words(&alphabet, 3) {
                prop_assert_eq!(ev.eval(&cur, &w).unwrap(), ev.eval(&next, &w).unwrap(), "{} {} at {:?}", axiom, dir, path);
            }
            steps.push(Step::Rewrite { path, axiom, dir, target: None });
            cur = next;
        }
        let mut d = Derivation { level: Level::Bisim, semiring: s, alphabet: None, start, steps, end: cur };
        prop_assert!(check_derivation(&d).is_ok());
        d.level = Level::Lang;
        prop_assert!(check_derivation(&d).is_ok());
    }

    /// Changing one weight of the declared end of a valid script makes it
    /// invalid.
    #[test]
    fn tampered_scripts_are_rejected(bump in 1i64..=5) {
        let d = parse_script(&fixture("example1.proof")).unwrap();
        prop_assert!(check_derivation(&d).is_ok());
        let end = Expr::plus(d.end.clone(), Expr::out(d.semiring.from_i64(bump).unwrap()));
        let tampered = Derivation { end, ..d };
        prop_assert!(check_derivation(&tampered).is_err());
    }

    /// The script parser reports errors instead of panicking.
    #[test]
    fn script_parser_is_total(noise in "[ -~\n]{0,200}") {
        let _ = parse_script(&noise);
        let base = fixture("example1.proof");
        let keep: String = base.chars().take(base.chars().count().saturating_sub(noise.len())).collect();
        let _ = parse_script(&format!("{keep}{noise}"));
    }
}
