//! Generators and independent oracles shared by the integration tests.
//!
//! The oracles deliberately avoid the library's evaluation paths: automata
//! are evaluated by summing over paths, expressions by an environment-based
//! semantics that never substitutes, and everything is computed in ℚ (the
//! Boolean semiring via the homomorphism ℕ → 𝔹, n ↦ n > 0).
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::rc::Rc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use wk_core::{Expr, Node, Semiring, Weight, WeightedAutomaton};

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

pub fn load(name: &str) -> WeightedAutomaton {
    WeightedAutomaton::parse(&fixture(name)).unwrap()
}

pub fn letters(s: &str) -> Vec<String> {
    s.split_whitespace().map(String::from).collect()
}

pub fn rat(w: &Weight) -> BigRational {
    let s = w.to_string();
    match s.split_once('/') {
        Some((n, d)) => BigRational::new(n.parse().unwrap(), d.parse().unwrap()),
        None => BigRational::from_integer(s.parse::<BigInt>().unwrap()),
    }
}

/// Compares a library weight with an oracle value, reading the oracle
/// through ℕ → 𝔹 for Boolean weights.
pub fn agrees(w: &Weight, q: &BigRational) -> bool {
    match w.semiring() {
        Semiring::Boolean => w.is_one() == !q.is_zero(),
        _ => rat(w) == *q,
    }
}

/// All words over `alphabet` of length at most `max_len`, shortlex.
pub fn words(alphabet: &[String], max_len: usize) -> Vec<Vec<String>> {
    let mut out = vec![Vec::new()];
    let mut layer: Vec<Vec<String>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for a in alphabet {
                let mut v = w.clone();
                v.push(a.clone());
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Path-sum weight of `word` from `state`.
pub fn path_weight(aut: &WeightedAutomaton, state: usize, word: &[String]) -> BigRational {
    match word.split_first() {
        None => rat(aut.output(state)),
        Some((a, rest)) => {
            let ai = aut.letter_index(a).unwrap();
            aut.transition(state, ai)
                .iter()
                .map(|(p, w)| rat(w) * path_weight(aut, *p, rest))
                .fold(BigRational::zero(), |x, y| x + y)
        }
    }
}

/// Classical NFA acceptance by depth-first path search.
pub fn nfa_accepts(aut: &WeightedAutomaton, starts: &[usize], word: &[String]) -> bool {
    fn go(aut: &WeightedAutomaton, q: usize, word: &[String]) -> bool {
        match word.split_first() {
            None => aut.output(q).is_one(),
            Some((a, rest)) => {
                let ai = aut.letter_index(a).unwrap();
                aut.transition(q, ai).iter().any(|(p, w)| w.is_one() && go(aut, *p, rest))
            }
        }
    }
    starts.iter().any(|q| go(aut, *q, word))
}

fn random_weight(rng: &mut ChaCha8Rng, s: Semiring) -> Weight {
    match s {
        Semiring::Boolean => {
            if rng.gen_bool(0.15) { s.zero() } else { s.one() }
        }
        Semiring::Naturals => s.from_i64(rng.gen_range(1..=3)).unwrap(),
        Semiring::Integers => s.from_i64(rng.gen_range(-3..=3)).unwrap(),
        Semiring::Rationals => {
            let n: i64 = rng.gen_range(-3..=3);
            let d: i64 = rng.gen_range(1..=2);
            s.parse_weight(&format!("{n}/{d}")).unwrap()
        }
    }
}

/// A random automaton with `n` states over the first `k` letters of `abc`;
/// each (state, letter, state) edge is present with probability `density`.
pub fn random_automaton(rng: &mut ChaCha8Rng, s: Semiring, n: usize, k: usize, density: f64) -> WeightedAutomaton {
    let alphabet: Vec<String> = ["a", "b", "c"][..k].iter().map(|x| x.to_string()).collect();
    let mut aut = WeightedAutomaton::new(s, alphabet).unwrap();
    for q in 0..n {
        let out = if s == Semiring::Boolean {
            if rng.gen_bool(0.4) { s.one() } else { s.zero() }
        } else if rng.gen_bool(0.3) {
            s.zero()
        } else {
            random_weight(rng, s)
        };
        aut.add_state(format!("p{q}"), out).unwrap();
    }
    for q in 0..n {
        for a in 0..k {
            for p in 0..n {
                if rng.gen_bool(density) {
                    aut.add_transition(q, a, random_weight(rng, s), p).unwrap();
                }
            }
        }
    }
    aut
}

/// A random closed expression, guarded, with at most `max_mu` nested binders.
pub fn random_expr(rng: &mut ChaCha8Rng, s: Semiring, alphabet: &[String], size: usize, max_mu: usize) -> Expr {
    random_open_expr(rng, s, alphabet, size, max_mu, &[])
}

/// Like [`random_expr`], but the variables `free` may occur, always guarded.
pub fn random_open_expr(
    rng: &mut ChaCha8Rng,
    s: Semiring,
    alphabet: &[String],
    size: usize,
    max_mu: usize,
    free: &[&str],
) -> Expr {
    let mut counter = 0;
    let mut pending = free.iter().map(|v| v.to_string()).collect();
    gen(rng, s, alphabet, size, max_mu, &mut Vec::new(), &mut pending, &mut counter)
}

#[allow(clippy::too_many_arguments)]
fn gen(
    rng: &mut ChaCha8Rng,
    s: Semiring,
    alphabet: &[String],
    size: usize,
    mu_left: usize,
    guarded: &mut Vec<String>,
    pending: &mut Vec<String>,
    counter: &mut usize,
) -> Expr {
    if size <= 1 {
        return match rng.gen_range(0..4) {
            0 => Expr::zero(),
            1 if !guarded.is_empty() => Expr::var(guarded[rng.gen_range(0..guarded.len())].clone()),
            _ => Expr::out(random_weight(rng, s)),
        };
    }
    match rng.gen_range(0..10) {
        0..=3 => {
            let a = alphabet[rng.gen_range(0..alphabet.len())].clone();
            let w = random_weight(rng, s);
            let mut g = guarded.clone();
            g.append(&mut pending.clone());
            let body = gen(rng, s, alphabet, size - 1, mu_left, &mut g, &mut Vec::new(), counter);
            Expr::act(a, w, body)
        }
        4..=6 => {
            let k = rng.gen_range(1..size);
            let l = gen(rng, s, alphabet, k, mu_left, guarded, pending, counter);
            let r = gen(rng, s, alphabet, size - k, mu_left, guarded, pending, counter);
            Expr::plus(l, r)
        }
        7..=8 if mu_left > 0 => {
            *counter += 1;
            // Reuse a name now and then to exercise shadowing.
            let x = if *counter > 1 && rng.gen_bool(0.2) { "x1".to_string() } else { format!("x{counter}") };
            let mut g: Vec<String> = guarded.iter().filter(|v| **v != x).cloned().collect();
            let mut p: Vec<String> = pending.iter().filter(|v| **v != x).cloned().collect();
            p.push(x.clone());
            let body = gen(rng, s, alphabet, size - 1, mu_left - 1, &mut g, &mut p, counter);
            Expr::mu(x, body)
        }
        _ => gen(rng, s, alphabet, 1, mu_left, guarded, pending, counter),
    }
}

#[derive(Clone)]
struct Closure {
    var: String,
    body: Expr,
    env: Env,
}

type Env = Rc<BTreeMap<String, Closure>>;

/// Weight of `word` under closed `e`, by unfolding binders through an
/// environment (no substitution).
pub fn expr_weight(e: &Expr, word: &[String]) -> BigRational {
    sem(e, &Rc::new(BTreeMap::new()), word)
}

fn sem(e: &Expr, env: &Env, word: &[String]) -> BigRational {
    match e.node() {
        Node::Zero => BigRational::zero(),
        Node::Out(r) => {
            if word.is_empty() {
                rat(r)
            } else {
                BigRational::zero()
            }
        }
        Node::Plus(l, r) => sem(l, env, word) + sem(r, env, word),
        Node::Act(a, r, body) => match word.split_first() {
            Some((b, rest)) if a == b => rat(r) * sem(body, env, rest),
            _ => BigRational::zero(),
        },
        Node::Mu(x, body) => {
            let c = Closure {
                var: x.clone(),
                body: body.clone(),
                env: env.clone(),
            };
            unfold(&c, word)
        }
        Node::Var(x) => {
            let c = env.get(x).unwrap_or_else(|| panic!("free variable {x}"));
            unfold(c, word)
        }
    }
}

fn unfold(c: &Closure, word: &[String]) -> BigRational {
    let mut env = (*c.env).clone();
    env.insert(c.var.clone(), c.clone());
    sem(&c.body, &Rc::new(env), word)
}

pub fn one() -> BigRational {
    BigRational::one()
}

/// A bisimilar copy of `aut`: some states are split in two, each copy keeps
/// the output and sends the same total weight into every class. Returns the
/// copy and the relation pairing each original state with its copies.
pub fn split_states(rng: &mut ChaCha8Rng, aut: &WeightedAutomaton) -> (WeightedAutomaton, Vec<(String, String)>) {
    let s = aut.semiring();
    let n = aut.num_states();
    let mut copy = WeightedAutomaton::new(s, aut.alphabet().to_vec()).unwrap();
    let mut copies: Vec<Vec<usize>> = Vec::new();
    let mut relation = Vec::new();
    for q in 0..n {
        let m = if rng.gen_bool(0.5) { 2 } else { 1 };
        let mut ids = Vec::new();
        for i in 0..m {
            let name = format!("{}_{i}", aut.state_name(q));
            ids.push(copy.add_state(name.clone(), aut.output(q).clone()).unwrap());
            relation.push((aut.state_name(q).to_string(), name));
        }
        copies.push(ids);
    }
    for q in 0..n {
        for a in 0..aut.alphabet().len() {
            for (p, w) in aut.transition(q, a).iter() {
                for &qi in &copies[q] {
                    let targets = &copies[*p];
                    if targets.len() == 1 || s == Semiring::Boolean {
                        let t = targets[rng.gen_range(0..targets.len())];
                        copy.add_transition(qi, a, w.clone(), t).unwrap();
                    } else {
                        // w = part + (w - part)
                        let part = s.from_i64(rng.gen_range(-2..=2)).unwrap_or_else(|_| s.zero());
                        let part = if s == Semiring::Naturals { s.zero() } else { part };
                        let rest = w.add(&part.neg().unwrap_or_else(|| s.zero())).unwrap();
                        copy.add_transition(qi, a, part, targets[0]).unwrap();
                        copy.add_transition(qi, a, rest, targets[1]).unwrap();
                    }
                }
            }
        }
    }
    (copy, relation)
}

/// Classical subset construction from a set of start states, independent of
/// the library's. Returns (accepting, delta) with state 0 the start set.
pub fn classical_dfa(aut: &WeightedAutomaton, starts: &[usize]) -> (Vec<bool>, Vec<Vec<usize>>) {
    use std::collections::{BTreeSet, HashMap};
    let k = aut.alphabet().len();
    let first: BTreeSet<usize> = starts.iter().copied().collect();
    let mut index: HashMap<BTreeSet<usize>, usize> = HashMap::from([(first.clone(), 0)]);
    let mut sets = vec![first];
    let mut delta: Vec<Vec<usize>> = Vec::new();
    let mut i = 0;
    while i < sets.len() {
        let mut row = Vec::new();
        for a in 0..k {
            let next: BTreeSet<usize> = sets[i]
                .iter()
                .flat_map(|q| aut.transition(*q, a).iter().filter(|(_, w)| w.is_one()).map(|(p, _)| *p))
                .collect();
            let id = *index.entry(next.clone()).or_insert_with(|| {
                sets.push(next);
                sets.len() - 1
            });
            row.push(id);
        }
        delta.push(row);
        i += 1;
    }
    let accepting = sets.iter().map(|set| set.iter().any(|q| aut.output(*q).is_one())).collect();
    (accepting, delta)
}

pub fn dfa_accepts(dfa: &(Vec<bool>, Vec<Vec<usize>>), aut: &WeightedAutomaton, word: &[String]) -> bool {
    let mut q = 0;
    for a in word {
        q = dfa.1[q][aut.letter_index(a).unwrap()];
    }
    dfa.0[q]
}
