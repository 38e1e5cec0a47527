//! Language equivalence of weighted automata.
//!
//! Over ℕ, ℤ and ℚ the question is decided over the rationals: the
//! difference `startL − startR` is pushed through the disjoint union of both
//! automata, and a basis of the reachable span is kept in echelon form. The
//! languages agree iff the output functional vanishes on that span. Vectors
//! are explored breadth-first, so the first vector with nonzero output comes
//! with a shortest distinguishing word.
//!
//! Over the Booleans both sides are determinized by the subset construction
//! and compared with the union-find algorithm of Hopcroft and Karp; a
//! breadth-first search of the product then yields a shortest witness.

use std::collections::{HashMap, HashSet, VecDeque};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::automaton::{Configuration, Dfa, WeightedAutomaton};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::kleene::expr_to_automaton;
use crate::semiring::{EquivalenceCapability, Semiring, Weight};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Equivalent,
    /// A word with its weight on the left and on the right; the weights differ.
    Counterexample {
        word: Vec<String>,
        left: Weight,
        right: Weight,
    },
}

impl Verdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Verdict::Equivalent)
    }
}

/// Letter permutation taking the right alphabet onto the left one.
fn align_alphabets(l: &WeightedAutomaton, r: &WeightedAutomaton) -> Result<Vec<usize>> {
    if l.alphabet().len() != r.alphabet().len() {
        return Err(Error::AlphabetMismatch(format!(
            "{{{}}} vs {{{}}}",
            l.alphabet().join(" "),
            r.alphabet().join(" ")
        )));
    }
    l.alphabet()
        .iter()
        .map(|a| {
            r.letter_index(a)
                .map_err(|_| Error::AlphabetMismatch(format!("`{a}` missing on the right")))
        })
        .collect()
}

fn counterexample(
    l: &WeightedAutomaton,
    sl: &Configuration,
    r: &WeightedAutomaton,
    sr: &Configuration,
    word: Vec<String>,
) -> Result<Verdict> {
    let left = l.eval_word(sl, &word)?;
    let right = r.eval_word(sr, &word)?;
    Ok(Verdict::Counterexample { word, left, right })
}

/// Decides by dispatching on the capability of the two semirings.
pub fn decide_equiv(
    l: &WeightedAutomaton,
    sl: &Configuration,
    r: &WeightedAutomaton,
    sr: &Configuration,
) -> Result<Verdict> {
    use EquivalenceCapability::*;
    match (l.semiring().equivalence_capability(), r.semiring().equivalence_capability()) {
        (ViaSubsetConstruction, ViaSubsetConstruction) => decide_equiv_boolean(l, sl, r, sr),
        (ViaRationals, ViaRationals) => decide_equiv_rational(l, sl, r, sr),
        _ => Err(Error::DomainMismatch {
            left: l.semiring(),
            right: r.semiring(),
        }),
    }
}

pub fn decide_equiv_rational(
    l: &WeightedAutomaton,
    sl: &Configuration,
    r: &WeightedAutomaton,
    sr: &Configuration,
) -> Result<Verdict> {
    Ok(linear_closure(l, sl, r, sr)?.0)
}

/// Dense rational vectors over the disjoint union of two automata.
struct Union {
    n1: usize,
    dim: usize,
    /// `succ[a][s]`: successors of union state `s` under letter `a`.
    succ: Vec<Vec<Vec<(usize, BigRational)>>>,
    output: Vec<BigRational>,
}

impl Union {
    fn new(l: &WeightedAutomaton, r: &WeightedAutomaton, perm: &[usize]) -> Result<Self> {
        let n1 = l.num_states();
        let dim = n1 + r.num_states();
        let mut output = Vec::with_capacity(dim);
        for s in 0..n1 {
            output.push(l.output(s).to_rational()?);
        }
        for s in 0..r.num_states() {
            output.push(r.output(s).to_rational()?);
        }
        let mut succ = Vec::with_capacity(perm.len());
        for (a, &ra) in perm.iter().enumerate() {
            let mut rows = Vec::with_capacity(dim);
            for s in 0..n1 {
                rows.push(
                    l.transition(s, a)
                        .iter()
                        .map(|(t, w)| Ok((*t, w.to_rational()?)))
                        .collect::<Result<Vec<_>>>()?,
                );
            }
            for s in 0..r.num_states() {
                rows.push(
                    r.transition(s, ra)
                        .iter()
                        .map(|(t, w)| Ok((n1 + *t, w.to_rational()?)))
                        .collect::<Result<Vec<_>>>()?,
                );
            }
            succ.push(rows);
        }
        Ok(Union { n1, dim, succ, output })
    }

    fn step(&self, v: &[BigRational], a: usize) -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); self.dim];
        for (s, c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (t, w) in &self.succ[a][s] {
                out[*t] += c * w;
            }
        }
        out
    }

    fn output_of(&self, v: &[BigRational]) -> BigRational {
        v.iter()
            .zip(&self.output)
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, o)| c * o)
            .sum()
    }
}

/// Echelon basis; each vector is 1 at its pivot, the first nonzero entry at
/// insertion time.
#[derive(Default)]
struct Basis {
    rows: Vec<(usize, Vec<BigRational>)>,
}

impl Basis {
    /// Adds `v` unless it lies in the span; returns whether it was added.
    fn insert(&mut self, mut v: Vec<BigRational>) -> bool {
        for (p, b) in &self.rows {
            if !v[*p].is_zero() {
                let c = v[*p].clone();
                for (x, y) in v.iter_mut().zip(b) {
                    if !y.is_zero() {
                        *x -= &c * y;
                    }
                }
            }
        }
        let Some(p) = v.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = BigRational::one() / &v[p];
        for x in v.iter_mut() {
            *x *= &inv;
        }
        self.rows.push((p, v));
        true
    }
}

/// The rational decision together with the dimension of the reachable span
/// (bounded by the total number of states).
pub fn linear_closure(
    l: &WeightedAutomaton,
    sl: &Configuration,
    r: &WeightedAutomaton,
    sr: &Configuration,
) -> Result<(Verdict, usize)> {
    for aut in [l, r] {
        if aut.semiring().equivalence_capability() != EquivalenceCapability::ViaRationals {
            return Err(Error::Capability {
                required: "a semiring embeddable in the rationals".into(),
                actual: aut.semiring(),
            });
        }
    }
    let perm = align_alphabets(l, r)?;
    let u = Union::new(l, r, &perm)?;
    let mut d0 = vec![BigRational::zero(); u.dim];
    for (s, w) in sl {
        d0[*s] += w.to_rational()?;
    }
    for (s, w) in sr {
        d0[u.n1 + *s] -= w.to_rational()?;
    }
    let mut basis = Basis::default();
    let mut queue = VecDeque::from([(d0, Vec::<usize>::new())]);
    while let Some((v, word)) = queue.pop_front() {
        if !u.output_of(&v).is_zero() {
            let word = word.iter().map(|a| l.alphabet()[*a].clone()).collect();
            return Ok((counterexample(l, sl, r, sr, word)?, basis.rows.len()));
        }
        if !basis.insert(v.clone()) {
            continue;
        }
        for a in 0..perm.len() {
            let mut w = word.clone();
            w.push(a);
            queue.push_back((u.step(&v, a), w));
        }
    }
    Ok((Verdict::Equivalent, basis.rows.len()))
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.0[root] != root {
            root = self.0[root];
        }
        let mut y = x;
        while self.0[y] != root {
            let next = self.0[y];
            self.0[y] = root;
            y = next;
        }
        root
    }

    fn union(&mut self, x: usize, y: usize) -> bool {
        let (rx, ry) = (self.find(x), self.find(y));
        if rx == ry {
            return false;
        }
        self.0[rx] = ry;
        true
    }
}

pub fn decide_equiv_boolean(
    l: &WeightedAutomaton,
    sl: &Configuration,
    r: &WeightedAutomaton,
    sr: &Configuration,
) -> Result<Verdict> {
    let perm = align_alphabets(l, r)?;
    let dl = l.subset_construct(sl)?;
    let dr = r.subset_construct(sr)?;
    if hopcroft_karp(&dl, &dr, &perm) {
        return Ok(Verdict::Equivalent);
    }
    let word = shortest_witness(&dl, &dr, &perm).expect("inequivalent DFAs have a witness");
    let word = word.iter().map(|a| l.alphabet()[*a].clone()).collect();
    counterexample(l, sl, r, sr, word)
}

fn hopcroft_karp(dl: &Dfa, dr: &Dfa, perm: &[usize]) -> bool {
    let n1 = dl.num_states();
    let mut uf = UnionFind((0..n1 + dr.num_states()).collect());
    let mut stack = vec![(Dfa::START, Dfa::START)];
    uf.union(Dfa::START, n1 + Dfa::START);
    while let Some((p, q)) = stack.pop() {
        if dl.is_accepting(p) != dr.is_accepting(q) {
            return false;
        }
        for (a, &ra) in perm.iter().enumerate() {
            let (p2, q2) = (dl.next(p, a), dr.next(q, ra));
            if uf.union(p2, n1 + q2) {
                stack.push((p2, q2));
            }
        }
    }
    true
}

/// For each product state met, the state it was reached from and the letter.
type Parents = HashMap<(usize, usize), Option<((usize, usize), usize)>>;

fn shortest_witness(dl: &Dfa, dr: &Dfa, perm: &[usize]) -> Option<Vec<usize>> {
    let mut parent: Parents = HashMap::new();
    let start = (Dfa::START, Dfa::START);
    parent.insert(start, None);
    let mut queue = VecDeque::from([start]);
    while let Some(pair @ (p, q)) = queue.pop_front() {
        if dl.is_accepting(p) != dr.is_accepting(q) {
            let mut word = Vec::new();
            let mut cur = pair;
            while let Some((prev, a)) = parent[&cur] {
                word.push(a);
                cur = prev;
            }
            word.reverse();
            return Some(word);
        }
        for (a, &ra) in perm.iter().enumerate() {
            let next = (dl.next(p, a), dr.next(q, ra));
            if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(next) {
                e.insert(Some((pair, a)));
                queue.push_back(next);
            }
        }
    }
    None
}

fn same_weight(x: &Weight, y: &Weight) -> Result<bool> {
    if x.semiring() == y.semiring() {
        Ok(x == y)
    } else {
        Ok(x.to_rational()? == y.to_rational()?)
    }
}

/// Enumerates words in shortlex order up to `max_len` and reports the first
/// one on which the weights differ. Words whose configurations are zero on
/// both sides, or whose pair of configurations was already reached, are not
/// extended.
pub fn brute_force_equiv(
    l: &WeightedAutomaton,
    sl: &Configuration,
    r: &WeightedAutomaton,
    sr: &Configuration,
    max_len: usize,
) -> Result<Verdict> {
    let perm = align_alphabets(l, r)?;
    l.check_config(sl)?;
    r.check_config(sr)?;
    let mut found = Search::Overflow;
    if let Some((dl, dr)) = scaled_integers(l, sl, r, sr) {
        found = search(&dl, &dr, &perm, max_len, |x, y| Ok(x == y))?;
    }
    if let Search::Overflow = found {
        let exact = |aut, start| Dense::new(aut, start, |w| Some(w.clone())).expect("exact weights are total");
        let (dl, dr) = (exact(l, sl), exact(r, sr));
        found = search(&dl, &dr, &perm, max_len, same_weight)?;
    }
    match found {
        Search::Differs(word) => {
            let word: Vec<String> = word.iter().map(|a| l.alphabet()[*a].clone()).collect();
            let (left, right) = (l.eval_word(sl, &word)?, r.eval_word(sr, &word)?);
            Ok(Verdict::Counterexample { word, left, right })
        }
        _ => Ok(Verdict::Equivalent),
    }
}

/// Both automata over machine integers, every weight multiplied by the
/// common denominator `D`. A word `w` then weighs `D^(|w|+2)` times its
/// true weight on both sides, so equality per word is unchanged. `None` for
/// the Booleans or when a scaled weight does not fit.
fn scaled_integers(
    l: &WeightedAutomaton,
    sl: &Configuration,
    r: &WeightedAutomaton,
    sr: &Configuration,
) -> Option<(Dense<i128>, Dense<i128>)> {
    let mut all = Vec::new();
    for (aut, start) in [(l, sl), (r, sr)] {
        all.extend(start.iter().map(|(_, w)| w));
        for s in 0..aut.num_states() {
            all.push(aut.output(s));
            for a in 0..aut.alphabet().len() {
                all.extend(aut.transition(s, a).iter().map(|(_, w)| w));
            }
        }
    }
    let mut d = BigInt::one();
    for w in &all {
        d = d.lcm(w.to_rational().ok()?.denom());
    }
    let d = BigRational::from_integer(d);
    let scale = |w: &Weight| (w.to_rational().ok()? * &d).to_integer().to_i128();
    Some((Dense::new(l, sl, scale)?, Dense::new(r, sr, scale)?))
}

enum Search {
    Equivalent,
    Differs(Vec<usize>),
    /// Machine arithmetic overflowed; the search must be redone exactly.
    Overflow,
}

fn search<T: Scalar>(
    dl: &Dense<T>,
    dr: &Dense<T>,
    perm: &[usize],
    max_len: usize,
    same: impl Fn(&T, &T) -> Result<bool>,
) -> Result<Search> {
    // A pair already met after a shortlex-earlier word has the same future,
    // so only its first word is kept. The result is unchanged.
    let mut seen = HashSet::new();
    let start = [dl.start.clone(), dr.start.clone()].concat();
    seen.insert(start.clone());
    // Words are kept as (parent index in the previous layer, letter).
    let mut links: Vec<Vec<(usize, usize)>> = vec![vec![(0, 0)]];
    let mut layer = vec![start];
    for len in 0..=max_len {
        for (i, v) in layer.iter().enumerate() {
            let (cl, cr) = v.split_at(dl.n);
            let (Some(wl), Some(wr)) = (dl.output(cl), dr.output(cr)) else {
                return Ok(Search::Overflow);
            };
            if !same(&wl, &wr)? {
                let mut word = Vec::with_capacity(len);
                let mut at = i;
                for depth in (1..=len).rev() {
                    let (parent, a) = links[depth][at];
                    word.push(a);
                    at = parent;
                }
                word.reverse();
                return Ok(Search::Differs(word));
            }
        }
        if len == max_len {
            break;
        }
        let (mut next, mut back) = (Vec::new(), Vec::new());
        for (i, v) in layer.iter().enumerate() {
            if v.iter().all(T::is_zero) {
                continue;
            }
            let (cl, cr) = v.split_at(dl.n);
            for (a, &ra) in perm.iter().enumerate() {
                let (Some(mut pair), Some(right)) = (dl.step(cl, a), dr.step(cr, ra)) else {
                    return Ok(Search::Overflow);
                };
                pair.extend(right);
                if !seen.contains(&pair) {
                    seen.insert(pair.clone());
                    next.push(pair);
                    back.push((i, a));
                }
            }
        }
        links.push(back);
        layer = next;
    }
    Ok(Search::Equivalent)
}

/// Arithmetic for [`search`]; `None` signals overflow.
trait Scalar: Clone + Eq + std::hash::Hash {
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Option<Self>;
    fn mul(&self, other: &Self) -> Option<Self>;
}

impl Scalar for Weight {
    fn is_zero(&self) -> bool {
        Weight::is_zero(self)
    }
    fn add(&self, other: &Self) -> Option<Self> {
        Some(self.plus(other))
    }
    fn mul(&self, other: &Self) -> Option<Self> {
        Some(self.times(other))
    }
}

impl Scalar for i128 {
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn add(&self, other: &Self) -> Option<Self> {
        self.checked_add(*other)
    }
    fn mul(&self, other: &Self) -> Option<Self> {
        self.checked_mul(*other)
    }
}

/// An automaton with configurations as dense vectors.
struct Dense<T> {
    n: usize,
    zero: T,
    output: Vec<T>,
    /// `rows[a][s]` lists the `a`-successors of `s` with their weights.
    rows: Vec<Vec<Vec<(usize, T)>>>,
    start: Vec<T>,
}

impl<T: Scalar> Dense<T> {
    fn new(aut: &WeightedAutomaton, start: &Configuration, f: impl Fn(&Weight) -> Option<T>) -> Option<Dense<T>> {
        let n = aut.num_states();
        let zero = f(&aut.semiring().zero())?;
        let mut v = vec![zero.clone(); n];
        for (s, w) in start {
            v[*s] = f(w)?;
        }
        let mut rows = Vec::new();
        for a in 0..aut.alphabet().len() {
            let mut row = Vec::with_capacity(n);
            for s in 0..n {
                let succ = aut.transition(s, a).iter().map(|(d, w)| Some((*d, f(w)?)));
                row.push(succ.collect::<Option<Vec<_>>>()?);
            }
            rows.push(row);
        }
        let output = (0..n).map(|s| f(aut.output(s))).collect::<Option<_>>()?;
        Some(Dense { n, zero, output, rows, start: v })
    }

    fn step(&self, v: &[T], a: usize) -> Option<Vec<T>> {
        let mut out = vec![self.zero.clone(); self.n];
        for (s, w) in v.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            for (d, t) in &self.rows[a][s] {
                out[*d] = out[*d].add(&w.mul(t)?)?;
            }
        }
        Some(out)
    }

    fn output(&self, v: &[T]) -> Option<T> {
        let mut acc = self.zero.clone();
        for (w, o) in v.iter().zip(&self.output) {
            if !w.is_zero() {
                acc = acc.add(&w.mul(o)?)?;
            }
        }
        Some(acc)
    }
}

/// Builds automata for both expressions and decides their equivalence.
pub fn decide_expr_equiv(e1: &Expr, e2: &Expr, semiring: Semiring, alphabet: &[String]) -> Result<Verdict> {
    let s1 = expr_to_automaton(e1, semiring, alphabet)?;
    let s2 = expr_to_automaton(e2, semiring, alphabet)?;
    decide_equiv(&s1.automaton, &s1.start, &s2.automaton, &s2.start)
}
