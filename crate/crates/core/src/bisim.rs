//! Weighted bisimulation: equivalences on states under which related states
//! have equal outputs and, for every letter, put equal total weight into
//! every equivalence class.
//!
//! Bisimilarity implies language equivalence but not conversely; both
//! directions are exercised against the equivalence decision.

use std::collections::{BTreeMap, HashMap};

use crate::automaton::WeightedAutomaton;
use crate::equivalence::{decide_equiv, Verdict};
use crate::error::{Error, Result};
use crate::semiring::Weight;

/// States of the disjoint union of `l` and `r`: left states first.
struct Union<'a> {
    l: &'a WeightedAutomaton,
    r: &'a WeightedAutomaton,
    perm: Vec<usize>,
}

impl<'a> Union<'a> {
    fn new(l: &'a WeightedAutomaton, r: &'a WeightedAutomaton) -> Result<Self> {
        if l.semiring() != r.semiring() {
            return Err(Error::DomainMismatch {
                left: l.semiring(),
                right: r.semiring(),
            });
        }
        if l.alphabet().len() != r.alphabet().len() {
            return Err(Error::AlphabetMismatch("alphabets differ in size".into()));
        }
        let perm = l
            .alphabet()
            .iter()
            .map(|a| r.letter_index(a).map_err(|_| Error::AlphabetMismatch(format!("`{a}` missing on the right"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Union { l, r, perm })
    }

    fn len(&self) -> usize {
        self.l.num_states() + self.r.num_states()
    }

    fn name(&self, s: usize) -> String {
        let n1 = self.l.num_states();
        if s < n1 {
            self.l.state_name(s).to_string()
        } else {
            self.r.state_name(s - n1).to_string()
        }
    }

    fn output(&self, s: usize) -> &Weight {
        let n1 = self.l.num_states();
        if s < n1 {
            self.l.output(s)
        } else {
            self.r.output(s - n1)
        }
    }

    /// Successors of union state `s` under left letter index `a`.
    fn succ(&self, s: usize, a: usize) -> Vec<(usize, Weight)> {
        let n1 = self.l.num_states();
        if s < n1 {
            self.l.transition(s, a).iter().map(|(t, w)| (*t, w.clone())).collect()
        } else {
            self.r
                .transition(s - n1, self.perm[a])
                .iter()
                .map(|(t, w)| (n1 + *t, w.clone()))
                .collect()
        }
    }

    /// Per letter, the total weight sent into each block.
    fn signature(&self, s: usize, block: &[usize]) -> Vec<BTreeMap<usize, String>> {
        (0..self.perm.len())
            .map(|a| {
                let mut sums: BTreeMap<usize, Weight> = BTreeMap::new();
                for (t, w) in self.succ(s, a) {
                    let e = sums.entry(block[t]).or_insert_with(|| self.l.semiring().zero());
                    *e = e.plus(&w);
                }
                sums.into_iter()
                    .filter(|(_, w)| !w.is_zero())
                    .map(|(b, w)| (b, w.to_string()))
                    .collect()
            })
            .collect()
    }
}

/// The coarsest weighted bisimulation on the disjoint union, by partition
/// refinement. Returns the block index of every left state and every right
/// state.
pub fn bisimilarity_classes(l: &WeightedAutomaton, r: &WeightedAutomaton) -> Result<(Vec<usize>, Vec<usize>)> {
    let u = Union::new(l, r)?;
    let mut block = renumber((0..u.len()).map(|s| u.output(s).to_string()).collect());
    loop {
        let keys: Vec<_> = (0..u.len())
            .map(|s| (block[s], u.signature(s, &block)))
            .collect();
        let next = renumber(keys);
        let stable = next.iter().max() == block.iter().max();
        block = next;
        if stable {
            break;
        }
    }
    let right = block.split_off(l.num_states());
    Ok((block, right))
}

fn renumber<K: Eq + std::hash::Hash>(keys: Vec<K>) -> Vec<usize> {
    let mut ids: HashMap<K, usize> = HashMap::new();
    keys.into_iter()
        .map(|k| {
            let n = ids.len();
            *ids.entry(k).or_insert(n)
        })
        .collect()
}

/// Whether left state `s` and right state `t` are bisimilar.
pub fn are_bisimilar(l: &WeightedAutomaton, s: usize, r: &WeightedAutomaton, t: usize) -> Result<bool> {
    let (bl, br) = bisimilarity_classes(l, r)?;
    Ok(bl[s] == br[t])
}

/// Checks that the equivalence generated by `relation` (pairs of left and
/// right state names) is a weighted bisimulation, then confirms that every
/// related pair is language equivalent. Fails with a diagnostic naming the
/// first pair that breaks the bisimulation conditions; `Ok(false)` would mean
/// a related pair with different languages.
pub fn check_bisimilarity_implies_language(
    l: &WeightedAutomaton,
    r: &WeightedAutomaton,
    relation: &[(String, String)],
) -> Result<bool> {
    let u = Union::new(l, r)?;
    let n1 = l.num_states();
    let pairs = relation
        .iter()
        .map(|(s, t)| Ok((l.state_id(s)?, n1 + r.state_id(t)?)))
        .collect::<Result<Vec<_>>>()?;

    let mut parent: Vec<usize> = (0..u.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        if p[x] != x {
            let root = find(p, p[x]);
            p[x] = root;
        }
        p[x]
    }
    for &(s, t) in &pairs {
        let (rs, rt) = (find(&mut parent, s), find(&mut parent, t));
        parent[rs] = rt;
    }
    let block: Vec<usize> = (0..u.len()).map(|s| find(&mut parent, s)).collect();

    let mut rep: HashMap<usize, usize> = HashMap::new();
    for s in 0..u.len() {
        let first = *rep.entry(block[s]).or_insert(s);
        if first == s {
            continue;
        }
        let violation = |reason: String| Error::NotBisimulation {
            left: u.name(first),
            right: u.name(s),
            reason,
        };
        if u.output(first) != u.output(s) {
            return Err(violation(format!(
                "has outputs {} and {}",
                u.output(first),
                u.output(s)
            )));
        }
        let (sf, ss) = (u.signature(first, &block), u.signature(s, &block));
        if let Some(a) = (0..sf.len()).find(|a| sf[*a] != ss[*a]) {
            return Err(violation(format!(
                "sends different weights into the related classes under `{}`",
                l.alphabet()[a]
            )));
        }
    }

    for &(s, t) in &pairs {
        let v = decide_equiv(l, &l.unit(s), r, &r.unit(t - n1))?;
        if v != Verdict::Equivalent {
            return Ok(false);
        }
    }
    Ok(true)
}
