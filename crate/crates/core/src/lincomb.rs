//! Finite formal linear combinations `Σ rᵢ·xᵢ` with semiring coefficients.
//!
//! A [`LinComb`] is an element of the free semimodule over its key type.
//! Zero coefficients are dropped eagerly, so structural equality coincides
//! with equality in the semimodule, and keys are kept sorted so printing is
//! deterministic.

use std::collections::btree_map::{self, BTreeMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::semiring::{Semiring, Weight};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinComb<K: Ord> {
    semiring: Semiring,
    terms: BTreeMap<K, Weight>,
}

impl<K: Ord> LinComb<K> {
    /// The empty combination.
    pub fn zero(semiring: Semiring) -> Self {
        LinComb {
            semiring,
            terms: BTreeMap::new(),
        }
    }

    /// `{key:1}`, the unit embedding of a single key.
    pub fn unit(semiring: Semiring, key: K) -> Self {
        let mut lc = Self::zero(semiring);
        lc.terms.insert(key, semiring.one());
        lc
    }

    /// Builds a combination, summing repeated keys.
    pub fn from_terms(semiring: Semiring, terms: impl IntoIterator<Item = (K, Weight)>) -> Result<Self> {
        let mut lc = Self::zero(semiring);
        for (k, w) in terms {
            lc.add_term(k, w)?;
        }
        Ok(lc)
    }

    pub fn semiring(&self) -> Semiring {
        self.semiring
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, key: &K) -> Option<&Weight> {
        self.terms.get(key)
    }

    /// The coefficient of `key`, zero when absent.
    pub fn coefficient(&self, key: &K) -> Weight {
        self.terms
            .get(key)
            .cloned()
            .unwrap_or_else(|| self.semiring.zero())
    }

    pub fn iter(&self) -> btree_map::Iter<'_, K, Weight> {
        self.terms.iter()
    }

    pub fn keys(&self) -> btree_map::Keys<'_, K, Weight> {
        self.terms.keys()
    }

    fn check(&self, w: &Weight) -> Result<()> {
        if w.semiring() == self.semiring {
            Ok(())
        } else {
            Err(Error::DomainMismatch {
                left: self.semiring,
                right: w.semiring(),
            })
        }
    }

    /// Adds `w·key` in place.
    pub fn add_term(&mut self, key: K, w: Weight) -> Result<()> {
        self.check(&w)?;
        self.add_term_unchecked(key, w);
        Ok(())
    }

    pub(crate) fn add_term_unchecked(&mut self, key: K, w: Weight) {
        if w.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            btree_map::Entry::Vacant(e) => {
                e.insert(w);
            }
            btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().plus(&w);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    fn same_domain(&self, other: &Self) -> Result<()> {
        if self.semiring == other.semiring {
            Ok(())
        } else {
            Err(Error::DomainMismatch {
                left: self.semiring,
                right: other.semiring,
            })
        }
    }

    /// Pointwise sum.
    pub fn add(&self, other: &Self) -> Result<Self>
    where
        K: Clone,
    {
        self.same_domain(other)?;
        let mut out = self.clone();
        for (k, w) in &other.terms {
            out.add_term_unchecked(k.clone(), w.clone());
        }
        Ok(out)
    }

    /// In-place `self += r·other`.
    pub fn add_scaled(&mut self, r: &Weight, other: &Self) -> Result<()>
    where
        K: Clone,
    {
        self.same_domain(other)?;
        self.check(r)?;
        for (k, w) in &other.terms {
            self.add_term_unchecked(k.clone(), r.times(w));
        }
        Ok(())
    }

    /// Coefficient-wise left multiplication by `r`.
    pub fn scale(&self, r: &Weight) -> Result<Self>
    where
        K: Clone,
    {
        self.check(r)?;
        let mut out = Self::zero(self.semiring);
        for (k, w) in &self.terms {
            out.add_term_unchecked(k.clone(), r.times(w));
        }
        Ok(out)
    }

    /// The unique semimodule homomorphism extending `f`:
    /// `Σ u(x)·f(x)` over the support of `u`.
    pub fn apply<K2, F>(&self, mut f: F) -> Result<LinComb<K2>>
    where
        K: fmt::Display,
        K2: Ord + Clone,
        F: FnMut(&K) -> Option<LinComb<K2>>,
    {
        let mut out = LinComb::zero(self.semiring);
        for (k, w) in &self.terms {
            let image = f(k).ok_or_else(|| Error::MissingKey(k.to_string()))?;
            out.add_scaled(w, &image)?;
        }
        Ok(out)
    }

    /// Renames keys; colliding images are summed.
    pub fn map_keys<K2: Ord>(&self, mut f: impl FnMut(&K) -> K2) -> LinComb<K2> {
        let mut out = LinComb::zero(self.semiring);
        for (k, w) in &self.terms {
            out.add_term_unchecked(f(k), w.clone());
        }
        out
    }

    /// `Σ u(x)·g(x)` for a weight-valued `g` (a linear functional).
    pub fn dot(&self, mut g: impl FnMut(&K) -> Weight) -> Weight {
        let mut acc = self.semiring.zero();
        for (k, w) in &self.terms {
            acc = acc.plus(&w.times(&g(k)));
        }
        acc
    }
}

impl<K: Ord> IntoIterator for LinComb<K> {
    type Item = (K, Weight);
    type IntoIter = btree_map::IntoIter<K, Weight>;

    fn into_iter(self) -> Self::IntoIter {
        self.terms.into_iter()
    }
}

impl<'a, K: Ord> IntoIterator for &'a LinComb<K> {
    type Item = (&'a K, &'a Weight);
    type IntoIter = btree_map::Iter<'a, K, Weight>;

    fn into_iter(self) -> Self::IntoIter {
        self.terms.iter()
    }
}

/// Prints `{k:w, k:w}` in key order, `{}` for zero.
impl<K: Ord + fmt::Display> fmt::Display for LinComb<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, w)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}:{w}")?;
        }
        f.write_str("}")
    }
}

/// Parses the text form `{key:weight, ...}`. Keys are any run of characters
/// other than `:`, `,`, braces and whitespace.
pub fn parse_lincomb(text: &str, semiring: Semiring) -> Result<LinComb<String>> {
    let t = text.trim();
    let inner = t
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .ok_or_else(|| Error::syntax(1, 1, format!("expected `{{key:weight, ...}}`, got `{t}`")))?;
    let mut lc = LinComb::zero(semiring);
    if inner.trim().is_empty() {
        return Ok(lc);
    }
    let mut column = 2;
    for item in inner.split(',') {
        let (k, w) = item.split_once(':').ok_or_else(|| {
            Error::syntax(1, column, format!("expected `key:weight`, got `{}`", item.trim()))
        })?;
        let k = k.trim();
        if k.is_empty() || k.chars().any(|c| c.is_whitespace() || "{}".contains(c)) {
            return Err(Error::syntax(1, column, format!("bad key `{k}`")));
        }
        let w = semiring.parse_weight(w.trim())?;
        lc.add_term(k.to_string(), w)?;
        column += item.len() + 1;
    }
    Ok(lc)
}
