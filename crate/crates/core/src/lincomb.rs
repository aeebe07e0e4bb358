//! Finite-support formal linear combinations.

use std::collections::btree_map::{self, BTreeMap};
use std::collections::BTreeSet;
use std::fmt;

use crate::semiring::Semiring;

/// A finite formal sum `Σ a_i · k_i` with nonzero coefficients.
///
/// Zero coefficients are pruned eagerly, so two combinations are equal iff
/// their maps are equal. Iteration follows the total order on `K`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LinComb<K: Ord, C> {
    terms: BTreeMap<K, C>,
}

impl<K: Ord, C> Default for LinComb<K, C> {
    fn default() -> Self {
        LinComb {
            terms: BTreeMap::new(),
        }
    }
}

impl<K: Ord + Clone, C: Semiring> LinComb<K, C> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn single(key: K) -> Self {
        Self::scaled(C::one(), key)
    }

    pub fn scaled(coeff: C, key: K) -> Self {
        let mut out = Self::zero();
        out.add_term(coeff, key);
        out
    }

    pub fn add_term(&mut self, coeff: C, key: K) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&coeff);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (k, c) in &other.terms {
            self.add_term(c.clone(), k.clone());
        }
    }

    /// Adds `coeff · other`.
    pub fn add_scaled(&mut self, coeff: &C, other: &Self) {
        for (k, c) in &other.terms {
            self.add_term(coeff.mul(c), k.clone());
        }
    }

    pub fn plus(mut self, other: &Self) -> Self {
        self.add_assign(other);
        self
    }

    pub fn scale(&self, coeff: &C) -> Self {
        let mut out = Self::zero();
        out.add_scaled(coeff, self);
        out
    }

    pub fn coeff(&self, key: &K) -> C {
        self.terms.get(key).cloned().unwrap_or_else(C::zero)
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

    pub fn iter(&self) -> impl Iterator<Item = (&K, &C)> {
        self.terms.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &K> {
        self.terms.keys()
    }

    pub fn support_set(&self) -> BTreeSet<K> {
        self.terms.keys().cloned().collect()
    }

    pub fn contains(&self, key: &K) -> bool {
        self.terms.contains_key(key)
    }

    /// Applies a linear map given on basis elements.
    pub fn map_linear<K2: Ord + Clone>(
        &self,
        mut f: impl FnMut(&K) -> LinComb<K2, C>,
    ) -> LinComb<K2, C> {
        let mut out = LinComb::zero();
        for (k, c) in &self.terms {
            out.add_scaled(c, &f(k));
        }
        out
    }

    /// Keeps the terms satisfying the predicate.
    pub fn filter(&self, mut keep: impl FnMut(&K) -> bool) -> Self {
        LinComb {
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| keep(k))
                .map(|(k, c)| (k.clone(), c.clone()))
                .collect(),
        }
    }

    /// Sum of all coefficients.
    pub fn mass(&self) -> C {
        self.terms.values().fold(C::zero(), |acc, c| acc.add(c))
    }

    /// Re-expresses the coefficients in another semiring.
    pub fn convert<C2: Semiring>(&self, mut f: impl FnMut(&C) -> C2) -> LinComb<K, C2> {
        let mut out = LinComb::zero();
        for (k, c) in &self.terms {
            out.add_term(f(c), k.clone());
        }
        out
    }
}

impl<K: Ord + Clone, C: Semiring> FromIterator<(K, C)> for LinComb<K, C> {
    fn from_iter<I: IntoIterator<Item = (K, C)>>(iter: I) -> Self {
        let mut out = Self::zero();
        for (k, c) in iter {
            out.add_term(c, k);
        }
        out
    }
}

impl<K: Ord + fmt::Display, C: Semiring> fmt::Display for LinComb<K, C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (k, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{c}*{k}")?;
        }
        Ok(())
    }
}

impl<K: Ord + fmt::Display, C: Semiring> fmt::Debug for LinComb<K, C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semiring::Rational;

    #[test]
    fn zero_pruning_makes_equality_structural() {
        let mut s: LinComb<&str, Rational> = LinComb::zero();
        s.add_term(Rational::new(1, 2), "x");
        s.add_term(Rational::zero(), "y");
        assert_eq!(s.len(), 1);
        assert!(!s.contains(&"y"));
        s.add_term(Rational::new(1, 2), "x");
        assert_eq!(s, LinComb::single("x"));
    }

    #[test]
    fn display() {
        let s: LinComb<&str, Rational> = [("x", Rational::new(1, 2)), ("y", Rational::one())]
            .into_iter()
            .collect();
        assert_eq!(s.to_string(), "1/2*x + 1*y");
        assert_eq!(LinComb::<&str, Rational>::zero().to_string(), "0");
    }
}
