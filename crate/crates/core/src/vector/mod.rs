//! Sparse integer vectors over plain places and (atom place, atom) pairs,
//! their ω-extension, and the embedding quasi-order.

mod embed;
mod omega;

pub use embed::{embeds, embeds_config, strictly_embeds};
pub use omega::{OmegaConfiguration, OmegaValuation, OmegaValue};

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::atoms::{Atom, Nominal};
use crate::error::{Error, Result};

/// A vector over `H ∪ P×A`. Places are indices into the owning net's name
/// tables. Zero entries are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DataVector {
    pub plain: BTreeMap<usize, i64>,
    #[serde(with = "crate::pairs")]
    pub data: BTreeMap<(usize, Atom), i64>,
}

impl DataVector {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn unit_plain(h: usize) -> Self {
        let mut v = Self::zero();
        v.add_plain(h, 1);
        v
    }

    pub fn unit_data(p: usize, a: Atom) -> Self {
        let mut v = Self::zero();
        v.add_data(p, a, 1);
        v
    }

    pub fn add_plain(&mut self, h: usize, n: i64) {
        let e = self.plain.entry(h).or_insert(0);
        *e += n;
        if *e == 0 {
            self.plain.remove(&h);
        }
    }

    pub fn add_data(&mut self, p: usize, a: Atom, n: i64) {
        let e = self.data.entry((p, a)).or_insert(0);
        *e += n;
        if *e == 0 {
            self.data.remove(&(p, a));
        }
    }

    pub fn plain_at(&self, h: usize) -> i64 {
        self.plain.get(&h).copied().unwrap_or(0)
    }

    pub fn data_at(&self, p: usize, a: Atom) -> i64 {
        self.data.get(&(p, a)).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.plain.is_empty() && self.data.is_empty()
    }

    pub fn is_nonneg(&self) -> bool {
        self.plain.values().all(|&n| n >= 0) && self.data.values().all(|&n| n >= 0)
    }

    pub fn scale(&self, k: i64) -> Self {
        if k == 0 {
            return Self::zero();
        }
        Self {
            plain: self.plain.iter().map(|(h, n)| (*h, n * k)).collect(),
            data: self.data.iter().map(|(x, n)| (*x, n * k)).collect(),
        }
    }

    /// Atoms with a nonzero entry on some atom place.
    pub fn support(&self) -> BTreeSet<Atom> {
        self.data.keys().map(|(_, a)| *a).collect()
    }

    /// Total number of tokens on atom place `p`, counting positive entries.
    pub fn place_size(&self, p: usize) -> Result<u64> {
        if !self.is_nonneg() {
            return Err(Error::NegativeVector);
        }
        Ok(self.data.iter().filter(|((q, _), _)| *q == p).map(|(_, n)| *n as u64).sum())
    }

    /// Pointwise `self ≤ other`.
    pub fn le(&self, other: &DataVector) -> bool {
        let keys_p: BTreeSet<usize> = self.plain.keys().chain(other.plain.keys()).copied().collect();
        let keys_d: BTreeSet<(usize, Atom)> =
            self.data.keys().chain(other.data.keys()).copied().collect();
        keys_p.into_iter().all(|h| self.plain_at(h) <= other.plain_at(h))
            && keys_d.into_iter().all(|(p, a)| self.data_at(p, a) <= other.data_at(p, a))
    }

    /// Entries on atom place `p`, by atom.
    pub fn row(&self, p: usize) -> BTreeMap<Atom, i64> {
        self.data.iter().filter(|((q, _), _)| *q == p).map(|((_, a), n)| (*a, *n)).collect()
    }

    /// Positive and negative parts, both nonnegative.
    pub fn split_signs(&self) -> (DataVector, DataVector) {
        let mut pos = DataVector::zero();
        let mut neg = DataVector::zero();
        for (h, n) in &self.plain {
            if *n > 0 { pos.add_plain(*h, *n) } else { neg.add_plain(*h, -n) }
        }
        for ((p, a), n) in &self.data {
            if *n > 0 { pos.add_data(*p, *a, *n) } else { neg.add_data(*p, *a, -n) }
        }
        (pos, neg)
    }

    /// Renumbers places; entries mapped to `None` are dropped.
    pub fn remap_places(
        &self,
        plain: impl Fn(usize) -> Option<usize>,
        atom: impl Fn(usize) -> Option<usize>,
    ) -> DataVector {
        let mut out = DataVector::zero();
        for (h, n) in &self.plain {
            if let Some(h2) = plain(*h) {
                out.add_plain(h2, *n);
            }
        }
        for ((p, a), n) in &self.data {
            if let Some(p2) = atom(*p) {
                out.add_data(p2, *a, *n);
            }
        }
        out
    }

    /// Sum of all plain entries and all data entries.
    pub fn total(&self) -> i64 {
        self.plain.values().sum::<i64>() + self.data.values().sum::<i64>()
    }
}

impl Add for &DataVector {
    type Output = DataVector;
    fn add(self, rhs: &DataVector) -> DataVector {
        let mut out = self.clone();
        for (h, n) in &rhs.plain {
            out.add_plain(*h, *n);
        }
        for ((p, a), n) in &rhs.data {
            out.add_data(*p, *a, *n);
        }
        out
    }
}

impl Sub for &DataVector {
    type Output = DataVector;
    fn sub(self, rhs: &DataVector) -> DataVector {
        self + &(-rhs)
    }
}

impl Neg for &DataVector {
    type Output = DataVector;
    fn neg(self) -> DataVector {
        self.scale(-1)
    }
}

impl Nominal for DataVector {
    fn support(&self) -> BTreeSet<Atom> {
        DataVector::support(self)
    }

    fn rename_with(&self, f: &dyn Fn(Atom) -> Atom) -> Self {
        Self {
            plain: self.plain.clone(),
            data: self.data.iter().map(|((p, a), n)| ((*p, f(*a)), *n)).collect(),
        }
    }

    fn atom_signatures(&self) -> HashMap<Atom, Vec<i64>> {
        let mut out: HashMap<Atom, Vec<i64>> = HashMap::new();
        for ((p, a), n) in &self.data {
            let s = out.entry(*a).or_default();
            s.push(*p as i64);
            s.push(*n);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::{apply, canonicalize, Renaming};

    fn v(entries: &[(usize, Atom, i64)]) -> DataVector {
        let mut out = DataVector::zero();
        for &(p, a, n) in entries {
            out.add_data(p, a, n);
        }
        out
    }

    #[test]
    fn group_laws() {
        let x = v(&[(0, 1, 2), (1, 3, -1)]);
        assert_eq!(&x + &DataVector::zero(), x);
        assert!((&x - &x).is_zero());
    }

    #[test]
    fn support_ignores_plain() {
        let mut x = DataVector::unit_plain(0);
        assert!(x.support().is_empty());
        x.add_data(0, 4, 1);
        assert_eq!(x.support(), [4].into_iter().collect());
    }

    #[test]
    fn place_size_rejects_negative() {
        assert_eq!(v(&[(0, 1, 2), (0, 2, 1)]).place_size(0), Ok(3));
        assert_eq!(v(&[(0, 1, -1)]).place_size(0), Err(Error::NegativeVector));
    }

    #[test]
    fn swap_of_symmetric_pair_is_noop() {
        let x = v(&[(0, 5, 1), (0, 9, 1)]);
        assert_eq!(apply(&Renaming::transposition(5, 9), &x), x);
        assert_eq!(canonicalize(&x).0, v(&[(0, 0, 1), (0, 1, 1)]));
    }
}
