//! Atoms, finite-support renamings, equality types and canonical forms.
//!
//! Atoms are naturals compared only by equality. Their numeric order is used
//! solely to break ties when choosing canonical representatives.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use itertools::Itertools;
use serde::{Deserialize, Serialize};

pub type Atom = u32;

/// A permutation of atoms that moves only finitely many of them.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Renaming {
    map: BTreeMap<Atom, Atom>,
}

impl Renaming {
    pub fn identity() -> Self {
        Self::default()
    }

    /// Builds a renaming from explicit pairs. Returns `None` unless the pairs
    /// form a bijection of their domain onto the same set.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Atom, Atom)>) -> Option<Self> {
        let mut map = BTreeMap::new();
        for (a, b) in pairs {
            if let Some(prev) = map.insert(a, b) {
                if prev != b {
                    return None;
                }
            }
        }
        let dom: BTreeSet<Atom> = map.keys().copied().collect();
        let img: BTreeSet<Atom> = map.values().copied().collect();
        if dom != img || img.len() != map.len() {
            return None;
        }
        map.retain(|a, b| a != b);
        Some(Self { map })
    }

    /// Extends an injective partial map to a permutation with finite support.
    /// Atoms of the image that are not in the domain are sent to the domain
    /// atoms left uncovered by the image.
    ///
    /// Panics if `pairs` is not injective.
    pub fn extend_injection(pairs: impl IntoIterator<Item = (Atom, Atom)>) -> Self {
        let mut map = BTreeMap::new();
        for (a, b) in pairs {
            if let Some(prev) = map.insert(a, b) {
                assert_eq!(prev, b, "not a function");
            }
        }
        let dom: BTreeSet<Atom> = map.keys().copied().collect();
        let img: BTreeSet<Atom> = map.values().copied().collect();
        assert_eq!(img.len(), map.len(), "not injective");
        let open: Vec<Atom> = img.difference(&dom).copied().collect();
        let holes: Vec<Atom> = dom.difference(&img).copied().collect();
        for (a, b) in open.into_iter().zip(holes) {
            map.insert(a, b);
        }
        map.retain(|a, b| a != b);
        Self { map }
    }

    pub fn get(&self, a: Atom) -> Atom {
        self.map.get(&a).copied().unwrap_or(a)
    }

    pub fn is_identity(&self) -> bool {
        self.map.is_empty()
    }

    /// Atoms moved by this renaming.
    pub fn support(&self) -> BTreeSet<Atom> {
        self.map.keys().copied().collect()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (Atom, Atom)> + '_ {
        self.map.iter().map(|(a, b)| (*a, *b))
    }

    /// `self ∘ other`: first `other`, then `self`.
    pub fn compose(&self, other: &Renaming) -> Renaming {
        let keys: BTreeSet<Atom> = self.map.keys().chain(other.map.keys()).copied().collect();
        let map = keys
            .into_iter()
            .map(|a| (a, self.get(other.get(a))))
            .filter(|(a, b)| a != b)
            .collect();
        Renaming { map }
    }

    pub fn inverse(&self) -> Renaming {
        Renaming { map: self.map.iter().map(|(a, b)| (*b, *a)).collect() }
    }

    pub fn transposition(a: Atom, b: Atom) -> Renaming {
        if a == b {
            return Renaming::identity();
        }
        Renaming { map: [(a, b), (b, a)].into_iter().collect() }
    }
}

/// Values on which renamings act.
///
/// `atom_signatures` must be equivariant: the signature of `σ(a)` in `σ(x)`
/// equals the signature of `a` in `x`. It only refines the canonical search.
pub trait Nominal: Clone + Ord {
    fn support(&self) -> BTreeSet<Atom>;

    fn rename_with(&self, f: &dyn Fn(Atom) -> Atom) -> Self;

    fn atom_signatures(&self) -> HashMap<Atom, Vec<i64>> {
        self.support().into_iter().map(|a| (a, Vec::new())).collect()
    }
}

pub fn apply<T: Nominal>(r: &Renaming, x: &T) -> T {
    if r.is_identity() {
        return x.clone();
    }
    x.rename_with(&|a| r.get(a))
}

impl Nominal for Atom {
    fn support(&self) -> BTreeSet<Atom> {
        [*self].into_iter().collect()
    }
    fn rename_with(&self, f: &dyn Fn(Atom) -> Atom) -> Self {
        f(*self)
    }
}

impl<T: Nominal> Nominal for Option<T> {
    fn support(&self) -> BTreeSet<Atom> {
        self.as_ref().map(|x| x.support()).unwrap_or_default()
    }
    fn rename_with(&self, f: &dyn Fn(Atom) -> Atom) -> Self {
        self.as_ref().map(|x| x.rename_with(f))
    }
    fn atom_signatures(&self) -> HashMap<Atom, Vec<i64>> {
        self.as_ref().map(|x| x.atom_signatures()).unwrap_or_default()
    }
}

fn merge_signatures(parts: Vec<HashMap<Atom, Vec<i64>>>) -> HashMap<Atom, Vec<i64>> {
    let atoms: BTreeSet<Atom> = parts.iter().flat_map(|m| m.keys().copied()).collect();
    atoms
        .into_iter()
        .map(|a| {
            let mut sig = Vec::new();
            for part in &parts {
                match part.get(&a) {
                    Some(s) => {
                        sig.push(s.len() as i64 + 1);
                        sig.extend_from_slice(s);
                    }
                    None => sig.push(0),
                }
            }
            (a, sig)
        })
        .collect()
}

impl<A: Nominal, B: Nominal> Nominal for (A, B) {
    fn support(&self) -> BTreeSet<Atom> {
        let mut s = self.0.support();
        s.extend(self.1.support());
        s
    }
    fn rename_with(&self, f: &dyn Fn(Atom) -> Atom) -> Self {
        (self.0.rename_with(f), self.1.rename_with(f))
    }
    fn atom_signatures(&self) -> HashMap<Atom, Vec<i64>> {
        merge_signatures(vec![self.0.atom_signatures(), self.1.atom_signatures()])
    }
}

impl<A: Nominal, B: Nominal, C: Nominal> Nominal for (A, B, C) {
    fn support(&self) -> BTreeSet<Atom> {
        let mut s = self.0.support();
        s.extend(self.1.support());
        s.extend(self.2.support());
        s
    }
    fn rename_with(&self, f: &dyn Fn(Atom) -> Atom) -> Self {
        (self.0.rename_with(f), self.1.rename_with(f), self.2.rename_with(f))
    }
    fn atom_signatures(&self) -> HashMap<Atom, Vec<i64>> {
        merge_signatures(vec![
            self.0.atom_signatures(),
            self.1.atom_signatures(),
            self.2.atom_signatures(),
        ])
    }
}

impl<T: Nominal> Nominal for Vec<T> {
    fn support(&self) -> BTreeSet<Atom> {
        self.iter().flat_map(|x| x.support()).collect()
    }
    fn rename_with(&self, f: &dyn Fn(Atom) -> Atom) -> Self {
        self.iter().map(|x| x.rename_with(f)).collect()
    }
    fn atom_signatures(&self) -> HashMap<Atom, Vec<i64>> {
        merge_signatures(self.iter().map(|x| x.atom_signatures()).collect())
    }
}

/// Canonical representative of the orbit of `x`, and the renaming taking `x`
/// to it.
pub fn canonicalize<T: Nominal>(x: &T) -> (T, Renaming) {
    canonicalize_fixing(x, &BTreeSet::new())
}

/// Canonical representative of the orbit of `x` under renamings that fix
/// every atom of `fixed`.
///
/// Moved atoms are sent to the smallest naturals outside `fixed`. Among all
/// such assignments the result is the least value in the order of `T`,
/// restricted to assignments that list atoms by increasing signature.
/// Blocks of equal-signature atoms that are pairwise interchangeable are not
/// permuted, since every order of them gives the same value.
pub fn canonicalize_fixing<T: Nominal>(x: &T, fixed: &BTreeSet<Atom>) -> (T, Renaming) {
    let supp: Vec<Atom> = x.support().into_iter().filter(|a| !fixed.contains(a)).collect();
    if supp.is_empty() {
        return (x.clone(), Renaming::identity());
    }
    let targets: Vec<Atom> = (0..).filter(|a| !fixed.contains(a)).take(supp.len()).collect();
    let sigs = x.atom_signatures();
    let empty = Vec::new();
    let mut order = supp.clone();
    order.sort_by(|a, b| {
        sigs.get(a).unwrap_or(&empty).cmp(sigs.get(b).unwrap_or(&empty)).then(a.cmp(b))
    });
    let cells: Vec<Vec<Atom>> = order
        .iter()
        .copied()
        .chunk_by(|a| sigs.get(a).unwrap_or(&empty).clone())
        .into_iter()
        .map(|(_, g)| g.collect())
        .collect();

    let rigid: Vec<usize> = cells
        .iter()
        .enumerate()
        .filter(|(_, cell)| {
            cell.len() > 1
                && cell[1..].iter().any(|&b| apply(&Renaming::transposition(cell[0], b), x) != *x)
        })
        .map(|(i, _)| i)
        .collect();

    let encode = |order: &[Atom]| -> (T, Renaming) {
        let r = Renaming::extend_injection(order.iter().copied().zip(targets.iter().copied()));
        (apply(&r, x), r)
    };

    if rigid.is_empty() {
        return encode(&order);
    }

    let mut best: Option<(T, Renaming)> = None;
    let per_cell: Vec<Vec<Vec<Atom>>> = rigid
        .iter()
        .map(|&i| cells[i].iter().copied().permutations(cells[i].len()).collect())
        .collect();
    for choice in per_cell.iter().map(|v| v.iter()).multi_cartesian_product() {
        let mut cs = cells.clone();
        for (k, &i) in rigid.iter().enumerate() {
            cs[i] = choice[k].clone();
        }
        let flat: Vec<Atom> = cs.concat();
        let cand = encode(&flat);
        if best.as_ref().map_or(true, |b| cand.0 < b.0) {
            best = Some(cand);
        }
    }
    best.expect("at least one ordering")
}

pub fn same_orbit<T: Nominal>(x: &T, y: &T) -> bool {
    canonicalize(x).0 == canonicalize(y).0
}

/// Partition of the positions of a tuple by equality of their entries, with
/// the empty positions kept apart.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EqualityType {
    /// Blocks of non-empty positions, ordered by least member.
    pub blocks: Vec<Vec<usize>>,
    /// Positions holding no atom.
    pub empty: BTreeSet<usize>,
}

impl EqualityType {
    pub fn of(tuple: &[Option<Atom>]) -> Self {
        let mut blocks: Vec<(Atom, Vec<usize>)> = Vec::new();
        let mut empty = BTreeSet::new();
        for (i, x) in tuple.iter().enumerate() {
            match x {
                None => {
                    empty.insert(i);
                }
                Some(a) => match blocks.iter_mut().find(|(b, _)| b == a) {
                    Some((_, v)) => v.push(i),
                    None => blocks.push((*a, vec![i])),
                },
            }
        }
        Self { blocks: blocks.into_iter().map(|(_, v)| v).collect(), empty }
    }

    pub fn len(&self) -> usize {
        self.empty.len() + self.blocks.iter().map(Vec::len).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// A tuple of this type, using atom `first + i` for block `i`.
    pub fn instantiate(&self, first: Atom) -> Vec<Option<Atom>> {
        let mut out = vec![None; self.len()];
        for (i, block) in self.blocks.iter().enumerate() {
            for &pos in block {
                out[pos] = Some(first + i as Atom);
            }
        }
        out
    }

    /// Every equality type of tuples of length `n`.
    pub fn all(n: usize) -> Vec<EqualityType> {
        let mut out = Vec::new();
        for mask in 0u32..(1 << n) {
            let present: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            let empty = (0..n).filter(|i| mask & (1 << i) == 0).collect::<BTreeSet<_>>();
            for labels in set_partitions(present.len()) {
                let k = labels.iter().copied().max().map_or(0, |m| m + 1);
                let mut blocks = vec![Vec::new(); k];
                for (j, &l) in labels.iter().enumerate() {
                    blocks[l].push(present[j]);
                }
                out.push(EqualityType { blocks, empty: empty.clone() });
            }
        }
        out
    }
}

/// All set partitions of `0..n` as restricted growth strings: entry `i` is
/// the block of element `i`, blocks numbered by first occurrence.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(i: usize, n: usize, cur: &mut Vec<usize>, max: usize, out: &mut Vec<Vec<usize>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        for b in 0..=max {
            cur.push(b);
            go(i + 1, n, cur, if b == max { max + 1 } else { max }, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, &mut Vec::new(), 0, &mut out);
    out
}

/// Atoms not in `used`, in increasing order.
pub fn fresh_atoms(used: &BTreeSet<Atom>, count: usize) -> Vec<Atom> {
    (0..).filter(|a| !used.contains(a)).take(count).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extend_injection_is_a_permutation() {
        let r = Renaming::extend_injection([(5, 0), (9, 1)]);
        assert_eq!(r.get(5), 0);
        assert_eq!(r.get(9), 1);
        let img: BTreeSet<Atom> = [0, 1, 5, 9].iter().map(|&a| r.get(a)).collect();
        assert_eq!(img, [0, 1, 5, 9].into_iter().collect());
    }

    #[test]
    fn from_pairs_rejects_non_bijections() {
        assert!(Renaming::from_pairs([(1, 2)]).is_none());
        assert!(Renaming::from_pairs([(1, 2), (2, 1)]).is_some());
        assert!(Renaming::from_pairs([(1, 2), (3, 2)]).is_none());
    }

    #[test]
    fn compose_and_inverse() {
        let r = Renaming::transposition(1, 2);
        let s = Renaming::transposition(2, 3);
        let rs = r.compose(&s);
        assert_eq!(rs.get(3), 1);
        assert_eq!(rs.compose(&rs.inverse()), Renaming::identity());
    }

    #[test]
    fn set_partition_counts_are_bell_numbers() {
        let bell: Vec<usize> = (0..6).map(|n| set_partitions(n).len()).collect();
        assert_eq!(bell, vec![1, 1, 2, 5, 15, 52]);
    }

    #[test]
    fn equality_type_round_trip() {
        let t = vec![Some(7), None, Some(3), Some(7)];
        let ty = EqualityType::of(&t);
        assert_eq!(ty.blocks, vec![vec![0, 3], vec![2]]);
        assert_eq!(EqualityType::of(&ty.instantiate(0)), ty);
        // Σ_k C(3,k)·Bell(k) = 1 + 3 + 6 + 5
        assert_eq!(EqualityType::all(3).len(), 15);
    }

    #[test]
    fn canonical_tuple_of_atoms() {
        let (c, r) = canonicalize(&vec![42u32, 7, 42]);
        // 7 occurs once, 42 twice; the rarer atom is numbered first
        assert_eq!(c, vec![1, 0, 1]);
        assert_eq!(canonicalize(&vec![3u32, 8, 3]).0, c);
        assert_eq!(apply(&r, &vec![42u32, 7, 42]), c);
    }

    #[test]
    fn canonical_fixing_keeps_fixed_atoms() {
        let fixed: BTreeSet<Atom> = [0].into_iter().collect();
        let (c, _) = canonicalize_fixing(&vec![0u32, 9], &fixed);
        assert_eq!(c, vec![0, 1]);
        let (c, _) = canonicalize_fixing(&vec![9u32, 0], &fixed);
        assert_eq!(c, vec![1, 0]);
    }
}
