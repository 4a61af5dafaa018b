//! The state graph of a data VASS, handled orbit-wise.
//!
//! An edge orbit is the orbit of a pair of states. The reflexive-transitive
//! closure is computed by extending known path orbits by one edge orbit at a
//! time until nothing new appears; this terminates because pairs of states
//! form finitely many orbits.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::atoms::{canonicalize, Atom, EqualityType, Nominal};
use crate::net::{partial_injections, Dvass, State};

/// Canonical representative of the orbit of a pair of states.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeOrbit {
    pub source: State,
    pub target: State,
}

impl EdgeOrbit {
    pub fn new(source: State, target: State) -> Self {
        let ((source, target), _) = canonicalize(&(source, target));
        Self { source, target }
    }
}

/// Edge orbits of the closure with the length of a shortest path witnessing
/// each of them.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosureTable {
    #[serde(with = "crate::pairs")]
    pub orbits: BTreeMap<EdgeOrbit, usize>,
    pub registers: usize,
}

impl ClosureTable {
    pub fn contains(&self, o: &EdgeOrbit) -> bool {
        self.orbits.contains_key(o)
    }

    pub fn max_witness(&self) -> usize {
        self.orbits.values().copied().max().unwrap_or(0)
    }
}

/// Projection of every transition orbit onto its pair of states.
pub fn edge_orbits(net: &Dvass) -> BTreeSet<EdgeOrbit> {
    net.transitions.iter().map(|t| EdgeOrbit::new(t.source.clone(), t.target.clone())).collect()
}

/// All orbits of pairs `(x, z)` with `(x, y)` in `o1` and `(y, z)` in `o2`.
pub fn compose(o1: &EdgeOrbit, o2: &EdgeOrbit) -> BTreeSet<EdgeOrbit> {
    let (s1, s2) = (&o1.source, &o1.target);
    let (s3, s4) = (&o2.source, &o2.target);
    let mut out = BTreeSet::new();
    if s2.location != s3.location || s2.registers.len() != s3.registers.len() {
        return out;
    }
    if EqualityType::of(&s2.registers) != EqualityType::of(&s3.registers) {
        return out;
    }
    // Glue the middle states together.
    let mut glue: BTreeMap<Atom, Atom> = BTreeMap::new();
    for (x, y) in s3.registers.iter().zip(&s2.registers) {
        if let (Some(a), Some(b)) = (x, y) {
            glue.insert(*a, *b);
        }
    }
    let left_outer: Vec<Atom> = s1.support().difference(&s2.support()).copied().collect();
    let right_outer: Vec<Atom> = s4.support().difference(&s3.support()).copied().collect();
    let used: BTreeSet<Atom> = o1.source.support().union(&o1.target.support()).copied().collect();
    let above = used.iter().next_back().map_or(0, |m| m + 1);
    for choice in partial_injections(right_outer.len(), left_outer.len()) {
        let mut map = glue.clone();
        for (i, a) in right_outer.iter().enumerate() {
            map.insert(*a, choice[i].map_or(above + i as Atom, |j| left_outer[j]));
        }
        let z = s4.rename_with(&|a| map[&a]);
        out.insert(EdgeOrbit::new(s1.clone(), z));
    }
    out
}

/// Identity edge orbits for every location and register equality type.
pub fn identity_orbits(locations: usize, registers: usize) -> BTreeSet<EdgeOrbit> {
    let types = EqualityType::all(registers);
    let mut out = BTreeSet::new();
    for l in 0..locations {
        for ty in &types {
            let s = State { location: l, registers: ty.instantiate(0) };
            out.insert(EdgeOrbit::new(s.clone(), s));
        }
    }
    out
}

/// Reflexive-transitive closure of the state graph of `net`.
pub fn saturate(net: &Dvass) -> ClosureTable {
    saturate_edges(&edge_orbits(net), net.locations.len(), net.registers.len())
}

/// Closure of an explicit edge set over the given signature.
pub fn saturate_edges(edges: &BTreeSet<EdgeOrbit>, locations: usize, registers: usize) -> ClosureTable {
    let mut table = ClosureTable { orbits: BTreeMap::new(), registers };
    let mut queue = VecDeque::new();
    for o in identity_orbits(locations, registers) {
        table.orbits.insert(o.clone(), 0);
        queue.push_back(o);
    }
    let mut by_source: BTreeMap<usize, Vec<&EdgeOrbit>> = BTreeMap::new();
    for e in edges {
        by_source.entry(e.source.location).or_default().push(e);
    }
    while let Some(o) = queue.pop_front() {
        let len = table.orbits[&o];
        for e in by_source.get(&o.target.location).into_iter().flatten() {
            for next in compose(&o, e) {
                if !table.orbits.contains_key(&next) {
                    table.orbits.insert(next.clone(), len + 1);
                    queue.push_back(next);
                }
            }
        }
    }
    table
}

/// Whether the state graph has a path from `s` to `t`.
pub fn path_exists(closure: &ClosureTable, s: &State, t: &State) -> bool {
    closure.contains(&EdgeOrbit::new(s.clone(), t.clone()))
}

/// Number of atoms sufficient for a path between any two states joined in
/// the closure: every step of a shortest witness may introduce at most one
/// state's worth of fresh atoms, plus the endpoints' own atoms.
pub fn path_bound(closure: &ClosureTable) -> usize {
    closure.max_witness() * closure.registers + 2 * closure.registers
}

/// Keeps the orbits whose source is reachable from both endpoints and whose
/// target reaches both endpoints.
pub fn restrict_to_scc(net: &Dvass, closure: &ClosureTable, q: &State, q2: &State) -> Dvass {
    let mut out = net.with_same_signature();
    let keep = net.labelled().filter(|(_, t)| {
        path_exists(closure, q, &t.source)
            && path_exists(closure, &t.target, q)
            && path_exists(closure, q2, &t.source)
            && path_exists(closure, &t.target, q2)
    });
    out.set_transitions(keep);
    out
}
