//! Reduction of a bi-reachability instance to one whose endpoints are states
//! with empty registers and zero markings, plus net reversal.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Configuration, Dvass, State, Transition, RESERVED_PREFIX};
use crate::atoms::{set_partitions, Atom, Nominal};
use crate::vector::DataVector;

/// Reverses every orbit: `(s, v, s')` becomes `(s', -v, s)`.
pub fn reverse(net: &Dvass) -> Dvass {
    let mut out = net.with_same_signature();
    out.set_transitions(net.labelled().map(|(l, t)| (l, t.reversed())));
    out
}

fn stem(name: &str) -> &str {
    name.strip_prefix(RESERVED_PREFIX).unwrap_or(name)
}

/// A register-free net simulating registers by atom places holding one token
/// each. A second copy of every register receives the written values, and a
/// barred copy of every location flashes them back, so that reading and
/// rewriting the same atom cannot cancel out.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterElimination {
    pub net: Dvass,
    /// Number of original locations and registers.
    pub base_locations: usize,
    pub base_registers: usize,
    /// Atom place holding register `r`, and its barred copy.
    pub register_place: Vec<usize>,
    pub bar_place: Vec<usize>,
}

impl RegisterElimination {
    /// Location for original location `l`, barred or not, where `mask` has
    /// bit `i` set iff register `i` is empty.
    pub fn location(&self, l: usize, barred: bool, mask: usize) -> usize {
        (l * 2 + barred as usize) * (1 << self.base_registers) + mask
    }

    /// Inverse of [`Self::location`].
    pub fn decode_location(&self, loc: usize) -> (usize, bool, usize) {
        let width = 1 << self.base_registers;
        let mask = loc % width;
        let lb = loc / width;
        (lb / 2, lb % 2 == 1, mask)
    }

    pub fn empty_mask(s: &State) -> usize {
        s.registers.iter().enumerate().filter(|(_, x)| x.is_none()).map(|(i, _)| 1 << i).sum()
    }

    fn register_vector(&self, s: &State, places: &[usize]) -> DataVector {
        let mut v = DataVector::zero();
        for (i, x) in s.registers.iter().enumerate() {
            if let Some(a) = x {
                v.add_data(places[i], *a, 1);
            }
        }
        v
    }

    /// The configuration of the new net corresponding to `c`.
    pub fn encode(&self, c: &Configuration) -> Configuration {
        let loc = self.location(c.state.location, false, Self::empty_mask(&c.state));
        let marking = &c.marking + &self.register_vector(&c.state, &self.register_place);
        Configuration { state: State::empty(loc, 0), marking }
    }
}

/// Replaces registers by atom places, locations by pairs (location, set of
/// empty registers) in a plain and a barred copy.
pub fn eliminate_registers(net: &Dvass) -> RegisterElimination {
    let nr = net.registers.len();
    let mut out = Dvass::new(net.name.clone(), Vec::new(), Vec::new(), net.plain_places.clone(), net.atom_places.clone());
    let mut elim = RegisterElimination {
        net: Dvass::new("", Vec::new(), Vec::new(), Vec::new(), Vec::new()),
        base_locations: net.locations.len(),
        base_registers: nr,
        register_place: Vec::new(),
        bar_place: Vec::new(),
    };
    for r in &net.registers {
        elim.register_place.push(out.atom_places.len());
        out.atom_places.push(r.clone());
    }
    for r in &net.registers {
        let name = out.fresh_name(&format!("{}.bar", stem(r)));
        elim.bar_place.push(out.atom_places.len());
        out.atom_places.push(name);
    }
    for l in &net.locations {
        for barred in [false, true] {
            for mask in 0..(1usize << nr) {
                let bar = if barred { ".bar" } else { "" };
                let name = out.fresh_name(&format!("{}{bar}@{mask}", stem(l)));
                out.locations.push(name);
            }
        }
    }

    let mut items = Vec::new();
    let mut landing: BTreeSet<(usize, usize)> = BTreeSet::new();
    for (label, t) in net.labelled() {
        let src_mask = RegisterElimination::empty_mask(&t.source);
        let tgt_mask = RegisterElimination::empty_mask(&t.target);
        let effect = &(&t.effect - &elim.register_vector(&t.source, &elim.register_place))
            + &elim.register_vector(&t.target, &elim.bar_place);
        let source = State::empty(elim.location(t.source.location, false, src_mask), 0);
        let target = State::empty(elim.location(t.target.location, true, tgt_mask), 0);
        landing.insert((t.target.location, tgt_mask));
        items.push((label, Transition { source, effect, target }));
    }
    for (l, mask) in landing {
        let full: Vec<usize> = (0..nr).filter(|i| mask & (1 << i) == 0).collect();
        for labels in set_partitions(full.len()) {
            let mut effect = DataVector::zero();
            for (j, &r) in full.iter().enumerate() {
                let a = labels[j] as Atom;
                effect.add_data(elim.register_place[r], a, 1);
                effect.add_data(elim.bar_place[r], a, -1);
            }
            let source = State::empty(elim.location(l, true, mask), 0);
            let target = State::empty(elim.location(l, false, mask), 0);
            let label = format!("{}flash_{}_{mask}", RESERVED_PREFIX, stem(&net.locations[l]));
            items.push((label, Transition { source, effect, target }));
        }
    }
    out.set_transitions(items);
    elim.net = out;
    elim
}

/// Moves the atoms of `fixed` out of the atom universe: every coordinate
/// `(p, a)` with `a ∈ fixed` becomes a plain place. The net must be
/// register-free. Returns the net and the plain place of each `(p, a)`.
pub fn atoms_to_plain(net: &Dvass, fixed: &BTreeSet<Atom>) -> (Dvass, BTreeMap<(usize, Atom), usize>) {
    assert!(net.registers.is_empty(), "atoms_to_plain needs a register-free net");
    let mut out = net.with_same_signature();
    let mut index = BTreeMap::new();
    for (p, pname) in net.atom_places.iter().enumerate() {
        for (k, a) in fixed.iter().enumerate() {
            let name = out.fresh_name(&format!("{}@{k}", stem(pname)));
            index.insert((p, *a), out.plain_places.len());
            out.plain_places.push(name);
        }
    }
    let pool: Vec<Atom> = fixed.iter().copied().collect();
    let above = pool.iter().max().map_or(0, |m| m + 1);
    let mut items = Vec::new();
    for (label, t) in net.labelled() {
        let supp: Vec<Atom> = t.support().into_iter().collect();
        for choice in partial_injections(supp.len(), pool.len()) {
            let map: BTreeMap<Atom, Atom> = supp
                .iter()
                .enumerate()
                .map(|(i, a)| (*a, choice[i].map_or(above + i as Atom, |j| pool[j])))
                .collect();
            let inst = t.rename_with(&|a| map[&a]);
            let mut effect = DataVector::zero();
            for (h, n) in &inst.effect.plain {
                effect.add_plain(*h, *n);
            }
            for ((p, a), n) in &inst.effect.data {
                match index.get(&(*p, *a)) {
                    Some(&h) => effect.add_plain(h, *n),
                    None => effect.add_data(*p, *a, *n),
                }
            }
            items.push((label.clone(), Transition { source: inst.source, effect, target: inst.target }));
        }
    }
    out.set_transitions(items);
    (out, index)
}

/// Partial injections from `0..n` into `0..m`, as one optional image per
/// element.
pub fn partial_injections(n: usize, m: usize) -> Vec<Vec<Option<usize>>> {
    fn go(i: usize, n: usize, used: &mut Vec<bool>, cur: &mut Vec<Option<usize>>, out: &mut Vec<Vec<Option<usize>>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        cur.push(None);
        go(i + 1, n, used, cur, out);
        cur.pop();
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                cur.push(Some(j));
                go(i + 1, n, used, cur, out);
                cur.pop();
                used[j] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(0, n, &mut vec![false; m], &mut Vec::new(), &mut out);
    out
}

/// An instance whose endpoints are `source(0)` and `target(0)` with empty
/// register valuations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Normalized {
    pub net: Dvass,
    pub source: State,
    pub target: State,
    /// Names of the steps that were applied.
    pub steps: Vec<String>,
}

/// Brings `src`, `tgt` into the form `q(0)`, `q'(0)` with empty registers,
/// preserving bi-reachability. Steps with nothing to do are skipped.
pub fn normalize(net: &Dvass, src: &Configuration, tgt: &Configuration) -> Normalized {
    let mut steps = Vec::new();
    let mut net = net.clone();
    let (mut src, mut tgt) = (src.clone(), tgt.clone());

    let data_support: BTreeSet<Atom> = src.marking.support().union(&tgt.marking.support()).copied().collect();
    let registers_used = !src.state.is_empty_valuation() || !tgt.state.is_empty_valuation();
    if !net.registers.is_empty() && (registers_used || !data_support.is_empty()) {
        let elim = eliminate_registers(&net);
        src = elim.encode(&src);
        tgt = elim.encode(&tgt);
        net = elim.net;
        steps.push("registers".to_string());
    }

    let fixed: BTreeSet<Atom> = src.marking.support().union(&tgt.marking.support()).copied().collect();
    if !fixed.is_empty() {
        let (moved, index) = atoms_to_plain(&net, &fixed);
        let convert = |c: &Configuration| {
            let mut m = DataVector::zero();
            for (h, n) in &c.marking.plain {
                m.add_plain(*h, *n);
            }
            for ((p, a), n) in &c.marking.data {
                m.add_plain(index[&(*p, *a)], *n);
            }
            Configuration { state: c.state.clone(), marking: m }
        };
        src = convert(&src);
        tgt = convert(&tgt);
        net = moved;
        steps.push("atoms".to_string());
    }

    if !src.marking.is_zero() || !tgt.marking.is_zero() {
        let nr = net.registers.len();
        let init = net.locations.len();
        let name = net.fresh_name("init");
        net.locations.push(name);
        let fin = net.locations.len();
        let name = net.fresh_name("final");
        net.locations.push(name);
        let bar_src = State::empty(init, nr);
        let bar_tgt = State::empty(fin, nr);
        let (u, u2) = (&src.marking, &tgt.marking);
        let brackets = [
            ("enter", Transition { source: bar_src.clone(), effect: u.clone(), target: src.state.clone() }),
            ("leave", Transition { source: tgt.state.clone(), effect: -u2, target: bar_tgt.clone() }),
            ("unenter", Transition { source: src.state.clone(), effect: -u, target: bar_src.clone() }),
            ("unleave", Transition { source: bar_tgt.clone(), effect: u2.clone(), target: tgt.state.clone() }),
        ];
        let mut items: Vec<(String, Transition)> = net.labelled().collect();
        for (l, t) in brackets {
            items.push((format!("{RESERVED_PREFIX}{l}"), t));
        }
        net.set_transitions(items);
        src = Configuration { state: bar_src, marking: DataVector::zero() };
        tgt = Configuration { state: bar_tgt, marking: DataVector::zero() };
        steps.push("brackets".to_string());
    }
    Normalized { net, source: src.state, target: tgt.state, steps }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_register() -> Dvass {
        let mut net = Dvass::new("r", vec!["l".into()], vec!["r".into()], vec![], vec!["p".into()]);
        let s0 = State { location: 0, registers: vec![Some(0)] };
        let mut eff = DataVector::zero();
        eff.add_data(0, 0, 1);
        net.add_transition("keep", Transition { source: s0.clone(), effect: eff, target: s0 });
        net
    }

    #[test]
    fn reverse_is_an_involution() {
        let net = one_register();
        assert_eq!(reverse(&reverse(&net)).transitions, net.transitions);
    }

    #[test]
    fn register_content_moves_into_the_marking() {
        let net = one_register();
        let src = Configuration { state: State { location: 0, registers: vec![Some(7)] }, marking: DataVector::zero() };
        let elim = eliminate_registers(&net);
        let enc = elim.encode(&src);
        assert_eq!(enc.marking, DataVector::unit_data(elim.register_place[0], 7));
        assert!(elim.net.registers.is_empty());
        // one rewritten orbit, one flash-back orbit
        assert_eq!(elim.net.transitions.len(), 2);
    }

    #[test]
    fn already_normal_instance_is_unchanged() {
        let net = one_register();
        let c = Configuration { state: State::empty(0, 1), marking: DataVector::zero() };
        let n = normalize(&net, &c, &c);
        assert!(n.steps.is_empty());
        assert_eq!(n.net, net);
    }

    #[test]
    fn partial_injection_count() {
        // 2 elements into 2: 1 + 2 + 2 + 2 = 7
        assert_eq!(partial_injections(2, 2).len(), 7);
    }
}
