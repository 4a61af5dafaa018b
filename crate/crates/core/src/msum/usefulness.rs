//! Encoding of orbit usefulness as two Multiset Sum instances, and the
//! Euler-path assembly of a pseudo-run from a solution.

use std::collections::BTreeMap;

use super::{MsumInstance, WitnessItem, YIndex, YVector};
use crate::atoms::{apply, canonicalize};
use crate::error::{Error, Result};
use crate::net::{Dvass, PseudoRun, State, Transition};
use crate::vector::DataVector;

fn flow_vector(t: &Transition) -> YVector {
    let mut y = YVector::default();
    for (h, n) in &t.effect.plain {
        y.add(YIndex::Plain(*h), *n);
    }
    for ((p, a), n) in &t.effect.data {
        y.add(YIndex::Data(*p, *a), *n);
    }
    y.add(YIndex::State(t.source.clone()), -1);
    y.add(YIndex::State(t.target.clone()), 1);
    y
}

fn flow_target(from: &State, to: &State) -> YVector {
    let mut b = YVector::default();
    b.add(YIndex::State(from.clone()), -1);
    b.add(YIndex::State(to.clone()), 1);
    b.add(YIndex::Star, 1);
    b
}

/// Instances asking for a transition multiset with zero total effect,
/// balanced flow except one surplus departure from the first endpoint and
/// one surplus arrival at the second, and exactly one marked use of orbit
/// `o`; first for `q → q2`, then for `q2 → q`.
///
/// Generator 0 is the marked copy of `o`; generator `i + 1` is orbit `i`.
pub fn build_usefulness_instances(
    net: &Dvass,
    q: &State,
    q2: &State,
    o: usize,
) -> Result<(MsumInstance, MsumInstance)> {
    let t = net.transitions.get(o).ok_or(Error::UnknownOrbit)?;
    let mut marked = flow_vector(t);
    marked.add(YIndex::Star, 1);
    let mut generators = vec![marked];
    generators.extend(net.transitions.iter().map(flow_vector));
    Ok((
        MsumInstance { generators: generators.clone(), target: flow_target(q, q2) },
        MsumInstance { generators, target: flow_target(q2, q) },
    ))
}

/// Turns a witness for orbit `o` into one for orbit `to`, which the witness
/// must use: one use of `to` takes over the mark from `o`.
pub fn remark_witness(witness: &[WitnessItem], o: usize, to: usize) -> Option<Vec<WitnessItem>> {
    if o == to {
        return Some(witness.to_vec());
    }
    let mut items = witness.to_vec();
    let i = items.iter().position(|w| w.generator == to + 1 && w.multiplicity > 0)?;
    let m = items.iter().position(|w| w.generator == 0 && w.multiplicity == 1)?;
    let mut star = YVector::default();
    star.add(YIndex::Star, 1);
    let new_marked = items[i].vector.plus(&star, 1);
    items[i].multiplicity -= 1;
    items[m] = WitnessItem { generator: o + 1, vector: items[m].vector.plus(&star, -1), multiplicity: 1 };
    items.push(WitnessItem { generator: 0, vector: new_marked, multiplicity: 1 });
    items.retain(|w| w.multiplicity > 0);
    Some(items)
}

/// The same transitions with the mark of orbit `o` dropped, which leaves a
/// multiset with no marked use.
pub fn unmark_witness(witness: &[WitnessItem], o: usize) -> Vec<WitnessItem> {
    let mut star = YVector::default();
    star.add(YIndex::Star, 1);
    witness
        .iter()
        .map(|w| match w.generator {
            0 => WitnessItem { generator: o + 1, vector: w.vector.plus(&star, -1), multiplicity: w.multiplicity },
            _ => w.clone(),
        })
        .collect()
}

/// A witness for orbit `o` in one direction, from a witness `w` for `o` in
/// the other direction and any witness `v` (for orbit `ov`) in this one:
/// `v` unmarked, then `w`, then `v` unmarked again.
pub fn turn_witness(w: &[WitnessItem], v: &[WitnessItem], ov: usize) -> Vec<WitnessItem> {
    let back = unmark_witness(v, ov);
    back.iter().chain(w).chain(&back).cloned().collect()
}

/// The transitions behind a witness of [`build_usefulness_instances`].
pub fn witness_transitions(net: &Dvass, o: usize, witness: &[WitnessItem]) -> Vec<(Transition, u64)> {
    witness
        .iter()
        .map(|item| {
            let orbit = if item.generator == 0 { o } else { item.generator - 1 };
            let t = &net.transitions[orbit];
            let mut g = flow_vector(t);
            if item.generator == 0 {
                g.add(YIndex::Star, 1);
            }
            let (_, to_canon) = canonicalize(&g);
            let (_, from_canon) = canonicalize(&item.vector);
            let sigma = from_canon.inverse().compose(&to_canon);
            (apply(&sigma, t), item.multiplicity)
        })
        .collect()
}

/// Orders the transitions of a usefulness witness into a pseudo-run from
/// `start(0)` using each exactly as often as its multiplicity. Returns
/// `None` when the transitions do not form a single Euler path.
pub fn euler_pseudo_run(net: &Dvass, o: usize, witness: &[WitnessItem], start: &State) -> Option<PseudoRun> {
    let edges: Vec<Transition> = witness_transitions(net, o, witness)
        .into_iter()
        .flat_map(|(t, m)| std::iter::repeat(t).take(m as usize))
        .collect();
    let mut out_edges: BTreeMap<State, Vec<usize>> = BTreeMap::new();
    for (i, e) in edges.iter().enumerate() {
        out_edges.entry(e.source.clone()).or_default().push(i);
    }
    // Hierholzer's algorithm.
    let mut stack: Vec<(State, Option<usize>)> = vec![(start.clone(), None)];
    let mut order: Vec<usize> = Vec::new();
    while let Some((s, via)) = stack.last().cloned() {
        match out_edges.get_mut(&s).and_then(|v| v.pop()) {
            Some(i) => stack.push((edges[i].target.clone(), Some(i))),
            None => {
                stack.pop();
                if let Some(i) = via {
                    order.push(i);
                }
            }
        }
    }
    if order.len() != edges.len() {
        return None;
    }
    order.reverse();
    let mut steps = vec![(start.clone(), DataVector::zero())];
    for i in order {
        let (prev_s, prev_v) = steps.last().unwrap();
        if *prev_s != edges[i].source {
            return None;
        }
        let v = prev_v + &edges[i].effect;
        steps.push((edges[i].target.clone(), v));
    }
    Some(PseudoRun { steps })
}
