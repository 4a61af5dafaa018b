use std::collections::{BTreeMap, BTreeSet};

use super::{Configuration, Dvass, State, Transition};
use crate::atoms::{apply, canonicalize, Atom, Nominal, Renaming};

/// Every instance of the orbit of `t` whose source is exactly `source`, with
/// atoms not pinned by registers drawn from `existing` or from fresh atoms
/// outside `avoid`. Fresh atoms are introduced in increasing order, so two
/// results never differ only by a renaming of fresh atoms.
pub fn instantiate_at(
    t: &Transition,
    source: &State,
    existing: &[Atom],
    avoid: &BTreeSet<Atom>,
) -> Vec<Transition> {
    if t.source.location != source.location || t.source.registers.len() != source.registers.len()
    {
        return Vec::new();
    }
    let mut forced: BTreeMap<Atom, Atom> = BTreeMap::new();
    for (x, y) in t.source.registers.iter().zip(&source.registers) {
        match (x, y) {
            (None, None) => {}
            (Some(a), Some(b)) => {
                if forced.insert(*a, *b).is_some_and(|prev| prev != *b) {
                    return Vec::new();
                }
            }
            _ => return Vec::new(),
        }
    }
    let forced_imgs: BTreeSet<Atom> = forced.values().copied().collect();
    if forced_imgs.len() != forced.len() {
        return Vec::new();
    }
    let free: Vec<Atom> = t.support().into_iter().filter(|a| !forced.contains_key(a)).collect();
    let mut blocked: BTreeSet<Atom> = avoid.clone();
    blocked.extend(existing.iter().copied());
    blocked.extend(forced_imgs.iter().copied());
    let fresh: Vec<Atom> = (0..).filter(|a| !blocked.contains(a)).take(free.len()).collect();
    let pool: Vec<Atom> = existing.iter().copied().filter(|a| !forced_imgs.contains(a)).collect();

    let mut out = Vec::new();
    let mut chosen: Vec<Atom> = Vec::with_capacity(free.len());
    let mut used = vec![false; pool.len()];
    fn go(
        i: usize,
        free: &[Atom],
        pool: &[Atom],
        fresh: &[Atom],
        fresh_used: usize,
        used: &mut [bool],
        chosen: &mut Vec<Atom>,
        emit: &mut dyn FnMut(&[Atom]),
    ) {
        if i == free.len() {
            emit(chosen);
            return;
        }
        for j in 0..pool.len() {
            if !used[j] {
                used[j] = true;
                chosen.push(pool[j]);
                go(i + 1, free, pool, fresh, fresh_used, used, chosen, emit);
                chosen.pop();
                used[j] = false;
            }
        }
        chosen.push(fresh[fresh_used]);
        go(i + 1, free, pool, fresh, fresh_used + 1, used, chosen, emit);
        chosen.pop();
    }
    let mut emit = |chosen: &[Atom]| {
        let pairs = forced.iter().map(|(a, b)| (*a, *b)).chain(free.iter().copied().zip(chosen.iter().copied()));
        let r = Renaming::extend_injection(pairs);
        out.push(apply(&r, t));
    };
    go(0, &free, &pool, &fresh, 0, &mut used, &mut chosen, &mut emit);
    out
}

/// All successors of `c` over its own atoms plus fresh ones, paired with the
/// index of the orbit fired. Not canonicalised.
pub fn successors_concrete(c: &Configuration, net: &Dvass) -> Vec<(usize, Transition, Configuration)> {
    let supp = c.support();
    let existing: Vec<Atom> = supp.iter().copied().collect();
    let mut out = Vec::new();
    for (i, t) in net.transitions.iter().enumerate() {
        for inst in instantiate_at(t, &c.state, &existing, &supp) {
            let marking = &c.marking + &inst.effect;
            if marking.is_nonneg() {
                let next = Configuration { state: inst.target.clone(), marking };
                out.push((i, inst, next));
            }
        }
    }
    out
}

/// Successors of `c` up to renaming: canonical configurations, sorted and
/// deduplicated, each with the index of an orbit producing it.
pub fn enumerate_successors(c: &Configuration, net: &Dvass) -> Vec<(usize, Configuration)> {
    let set: BTreeSet<(usize, Configuration)> = successors_concrete(c, net)
        .into_iter()
        .map(|(i, _, next)| (i, canonicalize(&next).0))
        .collect();
    set.into_iter().collect()
}
