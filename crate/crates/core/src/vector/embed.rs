//! The embedding quasi-order: `c1 ⊑ c2` iff some renaming σ maps the state of
//! `c1` onto the state of `c2` and `σ(f1) ≤ f2` pointwise, with `n < ω`.
//!
//! The search assigns each named atom of `c1` either a named atom of `c2` or a
//! fresh atom, backtracking over per-atom compatible columns. Atoms of `c1`
//! that are not named carry the defaults of `c1`, so every named atom of `c2`
//! left unmatched must dominate those defaults.

use std::collections::{BTreeMap, BTreeSet};

use super::omega::{OmegaConfiguration, OmegaValue};
use crate::atoms::{Atom, Renaming};
use crate::net::Configuration;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Target {
    Named(usize),
    Fresh,
}

pub fn embeds(c1: &OmegaConfiguration, c2: &OmegaConfiguration) -> Option<Renaming> {
    let (s1, s2) = (&c1.state, &c2.state);
    if s1.location != s2.location || s1.registers.len() != s2.registers.len() {
        return None;
    }
    let (f1, f2) = (&c1.valuation, &c2.valuation);
    if !f1.omega_default.is_subset(&f2.omega_default) {
        return None;
    }
    let plain_keys: BTreeSet<usize> = f1.plain.keys().chain(f2.plain.keys()).copied().collect();
    if plain_keys.iter().any(|&h| f1.plain_at(h) > f2.plain_at(h)) {
        return None;
    }

    // Forced images from registers.
    let mut forced: BTreeMap<Atom, Atom> = BTreeMap::new();
    for (x, y) in s1.registers.iter().zip(&s2.registers) {
        match (x, y) {
            (None, None) => {}
            (Some(a), Some(b)) => {
                if let Some(prev) = forced.insert(*a, *b) {
                    if prev != *b {
                        return None;
                    }
                }
            }
            _ => return None,
        }
    }
    {
        let imgs: BTreeSet<Atom> = forced.values().copied().collect();
        if imgs.len() != forced.len() {
            return None;
        }
    }

    let places: Vec<usize> = f1
        .omega_default
        .iter()
        .chain(&f2.omega_default)
        .copied()
        .chain(f1.data.keys().map(|(p, _)| *p))
        .chain(f2.data.keys().map(|(p, _)| *p))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let n1: Vec<Atom> = c1.named_atoms().into_iter().collect();
    let n2: Vec<Atom> = c2.named_atoms().into_iter().collect();
    let col1: Vec<Vec<OmegaValue>> =
        n1.iter().map(|&a| places.iter().map(|&p| f1.data_at(p, a)).collect()).collect();
    let col2: Vec<Vec<OmegaValue>> =
        n2.iter().map(|&b| places.iter().map(|&p| f2.data_at(p, b)).collect()).collect();
    let dflt1: Vec<OmegaValue> = places.iter().map(|&p| f1.default_at(p)).collect();
    let dflt2: Vec<OmegaValue> = places.iter().map(|&p| f2.default_at(p)).collect();
    let dominated = |x: &[OmegaValue], y: &[OmegaValue]| x.iter().zip(y).all(|(a, b)| a <= b);

    let in_register1: BTreeSet<Atom> = s1.support();
    let mut candidates: Vec<Vec<Target>> = Vec::with_capacity(n1.len());
    for (i, a) in n1.iter().enumerate() {
        let mut cs = Vec::new();
        if let Some(b) = forced.get(a) {
            let j = n2.binary_search(b).expect("register atom is named");
            if dominated(&col1[i], &col2[j]) {
                cs.push(Target::Named(j));
            }
        } else {
            for (j, b) in n2.iter().enumerate() {
                if forced.values().any(|x| x == b) {
                    continue;
                }
                if dominated(&col1[i], &col2[j]) {
                    cs.push(Target::Named(j));
                }
            }
            if !in_register1.contains(a) && dominated(&col1[i], &dflt2) {
                cs.push(Target::Fresh);
            }
        }
        if cs.is_empty() {
            return None;
        }
        candidates.push(cs);
    }
    let must_hit: Vec<bool> = col2.iter().map(|c| !dominated(&dflt1, c)).collect();

    // Most constrained atoms first.
    let mut order: Vec<usize> = (0..n1.len()).collect();
    order.sort_by_key(|&i| candidates[i].len());

    let mut assign = vec![Target::Fresh; n1.len()];
    let mut used = vec![false; n2.len()];
    let must_total = must_hit.iter().filter(|&&m| m).count();
    if !search(0, &order, &candidates, &must_hit, must_total, 0, &mut assign, &mut used) {
        return None;
    }

    let taken: BTreeSet<Atom> = n1.iter().chain(&n2).copied().collect();
    let mut next_fresh = taken.iter().next_back().map_or(0, |m| m + 1);
    let mut pairs = Vec::new();
    for (i, a) in n1.iter().enumerate() {
        let b = match assign[i] {
            Target::Named(j) => n2[j],
            Target::Fresh => {
                next_fresh += 1;
                next_fresh - 1
            }
        };
        pairs.push((*a, b));
    }
    Some(Renaming::extend_injection(pairs))
}

#[allow(clippy::too_many_arguments)]
fn search(
    k: usize,
    order: &[usize],
    candidates: &[Vec<Target>],
    must_hit: &[bool],
    must_total: usize,
    must_done: usize,
    assign: &mut [Target],
    used: &mut [bool],
) -> bool {
    if must_total - must_done > order.len() - k {
        return false;
    }
    if k == order.len() {
        return must_done == must_total;
    }
    let i = order[k];
    for &t in &candidates[i] {
        match t {
            Target::Named(j) => {
                if used[j] {
                    continue;
                }
                used[j] = true;
                assign[i] = t;
                let d = must_done + must_hit[j] as usize;
                if search(k + 1, order, candidates, must_hit, must_total, d, assign, used) {
                    return true;
                }
                used[j] = false;
            }
            Target::Fresh => {
                assign[i] = t;
                if search(k + 1, order, candidates, must_hit, must_total, must_done, assign, used)
                {
                    return true;
                }
            }
        }
    }
    false
}

pub fn embeds_config(c1: &Configuration, c2: &Configuration) -> Option<Renaming> {
    embeds(&OmegaConfiguration::from_config(c1), &OmegaConfiguration::from_config(c2))
}

/// `c1 ⊑ c2` but not `c2 ⊑ c1`.
pub fn strictly_embeds(c1: &OmegaConfiguration, c2: &OmegaConfiguration) -> Option<Renaming> {
    let r = embeds(c1, c2)?;
    embeds(c2, c1).is_none().then_some(r)
}
