//! Karp-Miller tree over canonical ω-configurations.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::atoms::{canonicalize, Atom, Renaming};
use crate::net::{instantiate_at, Dvass};
use crate::vector::{embeds, strictly_embeds, OmegaConfiguration, OmegaValue};

/// Why a tree search stopped early.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CapHit {
    pub nodes: usize,
    pub depth: usize,
}

/// Successors of an ω-configuration, canonical and deduplicated. Atoms not
/// named by `c` are interchangeable, so one fresh atom per free variable
/// stands for all of them.
pub fn omega_successors(net: &Dvass, c: &OmegaConfiguration) -> Vec<OmegaConfiguration> {
    let named = c.named_atoms();
    let existing: Vec<Atom> = named.iter().copied().collect();
    let mut out = BTreeSet::new();
    for t in &net.transitions {
        for inst in instantiate_at(t, &c.state, &existing, &named) {
            if let Some(valuation) = c.valuation.add_vector(&inst.effect) {
                let next = OmegaConfiguration { state: inst.target.clone(), valuation };
                out.insert(canonicalize(&next).0);
            }
        }
    }
    out.into_iter().collect()
}

/// Raises `cur` to ω wherever it grew over `anc`, given `anc ⊑ cur` via
/// `sigma`. Returns whether anything changed.
pub fn accelerate(anc: &OmegaConfiguration, cur: &mut OmegaConfiguration, sigma: &Renaming, atom_places: usize) -> bool {
    let before = cur.clone();
    let (f1, f2) = (&anc.valuation, &mut cur.valuation);
    let plain: BTreeSet<usize> = f2.plain.keys().copied().collect();
    for h in plain {
        if f1.plain_at(h) < f2.plain_at(h) {
            f2.set_plain(h, OmegaValue::Omega);
        }
    }
    let image: BTreeSet<Atom> = anc.named_atoms().into_iter().map(|a| sigma.get(a)).collect();
    for a in anc.named_atoms() {
        let b = sigma.get(a);
        for p in 0..atom_places {
            if f1.data_at(p, a) < f2.data_at(p, b) {
                f2.set_data(p, b, OmegaValue::Omega);
            }
        }
    }
    for p in 0..atom_places {
        if f2.omega_default.contains(&p) {
            continue;
        }
        let grew = f2.data.iter().any(|((q, b), x)| *q == p && !image.contains(b) && *x > f1.default_at(p));
        if grew {
            f2.pump_default(p, &image);
        }
    }
    *cur != before
}

struct Node {
    conf: OmegaConfiguration,
    parent: Option<usize>,
    depth: usize,
}

/// Explores the tree breadth-first and returns every node kept, or the cap
/// that stopped it. Subsumed nodes are neither kept nor expanded.
pub fn karp_miller(
    net: &Dvass,
    root: OmegaConfiguration,
    max_nodes: usize,
    max_depth: usize,
) -> Result<Vec<OmegaConfiguration>, CapHit> {
    let atom_places = net.atom_places.len();
    let mut nodes: Vec<Node> = vec![Node { conf: canonicalize(&root).0, parent: None, depth: 0 }];
    let mut by_location: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    by_location.entry(root.state.location).or_default().push(0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let depth = nodes[i].depth;
        for mut next in omega_successors(net, &nodes[i].conf) {
            // ancestors from the root down, current node included
            let mut chain = Vec::new();
            let mut k = Some(i);
            while let Some(j) = k {
                chain.push(j);
                k = nodes[j].parent;
            }
            chain.reverse();
            for &j in &chain {
                if let Some(sigma) = strictly_embeds(&nodes[j].conf, &next) {
                    accelerate(&nodes[j].conf, &mut next, &sigma, atom_places);
                }
            }
            let next = canonicalize(&next).0;
            let same_place = by_location.entry(next.state.location).or_default();
            if same_place.iter().any(|&j| embeds(&next, &nodes[j].conf).is_some()) {
                continue;
            }
            if nodes.len() >= max_nodes || depth + 1 > max_depth {
                return Err(CapHit { nodes: nodes.len(), depth: depth + 1 });
            }
            same_place.push(nodes.len());
            queue.push_back(nodes.len());
            nodes.push(Node { conf: next, parent: Some(i), depth: depth + 1 });
        }
    }
    Ok(nodes.into_iter().map(|n| n.conf).collect())
}

/// The maximal elements of `items` under embedding, canonical and sorted.
pub fn maximal_antichain(items: impl IntoIterator<Item = OmegaConfiguration>) -> Vec<OmegaConfiguration> {
    let all: Vec<OmegaConfiguration> =
        items.into_iter().map(|c| canonicalize(&c).0).collect::<BTreeSet<_>>().into_iter().collect();
    let mut keep: Vec<OmegaConfiguration> = Vec::new();
    for (i, c) in all.iter().enumerate() {
        let dominated = all.iter().enumerate().any(|(j, d)| {
            j != i && embeds(c, d).is_some() && (embeds(d, c).is_none() || j < i)
        });
        if !dominated {
            keep.push(c.clone());
        }
    }
    keep
}
