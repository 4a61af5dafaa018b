//! Bounded breadth-first search for runs, used as ground truth on small
//! instances, and a reference check of the classical sufficient condition
//! for reachability in plain VASS.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::atoms::{apply, canonicalize_fixing, Atom};
use crate::cover::{compute_cover, CoverConfig};
use crate::error::{Error, Result};
use crate::msum::ilp::{Ilp, IlpResult};
use crate::net::{reverse, successors_concrete, Configuration, Dvass, PseudoRun, State};
use crate::vector::{DataVector, OmegaValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleBudget {
    /// Largest value of a plain place, or number of tokens on an atom place.
    pub max_tokens_per_place: u64,
    /// Largest number of distinct atoms in a configuration.
    pub max_total_atoms: usize,
    pub max_depth: usize,
    /// Largest number of distinct configurations visited.
    pub max_states: usize,
}

impl Default for OracleBudget {
    fn default() -> Self {
        Self { max_tokens_per_place: 6, max_total_atoms: 6, max_depth: 40, max_states: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleAnswer {
    Found(PseudoRun),
    /// No run within the budget. `frontier_empty` is set when nothing was
    /// pruned, so the whole reachability set was explored.
    Exhausted { frontier_empty: bool },
}

impl OracleAnswer {
    pub fn found(&self) -> bool {
        matches!(self, OracleAnswer::Found(_))
    }

    /// A negative that holds without any budget qualification.
    pub fn conclusive_no(&self) -> bool {
        matches!(self, OracleAnswer::Exhausted { frontier_empty: true })
    }
}

fn within(c: &Configuration, net: &Dvass, b: &OracleBudget) -> bool {
    if c.marking.plain.values().any(|n| *n as u64 > b.max_tokens_per_place) {
        return false;
    }
    for p in 0..net.atom_places.len() {
        if c.marking.place_size(p).unwrap_or(u64::MAX) > b.max_tokens_per_place {
            return false;
        }
    }
    c.support().len() <= b.max_total_atoms
}

/// Searches for a run from `src` to `tgt`. Configurations are merged up to
/// renamings fixing the atoms of `src`, which keeps the answer exact.
pub fn bfs_reach(net: &Dvass, src: &Configuration, tgt: &Configuration, b: &OracleBudget) -> OracleAnswer {
    let fixed: BTreeSet<Atom> = src.support();
    let key = |c: &Configuration| canonicalize_fixing(c, &fixed);
    let (goal, to_goal) = key(tgt);
    let mut nodes: Vec<(Configuration, Option<usize>, usize)> = vec![(src.clone(), None, 0)];
    let mut seen: HashMap<Configuration, usize> = HashMap::new();
    seen.insert(key(src).0, 0);
    let mut queue = VecDeque::from([0usize]);
    let mut pruned = false;
    let finish = |nodes: &[(Configuration, Option<usize>, usize)], mut i: usize, to_x: &crate::atoms::Renaming| {
        let mut chain = Vec::new();
        loop {
            chain.push(nodes[i].0.clone());
            match nodes[i].1 {
                Some(p) => i = p,
                None => break,
            }
        }
        chain.reverse();
        // the renaming taking the reached configuration onto `tgt`
        let sigma = to_goal.inverse().compose(to_x);
        let steps = chain.iter().map(|c| apply(&sigma, c)).map(|c| (c.state, c.marking)).collect();
        PseudoRun { steps }
    };
    if key(src).0 == goal {
        return OracleAnswer::Found(finish(&nodes, 0, &key(src).1));
    }
    while let Some(i) = queue.pop_front() {
        let depth = nodes[i].2;
        if depth >= b.max_depth {
            pruned = true;
            continue;
        }
        let here = nodes[i].0.clone();
        for (_, _, next) in successors_concrete(&here, net) {
            if !within(&next, net, b) {
                pruned = true;
                continue;
            }
            let (k, to_k) = key(&next);
            if seen.contains_key(&k) {
                continue;
            }
            if seen.len() >= b.max_states {
                return OracleAnswer::Exhausted { frontier_empty: false };
            }
            let j = nodes.len();
            nodes.push((next, Some(i), depth + 1));
            if k == goal {
                return OracleAnswer::Found(finish(&nodes, j, &to_k));
            }
            seen.insert(k, j);
            queue.push_back(j);
        }
    }
    OracleAnswer::Exhausted { frontier_empty: !pruned }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleVerdict {
    Bireachable,
    NotBireachable,
    Unknown,
}

/// Both directions of [`bfs_reach`].
pub fn bfs_bireach(net: &Dvass, src: &Configuration, tgt: &Configuration, b: &OracleBudget) -> OracleVerdict {
    let there = bfs_reach(net, src, tgt, b);
    if there.conclusive_no() {
        return OracleVerdict::NotBireachable;
    }
    let back = bfs_reach(net, tgt, src, b);
    match (there.found(), back.found()) {
        (true, true) => OracleVerdict::Bireachable,
        _ if back.conclusive_no() => OracleVerdict::NotBireachable,
        _ => OracleVerdict::Unknown,
    }
}

/// Integer solution with every transition used at least once, zero total
/// effect, and flow leaving `q` once more than it enters and entering `q2`
/// once more than it leaves (balanced when `q == q2`).
fn flow_with_every_transition(net: &Dvass, q: usize, q2: usize, node_cap: usize) -> bool {
    let nl = net.locations.len();
    let rows = nl + net.plain_places.len();
    let mut rhs = vec![0i64; rows];
    rhs[q] -= 1;
    rhs[q2] += 1;
    let mut columns = Vec::new();
    for t in &net.transitions {
        let mut col: Vec<(usize, i64)> = vec![(t.source.location, -1), (t.target.location, 1)];
        col.extend(t.effect.plain.iter().map(|(h, n)| (nl + h, *n)));
        // x = 1 + y with y ≥ 0
        for &(r, c) in &col {
            rhs[r] -= c;
        }
        columns.push(col);
    }
    matches!(Ilp::new(rows, columns, rhs).solve(node_cap), IlpResult::Feasible(_))
}

/// All transitions, `q` and `q2` lie in one weakly connected component.
fn connected(net: &Dvass, q: usize, q2: usize) -> bool {
    let n = net.locations.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    for t in &net.transitions {
        let (a, b) = (find(&mut parent, t.source.location), find(&mut parent, t.target.location));
        parent[a] = b;
    }
    let root = find(&mut parent, q);
    find(&mut parent, q2) == root && net.transitions.iter().all(|t| find(&mut parent, t.source.location) == root)
}

/// The sufficient condition for `q(0) → q2(0)` and `q2(0) → q(0)` in a plain
/// VASS: pseudo-runs both ways using every transition arbitrarily often,
/// and pumps raising every place from both endpoints and lowering every
/// place back to both endpoints.
pub fn vass_theta_check(net: &Dvass, q: &State, q2: &State, config: &CoverConfig) -> Result<bool> {
    if !net.is_plain_vass() {
        return Err(Error::NotPlain);
    }
    let (a, b) = (q.location, q2.location);
    if !connected(net, a, b) {
        return Ok(false);
    }
    if !(flow_with_every_transition(net, a, b, 20_000) && flow_with_every_transition(net, b, a, 20_000)) {
        return Ok(false);
    }
    let back = reverse(net);
    let all_omega = |n: &Dvass, s: &State| {
        let c0 = Configuration { state: s.clone(), marking: DataVector::zero() };
        match compute_cover(n, &c0, config).result() {
            Some(r) => r.at(s).any(|i| (0..net.plain_places.len()).all(|h| i.valuation.plain_at(h) == OmegaValue::Omega)),
            None => false,
        }
    };
    Ok(all_omega(net, q) && all_omega(&back, q) && all_omega(net, q2) && all_omega(&back, q2))
}

#[cfg(test)]
mod tests;
