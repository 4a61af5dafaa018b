//! The rank-decreasing reductions and the decision loop built on them.

use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::atoms::{Atom, Nominal};
use crate::conditions::{check_phi2, first_projection_useless, scan_phi1, Place};
use crate::cover::CoverConfig;
use crate::error::{Error, Result};
use crate::graph::{path_exists, restrict_to_scc, saturate};
use crate::msum::MsumConfig;
use crate::net::{normalize, Configuration, Dvass, Rank, State, Transition};

/// The net without orbit `o`.
pub fn remove_orbit(net: &Dvass, o: usize) -> Result<Dvass> {
    if o >= net.transitions.len() {
        return Err(Error::UnknownOrbit);
    }
    let mut out = net.with_same_signature();
    out.set_transitions(net.labelled().enumerate().filter(|(i, _)| *i != o).map(|(_, x)| x));
    Ok(out)
}

/// Replaces plain place `h` by a counter `0..=bound` kept in the locations.
/// Returns the net and the images of `q`, `q2` with the counter at 0.
pub fn fold_plain_place(net: &Dvass, h: usize, bound: u64, q: &State, q2: &State) -> (Dvass, State, State) {
    let width = bound as usize + 1;
    let locations = net.locations.iter().flat_map(|l| (0..width).map(move |n| format!("{l}#{n}"))).collect();
    let mut plain_places = net.plain_places.clone();
    plain_places.remove(h);
    let mut out = Dvass::new(net.name.clone(), locations, net.registers.clone(), plain_places, net.atom_places.clone());
    let shift = |x: usize| match x.cmp(&h) {
        std::cmp::Ordering::Less => Some(x),
        std::cmp::Ordering::Equal => None,
        std::cmp::Ordering::Greater => Some(x - 1),
    };
    let at = |s: &State, n: usize| State { location: s.location * width + n, registers: s.registers.clone() };
    let mut items = Vec::new();
    for (label, t) in net.labelled() {
        let d = t.effect.plain_at(h);
        let effect = t.effect.remap_places(shift, Some);
        for n in 0..width {
            let m = n as i64 + d;
            if (0..width as i64).contains(&m) {
                let inst = Transition { source: at(&t.source, n), effect: effect.clone(), target: at(&t.target, m as usize) };
                items.push((format!("{label}#{n}"), inst));
            }
        }
    }
    out.set_transitions(items);
    (out, at(q, 0), at(q2, 0))
}

/// Every way of placing the atoms of `tokens` into `slots` registers, the
/// rest empty.
fn arrangements(tokens: &[Atom], slots: usize) -> Vec<Vec<Option<Atom>>> {
    let mut items: Vec<Option<Atom>> = tokens.iter().map(|a| Some(*a)).collect();
    items.resize(slots, None);
    let set: BTreeSet<Vec<Option<Atom>>> = items.iter().copied().permutations(slots).collect();
    set.into_iter().collect()
}

fn multiset(row: impl Iterator<Item = (Atom, i64)>) -> Vec<Atom> {
    row.flat_map(|(a, n)| std::iter::repeat(a).take(n as usize)).collect()
}

/// Replaces atom place `p` by `bound` new registers holding its tokens.
/// Fails with [`Error::TooLarge`] once more than `limit` orbit instances
/// would be generated.
pub fn fold_atom_place(
    net: &Dvass,
    p: usize,
    bound: u64,
    q: &State,
    q2: &State,
    limit: usize,
) -> Result<(Dvass, State, State)> {
    let slots = bound as usize;
    let mut atom_places = net.atom_places.clone();
    let removed = atom_places.remove(p);
    let mut out = Dvass::new(net.name.clone(), net.locations.clone(), net.registers.clone(), net.plain_places.clone(), atom_places);
    for i in 1..=slots {
        let name = out.fresh_name(&format!("{}.{i}", removed.trim_start_matches('$')));
        out.registers.push(name);
    }
    let shift = |x: usize| match x.cmp(&p) {
        std::cmp::Ordering::Less => Some(x),
        std::cmp::Ordering::Equal => None,
        std::cmp::Ordering::Greater => Some(x - 1),
    };
    let extend = |s: &State, extra: &[Option<Atom>]| {
        let mut registers = s.registers.clone();
        registers.extend_from_slice(extra);
        State { location: s.location, registers }
    };
    let mut items = Vec::new();
    for (label, t) in net.labelled() {
        let row = t.effect.row(p);
        let put = multiset(row.iter().filter(|(_, n)| **n > 0).map(|(a, n)| (*a, *n)));
        let take = multiset(row.iter().filter(|(_, n)| **n < 0).map(|(a, n)| (*a, -*n)));
        if put.len().max(take.len()) > slots {
            continue;
        }
        let effect = t.effect.remap_places(Some, shift);
        let support: Vec<Atom> = t.support().into_iter().collect();
        let above = support.last().map_or(0, |m| m + 1);
        for k in 0..=(slots - put.len().max(take.len())) {
            let alphabet: Vec<Atom> = support.iter().copied().chain((0..k as Atom).map(|i| above + i)).collect();
            for kept in alphabet.iter().copied().combinations_with_replacement(k) {
                let before: Vec<Atom> = take.iter().chain(&kept).copied().collect();
                let after: Vec<Atom> = put.iter().chain(&kept).copied().collect();
                let sources = arrangements(&before, slots);
                let targets = arrangements(&after, slots);
                for mu in &sources {
                    for mu2 in &targets {
                        items.push((
                            label.clone(),
                            Transition { source: extend(&t.source, mu), effect: effect.clone(), target: extend(&t.target, mu2) },
                        ));
                        if items.len() > limit {
                            return Err(Error::TooLarge { limit });
                        }
                    }
                }
            }
        }
    }
    out.set_transitions(items);
    let empty = vec![None; slots];
    Ok((out, extend(q, &empty), extend(q2, &empty)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecideConfig {
    pub msum: MsumConfig,
    pub cover: CoverConfig,
    /// Caps the size of a single atom-place fold.
    pub max_fold_orbits: usize,
    pub max_iterations: usize,
}

impl Default for DecideConfig {
    fn default() -> Self {
        Self { msum: MsumConfig::default(), cover: CoverConfig::default(), max_fold_orbits: 200_000, max_iterations: 10_000 }
    }
}

impl DecideConfig {
    /// Treats exhausted solver budgets as certified negatives.
    pub fn assume_complete(mut self) -> Self {
        self.msum.certified = true;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepKind {
    Restrict,
    RemoveOrbit,
    FoldPlain,
    FoldAtom,
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StepKind::Restrict => "restrict",
            StepKind::RemoveOrbit => "remove-orbit",
            StepKind::FoldPlain => "fold-plain",
            StepKind::FoldAtom => "fold-atom",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub kind: StepKind,
    /// Removed orbit label, folded place name, or number of orbits dropped.
    pub item: String,
    pub bound: Option<u64>,
    pub rank_before: Rank,
    pub rank_after: Rank,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Answer {
    Bireachable,
    NotBireachable(String),
    Unknown(String),
}

impl Answer {
    pub fn exit_code(&self) -> i32 {
        match self {
            Answer::Bireachable => 0,
            Answer::NotBireachable(_) => 1,
            Answer::Unknown(_) => 2,
        }
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Answer::Bireachable => f.write_str("BIREACHABLE"),
            Answer::NotBireachable(r) => write!(f, "NOT_BIREACHABLE ({r})"),
            Answer::Unknown(r) => write!(f, "UNKNOWN ({r})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub answer: Answer,
    pub trace: Vec<Step>,
    /// Normalisation steps applied before the loop.
    pub normalization: Vec<String>,
    pub final_rank: Rank,
}

struct Loop {
    net: Dvass,
    q: State,
    q2: State,
    trace: Vec<Step>,
}

impl Loop {
    fn advance(&mut self, kind: StepKind, item: String, bound: Option<u64>, net: Dvass, q: State, q2: State) {
        let rank_before = self.net.rank();
        let rank_after = net.rank();
        assert!(rank_after < rank_before, "{kind} did not decrease the rank: {rank_before} -> {rank_after}");
        self.trace.push(Step { kind, item, bound, rank_before, rank_after });
        self.net = net;
        self.q = q;
        self.q2 = q2;
    }

    /// One round: an answer, or `None` after a reduction.
    fn round(&mut self, config: &DecideConfig) -> Result<Option<Answer>> {
        let closure = saturate(&self.net);
        let connected = path_exists(&closure, &self.q, &self.q2) && path_exists(&closure, &self.q2, &self.q);
        if self.net.atom_places.is_empty() && self.net.plain_places.is_empty() {
            return Ok(Some(if connected {
                Answer::Bireachable
            } else {
                Answer::NotBireachable("endpoints are not connected in the state graph".into())
            }));
        }
        if !connected {
            return Ok(Some(Answer::NotBireachable("endpoints lie in different components of the state graph".into())));
        }
        let restricted = restrict_to_scc(&self.net, &closure, &self.q, &self.q2);
        if restricted.transitions.len() < self.net.transitions.len() {
            let dropped = self.net.transitions.len() - restricted.transitions.len();
            let (q, q2) = (self.q.clone(), self.q2.clone());
            self.advance(StepKind::Restrict, format!("{dropped} orbits"), None, restricted, q, q2);
            return Ok(None);
        }

        // Without certified budgets only the projection can show an orbit
        // useless, so the pool search waits until the places are settled.
        let mut phi1 = None;
        let useless = if config.msum.certified {
            let report = scan_phi1(&self.net, &self.q, &self.q2, &config.msum, true)?;
            let first = report.first_useless().map(|o| o.orbit);
            phi1 = Some(report);
            first
        } else {
            first_projection_useless(&self.net, &self.q, &self.q2, config.msum.node_cap)?
        };
        if let Some(o) = useless {
            let next = remove_orbit(&self.net, o)?;
            let (q, q2) = (self.q.clone(), self.q2.clone());
            self.advance(StepKind::RemoveOrbit, self.net.labels[o].clone(), None, next, q, q2);
            return Ok(None);
        }

        let phi2 = check_phi2(&self.net, &self.q, &self.q2, &config.cover);
        if let Some((place, bound)) = phi2.first_unpumpable() {
            let name = place.name(&self.net).to_string();
            match place {
                Place::Plain(h) => {
                    let (net, q, q2) = fold_plain_place(&self.net, h, bound, &self.q, &self.q2);
                    self.advance(StepKind::FoldPlain, name, Some(bound), net, q, q2);
                }
                Place::Atom(p) => {
                    match fold_atom_place(&self.net, p, bound, &self.q, &self.q2, config.max_fold_orbits) {
                        Ok((net, q, q2)) => self.advance(StepKind::FoldAtom, name, Some(bound), net, q, q2),
                        Err(Error::TooLarge { limit }) => {
                            return Ok(Some(Answer::Unknown(format!("folding {name} needs more than {limit} orbits"))))
                        }
                        Err(e) => return Err(e),
                    }
                }
            }
            return Ok(None);
        }
        if !phi2.complete() {
            return Ok(Some(Answer::Unknown("coverability search hit its cap".into())));
        }
        let phi1 = match phi1 {
            Some(report) => report,
            None => scan_phi1(&self.net, &self.q, &self.q2, &config.msum, false)?,
        };
        if phi1.has_unknown() {
            return Ok(Some(Answer::Unknown("multiset sum budget exhausted".into())));
        }
        Ok(Some(Answer::Bireachable))
    }
}

/// Decides whether `src` and `tgt` are reachable from each other.
pub fn decide(net: &Dvass, src: &Configuration, tgt: &Configuration, config: &DecideConfig) -> Result<Verdict> {
    decide_observed(net, src, tgt, config, &mut |_, _, _| {})
}

/// Like [`decide`], and shows `observe` the normalised instance and the
/// instance after every reduction step.
pub fn decide_observed(
    net: &Dvass,
    src: &Configuration,
    tgt: &Configuration,
    config: &DecideConfig,
    observe: &mut dyn FnMut(&Dvass, &State, &State),
) -> Result<Verdict> {
    net.check_configuration(src)?;
    net.check_configuration(tgt)?;
    if src == tgt {
        return Ok(Verdict { answer: Answer::Bireachable, trace: Vec::new(), normalization: Vec::new(), final_rank: net.rank() });
    }
    let normal = normalize(net, src, tgt);
    let mut state = Loop { net: normal.net, q: normal.source, q2: normal.target, trace: Vec::new() };
    observe(&state.net, &state.q, &state.q2);
    for _ in 0..config.max_iterations {
        if let Some(answer) = state.round(config)? {
            return Ok(Verdict { answer, trace: state.trace, normalization: normal.steps, final_rank: state.net.rank() });
        }
        observe(&state.net, &state.q, &state.q2);
    }
    Ok(Verdict {
        answer: Answer::Unknown("iteration limit reached".into()),
        trace: state.trace,
        normalization: normal.steps,
        final_rank: state.net.rank(),
    })
}
