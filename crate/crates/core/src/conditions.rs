//! The two conditions under which the endpoints are bi-reachable: every
//! transition orbit is useful on some cyclic pseudo-run through both
//! endpoints, and every place can be pumped up and down at both endpoints.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cover::{compute_cover, CoverConfig, CoverOutcome, CoverResult};
use crate::error::Result;
use crate::msum::ilp::IlpResult;
use crate::msum::{
    build_usefulness_instances, projection_solve, remark_witness, solve, turn_witness, MsumConfig, MsumInstance,
    MsumOutcome, WitnessItem,
};
use crate::net::{reverse, Configuration, Dvass, State};
use crate::vector::DataVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Usefulness {
    Useful,
    Useless,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitReport {
    pub orbit: usize,
    pub label: String,
    pub status: Usefulness,
    pub forward: MsumOutcome,
    /// Not computed when the forward instance is already certified unsolvable.
    pub backward: Option<MsumOutcome>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Phi1Report {
    pub orbits: Vec<OrbitReport>,
}

impl Phi1Report {
    pub fn holds(&self) -> bool {
        self.orbits.iter().all(|o| o.status == Usefulness::Useful)
    }

    /// The least orbit certified useless.
    pub fn first_useless(&self) -> Option<&OrbitReport> {
        self.orbits.iter().find(|o| o.status == Usefulness::Useless)
    }

    pub fn has_unknown(&self) -> bool {
        self.orbits.iter().any(|o| o.status == Usefulness::Unknown)
    }
}

fn classify(forward: &MsumOutcome, backward: Option<&MsumOutcome>) -> Usefulness {
    match (forward, backward) {
        (MsumOutcome::UnsatCertified, _) | (_, Some(MsumOutcome::UnsatCertified)) => Usefulness::Useless,
        (MsumOutcome::Sat(_), Some(MsumOutcome::Sat(_))) => Usefulness::Useful,
        _ => Usefulness::Unknown,
    }
}

/// Classifies every orbit of `net` by solving its two usefulness instances.
pub fn check_phi1(net: &Dvass, q: &State, q2: &State, config: &MsumConfig) -> Result<Phi1Report> {
    scan_phi1(net, q, q2, config, false)
}

/// The least orbit whose usefulness instance in some direction stays
/// infeasible after forgetting atoms. Unless budgets are treated as
/// certified, these are exactly the orbits [`check_phi1`] finds useless, and
/// finding them needs no search over atom pools.
pub fn first_projection_useless(net: &Dvass, q: &State, q2: &State, node_cap: usize) -> Result<Option<usize>> {
    let n = net.transitions.len();
    // A projected solution for one orbit also serves every orbit it uses:
    // move the mark onto that orbit.
    let mut feasible = [vec![false; n], vec![false; n]];
    for o in 0..n {
        let (fwd, bwd) = build_usefulness_instances(net, q, q2, o)?;
        for (dir, inst) in [&fwd, &bwd].into_iter().enumerate() {
            if feasible[dir][o] {
                continue;
            }
            match projection_solve(inst, node_cap) {
                IlpResult::Infeasible => return Ok(Some(o)),
                IlpResult::Feasible(x) => {
                    feasible[dir][o] = true;
                    for (g, m) in x.iter().enumerate().skip(1) {
                        feasible[dir][g - 1] |= *m > 0;
                    }
                }
                IlpResult::Unknown => {}
            }
        }
    }
    Ok(None)
}

/// As [`check_phi1`], optionally stopping at the first useless orbit.
pub fn scan_phi1(net: &Dvass, q: &State, q2: &State, config: &MsumConfig, stop_at_useless: bool) -> Result<Phi1Report> {
    let n = net.transitions.len();
    // Witnesses already known from solutions for earlier orbits.
    let mut known: [Vec<Option<MsumOutcome>>; 2] = [vec![None; n], vec![None; n]];
    // One witness per direction, for turning solutions around.
    let mut sample: [Option<(usize, Vec<WitnessItem>)>; 2] = [None, None];
    let mut orbits = Vec::new();
    for (o, label) in net.labels.iter().enumerate() {
        let (fwd, bwd) = build_usefulness_instances(net, q, q2, o)?;
        let mut run = |dir: usize, inst: &MsumInstance| -> Result<MsumOutcome> {
            if let Some(found) = known[dir][o].take() {
                debug_assert!(matches!(&found, MsumOutcome::Sat(w) if inst.check_witness(w)));
                return Ok(found);
            }
            let out = solve(inst, config)?;
            if let MsumOutcome::Sat(w) = &out {
                for item in w.iter().filter(|i| i.generator > o + 1) {
                    let other = item.generator - 1;
                    if known[dir][other].is_none() {
                        known[dir][other] = remark_witness(w, o, other).map(MsumOutcome::Sat);
                    }
                }
            }
            Ok(out)
        };
        let forward = run(0, &fwd)?;
        if let (MsumOutcome::Sat(w), None) = (&forward, &sample[0]) {
            sample[0] = Some((o, w.clone()));
        }
        let backward = match &forward {
            MsumOutcome::UnsatCertified => None,
            MsumOutcome::Sat(w) if sample[1].is_some() => {
                let (ov, v) = sample[1].as_ref().unwrap();
                Some(MsumOutcome::Sat(turn_witness(w, v, *ov)))
            }
            _ => Some(run(1, &bwd)?),
        };
        if let (Some(MsumOutcome::Sat(w)), None) = (&backward, &sample[1]) {
            sample[1] = Some((o, w.clone()));
        }
        let forward = match (forward, &backward, &sample[0]) {
            (f @ MsumOutcome::Sat(_), _, _) => f,
            (_, Some(MsumOutcome::Sat(w)), Some((ov, v))) => MsumOutcome::Sat(turn_witness(w, v, *ov)),
            (f, _, _) => f,
        };
        let status = classify(&forward, backward.as_ref());
        orbits.push(OrbitReport { orbit: o, label: label.clone(), status, forward, backward });
        if stop_at_useless && status == Usefulness::Useless {
            break;
        }
    }
    // Orbits seen before a witness in the other direction was known.
    for r in orbits.iter_mut().filter(|r| r.status == Usefulness::Unknown) {
        if let (MsumOutcome::Sat(w), Some((ov, v))) = (&r.forward, &sample[1]) {
            r.backward = Some(MsumOutcome::Sat(turn_witness(w, v, *ov)));
        } else if let (Some(MsumOutcome::Sat(w)), Some((ov, v))) = (&r.backward, &sample[0]) {
            r.forward = MsumOutcome::Sat(turn_witness(w, v, *ov));
        }
        r.status = classify(&r.forward, r.backward.as_ref());
    }
    if cfg!(debug_assertions) {
        for r in &orbits {
            let (fwd, bwd) = build_usefulness_instances(net, q, q2, r.orbit)?;
            if let MsumOutcome::Sat(w) = &r.forward {
                assert!(fwd.check_witness(w), "forward witness for {}", r.label);
            }
            if let Some(MsumOutcome::Sat(w)) = &r.backward {
                assert!(bwd.check_witness(w), "backward witness for {}", r.label);
            }
        }
    }
    Ok(Phi1Report { orbits })
}

/// A plain or atom place. Plain places order first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Place {
    Plain(usize),
    Atom(usize),
}

impl Place {
    pub fn name<'a>(&self, net: &'a Dvass) -> &'a str {
        match self {
            Place::Plain(h) => &net.plain_places[*h],
            Place::Atom(p) => &net.atom_places[*p],
        }
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Plain(h) => write!(f, "plain {h}"),
            Place::Atom(p) => write!(f, "atom {p}"),
        }
    }
}

/// The four pumping directions, in report order.
pub const DIRECTIONS: [&str; 4] =
    ["forward from source", "backward from source", "forward from target", "backward from target"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaceReport {
    pub place: Place,
    /// Pumpability per direction; `None` when that cover was not computed.
    pub pumpable: [Option<bool>; 4],
    /// Bound on the place over the pumps of each direction.
    pub bounds: [Option<u64>; 4],
}

impl PlaceReport {
    /// Proven unpumpable in at least one direction.
    pub fn unpumpable(&self) -> bool {
        self.pumpable.contains(&Some(false))
    }

    /// The smallest bound among the directions where the place is proven
    /// unpumpable. Each of them bounds the place on any pair of runs
    /// between the endpoints.
    pub fn fold_bound(&self) -> Option<u64> {
        (0..4).filter(|&d| self.pumpable[d] == Some(false)).filter_map(|d| self.bounds[d]).min()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Phi2Report {
    pub places: Vec<PlaceReport>,
    /// Largest finite value of an unpumpable place over all covers of the
    /// directions in which it is unpumpable.
    pub bound_b: u64,
    pub covers: Vec<CoverOutcome>,
}

impl Phi2Report {
    pub fn complete(&self) -> bool {
        self.covers.iter().all(|c| c.result().is_some())
    }

    pub fn holds(&self) -> bool {
        self.places.iter().all(|p| p.pumpable.iter().all(|x| *x == Some(true)))
    }

    /// The least place proven unpumpable, with its fold bound.
    pub fn first_unpumpable(&self) -> Option<(Place, u64)> {
        self.places.iter().find(|p| p.unpumpable()).map(|p| (p.place, p.fold_bound().unwrap_or(0)))
    }
}

/// Whether `place` can hold a token in some ideal at `s`.
pub fn pumpable_in(cover: &CoverResult, s: &State, place: Place) -> bool {
    match place {
        Place::Plain(h) => cover.plain_positive(s, h),
        Place::Atom(p) => cover.place_positive(s, p),
    }
}

/// Largest finite size of `place` over all ideals; 0 if there is none.
pub fn finite_bound(cover: &CoverResult, place: Place) -> u64 {
    cover
        .ideals
        .iter()
        .filter_map(|c| match place {
            Place::Plain(h) => c.valuation.plain_at(h).finite(),
            Place::Atom(p) => c.valuation.place_total(p).finite(),
        })
        .max()
        .unwrap_or(0)
}

/// The four coverability sets, from `q(0)` and `q2(0)` in `net` and in its
/// reverse.
pub fn pumping_covers(net: &Dvass, q: &State, q2: &State, config: &CoverConfig) -> Vec<CoverOutcome> {
    let back = reverse(net);
    let at = |s: &State| Configuration { state: s.clone(), marking: DataVector::zero() };
    vec![
        compute_cover(net, &at(q), config),
        compute_cover(&back, &at(q), config),
        compute_cover(net, &at(q2), config),
        compute_cover(&back, &at(q2), config),
    ]
}

/// Evaluates pumpability of every place from the four coverability sets.
pub fn check_phi2(net: &Dvass, q: &State, q2: &State, config: &CoverConfig) -> Phi2Report {
    let covers = pumping_covers(net, q, q2, config);
    phi2_from_covers(net, q, q2, covers)
}

pub fn phi2_from_covers(net: &Dvass, q: &State, q2: &State, covers: Vec<CoverOutcome>) -> Phi2Report {
    let endpoints = [q, q, q2, q2];
    let places: Vec<Place> = (0..net.plain_places.len())
        .map(Place::Plain)
        .chain((0..net.atom_places.len()).map(Place::Atom))
        .collect();
    let mut reports = Vec::new();
    let mut bound_b = 0;
    for place in places {
        let mut pumpable = [None; 4];
        let mut bounds = [None; 4];
        for d in 0..4 {
            if let Some(cover) = covers[d].result() {
                pumpable[d] = Some(pumpable_in(cover, endpoints[d], place));
                bounds[d] = Some(finite_bound(cover, place));
            }
        }
        let report = PlaceReport { place, pumpable, bounds };
        for d in 0..4 {
            if report.pumpable[d] == Some(false) {
                bound_b = bound_b.max(report.bounds[d].unwrap_or(0));
            }
        }
        reports.push(report);
    }
    Phi2Report { places: reports, bound_b, covers }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::CoverConfig;
    use crate::net::{parse, Parsed};

    fn net_of(text: &str) -> Dvass {
        let (Parsed::Dvass(inst), _) = parse(text).unwrap() else { panic!() };
        inst.net
    }

    #[test]
    fn zero_effect_round_trip_is_useful() {
        let net = net_of("dvass z\nlocations: a b\ntrans go: a -> b\ntrans back: b -> a\n");
        let r = check_phi1(&net, &State::empty(0, 0), &State::empty(1, 0), &MsumConfig::default()).unwrap();
        assert!(r.holds(), "{r:?}");
    }

    #[test]
    fn uncancellable_orbit_is_useless() {
        let net = net_of("dvass u\nlocations: a\nplain: h\ntrans up: a -> a eff: +h\n");
        let a = State::empty(0, 0);
        let r = check_phi1(&net, &a, &a, &MsumConfig::default()).unwrap();
        assert_eq!(r.orbits[0].status, Usefulness::Useless);
        assert_eq!(r.orbits[0].forward, MsumOutcome::UnsatCertified);
    }

    #[test]
    fn exhausted_solver_gives_unknown() {
        let net = net_of(
            "dvass k\nlocations: a\natom: p\n\
             trans put: a -> a eff: +p(x) +p(y)\ntrans take: a -> a eff: -p(x) -p(y)\n",
        );
        let a = State::empty(0, 0);
        let tight = MsumConfig { column_cap: 1, ..MsumConfig::default() };
        let r = check_phi1(&net, &a, &a, &tight).unwrap();
        assert!(r.orbits.iter().all(|o| o.status == Usefulness::Unknown), "{r:?}");
        let r = check_phi1(&net, &a, &a, &MsumConfig::default()).unwrap();
        assert!(r.holds());
    }

    #[test]
    fn loop_pair_pumps_everywhere() {
        let net = net_of("dvass l\nlocations: a b\nplain: h\n\
            trans up: a -> a eff: +h\ntrans down: a -> a eff: -h\ntrans go: a -> b\ntrans back: b -> a\n\
            trans up2: b -> b eff: +h\ntrans down2: b -> b eff: -h\n");
        let r = check_phi2(&net, &State::empty(0, 0), &State::empty(1, 0), &CoverConfig::default());
        assert!(r.complete() && r.holds(), "{r:?}");
        assert_eq!(r.bound_b, 0);
    }

    #[test]
    fn untouched_place_is_unpumpable_with_bound_zero() {
        let net = net_of("dvass t\nlocations: a\nplain: h\natom: p\n");
        let a = State::empty(0, 0);
        let r = check_phi2(&net, &a, &a, &CoverConfig::default());
        assert_eq!(r.first_unpumpable(), Some((Place::Plain(0), 0)));
        assert!(r.places.iter().all(|p| p.pumpable == [Some(false); 4]));
        assert_eq!(r.bound_b, 0);
    }

    #[test]
    fn relaxed_example_criterion() {
        let text = "dvass relaxed\nlocations: l m\natom: p1 p2 pbar\n\
            trans t1: l -> l eff: +p1(a) +p1(b)\n\
            trans t2: l -> l eff: +p1(c) +p1(b) +p2(b) -p1(a) -p2(a)\n\
            trans t2same: l -> l eff: +2p1(b) +p2(b) -p1(a) -p2(a)\n\
            trans w: l -> m eff: +pbar(a) -p1(a) -p2(a)\n\
            trans w2: m -> l eff: +p1(c) +p1(a) +p2(a) -pbar(a)\n\
            source: l tokens{p1:[a,c,c] p2:[a,b]}\n";
        let (Parsed::Dvass(inst), _) = parse(text).unwrap() else { panic!() };
        let c0 = inst.source.unwrap();
        let cover = compute_cover(&inst.net, &c0, &CoverConfig::default());
        let cover = cover.result().unwrap();
        let l = State::empty(0, 0);
        assert!(pumpable_in(cover, &l, Place::Atom(0)));
        assert_eq!(finite_bound(cover, Place::Atom(0)), 0);
        assert_eq!(finite_bound(cover, Place::Atom(1)), 2);
    }

    #[test]
    fn capped_cover_leaves_directions_open() {
        let net = net_of("dvass c\nlocations: a\nplain: h\ntrans up: a -> a eff: +h\n");
        let a = State::empty(0, 0);
        let r = check_phi2(&net, &a, &a, &CoverConfig { max_nodes: 1, max_depth: 1 });
        assert!(!r.complete());
    }
}
