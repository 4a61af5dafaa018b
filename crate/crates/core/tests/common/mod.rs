//! Generators and property suites shared by the property tests and the
//! acceptance harness.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use bireach_core::atoms::{apply, canonicalize, canonicalize_fixing, same_orbit, Atom, EqualityType, Nominal, Renaming};
use bireach_core::cover::{compute_cover, maximal_antichain, CoverConfig, CoverOutcome};
use bireach_core::graph::{path_exists, saturate, saturate_edges};
use bireach_core::msum::{solve, MsumConfig, MsumInstance, YIndex, YVector};
use bireach_core::net::{
    compile_petri, enumerate_successors, parse, successors_concrete, Configuration, Dvass, Parsed, SplitMode, State,
    Transition,
};
use bireach_core::vector::{embeds, embeds_config, DataVector, OmegaConfiguration, OmegaValue};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Values draw atoms below this; renamings permute atoms below `SPAN`.
pub const ATOMS: Atom = 8;
pub const SPAN: Atom = 10;

// ---------------------------------------------------------------------------
// Strategies

pub fn renaming() -> impl Strategy<Value = Renaming> {
    Just((0..SPAN).collect::<Vec<Atom>>())
        .prop_shuffle()
        .prop_map(|img| Renaming::from_pairs((0..SPAN).zip(img)).expect("a permutation"))
}

/// A set of atoms and a renaming that fixes each of them.
pub fn renaming_fixing() -> impl Strategy<Value = (BTreeSet<Atom>, Renaming)> {
    prop::collection::btree_set(0..SPAN, 0..4).prop_flat_map(|fixed| {
        let rest: Vec<Atom> = (0..SPAN).filter(|a| !fixed.contains(a)).collect();
        (Just(fixed), Just(rest.clone()).prop_shuffle(), Just(rest)).prop_map(|(fixed, img, rest)| {
            (fixed, Renaming::from_pairs(rest.into_iter().zip(img)).expect("a permutation"))
        })
    })
}

fn vector_from(plain: Vec<(usize, i64)>, data: Vec<(usize, Atom, i64)>) -> DataVector {
    let mut v = DataVector::zero();
    for (h, n) in plain {
        v.add_plain(h, n);
    }
    for (p, a, n) in data {
        v.add_data(p, a, n);
    }
    v
}

/// Vectors over two plain and two atom places.
pub fn data_vector() -> impl Strategy<Value = DataVector> {
    (
        prop::collection::vec((0..2usize, -3i64..=3), 0..3),
        prop::collection::vec((0..2usize, 0..ATOMS, -3i64..=3), 0..5),
    )
        .prop_map(|(plain, data)| vector_from(plain, data))
}

pub fn marking() -> impl Strategy<Value = DataVector> {
    (
        prop::collection::vec((0..2usize, 1i64..=3), 0..3),
        prop::collection::vec((0..2usize, 0..ATOMS, 1i64..=3), 0..5),
    )
        .prop_map(|(plain, data)| vector_from(plain, data))
}

/// States of a net with two locations and one register.
pub fn state() -> impl Strategy<Value = State> {
    (0..2usize, prop::option::of(0..ATOMS)).prop_map(|(location, r)| State { location, registers: vec![r] })
}

pub fn configuration() -> impl Strategy<Value = Configuration> {
    (state(), marking()).prop_map(|(state, marking)| Configuration { state, marking })
}

/// Growth applied to an ω-configuration: added tokens, plain places and
/// atom places switched to ω, and atoms whose entries survive the switch.
#[derive(Debug, Clone)]
pub struct Growth {
    pub tokens: DataVector,
    pub plain: BTreeSet<usize>,
    pub places: BTreeSet<usize>,
    pub keep: BTreeSet<Atom>,
}

pub fn growth() -> impl Strategy<Value = Growth> {
    (
        marking(),
        prop::collection::btree_set(0..2usize, 0..2),
        prop::collection::btree_set(0..2usize, 0..2),
        prop::collection::btree_set(0..ATOMS, 0..3),
    )
        .prop_map(|(tokens, plain, places, keep)| Growth { tokens, plain, places, keep })
}

/// A larger-or-equal ω-configuration with the same state.
pub fn grow(c: &OmegaConfiguration, g: &Growth) -> OmegaConfiguration {
    let mut v = c.valuation.add_vector(&g.tokens).expect("tokens are nonnegative");
    for &h in &g.plain {
        v.set_plain(h, OmegaValue::Omega);
    }
    for &p in &g.places {
        v.pump_default(p, &g.keep);
    }
    OmegaConfiguration { state: c.state.clone(), valuation: v }
}

pub fn omega_configuration() -> impl Strategy<Value = OmegaConfiguration> {
    (configuration(), prop::bool::weighted(0.5), growth()).prop_map(|(c, pump, g)| {
        let base = OmegaConfiguration::from_config(&c);
        if pump {
            grow(&base, &Growth { tokens: DataVector::zero(), ..g })
        } else {
            base
        }
    })
}

fn transition() -> impl Strategy<Value = Transition> {
    (
        0..2usize,
        prop::option::of(0..4 as Atom),
        0..2usize,
        prop::option::of(0..4 as Atom),
        prop::collection::vec((0..2usize, -2i64..=2), 0..2),
        prop::collection::vec((0..2usize, 0..4 as Atom, -2i64..=2), 0..4),
    )
        .prop_map(|(l, r, l2, r2, plain, data)| Transition {
            source: State { location: l, registers: vec![r] },
            target: State { location: l2, registers: vec![r2] },
            effect: vector_from(plain, data),
        })
}

/// Nets with two locations, one register, two plain and two atom places.
pub fn small_net() -> impl Strategy<Value = Dvass> {
    prop::collection::vec(transition(), 1..=4).prop_map(|ts| {
        let names = |stem: &str| (0..2).map(|i| format!("{stem}{i}")).collect::<Vec<_>>();
        let mut net = Dvass::new("random", names("l"), vec!["r".into()], names("h"), names("p"));
        for (i, t) in ts.into_iter().enumerate() {
            net.add_transition(format!("t{i}"), t);
        }
        net
    })
}

// ---------------------------------------------------------------------------
// Order on ω-configurations

pub fn omega_le(x: &OmegaConfiguration, y: &OmegaConfiguration) -> bool {
    if x.state != y.state {
        return false;
    }
    let (a, b) = (&x.valuation, &y.valuation);
    let plain: BTreeSet<usize> = a.plain.keys().chain(b.plain.keys()).copied().collect();
    if plain.iter().any(|&h| a.plain_at(h) > b.plain_at(h)) {
        return false;
    }
    let places: BTreeSet<usize> = a
        .omega_default
        .iter()
        .chain(&b.omega_default)
        .copied()
        .chain(a.data.keys().chain(b.data.keys()).map(|(p, _)| *p))
        .collect();
    let atoms: BTreeSet<Atom> = a.named_atoms().union(&b.named_atoms()).copied().collect();
    places.iter().all(|&p| {
        a.default_at(p) <= b.default_at(p) && atoms.iter().all(|&at| a.data_at(p, at) <= b.data_at(p, at))
    })
}

fn same_renaming(r: &Renaming, s: &Renaming) -> bool {
    (0..2 * SPAN).all(|a| r.get(a) == s.get(a))
}

// ---------------------------------------------------------------------------
// Property suites

pub fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

pub fn group_action_laws(cases: u32) -> Result<(), String> {
    let strategy = (renaming(), renaming(), renaming(), data_vector(), configuration());
    run(cases, strategy, |(r, s, t, v, c)| {
        let id = Renaming::identity();
        prop_assert!(same_renaming(&r.compose(&s).compose(&t), &r.compose(&s.compose(&t))));
        prop_assert!(same_renaming(&r.compose(&id), &r) && same_renaming(&id.compose(&r), &r));
        prop_assert!(r.compose(&r.inverse()).is_identity());
        prop_assert_eq!(apply(&r, &apply(&s, &v)), apply(&r.compose(&s), &v));
        prop_assert_eq!(apply(&r, &apply(&s, &c)), apply(&r.compose(&s), &c));
        prop_assert_eq!(apply(&id, &c), c.clone());
        let supp = c.support();
        let outside: Vec<Atom> = (0..SPAN + 2).filter(|a| !supp.contains(a)).take(2).collect();
        let fixing = Renaming::transposition(outside[0], outside[1]);
        prop_assert_eq!(apply(&fixing, &c), c);
        Ok(())
    })
}

pub fn canonical_forms(cases: u32) -> Result<(), String> {
    let strategy = (configuration(), omega_configuration(), data_vector(), renaming());
    run(cases, strategy, |(c, w, v, r)| {
        let (cc, to) = canonicalize(&c);
        prop_assert_eq!(&canonicalize(&cc).0, &cc);
        prop_assert_eq!(&apply(&to, &c), &cc);
        prop_assert_eq!(&canonicalize(&apply(&r, &c)).0, &cc);
        prop_assert!(same_orbit(&c, &apply(&r, &c)));
        let cw = canonicalize(&w).0;
        prop_assert_eq!(&canonicalize(&cw).0, &cw);
        prop_assert_eq!(canonicalize(&apply(&r, &w)).0, cw);
        let cv = canonicalize(&v).0;
        prop_assert_eq!(&canonicalize(&cv).0, &cv);
        prop_assert_eq!(canonicalize(&apply(&r, &v)).0, cv);
        Ok(())
    })
}

pub fn canonical_forms_fixing(cases: u32) -> Result<(), String> {
    let strategy = (configuration(), renaming_fixing());
    run(cases, strategy, |(c, (fixed, r))| {
        let (cc, _) = canonicalize_fixing(&c, &fixed);
        prop_assert_eq!(&canonicalize_fixing(&apply(&r, &c), &fixed).0, &cc);
        prop_assert_eq!(&canonicalize_fixing(&cc, &fixed).0, &cc);
        let kept: BTreeSet<Atom> = c.support().intersection(&fixed).copied().collect();
        prop_assert!(kept.is_subset(&cc.support()));
        Ok(())
    })
}

pub fn embedding_reflexive(cases: u32) -> Result<(), String> {
    let strategy = (omega_configuration(), configuration());
    run(cases, strategy, |(w, c)| {
        let r = embeds(&w, &w);
        prop_assert!(r.is_some());
        prop_assert!(omega_le(&apply(&r.unwrap(), &w), &w));
        prop_assert!(embeds_config(&c, &c).is_some());
        Ok(())
    })
}

pub fn embedding_transitive(cases: u32) -> Result<(), String> {
    let strategy = (omega_configuration(), growth(), renaming(), growth(), renaming(), omega_configuration());
    run(cases, strategy, |(c1, g1, s1, g2, s2, other)| {
        let c2 = apply(&s1, &grow(&c1, &g1));
        let c3 = apply(&s2, &grow(&c2, &g2));
        for (x, y) in [(&c1, &c2), (&c2, &c3), (&c1, &c3)] {
            let r = embeds(x, y);
            prop_assert!(r.is_some(), "{:?} does not embed into {:?}", x, y);
            prop_assert!(omega_le(&apply(&r.unwrap(), x), y));
        }
        if let Some(r) = embeds(&other, &c1) {
            prop_assert!(omega_le(&apply(&r, &other), &c1));
            prop_assert!(embeds(&other, &c3).is_some());
        }
        Ok(())
    })
}

pub fn operation_equivariance(cases: u32) -> Result<(), String> {
    let strategy =
        (small_net(), configuration(), renaming(), renaming(), omega_configuration(), omega_configuration(), data_vector());
    run(cases, strategy, |(net, c, r, s, a, b, d)| {
        prop_assert_eq!(enumerate_successors(&apply(&r, &c), &net), enumerate_successors(&c, &net));
        prop_assert_eq!(
            successors_concrete(&apply(&r, &c), &net).len(),
            successors_concrete(&c, &net).len()
        );
        prop_assert_eq!(embeds(&apply(&r, &a), &apply(&s, &b)).is_some(), embeds(&a, &b).is_some());
        let moved = a.valuation.add_vector(&d).map(|v| apply(&r, &v));
        prop_assert_eq!(moved, apply(&r, &a.valuation).add_vector(&apply(&r, &d)));
        for p in 0..2 {
            prop_assert_eq!(apply(&r, &c.marking).place_size(p).ok(), c.marking.place_size(p).ok());
        }
        let config = CoverConfig { max_nodes: 400, max_depth: 40 };
        if let (CoverOutcome::Complete(x), CoverOutcome::Complete(y)) =
            (compute_cover(&net, &c, &config), compute_cover(&net, &apply(&r, &c), &config))
        {
            let moved: BTreeSet<OmegaConfiguration> = x.ideals.iter().map(|i| canonicalize(&apply(&r, i)).0).collect();
            let direct: BTreeSet<OmegaConfiguration> = y.ideals.iter().map(|i| canonicalize(i).0).collect();
            prop_assert_eq!(moved, direct);
        }
        Ok(())
    })
}

pub fn antichains(cases: u32) -> Result<(), String> {
    let strategy = prop::collection::vec(omega_configuration(), 0..6);
    run(cases, strategy, |items| {
        let out = maximal_antichain(items.clone());
        for (i, x) in out.iter().enumerate() {
            for (j, y) in out.iter().enumerate() {
                prop_assert!(i == j || embeds(x, y).is_none(), "{:?} embeds into {:?}", x, y);
            }
        }
        for x in &items {
            prop_assert!(out.iter().any(|y| embeds(x, y).is_some()));
        }
        Ok(())
    })
}

pub fn saturation(cases: u32) -> Result<(), String> {
    let strategy = (small_net(), state());
    run(cases, strategy, |(net, s)| {
        let closure = saturate(&net);
        let edges = closure.orbits.keys().cloned().collect();
        let again = saturate_edges(&edges, net.locations.len(), net.registers.len());
        prop_assert!(again.orbits.keys().eq(closure.orbits.keys()));
        let pair_orbits = net.locations.len().pow(2) * EqualityType::all(2 * net.registers.len()).len();
        prop_assert!(closure.max_witness() <= pair_orbits);
        prop_assert!(path_exists(&closure, &s, &s));
        Ok(())
    })
}

pub fn msum_budget_monotone(cases: u32) -> Result<(), String> {
    run(cases, any::<u64>(), |seed| {
        let mut rng = seeded(seed);
        let inst = random_msum(&mut rng);
        let start = inst.target.support().len().max(inst.max_generator_support());
        let mut seen = false;
        for budget in start..=5 {
            let config = MsumConfig { max_budget: Some(budget), ..MsumConfig::default() };
            let out = solve(&inst, &config).map_err(|e| TestCaseError::fail(e.to_string()))?;
            if let bireach_core::msum::MsumOutcome::Sat(w) = &out {
                prop_assert!(inst.check_witness(w));
            }
            prop_assert!(!seen || out.is_sat(), "budget {} lost a solution", budget);
            seen |= out.is_sat();
        }
        Ok(())
    })
}

pub type Suite = (&'static str, fn(u32) -> Result<(), String>);

pub const SUITES: &[Suite] = &[
    ("group action laws", group_action_laws),
    ("canonical forms", canonical_forms),
    ("canonical forms fixing atoms", canonical_forms_fixing),
    ("embedding reflexive", embedding_reflexive),
    ("embedding transitive", embedding_transitive),
    ("operation equivariance", operation_equivariance),
    ("cover antichains", antichains),
    ("saturation", saturation),
    ("multiset sum budget monotone", msum_budget_monotone),
];

// ---------------------------------------------------------------------------
// Seeded random instances

pub fn seeded(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

/// A configuration reached from `src` by a random walk of up to `steps`.
pub fn random_walk(rng: &mut ChaCha8Rng, net: &Dvass, src: &Configuration, steps: usize) -> Configuration {
    let mut cur = src.clone();
    for _ in 0..rng.gen_range(0..=steps) {
        let succ = successors_concrete(&cur, net);
        if succ.is_empty() {
            break;
        }
        cur = succ[rng.gen_range(0..succ.len())].2.clone();
    }
    cur
}

/// A plain VASS with up to 4 locations on a cycle, up to 3 places, effects
/// in [-2, 2], and a target reached by a random walk.
pub fn random_plain_vass(rng: &mut ChaCha8Rng, name: &str) -> (Dvass, Configuration, Configuration) {
    let nl = rng.gen_range(1..=4);
    let np = rng.gen_range(1..=3);
    let mut net = Dvass::new(
        name,
        (0..nl).map(|l| format!("l{l}")).collect(),
        vec![],
        (0..np).map(|h| format!("h{h}")).collect(),
        vec![],
    );
    let effect = |rng: &mut ChaCha8Rng| {
        let mut e = DataVector::zero();
        for h in 0..np {
            e.add_plain(h, rng.gen_range(-2..=2));
        }
        e
    };
    for l in 0..nl {
        let t = Transition { source: State::empty(l, 0), target: State::empty((l + 1) % nl, 0), effect: effect(rng) };
        net.add_transition(format!("c{l}"), t);
    }
    for k in 0..rng.gen_range(1..=4) {
        let (l, l2) = (rng.gen_range(0..nl), rng.gen_range(0..nl));
        let t = Transition { source: State::empty(l, 0), target: State::empty(l2, 0), effect: effect(rng) };
        net.add_transition(format!("t{k}"), t);
    }
    let mut marking = DataVector::zero();
    for h in 0..np {
        marking.add_plain(h, rng.gen_range(0..=2));
    }
    let src = Configuration { state: State::empty(rng.gen_range(0..nl), 0), marking };
    let tgt = random_walk(rng, &net, &src, 8);
    (net, src, tgt)
}

/// A small data VASS: up to 2 locations, at most one register, at most one
/// plain place, one or two atom places.
pub fn random_data_net(rng: &mut ChaCha8Rng, name: &str) -> (Dvass, Configuration, Configuration) {
    let nl = rng.gen_range(1..=2);
    let nr = rng.gen_range(0..=1);
    let nh = rng.gen_range(0..=1);
    let np = rng.gen_range(1..=2);
    let names = |stem: &str, n: usize| (0..n).map(|i| format!("{stem}{i}")).collect::<Vec<_>>();
    let mut net = Dvass::new(name, names("l", nl), names("r", nr), names("h", nh), names("p", np));
    let reg = |rng: &mut ChaCha8Rng| (0..nr).map(|_| rng.gen_bool(0.6).then(|| rng.gen_range(0..2))).collect();
    for k in 0..rng.gen_range(1..=3) {
        let mut effect = DataVector::zero();
        for h in 0..nh {
            effect.add_plain(h, rng.gen_range(-1..=1));
        }
        for _ in 0..rng.gen_range(1..=3) {
            effect.add_data(rng.gen_range(0..np), rng.gen_range(0..3), rng.gen_range(-1..=1));
        }
        let source = State { location: rng.gen_range(0..nl), registers: reg(rng) };
        let target = State { location: rng.gen_range(0..nl), registers: reg(rng) };
        net.add_transition(format!("t{k}"), Transition { source, target, effect });
    }
    let mut marking = DataVector::zero();
    for h in 0..nh {
        marking.add_plain(h, rng.gen_range(0..=1));
    }
    for _ in 0..rng.gen_range(0..=2) {
        marking.add_data(rng.gen_range(0..np), rng.gen_range(10..12), 1);
    }
    let registers = (0..nr).map(|_| rng.gen_bool(0.5).then_some(10)).collect();
    let src = Configuration { state: State { location: rng.gen_range(0..nl), registers }, marking };
    let tgt = random_walk(rng, &net, &src, 4);
    (net, src, tgt)
}

/// Index of the row counting how many generator instances a solution uses.
pub const COUNT: YIndex = YIndex::Plain(9);

/// Generators touch at most two atoms; every generator adds one to
/// [`COUNT`], so the target's count is the total multiplicity.
pub fn random_msum(rng: &mut ChaCha8Rng) -> MsumInstance {
    let generators: Vec<YVector> = (0..rng.gen_range(1..=3))
        .map(|_| {
            let mut g = YVector::default();
            g.add(COUNT, 1);
            if rng.gen_bool(0.3) {
                g.add(YIndex::Plain(0), rng.gen_range(-1..=1));
            }
            for _ in 0..rng.gen_range(1..=3) {
                g.add(YIndex::Data(rng.gen_range(0..2), rng.gen_range(0..2)), rng.gen_range(-1..=2));
            }
            g
        })
        .collect();
    let k = rng.gen_range(0..=4);
    let pool: Vec<Atom> = (0..5).collect();
    let mut target = YVector::default();
    for _ in 0..k {
        let g = &generators[rng.gen_range(0..generators.len())];
        let supp: Vec<Atom> = g.support().into_iter().collect();
        let mut img = pool.clone();
        for i in 0..supp.len() {
            let j = rng.gen_range(i..img.len());
            img.swap(i, j);
        }
        let r = Renaming::extend_injection(supp.iter().copied().zip(img));
        target = target.plus(&apply(&r, g), 1);
    }
    if rng.gen_bool(0.5) {
        target.add(YIndex::Data(rng.gen_range(0..2), rng.gen_range(0..5)), rng.gen_range(-1..=1));
    }
    MsumInstance { generators, target }
}

// ---------------------------------------------------------------------------
// Corpus

pub struct Sample {
    pub name: String,
    pub net: Dvass,
    pub src: Configuration,
    pub tgt: Configuration,
}

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn load_text(name: &str, text: &str, split: SplitMode) -> Sample {
    let (parsed, _) = parse(text).unwrap_or_else(|e| panic!("{name}: {e}"));
    let inst = match parsed {
        Parsed::Dvass(inst) => inst,
        Parsed::Petri(p) => compile_petri(&p, split).unwrap_or_else(|e| panic!("{name}: {e}")),
    };
    let src = inst.source.clone().unwrap_or_else(|| panic!("{name}: no source"));
    let tgt = inst.target.clone().unwrap_or_else(|| panic!("{name}: no target"));
    Sample { name: name.to_string(), net: inst.net, src, tgt }
}

pub fn corpus() -> Vec<Sample> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .map(|e| e.expect("directory entry").path())
        .filter(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("petri" | "dvass")))
        .collect();
    files.sort();
    files
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p).expect("readable corpus file");
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            load_text(&name, &text, SplitMode::Register)
        })
        .collect()
}
