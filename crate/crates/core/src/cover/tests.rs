use std::collections::BTreeSet;

use super::*;
use crate::atoms::canonicalize;
use crate::net::{parse, parse_configuration, Parsed};
use crate::vector::{DataVector, OmegaValuation};

const RELAXED: &str = "dvass relaxed\nlocations: l m\natom: p1 p2 pbar\n\
    trans t1: l -> l eff: +p1(a) +p1(b)\n\
    trans t2: l -> l eff: +p1(c) +p1(b) +p2(b) -p1(a) -p2(a)\n\
    trans t2same: l -> l eff: +2p1(b) +p2(b) -p1(a) -p2(a)\n\
    trans w: l -> m eff: +pbar(a) -p1(a) -p2(a)\n\
    trans w2: m -> l eff: +p1(c) +p1(a) +p2(a) -pbar(a)\n\
    source: l tokens{p1:[a,c,c] p2:[a,b]}\n";

fn instance(text: &str) -> (Dvass, Configuration) {
    let (Parsed::Dvass(inst), _) = parse(text).unwrap() else { panic!() };
    (inst.net, inst.source.unwrap())
}

fn ideal(location: usize, omega_p1: bool, entries: &[(usize, u32, u64)]) -> OmegaConfiguration {
    let mut v = OmegaValuation::default();
    if omega_p1 {
        v.omega_default.insert(0);
    }
    for &(p, a, n) in entries {
        v.set_data(p, a, OmegaValue::Fin(n));
    }
    canonicalize(&OmegaConfiguration { state: State::empty(location, 0), valuation: v }).0
}

fn complete(o: CoverOutcome) -> CoverResult {
    match o {
        CoverOutcome::Complete(r) => r,
        other => panic!("{other:?}"),
    }
}

fn expected_relaxed() -> BTreeSet<OmegaConfiguration> {
    [
        ideal(0, true, &[(1, 0, 1), (1, 1, 1)]),
        ideal(0, true, &[(1, 0, 2)]),
        ideal(1, true, &[(1, 0, 1), (2, 1, 1)]),
        ideal(1, true, &[(1, 0, 1), (2, 0, 1)]),
    ]
    .into_iter()
    .collect()
}

#[test]
fn no_transitions_gives_the_start() {
    let (net, c0) = instance("dvass e\nlocations: l\natom: p\nsource: l tokens{p:[a,b,b]}\n");
    let r = complete(compute_cover(&net, &c0, &CoverConfig::default()));
    assert_eq!(r.ideals, vec![canonicalize(&OmegaConfiguration::from_config(&c0)).0]);
}

#[test]
fn relaxed_example_has_four_ideals() {
    let (net, c0) = instance(RELAXED);
    let r = complete(compute_cover(&net, &c0, &CoverConfig::default()));
    let got: BTreeSet<_> = r.ideals.iter().cloned().collect();
    assert_eq!(got, expected_relaxed());
}

#[test]
fn relaxed_example_direct_search_agrees() {
    let (net, c0) = instance(RELAXED);
    let a = complete(compute_cover(&net, &c0, &CoverConfig::default()));
    let b = complete(compute_cover_direct(&net, &c0, &CoverConfig::default()));
    assert_eq!(a, b);
}

#[test]
fn membership_in_relaxed_cover() {
    let (net, c0) = instance(RELAXED);
    let r = complete(compute_cover(&net, &c0, &CoverConfig::default()));
    assert!(ideal_member(&r, &c0));
    let mut big = DataVector::zero();
    big.add_data(0, 7, 100);
    big.add_data(1, 0, 1);
    big.add_data(1, 1, 1);
    assert!(ideal_member(&r, &Configuration { state: State::empty(0, 0), marking: big }));
    let mut three = DataVector::zero();
    three.add_data(1, 0, 1);
    three.add_data(1, 1, 1);
    three.add_data(1, 2, 1);
    assert!(!ideal_member(&r, &Configuration { state: State::empty(0, 0), marking: three }));
}

#[test]
fn one_register_becomes_two_places_and_a_flash() {
    let (Parsed::Dvass(inst), _) =
        parse("dvass r\nlocations: l\nregisters: r\natom: p\ntrans t: l[r=-] -> l[r=a] eff: -p(a)\n").unwrap()
    else {
        panic!()
    };
    let net = inst.net;
    let form = to_dvas(&net);
    let elim = form.registers.as_ref().unwrap();
    assert_eq!(form.net.atom_places.len(), 3);
    assert_eq!(form.net.atom_places[elim.register_place[0]], "r");
    let flashes: Vec<_> = form.net.labels.iter().filter(|l| l.starts_with("$flash")).collect();
    assert_eq!(flashes.len(), 1);
    let flash = &form.net.transitions[form.net.labels.iter().position(|l| l.starts_with("$flash")).unwrap()];
    assert_eq!(flash.effect.data_at(elim.register_place[0], 0), 1);
    assert_eq!(flash.effect.data_at(elim.bar_place[0], 0), -1);
}

#[test]
fn register_net_direct_and_translated_agree() {
    let texts = [
        "dvass a\nlocations: l\nregisters: r\natom: p\n\
         trans load: l[r=-] -> l[r=a] eff: -p(a)\ntrans store: l[r=a] -> l[r=-] eff: +p(a) +p(b)\n\
         source: l[r=-] tokens{p:[x]}\n",
        "dvass b\nlocations: l m\nregisters: r s\natom: p\nplain: h\n\
         trans t: l[r=a s=-] -> m[r=a s=a] eff: +h\ntrans u: m[r=a s=a] -> l[r=a s=-] eff: -h +p(a)\n\
         source: l[r=x s=-] tokens{p:[x]}\n",
        "dvass c\nlocations: l\nregisters: r\natom: p\n\
         trans swap: l[r=a] -> l[r=b] eff: -p(b) +p(a)\nsource: l[r=x] tokens{p:[y,z]}\n",
    ];
    for text in texts {
        let (net, c0) = instance(text);
        let a = complete(compute_cover(&net, &c0, &CoverConfig::default()));
        let b = complete(compute_cover_direct(&net, &c0, &CoverConfig::default()));
        assert_eq!(a, b, "{text}");
        assert!(ideal_member(&a, &c0));
    }
}

#[test]
fn lifted_plain_places_sum_back() {
    let (net, c0) = instance(
        "dvass p\nlocations: l\nplain: h g\natom: p\n\
         trans t: l -> l eff: -h +2g\ntrans u: l -> l eff: -g +p(a)\nsource: l plain{h:2}\n",
    );
    let native = complete(compute_cover(&net, &c0, &CoverConfig::default()));
    let (lifted, index) = lift_plain(&net);
    assert_eq!(lifted.plain_places.len(), 0);
    let mut start = DataVector::zero();
    for (h, n) in &c0.marking.plain {
        for k in 0..*n {
            start.add_data(index[*h], 100 + k as u32, 1);
        }
    }
    let lc0 = Configuration { state: c0.state.clone(), marking: start };
    let via = complete(compute_cover(&lifted, &lc0, &CoverConfig::default()));
    let summed = CoverResult::from_ideals(via.ideals.iter().map(|i| sum_lifted(i, &index, net.atom_places.len())));
    assert_eq!(summed, native);
}

#[test]
fn caps_give_a_diagnostic() {
    let (net, c0) = instance(RELAXED);
    let o = compute_cover(&net, &c0, &CoverConfig { max_nodes: 2, max_depth: 100 });
    assert!(matches!(o, CoverOutcome::CapExceeded { .. }));
}

#[test]
fn configuration_parsing_matches_membership() {
    let (net, c0) = instance(RELAXED);
    let r = complete(compute_cover(&net, &c0, &CoverConfig::default()));
    let c = parse_configuration(&net, "m tokens{p1:[a,a,a] p2:[a] pbar:[a]}").unwrap();
    assert!(ideal_member(&r, &c));
    let c = parse_configuration(&net, "m tokens{p2:[a,b]}").unwrap();
    assert!(!ideal_member(&r, &c));
}
