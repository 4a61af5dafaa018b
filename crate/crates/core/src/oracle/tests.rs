use super::*;
use crate::net::{compile_petri, parse, validate_pseudo_run, Parsed, SplitMode};

fn plain(text: &str) -> Dvass {
    let (Parsed::Dvass(inst), _) = parse(text).unwrap() else { panic!() };
    inst.net
}

#[test]
fn same_configuration_needs_no_steps() {
    let net = plain("dvass s\nlocations: a\nplain: h\ntrans up: a -> a eff: +h\n");
    let c = Configuration { state: State::empty(0, 0), marking: DataVector::unit_plain(0) };
    let OracleAnswer::Found(run) = bfs_reach(&net, &c, &c, &OracleBudget::default()) else { panic!() };
    assert_eq!(run.steps.len(), 1);
}

#[test]
fn pictured_net_reaches_in_two_steps() {
    let (Parsed::Petri(petri), _) = parse(include_str!("../../../../corpus/fig1.petri")).unwrap() else { panic!() };
    let inst = compile_petri(&petri, SplitMode::Register).unwrap();
    let (src, tgt) = inst.endpoints().unwrap();
    let OracleAnswer::Found(run) = bfs_reach(&inst.net, src, tgt, &OracleBudget::default()) else { panic!() };
    assert_eq!(run.steps.len(), 3);
    assert!(validate_pseudo_run(&inst.net, &run, true));
    assert_eq!(run.steps[0], (src.state.clone(), src.marking.clone()));
    assert_eq!(run.steps[2], (tgt.state.clone(), tgt.marking.clone()));
}

#[test]
fn budget_cuts_long_runs() {
    let net = plain("dvass b\nlocations: a\nplain: h\ntrans up: a -> a eff: +h\n");
    let src = Configuration { state: State::empty(0, 0), marking: DataVector::zero() };
    let tgt = Configuration { state: State::empty(0, 0), marking: DataVector::unit_plain(0).scale(10) };
    let small = OracleBudget { max_tokens_per_place: 5, ..OracleBudget::default() };
    assert_eq!(bfs_reach(&net, &src, &tgt, &small), OracleAnswer::Exhausted { frontier_empty: false });
    assert!(bfs_reach(&net, &src, &tgt, &OracleBudget { max_tokens_per_place: 10, ..small }).found());
}

#[test]
fn bounded_net_gives_conclusive_no() {
    let net = plain("dvass n\nlocations: a b\nplain: h\ntrans go: a -> b eff: -h\n");
    let src = Configuration { state: State::empty(0, 0), marking: DataVector::unit_plain(0) };
    let tgt = Configuration { state: State::empty(1, 0), marking: DataVector::zero() };
    assert!(bfs_reach(&net, &src, &tgt, &OracleBudget::default()).found());
    assert!(bfs_reach(&net, &tgt, &src, &OracleBudget::default()).conclusive_no());
    assert_eq!(bfs_bireach(&net, &src, &tgt, &OracleBudget::default()), OracleVerdict::NotBireachable);
}

#[test]
fn target_atoms_are_matched_exactly() {
    // moving a token keeps its atom, so p(a) cannot become q(b) for b != a
    let net = plain("dvass m\nlocations: l\natom: p q\ntrans mv: l -> l eff: -p(x) +q(x)\n");
    let mut from = DataVector::zero();
    from.add_data(0, 0, 1);
    from.add_data(0, 1, 1);
    let mut to = DataVector::zero();
    to.add_data(1, 0, 1);
    to.add_data(0, 1, 1);
    let l = State::empty(0, 0);
    let src = Configuration { state: l.clone(), marking: from };
    let tgt = Configuration { state: l.clone(), marking: to.clone() };
    assert!(bfs_reach(&net, &src, &tgt, &OracleBudget::default()).found());
    let mut wrong = DataVector::zero();
    wrong.add_data(1, 5, 1);
    wrong.add_data(0, 1, 1);
    let tgt = Configuration { state: l, marking: wrong };
    assert!(bfs_reach(&net, &src, &tgt, &OracleBudget::default()).conclusive_no());
}

#[test]
fn pseudo_runs_may_go_negative() {
    let net = plain("dvass v\nlocations: a\nplain: h\ntrans down: a -> a eff: -h\n");
    let a = State::empty(0, 0);
    let run = PseudoRun { steps: vec![(a.clone(), DataVector::zero()), (a, -&DataVector::unit_plain(0))] };
    assert!(validate_pseudo_run(&net, &run, false));
    assert!(!validate_pseudo_run(&net, &run, true));
}

#[test]
fn theta_conditions_on_small_vass() {
    let both = plain("dvass t\nlocations: a\nplain: h\ntrans up: a -> a eff: +h\ntrans down: a -> a eff: -h\n");
    let a = State::empty(0, 0);
    assert!(vass_theta_check(&both, &a, &a, &CoverConfig::default()).unwrap());
    let up = plain("dvass u\nlocations: a\nplain: h\ntrans up: a -> a eff: +h\n");
    assert!(!vass_theta_check(&up, &a, &a, &CoverConfig::default()).unwrap());
    let data = plain("dvass d\nlocations: a\natom: p\n");
    assert_eq!(vass_theta_check(&data, &a, &a, &CoverConfig::default()), Err(Error::NotPlain));
}
