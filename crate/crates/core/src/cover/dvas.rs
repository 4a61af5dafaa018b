//! Translation of a data VASS into a single-location, register-free net, and
//! the pull-back of ω-configurations along it.

use std::collections::{BTreeMap, BTreeSet};

use crate::atoms::{set_partitions, Atom};
use crate::net::{eliminate_registers, partial_injections, Configuration, Dvass, RegisterElimination, State, Transition, RESERVED_PREFIX};
use crate::vector::{DataVector, OmegaConfiguration, OmegaValue, OmegaValuation};

/// Locations encoded as plain places: a token on `place[l]` means the run is
/// at `l`, a token on `settling[l]` means it has just arrived there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocationPlaces {
    pub base_plain: usize,
    pub place: Vec<usize>,
    pub settling: Vec<usize>,
}

/// A net in DVAS form together with what is needed to map configurations
/// in and ideals back out.
#[derive(Debug, Clone)]
pub struct DvasForm {
    pub net: Dvass,
    pub registers: Option<RegisterElimination>,
    pub locations: Option<LocationPlaces>,
    base_atom_places: usize,
    base_registers: usize,
}

fn stem(name: &str) -> &str {
    name.strip_prefix(RESERVED_PREFIX).unwrap_or(name)
}

/// Moves the locations of a register-free net into plain places. Every
/// transition `l -> l'` consumes the token of `l` and produces a settling
/// token for `l'`; a separate transition turns settling tokens into location
/// tokens, so a self-loop cannot fire without its location.
pub fn locations_to_places(net: &Dvass) -> (Dvass, LocationPlaces) {
    assert!(net.registers.is_empty(), "locations are encoded after registers");
    let base_plain = net.plain_places.len();
    let mut out = Dvass::new(
        net.name.clone(),
        vec![format!("{RESERVED_PREFIX}dvas")],
        Vec::new(),
        net.plain_places.clone(),
        net.atom_places.clone(),
    );
    let mut place = Vec::new();
    let mut settling = Vec::new();
    for l in &net.locations {
        place.push(out.plain_places.len());
        let name = out.fresh_name(&format!("at.{}", stem(l)));
        out.plain_places.push(name);
    }
    for l in &net.locations {
        settling.push(out.plain_places.len());
        let name = out.fresh_name(&format!("to.{}", stem(l)));
        out.plain_places.push(name);
    }
    let here = State::empty(0, 0);
    let mut items = Vec::new();
    for (label, t) in net.labelled() {
        let mut effect = t.effect.clone();
        effect.add_plain(place[t.source.location], -1);
        effect.add_plain(settling[t.target.location], 1);
        items.push((label, Transition { source: here.clone(), effect, target: here.clone() }));
    }
    for (l, name) in net.locations.iter().enumerate() {
        let mut effect = DataVector::unit_plain(place[l]);
        effect.add_plain(settling[l], -1);
        let label = format!("{RESERVED_PREFIX}settle_{}", stem(name));
        items.push((label, Transition { source: here.clone(), effect, target: here.clone() }));
    }
    out.set_transitions(items);
    (out, LocationPlaces { base_plain, place, settling })
}

/// Eliminates registers and then locations; each step is skipped when there
/// is nothing to eliminate.
pub fn to_dvas(net: &Dvass) -> DvasForm {
    let mut current = net.clone();
    let registers = (!net.registers.is_empty()).then(|| {
        let elim = eliminate_registers(net);
        current = elim.net.clone();
        elim
    });
    let locations = (current.locations.len() > 1).then(|| {
        let (moved, places) = locations_to_places(&current);
        current = moved;
        places
    });
    DvasForm {
        net: current,
        registers,
        locations,
        base_atom_places: net.atom_places.len(),
        base_registers: net.registers.len(),
    }
}

impl DvasForm {
    /// The configuration of the DVAS form corresponding to `c`.
    pub fn encode(&self, c: &Configuration) -> Configuration {
        let mut c = match &self.registers {
            Some(elim) => elim.encode(c),
            None => c.clone(),
        };
        if let Some(lp) = &self.locations {
            c.marking.add_plain(lp.place[c.state.location], 1);
            c.state = State::empty(0, 0);
        }
        c
    }

    /// The ω-configurations of the original net denoted by an ideal of the
    /// DVAS form. Ideals sitting between two steps of a simulated transition
    /// are dropped: each of them is covered by the ideal reached once the
    /// step completes.
    pub fn decode(&self, ideal: &OmegaConfiguration) -> Vec<OmegaConfiguration> {
        let mut ideal = ideal.clone();
        if let Some(lp) = &self.locations {
            let Some(l) = lp.place.iter().position(|&h| ideal.valuation.plain_at(h) >= OmegaValue::Fin(1)) else {
                return Vec::new();
            };
            ideal.valuation.plain.retain(|h, _| *h < lp.base_plain);
            ideal.state = State::empty(l, 0);
        }
        let Some(elim) = &self.registers else { return vec![ideal] };
        let (l, barred, mask) = elim.decode_location(ideal.state.location);
        if barred {
            return Vec::new();
        }
        let f = &ideal.valuation;
        let mut choices: Vec<Vec<Option<Atom>>> = vec![Vec::new()];
        let mut fresh_next = ideal.named_atoms().last().map_or(0, |m| m + 1);
        for r in 0..self.base_registers {
            let options: Vec<Option<Atom>> = if mask & (1 << r) != 0 {
                vec![None]
            } else {
                let p = elim.register_place[r];
                let mut v: Vec<Option<Atom>> = f
                    .data
                    .iter()
                    .filter(|((q, _), x)| *q == p && **x >= OmegaValue::Fin(1))
                    .map(|((_, a), _)| Some(*a))
                    .collect();
                if f.omega_default.contains(&p) {
                    v.push(Some(fresh_next));
                    fresh_next += 1;
                }
                v
            };
            choices = choices
                .into_iter()
                .flat_map(|prefix| {
                    options.iter().map(move |o| {
                        let mut p = prefix.clone();
                        p.push(*o);
                        p
                    })
                })
                .collect();
        }
        let base = self.base_atom_places;
        let mut valuation = OmegaValuation {
            plain: f.plain.clone(),
            omega_default: f.omega_default.iter().copied().filter(|p| *p < base).collect(),
            data: f.data.iter().filter(|((p, _), _)| *p < base).map(|(k, x)| (*k, *x)).collect(),
        };
        valuation.plain.retain(|_, x| *x != OmegaValue::ZERO);
        choices
            .into_iter()
            .map(|registers| OmegaConfiguration { state: State { location: l, registers }, valuation: valuation.clone() })
            .collect()
    }
}

/// Replaces every plain place by an atom place: a plain effect `k` on `h`
/// becomes `|k|` tokens on the new atom place, over every way of choosing
/// their atoms among themselves and the atoms of the transition. Summing an
/// atom place of the result over all atoms recovers the plain count.
/// Returns the net and the atom place standing for each plain place.
pub fn lift_plain(net: &Dvass) -> (Dvass, Vec<usize>) {
    let mut out = Dvass::new(
        net.name.clone(),
        net.locations.clone(),
        net.registers.clone(),
        Vec::new(),
        net.atom_places.clone(),
    );
    let mut index = Vec::new();
    for h in &net.plain_places {
        index.push(out.atom_places.len());
        let name = out.fresh_name(&format!("lift.{}", stem(h)));
        out.atom_places.push(name);
    }
    let mut items = Vec::new();
    for (label, t) in net.labelled() {
        let mut base = t.clone();
        base.effect.plain.clear();
        let support: Vec<Atom> = {
            let mut s: BTreeSet<Atom> = t.effect.support();
            s.extend(t.source.support());
            s.extend(t.target.support());
            s.into_iter().collect()
        };
        // one slot per token, each with its place and sign
        let slots: Vec<(usize, i64)> = t
            .effect
            .plain
            .iter()
            .flat_map(|(h, n)| std::iter::repeat((index[*h], n.signum())).take(n.unsigned_abs() as usize))
            .collect();
        let above = support.last().map_or(0, |m| m + 1);
        let mut seen = BTreeSet::new();
        for blocks in set_partitions(slots.len()) {
            let nblocks = blocks.iter().copied().max().map_or(0, |m| m + 1);
            for inj in partial_injections(nblocks, support.len()) {
                let mut effect = base.effect.clone();
                for (i, (p, sign)) in slots.iter().enumerate() {
                    let b = blocks[i];
                    let a = inj[b].map_or(above + b as Atom, |j| support[j]);
                    effect.add_data(*p, a, *sign);
                }
                let inst = Transition { source: base.source.clone(), effect, target: base.target.clone() };
                if seen.insert(inst.canonical()) {
                    items.push((label.clone(), inst));
                }
            }
        }
    }
    out.set_transitions(items);
    (out, index)
}

/// Sums the lifted atom places of an ideal back into plain places.
pub fn sum_lifted(ideal: &OmegaConfiguration, index: &[usize], base_atom_places: usize) -> OmegaConfiguration {
    let f = &ideal.valuation;
    let mut plain: BTreeMap<usize, OmegaValue> = BTreeMap::new();
    for (h, &p) in index.iter().enumerate() {
        let x = f.place_total(p);
        if x != OmegaValue::ZERO {
            plain.insert(h, x);
        }
    }
    let valuation = OmegaValuation {
        plain,
        omega_default: f.omega_default.iter().copied().filter(|p| *p < base_atom_places).collect(),
        data: f.data.iter().filter(|((p, _), _)| *p < base_atom_places).map(|(k, x)| (*k, *x)).collect(),
    };
    OmegaConfiguration { state: ideal.state.clone(), valuation }
}
