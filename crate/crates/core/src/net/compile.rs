//! Compilation of Petri nets with equality data into data VASS.
//!
//! Each transition expands into one orbit per total equality type of its
//! variables that satisfies the constraint. A transition instance that takes
//! and returns the same atom on the same place would lose its enabling
//! condition once the effect is summed, so such instances are split into an
//! input half and an output half joined by a fresh intermediate location.
//! Atoms shared by both halves are carried across in fresh registers, or in
//! fresh atom places when [`SplitMode::AtomPlace`] is chosen.

use serde::{Deserialize, Serialize};

use super::{Configuration, Dvass, Instance, State, Transition};
use crate::atoms::{set_partitions, Atom};
use crate::error::{Error, Result};
use crate::vector::DataVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Eq,
    Neq,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PetriTransition {
    pub name: String,
    /// Input arcs as (place index, variable).
    pub inputs: Vec<(usize, String)>,
    pub outputs: Vec<(usize, String)>,
    pub constraint: Vec<(String, Relation, String)>,
}

impl PetriTransition {
    /// Variables in order of first occurrence.
    pub fn variables(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let names = self
            .inputs
            .iter()
            .map(|(_, x)| x)
            .chain(self.outputs.iter().map(|(_, x)| x))
            .chain(self.constraint.iter().flat_map(|(x, _, y)| [x, y]));
        for x in names {
            if !out.contains(x) {
                out.push(x.clone());
            }
        }
        out
    }

    /// Total equality types satisfying the constraint, as one atom per
    /// variable (in the order of [`Self::variables`]).
    pub fn equality_types(&self) -> Vec<Vec<Atom>> {
        let vars = self.variables();
        let idx = |x: &String| vars.iter().position(|v| v == x).unwrap();
        set_partitions(vars.len())
            .into_iter()
            .filter(|labels| {
                self.constraint.iter().all(|(x, rel, y)| {
                    let same = labels[idx(x)] == labels[idx(y)];
                    same == (*rel == Relation::Eq)
                })
            })
            .map(|labels| labels.into_iter().map(|l| l as Atom).collect())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PetriNet {
    pub name: String,
    pub places: Vec<String>,
    pub transitions: Vec<PetriTransition>,
    pub marking: Option<DataVector>,
    pub target: Option<DataVector>,
}

/// Where a split transition keeps the atoms shared by its two halves.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitMode {
    #[default]
    Register,
    AtomPlace,
}

struct Expanded {
    label: String,
    input: DataVector,
    output: DataVector,
}

pub fn compile_petri(net: &PetriNet, mode: SplitMode) -> Result<Instance> {
    let mut plain_orbits: Vec<Expanded> = Vec::new();
    let mut tight: Vec<(Expanded, Vec<Atom>)> = Vec::new();
    for t in &net.transitions {
        let vars = t.variables();
        let types = t.equality_types();
        if types.is_empty() {
            return Err(Error::Unsatisfiable(t.name.clone()));
        }
        for (k, atoms) in types.into_iter().enumerate() {
            let atom_of = |x: &String| atoms[vars.iter().position(|v| v == x).unwrap()];
            let mut input = DataVector::zero();
            let mut output = DataVector::zero();
            for (p, x) in &t.inputs {
                input.add_data(*p, atom_of(x), 1);
            }
            for (p, x) in &t.outputs {
                output.add_data(*p, atom_of(x), 1);
            }
            let label = format!("{}_{}", t.name, k + 1);
            let is_tight = input.data.keys().any(|key| output.data.contains_key(key));
            let e = Expanded { label, input, output };
            if is_tight {
                let shared: Vec<Atom> =
                    e.input.support().intersection(&e.output.support()).copied().collect();
                tight.push((e, shared));
            } else {
                plain_orbits.push(e);
            }
        }
    }

    let width = tight.iter().map(|(_, s)| s.len()).max().unwrap_or(0);
    let mut dv = Dvass::new(net.name.clone(), Vec::new(), Vec::new(), Vec::new(), net.places.clone());
    dv.locations.push(dv.fresh_name("main"));
    for i in 0..tight.len() {
        let name = dv.fresh_name(&format!("mid{}", i + 1));
        dv.locations.push(name);
    }
    let hold_base = dv.atom_places.len();
    match mode {
        SplitMode::Register => {
            for i in 0..width {
                let name = dv.fresh_name(&format!("hold{}", i + 1));
                dv.registers.push(name);
            }
        }
        SplitMode::AtomPlace => {
            for i in 0..width {
                let name = dv.fresh_name(&format!("hold{}", i + 1));
                dv.atom_places.push(name);
            }
        }
    }
    let nregs = dv.registers.len();
    let main = State::empty(0, nregs);

    let mut items: Vec<(String, Transition)> = Vec::new();
    for e in &plain_orbits {
        let effect = &e.output - &e.input;
        items.push((e.label.clone(), Transition { source: main.clone(), effect, target: main.clone() }));
    }
    for (i, (e, shared)) in tight.iter().enumerate() {
        let mid_loc = 1 + i;
        let (mid, held) = match mode {
            SplitMode::Register => {
                let mut regs = vec![None; nregs];
                for (j, a) in shared.iter().enumerate() {
                    regs[j] = Some(*a);
                }
                (State { location: mid_loc, registers: regs }, DataVector::zero())
            }
            SplitMode::AtomPlace => {
                let mut held = DataVector::zero();
                for (j, a) in shared.iter().enumerate() {
                    held.add_data(hold_base + j, *a, 1);
                }
                (State::empty(mid_loc, nregs), held)
            }
        };
        let take = &held - &e.input;
        let give = &e.output - &held;
        items.push((
            format!("{}_in", e.label),
            Transition { source: main.clone(), effect: take, target: mid.clone() },
        ));
        items.push((
            format!("{}_out", e.label),
            Transition { source: mid, effect: give, target: main.clone() },
        ));
    }
    dv.set_transitions(items);

    let config = |m: &Option<DataVector>| -> Result<Option<Configuration>> {
        m.as_ref().map(|v| Configuration::new(main.clone(), v.clone())).transpose()
    };
    Ok(Instance { source: config(&net.marking)?, target: config(&net.target)?, net: dv })
}
