//! Data VASS and Petri nets with equality data: model types, the text format,
//! compilation, normalisation, reversal and successor enumeration.

mod compile;
mod dsl;
mod normalize;
mod successors;

pub use compile::{compile_petri, PetriNet, PetriTransition, Relation, SplitMode};
pub use dsl::{
    parse, parse_configuration, parse_with, render, render_configuration, render_petri, Parsed, Warning,
};
pub use normalize::{
    atoms_to_plain, eliminate_registers, normalize, partial_injections, reverse, Normalized,
    RegisterElimination,
};
pub use successors::{enumerate_successors, instantiate_at, successors_concrete};

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::atoms::{canonicalize, Atom, Nominal};
use crate::error::{Error, Result};
use crate::vector::DataVector;

/// Prefix reserved for generated names.
pub const RESERVED_PREFIX: char = '$';

/// A location together with the content of every register.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct State {
    pub location: usize,
    pub registers: Vec<Option<Atom>>,
}

impl State {
    /// The state at `location` with every register empty.
    pub fn empty(location: usize, registers: usize) -> Self {
        Self { location, registers: vec![None; registers] }
    }

    pub fn is_empty_valuation(&self) -> bool {
        self.registers.iter().all(Option::is_none)
    }

    pub fn support(&self) -> BTreeSet<Atom> {
        self.registers.iter().flatten().copied().collect()
    }
}

impl Nominal for State {
    fn support(&self) -> BTreeSet<Atom> {
        State::support(self)
    }

    fn rename_with(&self, f: &dyn Fn(Atom) -> Atom) -> Self {
        Self {
            location: self.location,
            registers: self.registers.iter().map(|x| x.map(f)).collect(),
        }
    }

    fn atom_signatures(&self) -> HashMap<Atom, Vec<i64>> {
        let mut out: HashMap<Atom, Vec<i64>> = HashMap::new();
        for (i, x) in self.registers.iter().enumerate() {
            if let Some(a) = x {
                out.entry(*a).or_default().push(i as i64);
            }
        }
        out
    }
}

/// Representative `(source, effect, target)` of a transition orbit.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Transition {
    pub source: State,
    pub effect: DataVector,
    pub target: State,
}

impl Transition {
    fn as_triple(&self) -> (State, DataVector, State) {
        (self.source.clone(), self.effect.clone(), self.target.clone())
    }

    pub fn canonical(&self) -> Transition {
        let (t, _) = canonicalize(self);
        t
    }

    pub fn reversed(&self) -> Transition {
        Transition { source: self.target.clone(), effect: -&self.effect, target: self.source.clone() }
    }
}

impl Nominal for Transition {
    fn support(&self) -> BTreeSet<Atom> {
        self.as_triple().support()
    }

    fn rename_with(&self, f: &dyn Fn(Atom) -> Atom) -> Self {
        Transition {
            source: self.source.rename_with(f),
            effect: self.effect.rename_with(f),
            target: self.target.rename_with(f),
        }
    }

    fn atom_signatures(&self) -> HashMap<Atom, Vec<i64>> {
        self.as_triple().atom_signatures()
    }
}

/// A state together with a nonnegative marking.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Configuration {
    pub state: State,
    pub marking: DataVector,
}

impl Configuration {
    pub fn new(state: State, marking: DataVector) -> Result<Self> {
        if !marking.is_nonneg() {
            return Err(Error::Invalid("configuration marking must be nonnegative".into()));
        }
        Ok(Self { state, marking })
    }

    pub fn support(&self) -> BTreeSet<Atom> {
        let mut s = self.state.support();
        s.extend(self.marking.support());
        s
    }
}

impl Nominal for Configuration {
    fn support(&self) -> BTreeSet<Atom> {
        Configuration::support(self)
    }

    fn rename_with(&self, f: &dyn Fn(Atom) -> Atom) -> Self {
        Self { state: self.state.rename_with(f), marking: self.marking.rename_with(f) }
    }

    fn atom_signatures(&self) -> HashMap<Atom, Vec<i64>> {
        (self.state.clone(), self.marking.clone()).atom_signatures()
    }
}

/// A sequence of pseudo-configurations.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PseudoRun {
    pub steps: Vec<(State, DataVector)>,
}

/// The lexicographic measure `(|P|, |H|, #orbits)`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct Rank {
    pub atom_places: usize,
    pub plain_places: usize,
    pub orbits: usize,
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.atom_places, self.plain_places, self.orbits)
    }
}

/// A data VASS. Transitions are canonical orbit representatives, sorted and
/// free of duplicates; `labels[i]` names `transitions[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dvass {
    pub name: String,
    pub locations: Vec<String>,
    pub registers: Vec<String>,
    pub plain_places: Vec<String>,
    pub atom_places: Vec<String>,
    pub transitions: Vec<Transition>,
    pub labels: Vec<String>,
}

impl Dvass {
    pub fn new(
        name: impl Into<String>,
        locations: Vec<String>,
        registers: Vec<String>,
        plain_places: Vec<String>,
        atom_places: Vec<String>,
    ) -> Self {
        Self {
            name: name.into(),
            locations,
            registers,
            plain_places,
            atom_places,
            transitions: Vec::new(),
            labels: Vec::new(),
        }
    }

    /// Same names, no transitions.
    pub fn with_same_signature(&self) -> Self {
        Self { transitions: Vec::new(), labels: Vec::new(), ..self.clone() }
    }

    /// Replaces the transition set; representatives are canonicalised and
    /// duplicates keep the first label.
    pub fn set_transitions(&mut self, items: impl IntoIterator<Item = (String, Transition)>) {
        let mut map: BTreeMap<Transition, String> = BTreeMap::new();
        for (label, t) in items {
            map.entry(t.canonical()).or_insert(label);
        }
        self.transitions = map.keys().cloned().collect();
        self.labels = map.into_values().collect();
    }

    /// Adds one orbit. Returns false if the orbit was already present.
    pub fn add_transition(&mut self, label: impl Into<String>, t: Transition) -> bool {
        let c = t.canonical();
        match self.transitions.binary_search(&c) {
            Ok(_) => false,
            Err(i) => {
                self.transitions.insert(i, c);
                self.labels.insert(i, label.into());
                true
            }
        }
    }

    pub fn labelled(&self) -> impl Iterator<Item = (String, Transition)> + '_ {
        self.labels.iter().cloned().zip(self.transitions.iter().cloned())
    }

    /// Index of the orbit containing `t`.
    pub fn orbit_of(&self, t: &Transition) -> Option<usize> {
        self.transitions.binary_search(&t.canonical()).ok()
    }

    pub fn rank(&self) -> Rank {
        Rank {
            atom_places: self.atom_places.len(),
            plain_places: self.plain_places.len(),
            orbits: self.transitions.len(),
        }
    }

    pub fn is_plain_vass(&self) -> bool {
        self.registers.is_empty() && self.atom_places.is_empty()
    }

    pub fn location_index(&self, name: &str) -> Option<usize> {
        self.locations.iter().position(|l| l == name)
    }

    pub fn empty_state(&self, location: usize) -> State {
        State::empty(location, self.registers.len())
    }

    /// Checks name disjointness and that every orbit fits the signature.
    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for n in self
            .locations
            .iter()
            .chain(&self.registers)
            .chain(&self.plain_places)
            .chain(&self.atom_places)
        {
            if !seen.insert(n.as_str()) {
                return Err(Error::Invalid(format!("name `{n}` declared twice")));
            }
        }
        for t in &self.transitions {
            self.check_state(&t.source)?;
            self.check_state(&t.target)?;
            self.check_vector(&t.effect)?;
        }
        Ok(())
    }

    pub fn check_state(&self, s: &State) -> Result<()> {
        if s.location >= self.locations.len() || s.registers.len() != self.registers.len() {
            return Err(Error::Invalid("state does not fit the net".into()));
        }
        Ok(())
    }

    pub fn check_vector(&self, v: &DataVector) -> Result<()> {
        if v.plain.keys().any(|&h| h >= self.plain_places.len())
            || v.data.keys().any(|&(p, _)| p >= self.atom_places.len())
        {
            return Err(Error::Invalid("vector does not fit the net".into()));
        }
        Ok(())
    }

    pub fn check_configuration(&self, c: &Configuration) -> Result<()> {
        self.check_state(&c.state)?;
        self.check_vector(&c.marking)
    }

    /// Fresh name with the reserved prefix, distinct from every declared one.
    pub fn fresh_name(&self, stem: &str) -> String {
        let taken: BTreeSet<&str> = self
            .locations
            .iter()
            .chain(&self.registers)
            .chain(&self.plain_places)
            .chain(&self.atom_places)
            .map(String::as_str)
            .collect();
        let base = format!("{RESERVED_PREFIX}{stem}");
        if !taken.contains(base.as_str()) {
            return base;
        }
        (1..).map(|i| format!("{base}{i}")).find(|n| !taken.contains(n.as_str())).unwrap()
    }
}

/// A net with optional source and target configurations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub net: Dvass,
    pub source: Option<Configuration>,
    pub target: Option<Configuration>,
}

impl Instance {
    pub fn endpoints(&self) -> Result<(&Configuration, &Configuration)> {
        let s = self.source.as_ref().ok_or(Error::MissingConfiguration("source"))?;
        let t = self.target.as_ref().ok_or(Error::MissingConfiguration("target"))?;
        Ok((s, t))
    }
}

/// Checks that consecutive pseudo-configurations differ by a transition of
/// the net, and optionally that every vector is nonnegative.
pub fn validate_pseudo_run(net: &Dvass, run: &PseudoRun, require_nonneg: bool) -> bool {
    if require_nonneg && run.steps.iter().any(|(_, v)| !v.is_nonneg()) {
        return false;
    }
    run.steps.windows(2).all(|w| {
        let t = Transition {
            source: w[0].0.clone(),
            effect: &w[1].1 - &w[0].1,
            target: w[1].0.clone(),
        };
        net.orbit_of(&t).is_some()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::{apply, Renaming};

    #[test]
    fn state_renaming_keeps_empty_registers() {
        let s = State { location: 0, registers: vec![Some(5), None] };
        let r = Renaming::from_pairs([(5, 7), (7, 5)]).unwrap();
        assert_eq!(apply(&r, &s), State { location: 0, registers: vec![Some(7), None] });
    }

    #[test]
    fn canonical_state_uses_small_atoms() {
        let s = State { location: 1, registers: vec![Some(42)] };
        assert_eq!(canonicalize(&s).0, State { location: 1, registers: vec![Some(0)] });
    }

    #[test]
    fn rank_is_lexicographic() {
        let a = Rank { atom_places: 1, plain_places: 0, orbits: 0 };
        let b = Rank { atom_places: 0, plain_places: 9, orbits: 9 };
        assert!(b < a);
    }
}
