use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::DataVector;
use crate::atoms::{Atom, Nominal};
use crate::net::{Configuration, State};

/// An element of `N ∪ {ω}`, with `n < ω` for every natural `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum OmegaValue {
    Fin(u64),
    Omega,
}

impl OmegaValue {
    pub const ZERO: OmegaValue = OmegaValue::Fin(0);

    pub fn is_omega(self) -> bool {
        self == OmegaValue::Omega
    }

    /// Adds an integer; `None` when a finite value would turn negative.
    pub fn add_int(self, n: i64) -> Option<OmegaValue> {
        match self {
            OmegaValue::Omega => Some(OmegaValue::Omega),
            OmegaValue::Fin(m) => {
                let r = m as i64 + n;
                (r >= 0).then_some(OmegaValue::Fin(r as u64))
            }
        }
    }

    pub fn plus(self, other: OmegaValue) -> OmegaValue {
        match (self, other) {
            (OmegaValue::Fin(a), OmegaValue::Fin(b)) => OmegaValue::Fin(a + b),
            _ => OmegaValue::Omega,
        }
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            OmegaValue::Fin(n) => Some(n),
            OmegaValue::Omega => None,
        }
    }

    fn code(self) -> i64 {
        match self {
            OmegaValue::Fin(n) => n as i64,
            OmegaValue::Omega => -1,
        }
    }
}

impl fmt::Display for OmegaValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OmegaValue::Fin(n) => write!(f, "{n}"),
            OmegaValue::Omega => write!(f, "ω"),
        }
    }
}

/// A simple ω-valuation: plain places map to `N ∪ {ω}`; each atom place has
/// a default (0 or ω) and finitely many exceptions that differ from it.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OmegaValuation {
    /// Nonzero plain entries.
    pub plain: BTreeMap<usize, OmegaValue>,
    /// Atom places whose default is ω.
    pub omega_default: BTreeSet<usize>,
    /// Exceptions to the defaults.
    #[serde(with = "crate::pairs")]
    pub data: BTreeMap<(usize, Atom), OmegaValue>,
}

impl OmegaValuation {
    pub fn from_vector(v: &DataVector) -> Self {
        assert!(v.is_nonneg(), "ω-valuations are nonnegative");
        Self {
            plain: v.plain.iter().map(|(h, n)| (*h, OmegaValue::Fin(*n as u64))).collect(),
            omega_default: BTreeSet::new(),
            data: v.data.iter().map(|(x, n)| (*x, OmegaValue::Fin(*n as u64))).collect(),
        }
    }

    pub fn default_at(&self, p: usize) -> OmegaValue {
        if self.omega_default.contains(&p) {
            OmegaValue::Omega
        } else {
            OmegaValue::ZERO
        }
    }

    pub fn plain_at(&self, h: usize) -> OmegaValue {
        self.plain.get(&h).copied().unwrap_or(OmegaValue::ZERO)
    }

    pub fn data_at(&self, p: usize, a: Atom) -> OmegaValue {
        self.data.get(&(p, a)).copied().unwrap_or_else(|| self.default_at(p))
    }

    pub fn set_plain(&mut self, h: usize, x: OmegaValue) {
        if x == OmegaValue::ZERO {
            self.plain.remove(&h);
        } else {
            self.plain.insert(h, x);
        }
    }

    pub fn set_data(&mut self, p: usize, a: Atom, x: OmegaValue) {
        if x == self.default_at(p) {
            self.data.remove(&(p, a));
        } else {
            self.data.insert((p, a), x);
        }
    }

    /// Switches the default of `p` to ω. Atoms in `keep` retain their current
    /// value as explicit exceptions; other exceptions at `p` are absorbed.
    pub fn pump_default(&mut self, p: usize, keep: &BTreeSet<Atom>) {
        if self.omega_default.contains(&p) {
            return;
        }
        let kept: Vec<(Atom, OmegaValue)> =
            keep.iter().map(|&a| (a, self.data_at(p, a))).filter(|(_, x)| !x.is_omega()).collect();
        self.data.retain(|(q, _), _| *q != p);
        self.omega_default.insert(p);
        for (a, x) in kept {
            self.data.insert((p, a), x);
        }
    }

    /// Atoms mentioned by an exception.
    pub fn named_atoms(&self) -> BTreeSet<Atom> {
        self.data.keys().map(|(_, a)| *a).collect()
    }

    /// Adds an effect, treating ω as absorbing. `None` if some finite entry
    /// would become negative.
    pub fn add_vector(&self, v: &DataVector) -> Option<OmegaValuation> {
        let mut out = self.clone();
        for (h, n) in &v.plain {
            let x = self.plain_at(*h).add_int(*n)?;
            out.set_plain(*h, x);
        }
        for ((p, a), n) in &v.data {
            let x = self.data_at(*p, *a).add_int(*n)?;
            out.set_data(*p, *a, x);
        }
        Some(out)
    }

    /// Size of atom place `p`: ω if some atom may carry ω tokens, otherwise
    /// the sum of the positive entries.
    pub fn place_total(&self, p: usize) -> OmegaValue {
        if self.omega_default.contains(&p) {
            return OmegaValue::Omega;
        }
        self.data
            .iter()
            .filter(|((q, _), _)| *q == p)
            .fold(OmegaValue::ZERO, |acc, (_, x)| acc.plus(*x))
    }

    /// True when `p` has some atom with a positive entry, or default ω.
    pub fn place_positive(&self, p: usize) -> bool {
        self.omega_default.contains(&p)
            || self.data.iter().any(|((q, _), x)| *q == p && *x > OmegaValue::ZERO)
    }

    /// True if no entry is ω.
    pub fn is_finite(&self) -> bool {
        self.omega_default.is_empty()
            && self.plain.values().all(|x| !x.is_omega())
            && self.data.values().all(|x| !x.is_omega())
    }

    /// The vector of a finite valuation.
    pub fn to_vector(&self) -> Option<DataVector> {
        if !self.is_finite() {
            return None;
        }
        let mut v = DataVector::zero();
        for (h, x) in &self.plain {
            v.add_plain(*h, x.finite()? as i64);
        }
        for ((p, a), x) in &self.data {
            v.add_data(*p, *a, x.finite()? as i64);
        }
        Some(v)
    }
}

impl Nominal for OmegaValuation {
    fn support(&self) -> BTreeSet<Atom> {
        self.named_atoms()
    }

    fn rename_with(&self, f: &dyn Fn(Atom) -> Atom) -> Self {
        Self {
            plain: self.plain.clone(),
            omega_default: self.omega_default.clone(),
            data: self.data.iter().map(|((p, a), x)| ((*p, f(*a)), *x)).collect(),
        }
    }

    fn atom_signatures(&self) -> HashMap<Atom, Vec<i64>> {
        let mut out: HashMap<Atom, Vec<i64>> = HashMap::new();
        for ((p, a), x) in &self.data {
            let s = out.entry(*a).or_default();
            s.push(*p as i64);
            s.push(x.code());
        }
        out
    }
}

/// A state with a simple ω-valuation, denoting the ideal of configurations
/// that embed into it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OmegaConfiguration {
    pub state: State,
    pub valuation: OmegaValuation,
}

impl OmegaConfiguration {
    pub fn from_config(c: &Configuration) -> Self {
        Self { state: c.state.clone(), valuation: OmegaValuation::from_vector(&c.marking) }
    }

    /// Atoms held in registers or mentioned by an exception.
    pub fn named_atoms(&self) -> BTreeSet<Atom> {
        let mut s = self.valuation.named_atoms();
        s.extend(self.state.support());
        s
    }
}

impl Nominal for OmegaConfiguration {
    fn support(&self) -> BTreeSet<Atom> {
        self.named_atoms()
    }

    fn rename_with(&self, f: &dyn Fn(Atom) -> Atom) -> Self {
        Self { state: self.state.rename_with(f), valuation: self.valuation.rename_with(f) }
    }

    fn atom_signatures(&self) -> HashMap<Atom, Vec<i64>> {
        (self.state.clone(), self.valuation.clone()).atom_signatures()
    }
}
