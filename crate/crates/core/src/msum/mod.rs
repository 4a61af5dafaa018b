//! Multiset Sum over orbit-finite sets of vectors: is a target vector the sum
//! of finitely many renamings of the generators?
//!
//! The solver instantiates generators over growing atom pools and decides
//! integer feasibility per pool, so a positive answer is exact and a negative
//! one holds only up to the pool size. A negative answer is certified when
//! the instance stays infeasible after forgetting atoms altogether.

pub mod ilp;
mod usefulness;

pub use usefulness::{
    build_usefulness_instances, euler_pseudo_run, remark_witness, turn_witness, unmark_witness, witness_transitions,
};

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::atoms::{canonicalize, Atom, Nominal};
use crate::error::{Error, Result};
use crate::net::State;
use ilp::{Ilp, IlpResult};

/// A coordinate of the extended index set: a plain place, an atom place at
/// an atom, a state, or the marker counting uses of a chosen orbit.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum YIndex {
    Plain(usize),
    Data(usize, Atom),
    State(State),
    Star,
}

impl Nominal for YIndex {
    fn support(&self) -> BTreeSet<Atom> {
        match self {
            YIndex::Data(_, a) => [*a].into_iter().collect(),
            YIndex::State(s) => s.support(),
            _ => BTreeSet::new(),
        }
    }

    fn rename_with(&self, f: &dyn Fn(Atom) -> Atom) -> Self {
        match self {
            YIndex::Data(p, a) => YIndex::Data(*p, f(*a)),
            YIndex::State(s) => YIndex::State(s.rename_with(f)),
            other => other.clone(),
        }
    }
}

/// A finitely supported integer vector over [`YIndex`].
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "Vec<(YIndex, i64)>", from = "Vec<(YIndex, i64)>")]
pub struct YVector(pub BTreeMap<YIndex, i64>);

impl From<YVector> for Vec<(YIndex, i64)> {
    fn from(v: YVector) -> Self {
        v.0.into_iter().collect()
    }
}

impl From<Vec<(YIndex, i64)>> for YVector {
    fn from(entries: Vec<(YIndex, i64)>) -> Self {
        let mut v = YVector::default();
        for (k, n) in entries {
            v.add(k, n);
        }
        v
    }
}

impl YVector {
    pub fn add(&mut self, k: YIndex, n: i64) {
        let e = self.0.entry(k.clone()).or_insert(0);
        *e += n;
        if *e == 0 {
            self.0.remove(&k);
        }
    }

    pub fn get(&self, k: &YIndex) -> i64 {
        self.0.get(k).copied().unwrap_or(0)
    }

    pub fn plus(&self, other: &YVector, times: i64) -> YVector {
        let mut out = self.clone();
        for (k, n) in &other.0 {
            out.add(k.clone(), n * times);
        }
        out
    }
}

impl Nominal for YVector {
    fn support(&self) -> BTreeSet<Atom> {
        self.0.keys().flat_map(|k| k.support()).collect()
    }

    fn rename_with(&self, f: &dyn Fn(Atom) -> Atom) -> Self {
        let mut out = YVector::default();
        for (k, n) in &self.0 {
            out.add(k.rename_with(f), *n);
        }
        out
    }

    fn atom_signatures(&self) -> HashMap<Atom, Vec<i64>> {
        let mut out: HashMap<Atom, Vec<(i64, i64, i64, i64)>> = HashMap::new();
        for (k, n) in &self.0 {
            match k {
                YIndex::Data(p, a) => out.entry(*a).or_default().push((0, *p as i64, 0, *n)),
                YIndex::State(s) => {
                    for (i, x) in s.registers.iter().enumerate() {
                        if let Some(a) = x {
                            out.entry(*a).or_default().push((1, s.location as i64, i as i64, *n));
                        }
                    }
                }
                _ => {}
            }
        }
        out.into_iter()
            .map(|(a, mut v)| {
                v.sort();
                (a, v.into_iter().flat_map(|(x, y, z, w)| [x, y, z, w]).collect())
            })
            .collect()
    }
}

/// Generators stand for their orbits; the target is a single vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MsumInstance {
    pub generators: Vec<YVector>,
    pub target: YVector,
}

/// One instantiated generator in a witness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessItem {
    pub generator: usize,
    pub vector: YVector,
    pub multiplicity: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum MsumOutcome {
    Sat(Vec<WitnessItem>),
    /// No solution over pools of at most this many atoms.
    UnsatWithin(usize),
    UnsatCertified,
}

impl MsumOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, MsumOutcome::Sat(_))
    }
}

/// Solver knobs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MsumConfig {
    /// Largest atom pool; `None` picks the default for the instance.
    pub max_budget: Option<usize>,
    /// Treat exhaustion of the budget as a certified negative.
    pub certified: bool,
    /// Stop instantiating once a stage has this many columns.
    pub column_cap: usize,
    /// Branch-and-bound nodes per call, shared by all pool sizes.
    pub node_cap: usize,
}

impl Default for MsumConfig {
    fn default() -> Self {
        Self { max_budget: None, certified: false, column_cap: 4000, node_cap: 20_000 }
    }
}

impl MsumInstance {
    pub fn max_generator_support(&self) -> usize {
        self.generators.iter().map(|g| g.support().len()).max().unwrap_or(0)
    }

    /// `|supp b| + 2 · (largest generator support) · (number of generators)`.
    pub fn default_budget(&self) -> usize {
        self.target.support().len() + 2 * self.max_generator_support() * self.generators.len()
    }

    /// Checks a witness: every item renames its generator and the weighted
    /// sum equals the target.
    pub fn check_witness(&self, w: &[WitnessItem]) -> bool {
        let mut sum = YVector::default();
        for item in w {
            let Some(g) = self.generators.get(item.generator) else { return false };
            if canonicalize(g).0 != canonicalize(&item.vector).0 {
                return false;
            }
            sum = sum.plus(&item.vector, item.multiplicity as i64);
        }
        sum == self.target
    }
}

/// Forgets atoms: `(p, a)` becomes `p` and a state becomes its orbit.
/// Any solution of the instance maps to a solution of the projection.
fn project(k: &YIndex) -> YIndex {
    match k {
        YIndex::Data(p, _) => YIndex::Data(*p, 0),
        YIndex::State(s) => YIndex::State(canonicalize(s).0),
        other => other.clone(),
    }
}

fn build_ilp(columns: &[YVector], target: &YVector, key: impl Fn(&YIndex) -> YIndex) -> Ilp {
    let mut rows: BTreeMap<YIndex, usize> = BTreeMap::new();
    let row_of = |k: YIndex, rows: &mut BTreeMap<YIndex, usize>| {
        let n = rows.len();
        *rows.entry(k).or_insert(n)
    };
    let mut cols = Vec::with_capacity(columns.len());
    for c in columns {
        let mut acc: BTreeMap<usize, i64> = BTreeMap::new();
        for (k, n) in &c.0 {
            *acc.entry(row_of(key(k), &mut rows)).or_insert(0) += n;
        }
        cols.push(acc.into_iter().filter(|(_, n)| *n != 0).collect());
    }
    let mut rhs_map: BTreeMap<usize, i64> = BTreeMap::new();
    for (k, n) in &target.0 {
        *rhs_map.entry(row_of(key(k), &mut rows)).or_insert(0) += n;
    }
    let mut rhs = vec![0; rows.len()];
    for (r, n) in rhs_map {
        rhs[r] = n;
    }
    Ilp::new(rows.len(), cols, rhs)
}

/// Whether the atom-free projection is infeasible, which certifies that
/// the instance itself has no solution.
pub fn projection_infeasible(inst: &MsumInstance, node_cap: usize) -> bool {
    projection_solve(inst, node_cap) == IlpResult::Infeasible
}

/// Integer feasibility of the atom-free projection; a solution lists one
/// multiplicity per generator.
pub fn projection_solve(inst: &MsumInstance, node_cap: usize) -> IlpResult {
    build_ilp(&inst.generators, &inst.target, project).solve(node_cap)
}

/// Every renaming of `g` into `pool`, without duplicates.
pub fn instantiate_into(g: &YVector, pool: &[Atom]) -> Vec<YVector> {
    let supp: Vec<Atom> = g.support().into_iter().collect();
    if supp.len() > pool.len() {
        return Vec::new();
    }
    let mut out = BTreeSet::new();
    let mut cur: Vec<Atom> = Vec::new();
    let mut used = vec![false; pool.len()];
    fn go(
        i: usize,
        supp: &[Atom],
        pool: &[Atom],
        used: &mut [bool],
        cur: &mut Vec<Atom>,
        g: &YVector,
        out: &mut BTreeSet<YVector>,
    ) {
        if i == supp.len() {
            let map: BTreeMap<Atom, Atom> = supp.iter().copied().zip(cur.iter().copied()).collect();
            out.insert(g.rename_with(&|a| map[&a]));
            return;
        }
        for j in 0..pool.len() {
            if !used[j] {
                used[j] = true;
                cur.push(pool[j]);
                go(i + 1, supp, pool, used, cur, g, out);
                cur.pop();
                used[j] = false;
            }
        }
    }
    go(0, &supp, pool, &mut used, &mut cur, g, &mut out);
    out.into_iter().collect()
}

/// Staged solver. Pools are `supp(b)` plus fresh atoms, of total size from
/// the largest generator support (at least `|supp b|`) up to the budget.
pub fn solve(inst: &MsumInstance, config: &MsumConfig) -> Result<MsumOutcome> {
    let target_supp = inst.target.support();
    let budget = config.max_budget.unwrap_or_else(|| inst.default_budget());
    if budget < target_supp.len() {
        return Err(Error::BudgetTooSmall { budget, support: target_supp.len() });
    }
    if projection_infeasible(inst, config.node_cap) {
        return Ok(MsumOutcome::UnsatCertified);
    }
    let start = target_supp.len().max(inst.max_generator_support().min(budget));
    let mut reached = target_supp.len();
    // Branch-and-bound nodes left for all stages together.
    let mut nodes_left = config.node_cap;
    for size in start..=budget {
        let mut pool: Vec<Atom> = target_supp.iter().copied().collect();
        let mut next = 0;
        while pool.len() < size {
            if !target_supp.contains(&next) {
                pool.push(next);
            }
            next += 1;
        }
        let mut columns: Vec<(usize, YVector)> = Vec::new();
        let mut over = false;
        for (gi, g) in inst.generators.iter().enumerate() {
            for v in instantiate_into(g, &pool) {
                columns.push((gi, v));
            }
            if columns.len() > config.column_cap {
                over = true;
                break;
            }
        }
        if over {
            break;
        }
        let vectors: Vec<YVector> = columns.iter().map(|(_, v)| v.clone()).collect();
        let ilp = build_ilp(&vectors, &inst.target, Clone::clone);
        let (result, used) = ilp.solve_counting(nodes_left);
        nodes_left = nodes_left.saturating_sub(used);
        match result {
            IlpResult::Feasible(x) => {
                let witness: Vec<WitnessItem> = columns
                    .into_iter()
                    .zip(x)
                    .filter(|(_, m)| *m > 0)
                    .map(|((generator, vector), multiplicity)| WitnessItem { generator, vector, multiplicity })
                    .collect();
                debug_assert!(inst.check_witness(&witness));
                return Ok(MsumOutcome::Sat(witness));
            }
            IlpResult::Infeasible => reached = size,
            IlpResult::Unknown => break,
        }
    }
    if config.certified && reached == budget {
        Ok(MsumOutcome::UnsatCertified)
    } else {
        Ok(MsumOutcome::UnsatWithin(reached))
    }
}
