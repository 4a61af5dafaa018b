//! Coverability sets as finite unions of ideals of simple ω-configurations.
//!
//! The tree search runs on the DVAS form of the net (no registers, one
//! location) and its leaves are pulled back to the original net.

mod dvas;
mod tree;

pub use dvas::{lift_plain, locations_to_places, sum_lifted, to_dvas, DvasForm, LocationPlaces};
pub use tree::{accelerate, karp_miller, maximal_antichain, omega_successors, CapHit};

use serde::{Deserialize, Serialize};

use crate::net::{Configuration, Dvass, State};
use crate::vector::{embeds, OmegaConfiguration, OmegaValue};

/// Maximal ideals whose union is the downward closure of the reachability
/// set. Canonical, sorted and pairwise incomparable.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverResult {
    pub ideals: Vec<OmegaConfiguration>,
}

impl CoverResult {
    pub fn from_ideals(items: impl IntoIterator<Item = OmegaConfiguration>) -> Self {
        Self { ideals: maximal_antichain(items) }
    }

    /// Ideals whose state is `s`.
    pub fn at<'a>(&'a self, s: &'a State) -> impl Iterator<Item = &'a OmegaConfiguration> + 'a {
        self.ideals.iter().filter(move |c| c.state == *s)
    }

    /// Whether some ideal at state `s` can hold a token on plain place `h`.
    pub fn plain_positive(&self, s: &State, h: usize) -> bool {
        self.at(s).any(|c| c.valuation.plain_at(h) > OmegaValue::ZERO)
    }

    /// Whether some ideal at state `s` can hold a token on atom place `p`.
    pub fn place_positive(&self, s: &State, p: usize) -> bool {
        self.at(s).any(|c| c.valuation.place_positive(p))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoverOutcome {
    Complete(CoverResult),
    /// The tree grew past a configured cap.
    CapExceeded { nodes: usize, depth: usize },
}

impl CoverOutcome {
    pub fn result(&self) -> Option<&CoverResult> {
        match self {
            CoverOutcome::Complete(r) => Some(r),
            CoverOutcome::CapExceeded { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverConfig {
    pub max_nodes: usize,
    pub max_depth: usize,
}

impl Default for CoverConfig {
    fn default() -> Self {
        Self { max_nodes: 20_000, max_depth: 500 }
    }
}

/// Coverability set of `c0`, computed on the DVAS form of `net`.
pub fn compute_cover(net: &Dvass, c0: &Configuration, config: &CoverConfig) -> CoverOutcome {
    let form = to_dvas(net);
    let root = OmegaConfiguration::from_config(&form.encode(c0));
    match karp_miller(&form.net, root, config.max_nodes, config.max_depth) {
        Ok(nodes) => CoverOutcome::Complete(CoverResult::from_ideals(nodes.iter().flat_map(|n| form.decode(n)))),
        Err(cap) => CoverOutcome::CapExceeded { nodes: cap.nodes, depth: cap.depth },
    }
}

/// Coverability set of `c0` by a tree search on `net` itself, keeping its
/// registers and locations.
pub fn compute_cover_direct(net: &Dvass, c0: &Configuration, config: &CoverConfig) -> CoverOutcome {
    let root = OmegaConfiguration::from_config(c0);
    match karp_miller(net, root, config.max_nodes, config.max_depth) {
        Ok(nodes) => CoverOutcome::Complete(CoverResult::from_ideals(nodes)),
        Err(cap) => CoverOutcome::CapExceeded { nodes: cap.nodes, depth: cap.depth },
    }
}

/// Whether `c` lies in one of the ideals.
pub fn ideal_member(cover: &CoverResult, c: &Configuration) -> bool {
    let c = OmegaConfiguration::from_config(c);
    cover.ideals.iter().any(|i| embeds(&c, i).is_some())
}

#[cfg(test)]
mod tests;
