//! Decision engine for bi-reachability in data VASS and Petri nets with
//! equality data.
//!
//! The decider normalises the instance, then repeatedly either answers or
//! replaces the net by one of strictly smaller rank: it drops transition
//! orbits that no cyclic pseudo-run between the endpoints can use, and folds
//! places that cannot be pumped into locations or registers.

pub mod atoms;
pub mod conditions;
pub mod cover;
pub mod error;
pub mod graph;
pub mod msum;
pub mod net;
pub mod oracle;
mod pairs;
pub mod reduce;
pub mod vector;

pub use error::{Error, Result};
