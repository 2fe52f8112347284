//! Online multicast routing with branch-aware Steiner trees.
//!
//! The crate models a multicast session as a sequence of time slots. In each
//! slot destinations join or leave, and a routing policy must deploy a tree
//! from the source to every current destination. The cost of a slot is the
//! tree weight, plus `alpha` per branch node, plus `beta` times the weight of
//! the routing change for destinations that stayed.
//!
//! * [`graph`] and [`paths`]: the network and deterministic shortest paths.
//! * [`tree`]: multicast trees and the surgery operators (prune, sprout,
//!   graft, contract).
//! * [`cost`]: the per-slot cost, budget and deposit accounting.
//! * [`engine`]: the online algorithm (`Obsta`).
//! * [`baselines`]: shortest-path-tree and Steiner-heuristic policies.
//! * [`scenario`]: scenario files, traces and generators.
//! * [`oracle`]: exhaustive solvers for tiny instances.
//!
//! The `book/` directory next to the workspace walks through the same
//! material with runnable snippets; those snippets are compiled as doctests
//! of this crate.

pub mod baselines;
pub mod cost;
pub mod engine;
pub mod fixtures;
pub mod graph;
pub mod oracle;
pub mod paths;
pub mod policy;
pub mod scenario;
pub mod tree;

pub use cost::{CostKnobs, SlotLedger};
pub use graph::{Graph, NodeId};
pub use paths::GlobalSpt;
pub use tree::MulticastTree;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/graphs.md")]
    mod graphs {}
    #[doc = include_str!("../../../book/src/trees.md")]
    mod trees {}
    #[doc = include_str!("../../../book/src/costs.md")]
    mod costs {}
    #[doc = include_str!("../../../book/src/online.md")]
    mod online {}
    #[doc = include_str!("../../../book/src/baselines.md")]
    mod baselines {}
    #[doc = include_str!("../../../book/src/scenarios.md")]
    mod scenarios {}
    #[doc = include_str!("../../../book/src/harness.md")]
    mod harness {}
}
