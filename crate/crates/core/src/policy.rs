//! The per-slot routing policy interface shared by the online algorithm and
//! the baselines.

use std::collections::BTreeSet;
use std::time::Duration;

use serde::Serialize;
use thiserror::Error;

use crate::cost::SlotLedger;
use crate::graph::{GraphError, NodeId};
use crate::tree::{MulticastTree, TreeError};

#[derive(Debug, Error)]
pub enum StepError {
    #[error("slot {slot}: node {node} is not a candidate destination")]
    NotACandidate { slot: usize, node: NodeId },
    #[error("slot {slot}: node {node} joined while already a member")]
    AlreadyMember { slot: usize, node: NodeId },
    #[error("slot {slot}: node {node} left without being a member")]
    NotAMember { slot: usize, node: NodeId },
    #[error("slot {slot}: every candidate tree was discarded")]
    AllDiscarded {
        slot: usize,
        candidates: Vec<CandidateSummary>,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// Wall time spent in each phase of one online step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct PhaseTimes {
    pub reference_tree: Duration,
    pub generation: Duration,
    pub patching: Duration,
    pub selection: Duration,
}

impl PhaseTimes {
    pub fn total(&self) -> Duration {
        self.reference_tree + self.generation + self.patching + self.selection
    }
}

/// Compact record of one candidate for diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CandidateSummary {
    pub index: usize,
    pub status: String,
    pub stable_attached: usize,
    pub edges: Vec<(u32, u32)>,
    pub ledger: Option<SlotLedger>,
}

/// What a policy reports after deploying a slot's tree.
#[derive(Clone, Debug)]
pub struct SlotOutcome {
    pub ledger: SlotLedger,
    pub phases: Option<PhaseTimes>,
    pub candidates: Vec<CandidateSummary>,
    pub selected: Option<usize>,
    pub stable_count: Option<usize>,
}

/// A routing policy consumes one slot of membership events at a time and
/// deploys a tree serving exactly the current destinations.
pub trait RoutingPolicy {
    fn name(&self) -> &'static str;

    fn step(&mut self, joins: &[NodeId], leaves: &[NodeId]) -> Result<SlotOutcome, StepError>;

    /// The tree deployed in the most recent slot.
    fn tree(&self) -> &MulticastTree;

    fn destinations(&self) -> &BTreeSet<NodeId>;
}

/// Tracks group membership and validates join/leave events.
#[derive(Clone, Debug)]
pub(crate) struct Membership {
    pub candidates: BTreeSet<NodeId>,
    pub current: BTreeSet<NodeId>,
    pub slot: usize,
}

impl Membership {
    pub fn new(candidates: BTreeSet<NodeId>) -> Self {
        Membership {
            candidates,
            current: BTreeSet::new(),
            slot: 0,
        }
    }

    /// Validates the events of the next slot and returns its destination set.
    pub fn next(&self, joins: &[NodeId], leaves: &[NodeId]) -> Result<BTreeSet<NodeId>, StepError> {
        let slot = self.slot + 1;
        let mut next = self.current.clone();
        for &node in leaves {
            if !next.remove(&node) {
                return Err(StepError::NotAMember { slot, node });
            }
        }
        for &node in joins {
            if !self.candidates.contains(&node) {
                return Err(StepError::NotACandidate { slot, node });
            }
            if self.current.contains(&node) || !next.insert(node) {
                return Err(StepError::AlreadyMember { slot, node });
            }
        }
        Ok(next)
    }

    pub fn commit(&mut self, next: BTreeSet<NodeId>) {
        self.current = next;
        self.slot += 1;
    }
}
