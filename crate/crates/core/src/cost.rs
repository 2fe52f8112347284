//! Scalar accounting for the online objective: tree, branch and rerouting
//! costs, the per-slot budget, the deposit recurrence and the potential
//! rerouting cost.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::NodeId;
use crate::paths::GlobalSpt;
use crate::tree::{branch_count, prune, sym_diff, Edge, EdgeSet, MulticastTree};

/// Absolute slack used for every floating-point sufficiency and equality check.
pub const EPS: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum KnobError {
    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
}

/// Operator weights: branch cost `alpha`, rerouting cost `beta`, final
/// selection mix `gamma` and stability threshold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostKnobs {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub stability_threshold: f64,
}

impl Default for CostKnobs {
    fn default() -> Self {
        CostKnobs {
            alpha: 0.1,
            beta: 0.6,
            gamma: 0.5,
            stability_threshold: 0.2,
        }
    }
}

impl CostKnobs {
    pub fn new(alpha: f64, beta: f64) -> Self {
        CostKnobs {
            alpha,
            beta,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), KnobError> {
        let check = |name, value: f64, ok: bool, range| {
            if ok {
                Ok(())
            } else {
                Err(KnobError::OutOfRange { name, value, range })
            }
        };
        check(
            "alpha",
            self.alpha,
            self.alpha >= 0.0 && self.alpha.is_finite(),
            "[0, inf)",
        )?;
        check(
            "beta",
            self.beta,
            self.beta >= 0.0 && self.beta.is_finite(),
            "[0, inf)",
        )?;
        check("gamma", self.gamma, (0.0..=1.0).contains(&self.gamma), "[0, 1]")?;
        check(
            "stability_threshold",
            self.stability_threshold,
            (0.0..=1.0).contains(&self.stability_threshold),
            "[0, 1]",
        )
    }
}

/// Per-slot cost record.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlotLedger {
    pub slot: usize,
    pub tree_cost: f64,
    pub branch_cost: usize,
    pub rerouting_cost: f64,
    /// Incremental budget `alpha + sum(dist + alpha)`, the one the deposit uses.
    pub budget: f64,
    /// Budget in the `sum(dist) + alpha * |D_i|` form.
    pub budget_sum_form: f64,
    pub deposit: f64,
    pub potential_rc: f64,
    pub total: f64,
}

impl SlotLedger {
    /// Assembles a ledger for `tree` serving `tree.destinations()` after a
    /// slot whose deployed tree and destination set were `prev_tree` /
    /// `prev_dests` and whose closing deposit was `prev_deposit`.
    pub fn evaluate(
        slot: usize,
        prev_tree: &MulticastTree,
        prev_dests: &BTreeSet<NodeId>,
        prev_deposit: f64,
        tree: &MulticastTree,
        spt: &GlobalSpt,
        knobs: &CostKnobs,
    ) -> SlotLedger {
        let dests = tree.destinations();
        let w = tree_cost(tree);
        let b = branch_count(tree);
        let rc = rerouting_cost(prev_tree, tree, prev_dests, dests);
        let total = total_cost(w, b, rc, knobs);
        let budget = budget(dests, spt, knobs);
        SlotLedger {
            slot,
            tree_cost: w,
            branch_cost: b,
            rerouting_cost: rc,
            budget,
            budget_sum_form: budget_sum_form(dests, spt, knobs),
            deposit: prev_deposit + budget - total,
            potential_rc: potential_rerouting_cost(tree, dests, spt),
            total,
        }
    }

    pub fn has_sufficient_deposit(&self, knobs: &CostKnobs) -> bool {
        sufficient_deposit(self.deposit, self.potential_rc, knobs)
    }
}

pub fn tree_cost(tree: &MulticastTree) -> f64 {
    tree.weight()
}

/// Weight of the change in routing for destinations present in both slots.
///
/// Computed as the symmetric difference of the old tree without the leavers
/// and the new tree without the joiners.
pub fn rerouting_cost(
    prev: &MulticastTree,
    cur: &MulticastTree,
    prev_dests: &BTreeSet<NodeId>,
    cur_dests: &BTreeSet<NodeId>,
) -> f64 {
    rerouted_edges(prev, cur, prev_dests, cur_dests).weight()
}

/// The edge set whose weight is [`rerouting_cost`].
pub fn rerouted_edges(
    prev: &MulticastTree,
    cur: &MulticastTree,
    prev_dests: &BTreeSet<NodeId>,
    cur_dests: &BTreeSet<NodeId>,
) -> EdgeSet {
    let leavers: BTreeSet<NodeId> = prev_dests.difference(cur_dests).copied().collect();
    let joiners: BTreeSet<NodeId> = cur_dests.difference(prev_dests).copied().collect();
    let old = restrict(prev, prev_dests, &leavers);
    let new = restrict(cur, cur_dests, &joiners);
    sym_diff(old.edges(), new.edges())
}

/// Prunes `removed` from `tree` viewed as serving exactly `dests`.
fn restrict(tree: &MulticastTree, dests: &BTreeSet<NodeId>, removed: &BTreeSet<NodeId>) -> MulticastTree {
    let view = if tree.destinations() == dests {
        tree.clone()
    } else {
        tree.clone()
            .with_destinations(dests.clone())
            .expect("destination set lies in the tree")
    };
    prune(&view, removed).expect("removed set drawn from the destinations")
}

/// `w + alpha * b + beta * rc`.
pub fn total_cost(w: f64, b: usize, rc: f64, knobs: &CostKnobs) -> f64 {
    w + knobs.alpha * b as f64 + knobs.beta * rc
}

/// Incremental budget: `alpha` for the source plus `dist(s, d) + alpha` for
/// each destination.
pub fn budget(dests: &BTreeSet<NodeId>, spt: &GlobalSpt, knobs: &CostKnobs) -> f64 {
    knobs.alpha + dests.iter().map(|&d| spt.dist(d) + knobs.alpha).sum::<f64>()
}

/// Budget as `sum(dist(s, d)) + alpha * |dests|`.
pub fn budget_sum_form(dests: &BTreeSet<NodeId>, spt: &GlobalSpt, knobs: &CostKnobs) -> f64 {
    dests.iter().fold(0.0, |a, &d| a + spt.dist(d)) + knobs.alpha * dests.len() as f64
}

/// Weight of the union, over `dests`, of the edges where the tree path to a
/// destination and its shortest path disagree. Each edge counts once.
pub fn potential_rerouting_cost(tree: &MulticastTree, dests: &BTreeSet<NodeId>, spt: &GlobalSpt) -> f64 {
    potential_rerouting_edges(tree, dests, spt).weight()
}

/// The edge set whose weight is [`potential_rerouting_cost`].
pub fn potential_rerouting_edges(tree: &MulticastTree, dests: &BTreeSet<NodeId>, spt: &GlobalSpt) -> EdgeSet {
    let parents = tree.parents();
    let mut union = EdgeSet::new();
    for &d in dests {
        let mut diff = EdgeSet::new();
        let mut u = d;
        while u != tree.root() {
            let &(p, w) = parents.get(&u).expect("destination reachable in its tree");
            diff.insert(Edge::new(u, p), w);
            u = p;
        }
        for &(e, w) in spt.path_edges(d).iter() {
            if diff.remove(e).is_none() {
                union.insert(e, w);
            }
        }
        union.extend(&diff);
    }
    union
}

/// `dep >= beta * prc` up to [`EPS`].
pub fn sufficient_deposit(dep: f64, prc: f64, knobs: &CostKnobs) -> bool {
    dep >= knobs.beta * prc - EPS
}
