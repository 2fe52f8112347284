//! The six-node comparison network used throughout the docs and tests.
//!
//! Source `s`, destinations `d1` (joins in slot 1) and `d2` (joins in slot 2),
//! `alpha = 1`, `beta = 0.2`. The named trees are the slot-1 tree and the
//! four slot-2 routings whose totals are 21.2 (SPT), 20.24 (Steiner), 18 and
//! 17.

use std::collections::BTreeSet;

use crate::graph::{parse_edge_list, Graph};
use crate::tree::MulticastTree;

pub const FIG2_EDGES: &str = "\
s a 7.5
a d1 2.5
s b 6.2
b d2 4
b d1 4
a c 2
c d2 4
d1 d2 6
";

pub fn fig2_graph() -> Graph {
    parse_edge_list(FIG2_EDGES).expect("fixture parses")
}

fn named_tree(g: &Graph, paths: &[&[&str]], dests: &[&str]) -> MulticastTree {
    let ids: Vec<Vec<_>> = paths
        .iter()
        .map(|p| p.iter().map(|n| g.node(n).expect("fixture node")).collect())
        .collect();
    let dests: BTreeSet<_> = dests.iter().map(|n| g.node(n).expect("fixture node")).collect();
    MulticastTree::from_paths(g, g.node("s").unwrap(), ids.iter().map(Vec::as_slice), dests)
        .expect("fixture tree")
}

/// `s-a-d1`, the slot-1 tree of every algorithm.
pub fn fig2_slot1_tree(g: &Graph) -> MulticastTree {
    named_tree(g, &[&["s", "a", "d1"]], &["d1"])
}

/// Slot-2 shortest-path tree.
pub fn fig2_spt_tree(g: &Graph) -> MulticastTree {
    named_tree(g, &[&["s", "a", "d1"], &["s", "b", "d2"]], &["d1", "d2"])
}

/// Slot-2 minimum Steiner tree.
pub fn fig2_steiner_tree(g: &Graph) -> MulticastTree {
    named_tree(g, &[&["s", "b", "d1"], &["b", "d2"]], &["d1", "d2"])
}

/// Slot-2 branch-aware routing through `c` (total 18).
pub fn fig2_branch_tree(g: &Graph) -> MulticastTree {
    named_tree(g, &[&["s", "a", "d1"], &["a", "c", "d2"]], &["d1", "d2"])
}

/// Slot-2 alternative chaining `d2` behind `d1` (total 17).
pub fn fig2_chain_tree(g: &Graph) -> MulticastTree {
    named_tree(g, &[&["s", "a", "d1", "d2"]], &["d1", "d2"])
}
