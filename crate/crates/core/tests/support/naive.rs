//! Slow, definition-following versions of the tree operators and a random
//! instance generator, shared by the property tests and the acceptance
//! suite.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use obsta::graph::{Graph, GraphBuilder, NodeId};
use obsta::tree::{Edge, EdgeSet, MulticastTree};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn edge_set(e: &EdgeSet) -> BTreeSet<Edge> {
    e.edges().collect()
}

/// Nodes reachable from the root using only `edges`.
fn reachable(root: NodeId, edges: &BTreeSet<Edge>) -> BTreeSet<NodeId> {
    let mut seen = BTreeSet::from([root]);
    let mut changed = true;
    while changed {
        changed = false;
        for e in edges {
            let (a, b) = e.endpoints();
            if seen.contains(&a) != seen.contains(&b) {
                seen.insert(a);
                seen.insert(b);
                changed = true;
            }
        }
    }
    seen
}

/// Edges on the root-to-`to` path: those whose removal cuts `to` off.
pub fn tree_path(t: &MulticastTree, to: NodeId) -> BTreeSet<Edge> {
    let all = edge_set(t.edges());
    all.iter()
        .copied()
        .filter(|e| {
            let mut rest = all.clone();
            rest.remove(e);
            !reachable(t.root(), &rest).contains(&to)
        })
        .collect()
}

pub fn prune(t: &MulticastTree, leaving: &BTreeSet<NodeId>) -> BTreeSet<Edge> {
    t.destinations()
        .difference(leaving)
        .flat_map(|&d| tree_path(t, d))
        .collect()
}

pub fn sym_diff(a: &EdgeSet, b: &EdgeSet) -> BTreeSet<Edge> {
    let (a, b) = (edge_set(a), edge_set(b));
    a.union(&b)
        .filter(|e| !(a.contains(e) && b.contains(e)))
        .copied()
        .collect()
}

pub fn sprout(t: &MulticastTree, seq: &[NodeId]) -> Vec<(BTreeSet<Edge>, BTreeSet<NodeId>)> {
    (1..=seq.len())
        .map(|l| {
            let edges = seq[..l].iter().flat_map(|&a| tree_path(t, a)).collect();
            let dests = seq[..l]
                .iter()
                .copied()
                .filter(|d| t.destinations().contains(d))
                .collect();
            (edges, dests)
        })
        .collect()
}

/// Nodes of the root path to `to`, ordered from `to` back to the root.
fn path_nodes_upward(t: &MulticastTree, to: NodeId) -> Vec<(NodeId, Edge)> {
    let path = tree_path(t, to);
    let mut out = Vec::new();
    let mut u = to;
    while u != t.root() {
        let e = *path
            .iter()
            .find(|e| e.touches(u) && !out.iter().any(|(_, f)| f == *e))
            .unwrap();
        out.push((u, e));
        let (a, b) = e.endpoints();
        u = if a == u { b } else { a };
    }
    out
}

pub fn graft(a: &MulticastTree, b: &MulticastTree) -> (BTreeSet<Edge>, BTreeSet<NodeId>) {
    let in_a = a.nodes();
    let mut edges = edge_set(a.edges());
    for &d in b.destinations() {
        for (u, e) in path_nodes_upward(b, d) {
            if in_a.contains(&u) {
                break;
            }
            edges.insert(e);
        }
    }
    let dests = a.destinations().union(b.destinations()).copied().collect();
    (edges, dests)
}

/// Contraction of `set`, as a name-keyed edge map, and the supernode name.
pub fn contract(g: &Graph, set: &BTreeSet<NodeId>) -> (BTreeMap<(String, String), f64>, String) {
    let smallest = set.iter().map(|&n| g.name(n)).min().unwrap();
    let names: BTreeSet<&str> = g.nodes().map(|n| g.name(n)).collect();
    let mut sup = format!("{smallest}'");
    while names.contains(sup.as_str()) {
        sup.push('\'');
    }
    let label = |n: NodeId| {
        if set.contains(&n) {
            sup.clone()
        } else {
            g.name(n).to_string()
        }
    };
    let mut out: BTreeMap<(String, String), f64> = BTreeMap::new();
    for (u, v, w) in g.edges() {
        let (x, y) = (label(u), label(v));
        if x == y {
            continue;
        }
        let key = if x < y { (x, y) } else { (y, x) };
        let slot = out.entry(key).or_insert(f64::INFINITY);
        *slot = slot.min(w);
    }
    (out, sup)
}

pub fn named_edges(g: &Graph) -> BTreeMap<(String, String), f64> {
    g.edges()
        .map(|(u, v, w)| {
            let (x, y) = (g.name(u).to_string(), g.name(v).to_string());
            (if x < y { (x, y) } else { (y, x) }, w)
        })
        .collect()
}

/// A connected graph on `n` nodes with integer weights 1..=9.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, density: f64) -> Graph {
    let name = |i: usize| format!("v{i}");
    let mut b = GraphBuilder::new();
    let mut have = BTreeSet::new();
    b.add_node(name(0));
    for i in 1..n {
        let j = rng.gen_range(0..i);
        have.insert((j, i));
        b.add_edge(name(j), name(i), rng.gen_range(1..=9) as f64).unwrap();
    }
    for i in 0..n {
        for j in i + 1..n {
            if !have.contains(&(i, j)) && rng.gen_bool(density) {
                b.add_edge(name(i), name(j), rng.gen_range(1..=9) as f64).unwrap();
            }
        }
    }
    b.build()
}

/// A random subtree of `g` rooted at `root`, grown one frontier edge at a
/// time, with a random subset of its non-root nodes as destinations.
pub fn random_tree(rng: &mut ChaCha8Rng, g: &Graph, root: NodeId) -> MulticastTree {
    let target = rng.gen_range(1..=g.node_count());
    let mut nodes = vec![root];
    let mut edges = EdgeSet::new();
    while nodes.len() < target {
        let frontier: Vec<(NodeId, NodeId, f64)> = nodes
            .iter()
            .flat_map(|&u| g.neighbors(u).iter().map(move |&(v, w)| (u, v, w)))
            .filter(|(_, v, _)| !nodes.contains(v))
            .collect();
        let Some(&(u, v, w)) = frontier.choose(rng) else {
            break;
        };
        edges.insert(Edge::new(u, v), w);
        nodes.push(v);
    }
    let dests = nodes[1..].iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
    MulticastTree::new(root, edges, dests).unwrap()
}

pub struct Case {
    pub g: Graph,
    pub root: NodeId,
    pub a: MulticastTree,
    pub b: MulticastTree,
    pub rng: ChaCha8Rng,
}

pub fn random_case(seed: u64) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=9);
    let g = random_graph(&mut rng, n, 0.3);
    let root = g.nodes().nth(rng.gen_range(0..n)).unwrap();
    let a = random_tree(&mut rng, &g, root);
    let b = random_tree(&mut rng, &g, root);
    Case { g, root, a, b, rng }
}

/// A random subset of `from`.
pub fn subset(rng: &mut ChaCha8Rng, from: &BTreeSet<NodeId>) -> BTreeSet<NodeId> {
    from.iter().copied().filter(|_| rng.gen_bool(0.5)).collect()
}

/// A random ordering of a random selection of the tree's nodes.
pub fn sequence(rng: &mut ChaCha8Rng, t: &MulticastTree) -> Vec<NodeId> {
    let mut all: Vec<NodeId> = t.nodes().into_iter().collect();
    all.shuffle(rng);
    let k = rng.gen_range(1..=all.len());
    all.truncate(k);
    all
}

/// Runs every operator on the instance drawn from `seed` and compares it with
/// its naive counterpart. Returns the first disagreement.
pub fn check_operators(seed: u64) -> Result<(), String> {
    use obsta::tree;
    let Case { g, a, b, mut rng, .. } = random_case(seed);

    let leaving = subset(&mut rng, a.destinations());
    let fast = tree::prune(&a, &leaving).map_err(|e| e.to_string())?;
    if edge_set(fast.edges()) != prune(&a, &leaving) {
        return Err(format!("prune differs for seed {seed}"));
    }

    if edge_set(&tree::sym_diff(a.edges(), b.edges())) != sym_diff(a.edges(), b.edges()) {
        return Err(format!("sym_diff differs for seed {seed}"));
    }

    let seq = sequence(&mut rng, &a);
    let fast = tree::sprout(&a, &seq).map_err(|e| e.to_string())?;
    let slow = sprout(&a, &seq);
    if fast.len() != slow.len()
        || fast
            .iter()
            .zip(&slow)
            .any(|(f, (e, d))| &edge_set(f.edges()) != e || f.destinations() != d)
    {
        return Err(format!("sprout differs for seed {seed}"));
    }

    let fast = tree::graft(&a, &b).map_err(|e| e.to_string())?;
    let (e, d) = graft(&a, &b);
    if edge_set(fast.edges()) != e || fast.destinations() != &d {
        return Err(format!("graft differs for seed {seed}"));
    }

    let set = a.nodes();
    let (cg, sup) = tree::contract_nodes(&g, &set).map_err(|e| e.to_string())?;
    let (slow, name) = contract(&g, &set);
    if cg.name(sup) != name || named_edges(&cg) != slow {
        return Err(format!("contract differs for seed {seed}"));
    }
    Ok(())
}
