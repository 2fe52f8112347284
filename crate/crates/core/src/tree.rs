//! Multicast trees and the tree-surgery operators used by the online
//! algorithm: pruning, symmetric difference, sprouting, grafting and
//! contraction, plus branch-node counting.
//!
//! Trees store undirected edges and a root. Parent orientation is derived
//! on demand, so a tree produced by any operator can be fed straight into the
//! next one.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::graph::{Graph, GraphBuilder, IdMap, NodeId};

#[derive(Debug, Error, PartialEq)]
pub enum TreeError {
    #[error("node {0} is not a destination of the tree")]
    NotADestination(NodeId),
    #[error("node {0} is not in the tree")]
    NotInTree(NodeId),
    #[error("trees are rooted at different nodes ({0} vs {1})")]
    RootMismatch(NodeId, NodeId),
    #[error("edge set is not a tree rooted at {root}: {reason}")]
    NotATree { root: NodeId, reason: String },
    #[error("cannot contract an empty node set")]
    EmptyContraction,
    #[error("contracted node set is not connected in the graph")]
    DisconnectedContraction,
    #[error("node {0} is not in the graph")]
    UnknownNode(NodeId),
}

/// Undirected edge with endpoints stored in ascending order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge(NodeId, NodeId);

impl Edge {
    pub fn new(a: NodeId, b: NodeId) -> Edge {
        if a <= b {
            Edge(a, b)
        } else {
            Edge(b, a)
        }
    }

    pub fn endpoints(self) -> (NodeId, NodeId) {
        (self.0, self.1)
    }

    pub fn touches(self, n: NodeId) -> bool {
        self.0 == n || self.1 == n
    }
}

/// A set of weighted undirected edges.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EdgeSet {
    edges: BTreeMap<Edge, f64>,
}

impl EdgeSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, edge: Edge, weight: f64) {
        self.edges.insert(edge, weight);
    }

    pub fn remove(&mut self, edge: Edge) -> Option<f64> {
        self.edges.remove(&edge)
    }

    pub fn contains(&self, edge: Edge) -> bool {
        self.edges.contains_key(&edge)
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Sum of member weights.
    pub fn weight(&self) -> f64 {
        self.edges.values().fold(0.0, |a, w| a + w)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Edge, f64)> + '_ {
        self.edges.iter().map(|(&e, &w)| (e, w))
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.keys().copied()
    }

    pub fn extend(&mut self, other: &EdgeSet) {
        for (e, w) in other.iter() {
            self.edges.insert(e, w);
        }
    }

    pub fn intersection(&self, other: &EdgeSet) -> EdgeSet {
        self.iter().filter(|&(e, _)| other.contains(e)).collect()
    }

    pub fn is_subset(&self, other: &EdgeSet) -> bool {
        self.edges().all(|e| other.contains(e))
    }

    pub fn nodes(&self) -> BTreeSet<NodeId> {
        self.edges().flat_map(|e| [e.0, e.1]).collect()
    }
}

impl FromIterator<(Edge, f64)> for EdgeSet {
    fn from_iter<I: IntoIterator<Item = (Edge, f64)>>(iter: I) -> Self {
        EdgeSet {
            edges: iter.into_iter().collect(),
        }
    }
}

/// Edges in exactly one of `a` and `b`.
pub fn sym_diff(a: &EdgeSet, b: &EdgeSet) -> EdgeSet {
    a.iter()
        .filter(|&(e, _)| !b.contains(e))
        .chain(b.iter().filter(|&(e, _)| !a.contains(e)))
        .collect()
}

/// A rooted tree over a subset of the graph together with the destinations
/// it serves.
#[derive(Clone, Debug, PartialEq)]
pub struct MulticastTree {
    root: NodeId,
    edges: EdgeSet,
    destinations: BTreeSet<NodeId>,
}

impl MulticastTree {
    /// The tree holding only the source.
    pub fn root_only(root: NodeId) -> Self {
        MulticastTree {
            root,
            edges: EdgeSet::new(),
            destinations: BTreeSet::new(),
        }
    }

    /// Checks that `edges` form a tree containing `root` and every destination.
    pub fn new(root: NodeId, edges: EdgeSet, destinations: BTreeSet<NodeId>) -> Result<Self, TreeError> {
        let tree = MulticastTree {
            root,
            edges,
            destinations,
        };
        tree.validate()?;
        Ok(tree)
    }

    /// Builds the tree formed by the edges of a graph path set.
    ///
    /// Each path is a node sequence; weights come from `g`.
    pub fn from_paths<'a, I>(
        g: &Graph,
        root: NodeId,
        paths: I,
        destinations: BTreeSet<NodeId>,
    ) -> Result<Self, TreeError>
    where
        I: IntoIterator<Item = &'a [NodeId]>,
    {
        let mut edges = EdgeSet::new();
        for path in paths {
            for w in path.windows(2) {
                let weight = g.weight(w[0], w[1]).ok_or_else(|| TreeError::NotATree {
                    root,
                    reason: format!("{}-{} is not a graph edge", w[0], w[1]),
                })?;
                edges.insert(Edge::new(w[0], w[1]), weight);
            }
        }
        MulticastTree::new(root, edges, destinations)
    }

    pub(crate) fn from_parts_unchecked(root: NodeId, edges: EdgeSet, destinations: BTreeSet<NodeId>) -> Self {
        MulticastTree {
            root,
            edges,
            destinations,
        }
    }

    pub fn validate(&self) -> Result<(), TreeError> {
        let adjacency = self.adjacency();
        let node_count = adjacency.len().max(1);
        if !self.edges.is_empty() && !adjacency.contains_key(&self.root) {
            return Err(TreeError::NotATree {
                root: self.root,
                reason: "root is not incident to any edge".into(),
            });
        }
        if self.edges.len() + 1 != node_count {
            return Err(TreeError::NotATree {
                root: self.root,
                reason: format!("{} edges over {} nodes", self.edges.len(), node_count),
            });
        }
        let reached = self.parents().len() + 1;
        if reached != node_count {
            return Err(TreeError::NotATree {
                root: self.root,
                reason: "edge set is disconnected".into(),
            });
        }
        if let Some(&d) = self.destinations.iter().find(|&&d| !self.contains_node(d)) {
            return Err(TreeError::NotInTree(d));
        }
        Ok(())
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn edges(&self) -> &EdgeSet {
        &self.edges
    }

    pub fn destinations(&self) -> &BTreeSet<NodeId> {
        &self.destinations
    }

    /// Total edge weight.
    pub fn weight(&self) -> f64 {
        self.edges.weight()
    }

    pub fn with_destinations(mut self, destinations: BTreeSet<NodeId>) -> Result<Self, TreeError> {
        let nodes = self.nodes();
        if let Some(&d) = destinations.iter().find(|&&d| !nodes.contains(&d)) {
            return Err(TreeError::NotInTree(d));
        }
        self.destinations = destinations;
        Ok(self)
    }

    pub fn contains_node(&self, n: NodeId) -> bool {
        n == self.root || self.edges.edges().any(|e| e.touches(n))
    }

    pub fn nodes(&self) -> BTreeSet<NodeId> {
        let mut nodes = self.edges.nodes();
        nodes.insert(self.root);
        nodes
    }

    pub fn adjacency(&self) -> BTreeMap<NodeId, Vec<NodeId>> {
        let mut adj: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        for e in self.edges.edges() {
            adj.entry(e.0).or_default().push(e.1);
            adj.entry(e.1).or_default().push(e.0);
        }
        adj
    }

    pub fn degree(&self, n: NodeId) -> usize {
        self.edges.edges().filter(|e| e.touches(n)).count()
    }

    /// Parent pointers (with the connecting edge weight) for every non-root
    /// node reachable from the root.
    pub fn parents(&self) -> IdMap<(NodeId, f64)> {
        let mut adj: IdMap<Vec<(NodeId, f64)>> = IdMap::default();
        for (e, w) in self.edges.iter() {
            adj.entry(e.0).or_default().push((e.1, w));
            adj.entry(e.1).or_default().push((e.0, w));
        }
        let mut parents = IdMap::default();
        let mut queue = VecDeque::from([self.root]);
        while let Some(u) = queue.pop_front() {
            for &(v, w) in adj.get(&u).map(Vec::as_slice).unwrap_or(&[]) {
                if v != self.root && !parents.contains_key(&v) {
                    parents.insert(v, (u, w));
                    queue.push_back(v);
                }
            }
        }
        parents
    }

    /// Node sequence of the unique tree path from the root to `n`.
    pub fn path_from_root(&self, n: NodeId) -> Result<Vec<NodeId>, TreeError> {
        path_via_parents(&self.parents(), self.root, n)
    }

    /// Weight of the tree path from the root to `n`.
    pub fn depth(&self, n: NodeId) -> Result<f64, TreeError> {
        let parents = self.parents();
        if n == self.root {
            return Ok(0.0);
        }
        let mut u = n;
        let mut total = 0.0;
        while u != self.root {
            let &(p, w) = parents.get(&u).ok_or(TreeError::NotInTree(n))?;
            total += w;
            u = p;
        }
        Ok(total)
    }

    /// True when every leaf other than the root is a destination.
    pub fn is_pruned(&self) -> bool {
        self.adjacency()
            .iter()
            .all(|(&n, nbrs)| nbrs.len() != 1 || n == self.root || self.destinations.contains(&n))
    }
}

pub(crate) fn path_via_parents(
    parents: &IdMap<(NodeId, f64)>,
    root: NodeId,
    n: NodeId,
) -> Result<Vec<NodeId>, TreeError> {
    let mut path = vec![n];
    let mut u = n;
    while u != root {
        let &(p, _) = parents.get(&u).ok_or(TreeError::NotInTree(n))?;
        path.push(p);
        u = p;
    }
    path.reverse();
    Ok(path)
}

/// Union of root paths to `targets`, using a precomputed parent map.
fn union_of_root_paths(
    tree: &MulticastTree,
    parents: &IdMap<(NodeId, f64)>,
    targets: impl IntoIterator<Item = NodeId>,
) -> Result<EdgeSet, TreeError> {
    let mut edges = EdgeSet::new();
    for d in targets {
        let mut u = d;
        while u != tree.root {
            let &(p, w) = parents.get(&u).ok_or(TreeError::NotInTree(d))?;
            let e = Edge::new(u, p);
            if edges.contains(e) {
                break;
            }
            edges.insert(e, w);
            u = p;
        }
    }
    Ok(edges)
}

/// Removes the destinations in `leaving` and every edge that no longer lies
/// on a root path to a remaining destination.
pub fn prune(tree: &MulticastTree, leaving: &BTreeSet<NodeId>) -> Result<MulticastTree, TreeError> {
    if let Some(&d) = leaving.iter().find(|d| !tree.destinations.contains(d)) {
        return Err(TreeError::NotADestination(d));
    }
    let keep: BTreeSet<NodeId> = tree.destinations.difference(leaving).copied().collect();
    let edges = union_of_root_paths(tree, &tree.parents(), keep.iter().copied())?;
    Ok(MulticastTree::from_parts_unchecked(tree.root, edges, keep))
}

/// The nested family `A_1 ⊆ … ⊆ A_k` where `A_l` is the union of the root
/// paths to `seq[0..l]`.
pub fn sprout(tree: &MulticastTree, seq: &[NodeId]) -> Result<Vec<MulticastTree>, TreeError> {
    let parents = tree.parents();
    let mut out = Vec::with_capacity(seq.len());
    let mut edges = EdgeSet::new();
    let mut dests = BTreeSet::new();
    for &a in seq {
        if a != tree.root && !parents.contains_key(&a) {
            return Err(TreeError::NotInTree(a));
        }
        edges.extend(&union_of_root_paths(tree, &parents, [a])?);
        if tree.destinations.contains(&a) {
            dests.insert(a);
        }
        out.push(MulticastTree::from_parts_unchecked(
            tree.root,
            edges.clone(),
            dests.clone(),
        ));
    }
    Ok(out)
}

/// Attaches every destination of `b` to `a`: walk from the destination
/// toward the root in `b` until the first node already in `a`, and add that
/// stretch of `b`.
pub fn graft(a: &MulticastTree, b: &MulticastTree) -> Result<MulticastTree, TreeError> {
    if a.root != b.root {
        return Err(TreeError::RootMismatch(a.root, b.root));
    }
    let in_a = a.nodes();
    let parents = b.parents();
    let mut edges = a.edges.clone();
    for &d in &b.destinations {
        let mut u = d;
        while !in_a.contains(&u) {
            let &(p, w) = parents.get(&u).ok_or(TreeError::NotInTree(d))?;
            edges.insert(Edge::new(u, p), w);
            u = p;
        }
    }
    let destinations = a.destinations.union(&b.destinations).copied().collect();
    Ok(MulticastTree::from_parts_unchecked(a.root, edges, destinations))
}

/// Number of branch nodes: nodes of tree degree at least three, plus the
/// root, which always counts exactly once.
pub fn branch_count(tree: &MulticastTree) -> usize {
    let adj = tree.adjacency();
    1 + adj
        .iter()
        .filter(|(&n, nbrs)| n != tree.root && nbrs.len() >= 3)
        .count()
}

/// Merges the nodes of `tree` into one fresh supernode. See [`contract_nodes`].
pub fn contract(g: &Graph, tree: &MulticastTree) -> Result<(Graph, NodeId), TreeError> {
    contract_nodes(g, &tree.nodes())
}

/// Merges a connected node set into a single supernode, keeping for each
/// outside neighbor only the lightest edge to the set.
///
/// The supernode is named after the smallest member with primes appended
/// until the name is fresh. Returns the new graph and the supernode's id in it.
pub fn contract_nodes(g: &Graph, set: &BTreeSet<NodeId>) -> Result<(Graph, NodeId), TreeError> {
    let Some(&first) = set.iter().next() else {
        return Err(TreeError::EmptyContraction);
    };
    if let Some(&n) = set.iter().find(|&&n| !g.contains(n)) {
        return Err(TreeError::UnknownNode(n));
    }
    // connectivity of the induced subgraph
    let mut seen = BTreeSet::from([first]);
    let mut stack = vec![first];
    while let Some(u) = stack.pop() {
        for &(v, _) in g.neighbors(u) {
            if set.contains(&v) && seen.insert(v) {
                stack.push(v);
            }
        }
    }
    if seen.len() != set.len() {
        return Err(TreeError::DisconnectedContraction);
    }

    let mut name = format!("{}'", g.name(first));
    while g.node(&name).is_some() {
        name.push('\'');
    }
    let label = |n: NodeId| -> &str {
        if set.contains(&n) {
            &name
        } else {
            g.name(n)
        }
    };
    let mut b = GraphBuilder::new();
    b.add_node(name.clone());
    for n in g.nodes().filter(|n| !set.contains(n)) {
        b.add_node(g.name(n));
    }
    for (u, v, w) in g.edges() {
        if set.contains(&u) && set.contains(&v) {
            continue;
        }
        b.add_edge(label(u), label(v), w)
            .expect("contraction keeps weights positive and creates no self-loops");
    }
    let contracted = b.build();
    let id = contracted.node(&name).expect("supernode present");
    Ok((contracted, id))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::fig2_graph;

    fn ids(g: &Graph, names: &[&str]) -> BTreeSet<NodeId> {
        names.iter().map(|n| g.node(n).unwrap()).collect()
    }

    fn tree(g: &Graph, root: &str, edges: &[(&str, &str)], dests: &[&str]) -> MulticastTree {
        let es = edges
            .iter()
            .map(|(u, v)| {
                let (u, v) = (g.node(u).unwrap(), g.node(v).unwrap());
                (Edge::new(u, v), g.weight(u, v).unwrap())
            })
            .collect();
        MulticastTree::new(g.node(root).unwrap(), es, ids(g, dests)).unwrap()
    }

    fn edge_names(g: &Graph, t: &EdgeSet) -> Vec<(String, String)> {
        t.edges()
            .map(|e| {
                let (a, b) = e.endpoints();
                let (a, b) = (g.name(a).to_string(), g.name(b).to_string());
                if a < b {
                    (a, b)
                } else {
                    (b, a)
                }
            })
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    #[test]
    fn validation_rejects_cycles_and_forests() {
        let g = fig2_graph();
        let e = |u: &str, v: &str| {
            let (u, v) = (g.node(u).unwrap(), g.node(v).unwrap());
            (Edge::new(u, v), g.weight(u, v).unwrap())
        };
        let s = g.node("s").unwrap();
        let cycle: EdgeSet = [e("s", "a"), e("a", "d1"), e("d1", "b"), e("s", "b")]
            .into_iter()
            .collect();
        assert!(MulticastTree::new(s, cycle, BTreeSet::new()).is_err());
        let forest: EdgeSet = [e("s", "a"), e("b", "d2")].into_iter().collect();
        assert!(MulticastTree::new(s, forest, BTreeSet::new()).is_err());
        let detached: EdgeSet = [e("b", "d2")].into_iter().collect();
        assert!(MulticastTree::new(s, detached, BTreeSet::new()).is_err());
        let ok: EdgeSet = [e("s", "a")].into_iter().collect();
        assert_eq!(
            MulticastTree::new(s, ok, ids(&g, &["d1"])).unwrap_err(),
            TreeError::NotInTree(g.node("d1").unwrap())
        );
    }

    #[test]
    fn prune_edge_cases() {
        let g = fig2_graph();
        let t = tree(&g, "s", &[("s", "a"), ("a", "d1"), ("d1", "d2")], &["d1", "d2"]);
        assert_eq!(prune(&t, &BTreeSet::new()).unwrap(), t);
        let all = prune(&t, t.destinations()).unwrap();
        assert_eq!(all, MulticastTree::root_only(t.root()));
        let p = prune(&t, &ids(&g, &["d2"])).unwrap();
        assert_eq!(
            edge_names(&g, p.edges()),
            [("a".into(), "d1".into()), ("a".into(), "s".into())]
        );
        assert_eq!(p.destinations(), &ids(&g, &["d1"]));
        assert_eq!(
            prune(&t, &ids(&g, &["a"])).unwrap_err(),
            TreeError::NotADestination(g.node("a").unwrap())
        );
    }

    #[test]
    fn sym_diff_cases() {
        let g = fig2_graph();
        let a = tree(&g, "s", &[("s", "a"), ("a", "d1")], &["d1"]);
        let b = tree(&g, "s", &[("s", "b"), ("b", "d1")], &["d1"]);
        assert!(sym_diff(a.edges(), a.edges()).is_empty());
        assert_eq!(sym_diff(&EdgeSet::new(), b.edges()), *b.edges());
        let d = sym_diff(a.edges(), b.edges());
        assert_eq!(d.len(), 4);
        assert!((d.weight() - 20.2).abs() < 1e-9);
    }

    #[test]
    fn sprout_cases() {
        let g = fig2_graph();
        let t = tree(
            &g,
            "s",
            &[("s", "a"), ("a", "d1"), ("a", "c"), ("c", "d2")],
            &["d1", "d2"],
        );
        assert!(sprout(&t, &[]).unwrap().is_empty());
        let d2 = g.node("d2").unwrap();
        let one = sprout(&t, &[d2]).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].path_from_root(d2).unwrap().len(), 4);
        assert_eq!(one[0].edges().len(), 3);
        let b = g.node("b").unwrap();
        assert_eq!(sprout(&t, &[b]).unwrap_err(), TreeError::NotInTree(b));
        // non-destination members contribute paths but not destinations
        let c = g.node("c").unwrap();
        let s = sprout(&t, &[c, d2]).unwrap();
        assert!(s[0].destinations().is_empty());
        assert_eq!(s[1].destinations(), &ids(&g, &["d2"]));
    }

    #[test]
    fn graft_cases() {
        let g = fig2_graph();
        let a = tree(&g, "s", &[("s", "a"), ("a", "d1")], &["d1"]);
        assert_eq!(graft(&a, &a).unwrap(), a);
        let b = tree(&g, "s", &[("s", "a"), ("a", "c"), ("c", "d2")], &["d2"]);
        let root = MulticastTree::root_only(a.root());
        assert_eq!(graft(&root, &b).unwrap(), b);
        let ab = graft(&a, &b).unwrap();
        assert_eq!(ab.edges().len(), 4);
        assert_eq!(ab.destinations(), &ids(&g, &["d1", "d2"]));
        assert_eq!(branch_count(&ab), 2);
        let other_root = MulticastTree::root_only(g.node("b").unwrap());
        assert!(matches!(graft(&a, &other_root), Err(TreeError::RootMismatch(..))));
    }

    #[test]
    fn branch_count_cases() {
        let g = fig2_graph();
        assert_eq!(
            branch_count(&tree(&g, "s", &[("s", "a"), ("a", "d1")], &["d1"])),
            1
        );
        assert_eq!(
            branch_count(&tree(
                &g,
                "s",
                &[("s", "b"), ("b", "d1"), ("b", "d2")],
                &["d1", "d2"]
            )),
            2
        );
        let star = Graph::from_edges([
            ("r", "a", 1.0),
            ("r", "b", 1.0),
            ("r", "c", 1.0),
            ("r", "d", 1.0),
            ("r", "e", 1.0),
        ])
        .unwrap();
        let all = ["a", "b", "c", "d", "e"];
        let t = tree(
            &star,
            "r",
            &all.iter().map(|x| ("r", *x)).collect::<Vec<_>>(),
            &all,
        );
        assert_eq!(branch_count(&t), 1);
        assert_eq!(branch_count(&MulticastTree::root_only(NodeId(0))), 1);
    }

    #[test]
    fn contract_single_node_renames() {
        let g = fig2_graph();
        let c = g.node("c").unwrap();
        let (h, sup) = contract_nodes(&g, &BTreeSet::from([c])).unwrap();
        assert_eq!(h.name(sup), "c'");
        assert_eq!(h.node_count(), g.node_count());
        assert_eq!(h.edge_count(), g.edge_count());
        assert_eq!(h.weight(sup, h.node("a").unwrap()), Some(2.0));
        assert_eq!(h.weight(sup, h.node("d2").unwrap()), Some(4.0));
    }

    #[test]
    fn contract_keeps_min_parallel_edge() {
        let g = Graph::from_edges([("x", "y", 1.0), ("x", "v", 3.0), ("y", "v", 5.0)]).unwrap();
        let (h, sup) = contract_nodes(&g, &ids(&g, &["x", "y"])).unwrap();
        assert_eq!(h.node_count(), 2);
        assert_eq!(h.weight(sup, h.node("v").unwrap()), Some(3.0));
    }

    #[test]
    fn contract_fig2_prefix() {
        let g = fig2_graph();
        let t = tree(&g, "s", &[("s", "a"), ("a", "d1")], &["d1"]);
        let (h, sup) = contract(&g, &t).unwrap();
        // boundary edges: s-b 6.2, d1-b 4, a-c 2, d1-d2 6 -> min per neighbor
        let w = |n: &str| h.weight(sup, h.node(n).unwrap());
        assert_eq!(w("b"), Some(4.0));
        assert_eq!(w("c"), Some(2.0));
        assert_eq!(w("d2"), Some(6.0));
        assert_eq!(h.degree(sup), 3);
        // untouched edges survive
        let (b, d2, c) = (h.node("b").unwrap(), h.node("d2").unwrap(), h.node("c").unwrap());
        assert_eq!(h.weight(b, d2), Some(4.0));
        assert_eq!(h.weight(c, d2), Some(4.0));
        assert_eq!(h.edge_count(), 5);
    }

    #[test]
    fn contract_errors() {
        let g = fig2_graph();
        assert_eq!(
            contract_nodes(&g, &BTreeSet::new()).unwrap_err(),
            TreeError::EmptyContraction
        );
        assert_eq!(
            contract_nodes(&g, &ids(&g, &["s", "d2"])).unwrap_err(),
            TreeError::DisconnectedContraction
        );
    }

    #[test]
    fn supernode_name_is_fresh() {
        let g = Graph::from_edges([("a", "a'", 1.0), ("a'", "b", 1.0), ("a", "c", 1.0)]).unwrap();
        let (h, sup) = contract_nodes(&g, &ids(&g, &["a", "c"])).unwrap();
        assert_eq!(h.name(sup), "a''");
    }
}
