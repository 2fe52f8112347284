//! Weighted undirected network graphs and the edge-list topology format.
//!
//! Node identifiers are opaque strings. At build time they are sorted
//! lexicographically and assigned dense [`NodeId`]s in that order, so every
//! tie-break that prefers "the smaller node" is a comparison of ids.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::hash::{BuildHasherDefault, Hasher};
use std::io::BufRead;

use thiserror::Error;

/// Dense node handle. Ordering matches the lexicographic order of node names.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Multiplicative hasher for small integer keys such as [`NodeId`].
#[derive(Clone, Copy, Debug, Default)]
pub struct IdHasher(u64);

const SEED: u64 = 0x51_7c_c1_b7_27_22_0a_95;

impl Hasher for IdHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = (self.0.rotate_left(5) ^ u64::from(b)).wrapping_mul(SEED);
        }
    }

    fn write_u32(&mut self, n: u32) {
        self.0 = (self.0.rotate_left(5) ^ u64::from(n)).wrapping_mul(SEED);
    }

    fn write_usize(&mut self, n: usize) {
        self.0 = (self.0.rotate_left(5) ^ n as u64).wrapping_mul(SEED);
    }
}

pub type IdMap<V> = HashMap<NodeId, V, BuildHasherDefault<IdHasher>>;
pub type IdSet = HashSet<NodeId, BuildHasherDefault<IdHasher>>;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("edge {u}-{v}: weight {weight} is not a positive finite number")]
    BadWeight { u: String, v: String, weight: f64 },
    #[error("self-loop on node {0}")]
    SelfLoop(String),
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("node {target} is unreachable from {source_node}")]
    Unreachable { source_node: String, target: String },
    #[error("i/o error: {0}")]
    Io(String),
}

/// Accumulates nodes and edges before freezing them into a [`Graph`].
///
/// Parallel edges collapse to the minimum weight.
#[derive(Debug, Default, Clone)]
pub struct GraphBuilder {
    nodes: BTreeMap<String, ()>,
    edges: BTreeMap<(String, String), f64>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, name: impl Into<String>) -> &mut Self {
        self.nodes.insert(name.into(), ());
        self
    }

    pub fn add_edge(
        &mut self,
        u: impl Into<String>,
        v: impl Into<String>,
        weight: f64,
    ) -> Result<&mut Self, GraphError> {
        let (u, v) = (u.into(), v.into());
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        if !(weight.is_finite() && weight > 0.0) {
            return Err(GraphError::BadWeight { u, v, weight });
        }
        let key = if u < v { (u, v) } else { (v, u) };
        self.nodes.insert(key.0.clone(), ());
        self.nodes.insert(key.1.clone(), ());
        self.edges
            .entry(key)
            .and_modify(|w| *w = w.min(weight))
            .or_insert(weight);
        Ok(self)
    }

    pub fn build(&self) -> Graph {
        let names: Vec<String> = self.nodes.keys().cloned().collect();
        let index: HashMap<String, NodeId> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), NodeId(i as u32)))
            .collect();
        let mut adj = vec![Vec::new(); names.len()];
        for ((u, v), &w) in &self.edges {
            let (u, v) = (index[u], index[v]);
            adj[u.index()].push((v, w));
            adj[v.index()].push((u, w));
        }
        for list in &mut adj {
            list.sort_by_key(|&(n, _)| n);
        }
        Graph {
            names,
            index,
            adj,
            edge_count: self.edges.len(),
        }
    }
}

/// Immutable weighted undirected graph without self-loops or parallel edges.
#[derive(Clone, Debug)]
pub struct Graph {
    names: Vec<String>,
    index: HashMap<String, NodeId>,
    adj: Vec<Vec<(NodeId, f64)>>,
    edge_count: usize,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names && self.adj == other.adj
    }
}

impl Graph {
    pub fn builder() -> GraphBuilder {
        GraphBuilder::new()
    }

    /// Builds a graph from `(u, v, w)` triples.
    pub fn from_edges<'a, I>(edges: I) -> Result<Graph, GraphError>
    where
        I: IntoIterator<Item = (&'a str, &'a str, f64)>,
    {
        let mut b = GraphBuilder::new();
        for (u, v, w) in edges {
            b.add_edge(u, v, w)?;
        }
        Ok(b.build())
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.names.len() as u32).map(NodeId)
    }

    pub fn name(&self, id: NodeId) -> &str {
        &self.names[id.index()]
    }

    pub fn node(&self, name: &str) -> Option<NodeId> {
        self.index.get(name).copied()
    }

    /// Like [`Graph::node`] but reports unknown names as an error.
    pub fn require(&self, name: &str) -> Result<NodeId, GraphError> {
        self.node(name)
            .ok_or_else(|| GraphError::UnknownNode(name.to_string()))
    }

    pub fn contains(&self, id: NodeId) -> bool {
        id.index() < self.names.len()
    }

    /// Neighbors of `id` in ascending node order.
    pub fn neighbors(&self, id: NodeId) -> &[(NodeId, f64)] {
        &self.adj[id.index()]
    }

    pub fn degree(&self, id: NodeId) -> usize {
        self.adj[id.index()].len()
    }

    pub fn weight(&self, u: NodeId, v: NodeId) -> Option<f64> {
        let list = self.adj.get(u.index())?;
        list.binary_search_by_key(&v, |&(n, _)| n).ok().map(|i| list[i].1)
    }

    /// Every edge once, as `(u, v, w)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, list)| {
            let u = NodeId(u as u32);
            list.iter()
                .filter(move |&&(v, _)| u < v)
                .map(move |&(v, w)| (u, v, w))
        })
    }

    pub fn total_weight(&self) -> f64 {
        self.edges().fold(0.0, |a, (_, _, w)| a + w)
    }

    /// Writes the graph in edge-list form. Isolated nodes get a single-token line.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for (u, v, w) in self.edges() {
            out.push_str(&format!("{} {} {}\n", self.name(u), self.name(v), w));
        }
        for n in self.nodes().filter(|&n| self.degree(n) == 0) {
            out.push_str(self.name(n));
            out.push('\n');
        }
        out
    }
}

/// Parses an edge list: one `u v w` triple per line, `#` starts a comment.
///
/// A line holding a single identifier declares an isolated node.
pub fn load_topology<R: BufRead>(reader: R) -> Result<Graph, GraphError> {
    let mut b = GraphBuilder::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| GraphError::Io(e.to_string()))?;
        let content = line.split('#').next().unwrap_or("");
        let fields: Vec<&str> = content.split_whitespace().collect();
        match fields.as_slice() {
            [] => {}
            [n] => {
                b.add_node(*n);
            }
            [u, v, w] => {
                let weight: f64 = w.parse().map_err(|_| GraphError::Malformed {
                    line: line_no,
                    reason: format!("weight {w:?} is not a number"),
                })?;
                b.add_edge(*u, *v, weight).map_err(|e| match e {
                    GraphError::BadWeight { .. } => GraphError::Malformed {
                        line: line_no,
                        reason: format!("non-positive or non-finite weight {w}"),
                    },
                    GraphError::SelfLoop(n) => GraphError::Malformed {
                        line: line_no,
                        reason: format!("self-loop on {n}"),
                    },
                    other => other,
                })?;
            }
            _ => {
                return Err(GraphError::Malformed {
                    line: line_no,
                    reason: format!("expected `u v w`, found {} fields", fields.len()),
                })
            }
        }
    }
    Ok(b.build())
}

/// Convenience wrapper around [`load_topology`] for in-memory text.
pub fn parse_edge_list(text: &str) -> Result<Graph, GraphError> {
    load_topology(text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_simple_list() {
        let g = parse_edge_list("s a 7.5\na d1 2.5").unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 2);
        let (s, a) = (g.node("s").unwrap(), g.node("a").unwrap());
        assert_eq!(g.weight(s, a), Some(7.5));
        assert_eq!(g.weight(a, s), Some(7.5));
    }

    #[test]
    fn duplicate_edges_keep_minimum() {
        let g = parse_edge_list("u v 3\nu v 2\nv u 5").unwrap();
        assert_eq!(g.edge_count(), 1);
        let (u, v) = (g.node("u").unwrap(), g.node("v").unwrap());
        assert_eq!(g.weight(u, v), Some(2.0));
    }

    #[test]
    fn comments_and_blank_lines() {
        let g = parse_edge_list("# header\n\ns a 1 # trailing\n  \nlonely\n").unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.degree(g.node("lonely").unwrap()), 0);
    }

    #[test]
    fn node_order_is_lexicographic() {
        let g = parse_edge_list("z a 1\nm b 1").unwrap();
        let names: Vec<&str> = g.nodes().map(|n| g.name(n)).collect();
        assert_eq!(names, ["a", "b", "m", "z"]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(
            parse_edge_list("a b 1\na b\n"),
            Err(GraphError::Malformed {
                line: 2,
                reason: "expected `u v w`, found 2 fields".into()
            })
        );
        assert!(matches!(
            parse_edge_list("a b 1\nb c -1"),
            Err(GraphError::Malformed { line: 2, .. })
        ));
        assert!(matches!(
            parse_edge_list("a b 0"),
            Err(GraphError::Malformed { line: 1, .. })
        ));
        assert!(matches!(
            parse_edge_list("a a 1"),
            Err(GraphError::Malformed { line: 1, .. })
        ));
        assert!(matches!(
            parse_edge_list("a b x"),
            Err(GraphError::Malformed { line: 1, .. })
        ));
        assert!(matches!(
            parse_edge_list("a b inf"),
            Err(GraphError::Malformed { line: 1, .. })
        ));
    }

    #[test]
    fn builder_rejects_bad_edges() {
        let mut b = GraphBuilder::new();
        assert_eq!(
            b.add_edge("x", "x", 1.0).unwrap_err(),
            GraphError::SelfLoop("x".into())
        );
        assert!(b.add_edge("x", "y", f64::NAN).is_err());
    }

    #[test]
    fn edge_list_round_trip() {
        let text = "a b 1.5\nb c 0.1\nc a 3\nsolo\n";
        let g = parse_edge_list(text).unwrap();
        let again = parse_edge_list(&g.to_edge_list()).unwrap();
        assert_eq!(g, again);
    }
}
