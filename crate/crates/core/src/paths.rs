//! Deterministic Dijkstra and the global shortest-path tree.
//!
//! Ties are broken the same way everywhere: among equal tentative distances a
//! node keeps the predecessor with the smallest id. Because every path toward
//! the source is read off one predecessor map, the union of any set of those
//! paths is a tree.

use std::borrow::Cow;
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use crate::graph::{Graph, GraphError, NodeId};
use crate::tree::{prune, Edge, EdgeSet, MulticastTree};

/// A simple path and its length.
#[derive(Clone, Debug, PartialEq)]
pub struct PathResult {
    pub nodes: Vec<NodeId>,
    pub dist: f64,
}

impl PathResult {
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.nodes.windows(2).map(|w| Edge::new(w[0], w[1]))
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    dist: f64,
    node: NodeId,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (dist, node)
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Result of a (possibly multi-source) Dijkstra run.
#[derive(Clone, Debug)]
pub struct ShortestPaths {
    dist: Vec<f64>,
    pred: Vec<Option<(NodeId, f64)>>,
}

impl ShortestPaths {
    /// Distance to `t`, or `None` when unreachable.
    pub fn dist(&self, t: NodeId) -> Option<f64> {
        let d = self.dist[t.index()];
        d.is_finite().then_some(d)
    }

    pub fn pred(&self, t: NodeId) -> Option<NodeId> {
        self.pred[t.index()].map(|(p, _)| p)
    }

    /// Weighted edges of the path from the nearest source to `t`, ordered
    /// from `t` back toward the source.
    pub fn edges_to(&self, t: NodeId) -> Vec<(Edge, f64)> {
        let mut out = Vec::new();
        let mut u = t;
        while let Some((p, w)) = self.pred[u.index()] {
            out.push((Edge::new(u, p), w));
            u = p;
        }
        out
    }

    /// Nodes from the (nearest) source to `t`, or `None` when unreachable.
    pub fn path_to(&self, t: NodeId) -> Option<Vec<NodeId>> {
        self.dist(t)?;
        let mut path = vec![t];
        let mut u = t;
        while let Some((p, _)) = self.pred[u.index()] {
            path.push(p);
            u = p;
        }
        path.reverse();
        Some(path)
    }

    pub fn result_to(&self, t: NodeId) -> Option<PathResult> {
        Some(PathResult {
            nodes: self.path_to(t)?,
            dist: self.dist(t)?,
        })
    }
}

/// Single-source Dijkstra from `s` over all of `g`.
pub fn dijkstra(g: &Graph, s: NodeId) -> ShortestPaths {
    dijkstra_multi(g, [s])
}

/// Dijkstra seeded with every node of `sources` at distance zero.
pub fn dijkstra_multi(g: &Graph, sources: impl IntoIterator<Item = NodeId>) -> ShortestPaths {
    let n = g.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred: Vec<Option<(NodeId, f64)>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    for s in sources {
        dist[s.index()] = 0.0;
        heap.push(Entry { dist: 0.0, node: s });
    }
    while let Some(Entry { dist: du, node: u }) = heap.pop() {
        if done[u.index()] || du > dist[u.index()] {
            continue;
        }
        done[u.index()] = true;
        for &(v, w) in g.neighbors(u) {
            if done[v.index()] {
                continue;
            }
            let nd = du + w;
            let cur = dist[v.index()];
            if nd < cur {
                dist[v.index()] = nd;
                pred[v.index()] = Some((u, w));
                heap.push(Entry { dist: nd, node: v });
            } else if nd == cur && pred[v.index()].is_some_and(|(p, _)| u < p) {
                pred[v.index()] = Some((u, w));
            }
        }
    }
    ShortestPaths { dist, pred }
}

/// Shortest `s`–`t` path under the deterministic tie-break.
pub fn shortest_path(g: &Graph, s: NodeId, t: NodeId) -> Result<PathResult, GraphError> {
    for n in [s, t] {
        if !g.contains(n) {
            return Err(GraphError::UnknownNode(n.to_string()));
        }
    }
    dijkstra(g, s)
        .result_to(t)
        .ok_or_else(|| GraphError::Unreachable {
            source_node: g.name(s).to_string(),
            target: g.name(t).to_string(),
        })
}

/// The shortest-path tree from the source spanning every candidate
/// destination, with the per-destination paths cached.
#[derive(Clone, Debug)]
pub struct GlobalSpt {
    source: NodeId,
    tree: MulticastTree,
    paths: ShortestPaths,
    cached: BTreeMap<NodeId, Vec<(Edge, f64)>>,
}

/// Builds the global SPT over candidate set `candidates`.
pub fn global_spt(g: &Graph, s: NodeId, candidates: &BTreeSet<NodeId>) -> Result<GlobalSpt, GraphError> {
    if !g.contains(s) {
        return Err(GraphError::UnknownNode(s.to_string()));
    }
    let paths = dijkstra(g, s);
    let mut edges = EdgeSet::new();
    let mut cached = BTreeMap::new();
    for &d in candidates {
        if !g.contains(d) {
            return Err(GraphError::UnknownNode(d.to_string()));
        }
        if paths.dist(d).is_none() {
            return Err(GraphError::Unreachable {
                source_node: g.name(s).to_string(),
                target: g.name(d).to_string(),
            });
        }
        let es = paths.edges_to(d);
        for &(e, w) in &es {
            edges.insert(e, w);
        }
        cached.insert(d, es);
    }
    let tree = MulticastTree::from_parts_unchecked(s, edges, candidates.clone());
    Ok(GlobalSpt {
        source: s,
        tree,
        paths,
        cached,
    })
}

impl GlobalSpt {
    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn tree(&self) -> &MulticastTree {
        &self.tree
    }

    pub fn candidates(&self) -> &BTreeSet<NodeId> {
        self.tree.destinations()
    }

    /// Shortest distance from the source. Panics when `d` is unreachable.
    pub fn dist(&self, d: NodeId) -> f64 {
        self.paths
            .dist(d)
            .unwrap_or_else(|| panic!("node {d} unreachable from the source"))
    }

    pub fn shortest_paths(&self) -> &ShortestPaths {
        &self.paths
    }

    /// Weighted edges of the deterministic shortest path from the source to
    /// `d`, listed from `d` back toward the source.
    pub fn path_edges(&self, d: NodeId) -> Cow<'_, [(Edge, f64)]> {
        match self.cached.get(&d) {
            Some(es) => Cow::Borrowed(es),
            None => Cow::Owned(self.paths.edges_to(d)),
        }
    }

    /// The SPT restricted to `dests` (a subset of the candidates).
    pub fn subtree(&self, dests: &BTreeSet<NodeId>) -> MulticastTree {
        let leaving: BTreeSet<NodeId> = self.candidates().difference(dests).copied().collect();
        prune(&self.tree, &leaving).expect("leaving set drawn from candidates")
    }
}
