//! Baseline policies: the pruned shortest-path tree and a Steiner heuristic
//! recomputed from scratch every slot.
//!
//! Both are charged with the same ledger as the online algorithm, so their
//! deposits are reported but never enforced.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cost::{CostKnobs, SlotLedger};
use crate::graph::{Graph, GraphError, IdMap, IdSet, NodeId};
use crate::paths::{dijkstra, global_spt, GlobalSpt, ShortestPaths};
use crate::policy::{Membership, PhaseTimes, RoutingPolicy, SlotOutcome, StepError};
use crate::tree::{EdgeSet, MulticastTree};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineKind {
    Spt,
    St,
}

impl BaselineKind {
    pub fn tag(self) -> &'static str {
        match self {
            BaselineKind::Spt => "spt",
            BaselineKind::St => "st",
        }
    }
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for BaselineKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "spt" => Ok(BaselineKind::Spt),
            "st" => Ok(BaselineKind::St),
            other => Err(format!("unknown baseline `{other}`")),
        }
    }
}

/// The global SPT restricted to `dests`.
pub fn spt_tree(spt: &GlobalSpt, dests: &BTreeSet<NodeId>) -> MulticastTree {
    spt.subtree(dests)
}

/// Takahashi–Matsuyama: starting from the source, repeatedly attach the
/// terminal nearest to the current tree along its shortest path. Ties go to
/// the smaller node id.
pub fn takahashi_matsuyama(
    g: &Graph,
    s: NodeId,
    terminals: &BTreeSet<NodeId>,
) -> Result<MulticastTree, GraphError> {
    let runs = terminal_runs(g, s, terminals)?;
    let (edges, _) = grow_from(&runs, s, f64::INFINITY).expect("unbounded growth succeeds");
    Ok(MulticastTree::from_parts_unchecked(s, edges, terminals.clone()))
}

/// Steiner heuristic used by the ST baseline: the shortest-path growth of
/// [`takahashi_matsuyama`] is started from every vertex in turn, dangling
/// non-terminal branches are trimmed, and the lightest result wins (ties by
/// start vertex). Recomputed from scratch on every call.
pub fn steiner_heuristic(
    g: &Graph,
    s: NodeId,
    terminals: &BTreeSet<NodeId>,
) -> Result<MulticastTree, GraphError> {
    let runs = terminal_runs(g, s, terminals)?;
    if runs.terms.len() == 1 {
        return Ok(MulticastTree::from_parts_unchecked(
            s,
            EdgeSet::new(),
            terminals.clone(),
        ));
    }
    let mut best: Option<(EdgeSet, f64)> = None;
    for start in g.nodes() {
        if runs.runs[0].dist(start).is_none() {
            continue;
        }
        let bound = best.as_ref().map_or(f64::INFINITY, |b| b.1);
        if let Some((edges, w)) = grow_from(&runs, start, bound) {
            if w < bound {
                best = Some((edges, w));
            }
        }
    }
    let (edges, _) = best.expect("the source itself is a start vertex");
    Ok(MulticastTree::from_parts_unchecked(s, edges, terminals.clone()))
}

struct TerminalRuns {
    /// The source followed by the terminals in id order.
    terms: Vec<NodeId>,
    runs: Vec<ShortestPaths>,
}

fn terminal_runs(g: &Graph, s: NodeId, terminals: &BTreeSet<NodeId>) -> Result<TerminalRuns, GraphError> {
    let mut terms = vec![s];
    terms.extend(terminals.iter().copied().filter(|&t| t != s));
    let runs: Vec<ShortestPaths> = terms.iter().map(|&t| dijkstra(g, t)).collect();
    for &t in &terms[1..] {
        if runs[0].dist(t).is_none() {
            return Err(GraphError::Unreachable {
                source_node: g.name(s).to_string(),
                target: g.name(t).to_string(),
            });
        }
    }
    Ok(TerminalRuns { terms, runs })
}

/// Grows a tree from `start` until it holds every terminal, then trims
/// non-terminal leaves. Gives up once the untrimmed weight reaches `bound`.
fn grow_from(tr: &TerminalRuns, start: NodeId, bound: f64) -> Option<(EdgeSet, f64)> {
    let k = tr.terms.len();
    let mut in_tree: IdSet = IdSet::from_iter([start]);
    // nearest tree node of each pending terminal
    let mut near: Vec<(f64, NodeId)> = tr
        .runs
        .iter()
        .map(|r| (r.dist(start).unwrap_or(f64::INFINITY), start))
        .collect();
    let mut pending: Vec<bool> = tr.terms.iter().map(|t| *t != start).collect();
    let mut edges = EdgeSet::new();
    let mut weight = 0.0;
    while let Some(i) = (0..k).filter(|&i| pending[i]).min_by(|&a, &b| {
        near[a]
            .0
            .total_cmp(&near[b].0)
            .then(tr.terms[a].cmp(&tr.terms[b]))
    }) {
        let (d, anchor) = near[i];
        if !d.is_finite() {
            return None;
        }
        weight += d;
        if weight >= bound {
            return None;
        }
        let mut added = Vec::new();
        for (e, w) in tr.runs[i].edges_to(anchor) {
            edges.insert(e, w);
            let (a, b) = e.endpoints();
            for n in [a, b] {
                if in_tree.insert(n) {
                    added.push(n);
                }
            }
        }
        pending[i] = false;
        for j in 0..k {
            if !pending[j] {
                continue;
            }
            if in_tree.contains(&tr.terms[j]) {
                pending[j] = false;
                continue;
            }
            for &n in &added {
                let dn = tr.runs[j].dist(n).unwrap_or(f64::INFINITY);
                if dn < near[j].0 || (dn == near[j].0 && n < near[j].1) {
                    near[j] = (dn, n);
                }
            }
        }
    }
    let keep: IdSet = tr.terms.iter().copied().collect();
    trim_leaves(&mut edges, &keep);
    let w = edges.weight();
    Some((edges, w))
}

/// Repeatedly removes leaves outside `keep`.
fn trim_leaves(edges: &mut EdgeSet, keep: &IdSet) {
    loop {
        let mut degree: IdMap<usize> = IdMap::default();
        for e in edges.edges() {
            let (a, b) = e.endpoints();
            *degree.entry(a).or_default() += 1;
            *degree.entry(b).or_default() += 1;
        }
        let strip: Vec<_> = edges
            .edges()
            .filter(|e| {
                let (a, b) = e.endpoints();
                [a, b].iter().any(|n| degree[n] == 1 && !keep.contains(n))
            })
            .collect();
        if strip.is_empty() {
            return;
        }
        for e in strip {
            edges.remove(e);
        }
    }
}

/// A baseline driven through the same slot interface as the online engine.
pub struct Baseline<'g> {
    kind: BaselineKind,
    graph: &'g Graph,
    spt: GlobalSpt,
    knobs: CostKnobs,
    membership: Membership,
    tree: MulticastTree,
    deposit: f64,
}

impl<'g> Baseline<'g> {
    pub fn new(
        kind: BaselineKind,
        graph: &'g Graph,
        source: NodeId,
        candidates: &BTreeSet<NodeId>,
        knobs: CostKnobs,
    ) -> Result<Self, StepError> {
        let spt = global_spt(graph, source, candidates)?;
        Ok(Baseline {
            kind,
            graph,
            spt,
            knobs,
            membership: Membership::new(candidates.clone()),
            tree: MulticastTree::root_only(source),
            deposit: 0.0,
        })
    }

    pub fn kind(&self) -> BaselineKind {
        self.kind
    }
}

impl RoutingPolicy for Baseline<'_> {
    fn name(&self) -> &'static str {
        self.kind.tag()
    }

    fn step(&mut self, joins: &[NodeId], leaves: &[NodeId]) -> Result<SlotOutcome, StepError> {
        let cur = self.membership.next(joins, leaves)?;
        let slot = self.membership.slot + 1;
        let t = Instant::now();
        let tree = match self.kind {
            BaselineKind::Spt => spt_tree(&self.spt, &cur),
            BaselineKind::St => steiner_heuristic(self.graph, self.spt.source(), &cur)?,
        };
        let elapsed = t.elapsed();
        let ledger = SlotLedger::evaluate(
            slot,
            &self.tree,
            &self.membership.current,
            self.deposit,
            &tree,
            &self.spt,
            &self.knobs,
        );
        self.deposit = ledger.deposit;
        self.tree = tree;
        self.membership.commit(cur);
        Ok(SlotOutcome {
            ledger,
            phases: Some(PhaseTimes {
                generation: elapsed,
                ..Default::default()
            }),
            candidates: Vec::new(),
            selected: None,
            stable_count: None,
        })
    }

    fn tree(&self) -> &MulticastTree {
        &self.tree
    }

    fn destinations(&self) -> &BTreeSet<NodeId> {
        &self.membership.current
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;
    use crate::tree::{branch_count, Edge};

    #[test]
    fn fig2_steiner_tree() {
        let g = fig2_graph();
        let n = |x: &str| g.node(x).unwrap();
        let t = steiner_heuristic(&g, n("s"), &BTreeSet::from([n("d1"), n("d2")])).unwrap();
        let expected: BTreeSet<Edge> = [("s", "b"), ("b", "d1"), ("b", "d2")]
            .iter()
            .map(|(u, v)| Edge::new(n(u), n(v)))
            .collect();
        assert_eq!(t.edges().edges().collect::<BTreeSet<_>>(), expected);
        assert!((t.weight() - 14.2).abs() < 1e-9);
        assert_eq!(branch_count(&t), 2);
        t.validate().unwrap();
    }

    #[test]
    fn plain_growth_from_the_source_misses_it() {
        let g = fig2_graph();
        let n = |x: &str| g.node(x).unwrap();
        let t = takahashi_matsuyama(&g, n("s"), &BTreeSet::from([n("d1"), n("d2")])).unwrap();
        assert!((t.weight() - 16.0).abs() < 1e-9);
        t.validate().unwrap();
    }

    #[test]
    fn single_terminal_is_a_shortest_path() {
        let g = fig2_graph();
        let n = |x: &str| g.node(x).unwrap();
        let t = steiner_heuristic(&g, n("s"), &BTreeSet::from([n("d2")])).unwrap();
        assert!((t.weight() - 10.2).abs() < 1e-9);
        let empty = steiner_heuristic(&g, n("s"), &BTreeSet::new()).unwrap();
        assert_eq!(empty, MulticastTree::root_only(n("s")));
    }

    #[test]
    fn fig2_baseline_totals() {
        let g = fig2_graph();
        let n = |x: &str| g.node(x).unwrap();
        let d = BTreeSet::from([n("d1"), n("d2")]);
        let knobs = CostKnobs::new(1.0, 0.2);
        for (kind, slot2) in [(BaselineKind::Spt, 21.2), (BaselineKind::St, 20.24)] {
            let mut p = Baseline::new(kind, &g, n("s"), &d, knobs).unwrap();
            let o1 = p.step(&[n("d1")], &[]).unwrap();
            assert!((o1.ledger.total - 11.0).abs() < 1e-9);
            let o2 = p.step(&[n("d2")], &[]).unwrap();
            assert!(
                (o2.ledger.total - slot2).abs() < 1e-9,
                "{kind}: {}",
                o2.ledger.total
            );
        }
    }

    #[test]
    fn spt_never_reroutes() {
        let g = fig2_graph();
        let n = |x: &str| g.node(x).unwrap();
        let d = BTreeSet::from([n("d1"), n("d2")]);
        let mut p = Baseline::new(BaselineKind::Spt, &g, n("s"), &d, CostKnobs::default()).unwrap();
        for (j, l) in [
            (vec![n("d2")], vec![]),
            (vec![n("d1")], vec![]),
            (vec![], vec![n("d2")]),
        ] {
            assert_eq!(p.step(&j, &l).unwrap().ledger.rerouting_cost, 0.0);
        }
    }
}
