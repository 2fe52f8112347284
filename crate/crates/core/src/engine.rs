//! The online branch-aware Steiner tree algorithm.
//!
//! Each slot runs four phases:
//!
//! 1. **Reference tree.** Destinations whose stability index exceeds the
//!    threshold are "stable"; the reference tree is the part of the global
//!    shortest-path tree that spans them.
//! 2. **Candidate generation.** Leavers are pruned from the previous tree.
//!    The staying destinations are sorted by their distance from the source
//!    in the previous tree, and candidate `l` keeps the tree paths of the `l`
//!    closest ones (candidate 0 is the bare source). Everything else must be
//!    re-attached.
//! 3. **Patching.** Stable destinations are grafted onto the candidate along
//!    the reference tree, taking the longest prefix whose deposit stays
//!    sufficient. The rest are attached with a minimum spanning tree over the
//!    metric closure of the contracted candidate, or failing that by grafting
//!    their shortest paths. A candidate that cannot keep a sufficient deposit
//!    is discarded.
//! 4. **Selection.** The surviving candidate maximizing
//!    `gamma * deposit + (1 - gamma) * prc` (sign and `beta` factor
//!    configurable) is deployed.
//!
//! The deposit starts at zero and evolves as `dep_i = dep_{i-1} + B_i - cost_i`.
//! Every deployed tree satisfies `dep_i >= beta * prc_i`.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cost::{sufficient_deposit, CostKnobs, SlotLedger};
use crate::graph::{Graph, IdMap, NodeId};
use crate::paths::{dijkstra, global_spt, GlobalSpt, ShortestPaths};
use crate::policy::{CandidateSummary, Membership, PhaseTimes, RoutingPolicy, SlotOutcome, StepError};
use crate::tree::{contract, graft, prune, sprout, Edge, EdgeSet, MulticastTree, TreeError};

/// Order in which stable destinations are grafted along the reference tree.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StableSort {
    /// Non-decreasing stability index, ties by node id.
    #[default]
    Si,
    /// Non-decreasing distance from the source along the reference tree.
    RtDistance,
}

/// How the final selection score treats the potential rerouting cost.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionRule {
    /// `+1.0` or `-1.0`.
    pub prc_sign: f64,
    /// Multiply the prc term by `beta`.
    pub prc_beta: bool,
}

impl Default for SelectionRule {
    fn default() -> Self {
        SelectionRule {
            prc_sign: 1.0,
            prc_beta: false,
        }
    }
}

impl SelectionRule {
    pub fn score(&self, ledger: &SlotLedger, knobs: &CostKnobs) -> f64 {
        let beta = if self.prc_beta { knobs.beta } else { 1.0 };
        knobs.gamma * ledger.deposit + (1.0 - knobs.gamma) * self.prc_sign * beta * ledger.potential_rc
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ObstaConfig {
    pub knobs: CostKnobs,
    pub selection: SelectionRule,
    pub stable_sort: StableSort,
    /// Total slot count when known in advance; otherwise the stability
    /// index uses the number of slots seen so far.
    pub horizon: Option<usize>,
}

/// Stability index of a destination that first arrived in slot `first_arrival`
/// and has been a member for `duration` slots, over a horizon of `n` slots.
pub fn stability_index(first_arrival: usize, duration: usize, n: usize) -> f64 {
    if n <= first_arrival {
        return 1.0;
    }
    let span = (n - first_arrival) as f64;
    let h = duration as f64;
    if h <= span / 2.0 {
        (2.0 * h / span).clamp(0.0, 1.0)
    } else {
        1.0
    }
}

/// Membership history of one candidate destination.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StabilityRecord {
    pub first_arrival: Option<usize>,
    pub duration: usize,
}

impl StabilityRecord {
    /// Zero until the node has been a member at least once.
    pub fn si(&self, n: usize) -> f64 {
        self.first_arrival
            .map_or(0.0, |a| stability_index(a, self.duration, n))
    }
}

/// Shortest-path subtree over the stable destinations.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceTree {
    pub tree: MulticastTree,
    pub stable_set: BTreeSet<NodeId>,
}

impl ReferenceTree {
    pub fn size(&self) -> usize {
        self.stable_set.len()
    }
}

pub fn build_reference_tree(spt: &GlobalSpt, si: &BTreeMap<NodeId, f64>, threshold: f64) -> ReferenceTree {
    let stable_set: BTreeSet<NodeId> = spt
        .candidates()
        .iter()
        .copied()
        .filter(|d| si.get(d).copied().unwrap_or(0.0) > threshold)
        .collect();
    ReferenceTree {
        tree: spt.subtree(&stable_set),
        stable_set,
    }
}

/// How a patched candidate attached its remaining destinations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RestRoute {
    Mst,
    Spt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CandidateStatus {
    Generated,
    Patched {
        stable_attached: usize,
        route: RestRoute,
    },
    Discarded {
        stable_attached: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub index: usize,
    pub tree: MulticastTree,
    /// Staying destinations this candidate must re-attach.
    pub reroute: BTreeSet<NodeId>,
    /// Joiners plus `reroute`.
    pub attach: BTreeSet<NodeId>,
    pub ledger: Option<SlotLedger>,
    pub status: CandidateStatus,
}

impl Candidate {
    pub fn is_discarded(&self) -> bool {
        matches!(self.status, CandidateStatus::Discarded { .. })
    }

    pub fn summary(&self) -> CandidateSummary {
        let (status, stable_attached) = match self.status {
            CandidateStatus::Generated => ("generated".to_string(), 0),
            CandidateStatus::Patched {
                stable_attached,
                route,
            } => (
                match route {
                    RestRoute::Mst => "rest-mst".to_string(),
                    RestRoute::Spt => "rest-spt".to_string(),
                },
                stable_attached,
            ),
            CandidateStatus::Discarded { stable_attached } => ("discarded".to_string(), stable_attached),
        };
        CandidateSummary {
            index: self.index,
            status,
            stable_attached,
            edges: self
                .tree
                .edges()
                .edges()
                .map(|e| {
                    let (a, b) = e.endpoints();
                    (a.0, b.0)
                })
                .collect(),
            ledger: self.ledger,
        }
    }
}

/// Builds candidates `T^0 .. T^k` from the previous slot's tree.
///
/// Stayers are ordered by their distance from the root in `prev_tree`,
/// ties by node id.
pub fn generate_candidates(
    prev_tree: &MulticastTree,
    prev_dests: &BTreeSet<NodeId>,
    cur_dests: &BTreeSet<NodeId>,
) -> Result<Vec<Candidate>, TreeError> {
    let view = if prev_tree.destinations() == prev_dests {
        prev_tree.clone()
    } else {
        prev_tree.clone().with_destinations(prev_dests.clone())?
    };
    let leaving: BTreeSet<NodeId> = prev_dests.difference(cur_dests).copied().collect();
    let joins: BTreeSet<NodeId> = cur_dests.difference(prev_dests).copied().collect();
    let t_leave = prune(&view, &leaving)?;

    let mut stayers: Vec<(f64, NodeId)> = t_leave
        .destinations()
        .iter()
        .map(|&d| Ok((view.depth(d)?, d)))
        .collect::<Result<_, TreeError>>()?;
    stayers.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let order: Vec<NodeId> = stayers.into_iter().map(|(_, d)| d).collect();

    let mut out = Vec::with_capacity(order.len() + 1);
    let trees = std::iter::once(MulticastTree::root_only(prev_tree.root())).chain(sprout(&t_leave, &order)?);
    for (l, tree) in trees.enumerate() {
        let reroute: BTreeSet<NodeId> = order[l..].iter().copied().collect();
        let attach = joins.union(&reroute).copied().collect();
        out.push(Candidate {
            index: l,
            tree,
            reroute,
            attach,
            ledger: None,
            status: CandidateStatus::Generated,
        });
    }
    Ok(out)
}

/// Lazily computed single-source shortest paths from destinations.
#[derive(Debug, Default)]
pub struct PathCache {
    runs: IdMap<ShortestPaths>,
}

impl PathCache {
    pub fn new() -> Self {
        Self::default()
    }

    fn ensure(&mut self, g: &Graph, nodes: &[NodeId]) {
        for &n in nodes {
            self.runs.entry(n).or_insert_with(|| dijkstra(g, n));
        }
    }

    fn get(&self, n: NodeId) -> &ShortestPaths {
        &self.runs[&n]
    }
}

/// Complete graph over a contracted supernode and a terminal set, weighted
/// by shortest-path distance in the contracted graph.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricClosure {
    pub terminals: Vec<NodeId>,
    /// Distance from the supernode to each terminal.
    pub to_super: Vec<f64>,
    /// `pair[i][j]`: distance between terminals `i` and `j`.
    pub pair: Vec<Vec<f64>>,
}

/// Metric closure computed by materializing the contracted graph and
/// running Dijkstra in it.
pub fn metric_closure_via_contraction(
    g: &Graph,
    tree: &MulticastTree,
    terminals: &[NodeId],
) -> Result<MetricClosure, TreeError> {
    let (h, sup) = contract(g, tree)?;
    let map = |n: NodeId| h.node(g.name(n)).expect("terminal outside the contracted tree");
    let from_super = dijkstra(&h, sup);
    let to_super = terminals
        .iter()
        .map(|&t| from_super.dist(map(t)).unwrap_or(f64::INFINITY))
        .collect();
    let pair = terminals
        .iter()
        .map(|&a| {
            let sp = dijkstra(&h, map(a));
            terminals
                .iter()
                .map(|&b| sp.dist(map(b)).unwrap_or(f64::INFINITY))
                .collect()
        })
        .collect();
    Ok(MetricClosure {
        terminals: terminals.to_vec(),
        to_super,
        pair,
    })
}

/// Contracted-graph distances derived from shortest paths in `g`:
/// the supernode distance is the distance to the nearest tree node and a
/// terminal pair either uses its direct shortest path or goes through the
/// supernode.
struct CachedClosure {
    closure: MetricClosure,
    /// Nearest tree node for each terminal.
    anchor: Vec<NodeId>,
}

fn cached_closure(cache: &PathCache, tree_nodes: &[NodeId], terminals: &[NodeId]) -> CachedClosure {
    let mut to_super = Vec::with_capacity(terminals.len());
    let mut anchor = Vec::with_capacity(terminals.len());
    for &t in terminals {
        let sp = cache.get(t);
        let (d, x) = tree_nodes
            .iter()
            .map(|&x| (sp.dist(x).unwrap_or(f64::INFINITY), x))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .expect("tree has a root");
        to_super.push(d);
        anchor.push(x);
    }
    let pair = terminals
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let sp = cache.get(a);
            terminals
                .iter()
                .enumerate()
                .map(|(j, &b)| {
                    if i == j {
                        0.0
                    } else {
                        let direct = sp.dist(b).unwrap_or(f64::INFINITY);
                        direct.min(to_super[i] + to_super[j])
                    }
                })
                .collect()
        })
        .collect();
    CachedClosure {
        closure: MetricClosure {
            terminals: terminals.to_vec(),
            to_super,
            pair,
        },
        anchor,
    }
}

/// Metric closure computed from per-terminal Dijkstra runs in the original
/// graph. Agrees with [`metric_closure_via_contraction`].
pub fn metric_closure_cached(
    g: &Graph,
    cache: &mut PathCache,
    tree: &MulticastTree,
    terminals: &[NodeId],
) -> MetricClosure {
    cache.ensure(g, terminals);
    let nodes: Vec<NodeId> = tree.nodes().into_iter().collect();
    cached_closure(cache, &nodes, terminals).closure
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Attaches `outside` (destinations not on `base`) with an MST over the
/// metric closure of the contracted base, expands closure edges back into
/// graph paths, and cleans the union into a tree serving `dests`.
fn attach_by_mst(
    g: &Graph,
    cache: &mut PathCache,
    base: &MulticastTree,
    outside: &[NodeId],
    dests: BTreeSet<NodeId>,
) -> MulticastTree {
    cache.ensure(g, outside);
    let tree_nodes: Vec<NodeId> = base.nodes().into_iter().collect();
    let CachedClosure { closure, anchor } = cached_closure(cache, &tree_nodes, outside);

    // closure vertex 0 is the supernode, terminal i is vertex i + 1
    let r = outside.len();
    let mut closure_edges: Vec<(f64, usize, usize)> = Vec::with_capacity(r * (r + 1) / 2);
    for i in 0..r {
        closure_edges.push((closure.to_super[i], 0, i + 1));
        for j in i + 1..r {
            closure_edges.push((closure.pair[i][j], i + 1, j + 1));
        }
    }
    closure_edges.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    let mut uf = UnionFind::new(r + 1);
    let mut expanded = EdgeSet::new();
    let add_path = |sp: &ShortestPaths, to: NodeId, out: &mut EdgeSet| {
        for (e, w) in sp.edges_to(to) {
            out.insert(e, w);
        }
    };
    for (w, a, b) in closure_edges {
        if !uf.union(a, b) {
            continue;
        }
        if a == 0 {
            let t = b - 1;
            add_path(cache.get(outside[t]), anchor[t], &mut expanded);
        } else {
            let (i, j) = (a - 1, b - 1);
            let direct = cache.get(outside[i]).dist(outside[j]).unwrap_or(f64::INFINITY);
            if direct <= w {
                add_path(cache.get(outside[i]), outside[j], &mut expanded);
            } else {
                add_path(cache.get(outside[i]), anchor[i], &mut expanded);
                add_path(cache.get(outside[j]), anchor[j], &mut expanded);
            }
        }
    }
    spanning_cleanup(base, &expanded, dests)
}

/// Kruskal over `base` edges (kept first) and `extra` edges by weight, then
/// repeatedly strips leaves that are neither the root nor a destination.
fn spanning_cleanup(base: &MulticastTree, extra: &EdgeSet, dests: BTreeSet<NodeId>) -> MulticastTree {
    let mut nodes: Vec<NodeId> = base.nodes().into_iter().chain(extra.nodes()).collect();
    nodes.sort();
    nodes.dedup();
    let idx: IdMap<usize> = nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let mut uf = UnionFind::new(nodes.len());
    let mut kept = EdgeSet::new();
    for (e, w) in base.edges().iter() {
        let (a, b) = e.endpoints();
        uf.union(idx[&a], idx[&b]);
        kept.insert(e, w);
    }
    let mut rest: Vec<(f64, Edge)> = extra
        .iter()
        .filter(|&(e, _)| !kept.contains(e))
        .map(|(e, w)| (w, e))
        .collect();
    rest.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    for (w, e) in rest {
        let (a, b) = e.endpoints();
        if uf.union(idx[&a], idx[&b]) {
            kept.insert(e, w);
        }
    }
    let root = base.root();
    loop {
        let mut degree: IdMap<usize> = IdMap::default();
        for e in kept.edges() {
            let (a, b) = e.endpoints();
            *degree.entry(a).or_default() += 1;
            *degree.entry(b).or_default() += 1;
        }
        let strip: Vec<Edge> = kept
            .edges()
            .filter(|e| {
                let (a, b) = e.endpoints();
                [a, b]
                    .iter()
                    .any(|n| *n != root && degree[n] == 1 && !dests.contains(n))
            })
            .collect();
        if strip.is_empty() {
            break;
        }
        for e in strip {
            kept.remove(e);
        }
    }
    MulticastTree::from_parts_unchecked(root, kept, dests)
}

/// Everything a candidate's draft ledger depends on besides its own tree.
pub struct SlotContext<'a> {
    pub graph: &'a Graph,
    pub spt: &'a GlobalSpt,
    pub slot: usize,
    pub prev_tree: &'a MulticastTree,
    pub prev_dests: &'a BTreeSet<NodeId>,
    pub prev_deposit: f64,
    pub cur_dests: &'a BTreeSet<NodeId>,
    pub knobs: CostKnobs,
    pub stable_sort: StableSort,
    pub reference: &'a ReferenceTree,
    pub si: &'a BTreeMap<NodeId, f64>,
}

impl SlotContext<'_> {
    /// Ledger of `tree` treated as serving exactly its own destination set.
    pub fn draft(&self, tree: &MulticastTree) -> SlotLedger {
        SlotLedger::evaluate(
            self.slot,
            self.prev_tree,
            self.prev_dests,
            self.prev_deposit,
            tree,
            self.spt,
            &self.knobs,
        )
    }

    fn sufficient(&self, ledger: &SlotLedger) -> bool {
        sufficient_deposit(ledger.deposit, ledger.potential_rc, &self.knobs)
    }
}

/// Stable members of `attach`, in grafting order.
fn stable_order(ctx: &SlotContext<'_>, attach: &BTreeSet<NodeId>) -> Vec<NodeId> {
    let mut stable: Vec<NodeId> = attach
        .iter()
        .copied()
        .filter(|d| ctx.reference.stable_set.contains(d))
        .collect();
    match ctx.stable_sort {
        StableSort::Si => stable.sort_by(|a, b| {
            let (sa, sb) = (
                ctx.si.get(a).copied().unwrap_or(0.0),
                ctx.si.get(b).copied().unwrap_or(0.0),
            );
            sa.total_cmp(&sb).then(a.cmp(b))
        }),
        StableSort::RtDistance => {
            stable.sort_by(|a, b| ctx.spt.dist(*a).total_cmp(&ctx.spt.dist(*b)).then(a.cmp(b)))
        }
    }
    stable
}

/// Patches one candidate: stable attach along the reference tree, then the
/// rest by metric-closure MST or, failing the deposit check, by shortest
/// paths. Discards the candidate if neither keeps the deposit sufficient.
pub fn patch_candidate(
    mut cand: Candidate,
    ctx: &SlotContext<'_>,
    cache: &mut PathCache,
) -> Result<Candidate, TreeError> {
    // stable attach: the largest prefix m whose grafted tree keeps a
    // sufficient deposit (scanning down from the full prefix finds it first)
    let order = stable_order(ctx, &cand.attach);
    let mut stable_tree = cand.tree.clone();
    let mut attached = 0;
    if !order.is_empty() {
        let keep: BTreeSet<NodeId> = order.iter().copied().collect();
        let drop: BTreeSet<NodeId> = ctx.reference.stable_set.difference(&keep).copied().collect();
        let rt_sub = prune(&ctx.reference.tree, &drop)?;
        let prefixes = sprout(&rt_sub, &order)?;
        for (m, prefix) in prefixes.iter().enumerate().rev() {
            let grafted = graft(&cand.tree, prefix)?;
            let ledger = ctx.draft(&grafted);
            if ctx.sufficient(&ledger) {
                stable_tree = grafted;
                attached = m + 1;
                break;
            }
        }
    }

    // rest attach
    let rest: BTreeSet<NodeId> = ctx
        .cur_dests
        .difference(stable_tree.destinations())
        .copied()
        .collect();
    let on_tree = stable_tree.nodes();
    let outside: Vec<NodeId> = rest.iter().copied().filter(|d| !on_tree.contains(d)).collect();
    let mst_tree = if outside.is_empty() {
        stable_tree.clone().with_destinations(ctx.cur_dests.clone())?
    } else {
        attach_by_mst(ctx.graph, cache, &stable_tree, &outside, ctx.cur_dests.clone())
    };
    let ledger = ctx.draft(&mst_tree);
    if ctx.sufficient(&ledger) {
        cand.tree = mst_tree;
        cand.ledger = Some(ledger);
        cand.status = CandidateStatus::Patched {
            stable_attached: attached,
            route: RestRoute::Mst,
        };
        return Ok(cand);
    }

    let spt_rest = ctx.spt.subtree(&rest);
    let spt_tree = graft(&stable_tree, &spt_rest)?;
    let ledger = ctx.draft(&spt_tree);
    if ctx.sufficient(&ledger) {
        cand.tree = spt_tree;
        cand.ledger = Some(ledger);
        cand.status = CandidateStatus::Patched {
            stable_attached: attached,
            route: RestRoute::Spt,
        };
    } else {
        cand.tree = spt_tree;
        cand.ledger = Some(ledger);
        cand.status = CandidateStatus::Discarded {
            stable_attached: attached,
        };
    }
    Ok(cand)
}

/// Index of the surviving candidate with the largest selection score; ties
/// go to the smallest index. `None` when every candidate was discarded.
pub fn select_final(cands: &[Candidate], rule: &SelectionRule, knobs: &CostKnobs) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in cands.iter().enumerate() {
        if c.is_discarded() {
            continue;
        }
        let Some(ledger) = c.ledger.as_ref() else {
            continue;
        };
        let score = rule.score(ledger, knobs);
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((i, score));
        }
    }
    best.map(|(i, _)| i)
}

/// Engine state carried between slots.
#[derive(Clone, Debug)]
pub struct SlotState {
    pub slot: usize,
    pub tree: MulticastTree,
    pub destinations: BTreeSet<NodeId>,
    pub deposit: f64,
    pub potential_rc: f64,
    pub records: BTreeMap<NodeId, StabilityRecord>,
}

/// The online algorithm bound to one graph, source and candidate set.
pub struct Obsta<'g> {
    graph: &'g Graph,
    spt: GlobalSpt,
    config: ObstaConfig,
    membership: Membership,
    state: SlotState,
    cache: PathCache,
}

impl<'g> Obsta<'g> {
    pub fn new(
        graph: &'g Graph,
        source: NodeId,
        candidates: &BTreeSet<NodeId>,
        config: ObstaConfig,
    ) -> Result<Self, StepError> {
        let spt = global_spt(graph, source, candidates)?;
        let records = candidates
            .iter()
            .map(|&d| (d, StabilityRecord::default()))
            .collect();
        Ok(Obsta {
            graph,
            spt,
            config,
            membership: Membership::new(candidates.clone()),
            state: SlotState {
                slot: 0,
                tree: MulticastTree::root_only(source),
                destinations: BTreeSet::new(),
                deposit: 0.0,
                potential_rc: 0.0,
                records,
            },
            cache: PathCache::new(),
        })
    }

    pub fn state(&self) -> &SlotState {
        &self.state
    }

    pub fn global_spt(&self) -> &GlobalSpt {
        &self.spt
    }

    pub fn config(&self) -> &ObstaConfig {
        &self.config
    }

    /// Stability index of every candidate at the start of slot `slot`.
    pub fn stability_indices(&self, slot: usize) -> BTreeMap<NodeId, f64> {
        let n = self.config.horizon.unwrap_or(slot);
        self.state.records.iter().map(|(&d, r)| (d, r.si(n))).collect()
    }

    /// Runs one slot and returns the patched candidates alongside the outcome.
    pub fn step_detailed(
        &mut self,
        joins: &[NodeId],
        leaves: &[NodeId],
    ) -> Result<(SlotOutcome, Vec<Candidate>), StepError> {
        let cur = self.membership.next(joins, leaves)?;
        let slot = self.state.slot + 1;
        let mut phases = PhaseTimes::default();

        let t = Instant::now();
        let si = self.stability_indices(slot);
        let reference = build_reference_tree(&self.spt, &si, self.config.knobs.stability_threshold);
        phases.reference_tree = t.elapsed();

        let t = Instant::now();
        let generated = generate_candidates(&self.state.tree, &self.state.destinations, &cur)?;
        phases.generation = t.elapsed();

        let t = Instant::now();
        let ctx = SlotContext {
            graph: self.graph,
            spt: &self.spt,
            slot,
            prev_tree: &self.state.tree,
            prev_dests: &self.state.destinations,
            prev_deposit: self.state.deposit,
            cur_dests: &cur,
            knobs: self.config.knobs,
            stable_sort: self.config.stable_sort,
            reference: &reference,
            si: &si,
        };
        let mut patched = Vec::with_capacity(generated.len());
        for cand in generated {
            patched.push(patch_candidate(cand, &ctx, &mut self.cache)?);
        }
        phases.patching = t.elapsed();

        let t = Instant::now();
        let chosen = select_final(&patched, &self.config.selection, &self.config.knobs);
        phases.selection = t.elapsed();

        let Some(chosen) = chosen else {
            return Err(StepError::AllDiscarded {
                slot,
                candidates: patched.iter().map(Candidate::summary).collect(),
            });
        };
        let ledger = patched[chosen].ledger.expect("patched candidate has a ledger");

        for d in &cur {
            let r = self.state.records.entry(*d).or_default();
            r.first_arrival.get_or_insert(slot);
            r.duration += 1;
        }
        self.state.slot = slot;
        self.state.tree = patched[chosen].tree.clone();
        self.state.destinations = cur.clone();
        self.state.deposit = ledger.deposit;
        self.state.potential_rc = ledger.potential_rc;
        self.membership.commit(cur);

        let outcome = SlotOutcome {
            ledger,
            phases: Some(phases),
            candidates: patched.iter().map(Candidate::summary).collect(),
            selected: Some(chosen),
            stable_count: Some(reference.size()),
        };
        Ok((outcome, patched))
    }
}

impl RoutingPolicy for Obsta<'_> {
    fn name(&self) -> &'static str {
        "obsta"
    }

    fn step(&mut self, joins: &[NodeId], leaves: &[NodeId]) -> Result<SlotOutcome, StepError> {
        self.step_detailed(joins, leaves).map(|(o, _)| o)
    }

    fn tree(&self) -> &MulticastTree {
        &self.state.tree
    }

    fn destinations(&self) -> &BTreeSet<NodeId> {
        &self.state.destinations
    }
}
