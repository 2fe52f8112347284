//! Scenarios: a topology, a source, the candidate destinations and one
//! membership event record per slot.
//!
//! On disk a scenario is three files:
//!
//! * a TOML header with the keys `topology`, `source`, `candidates`,
//!   `alpha`, `beta`, `gamma`, `stability_threshold`, `seed`,
//!   `selection_prc_sign`, `selection_prc_beta` and `stable_sort`;
//! * the edge-list topology the header points at (relative to the header);
//! * a JSON-lines trace, one `{"slot": i, "join": [...], "leave": [...]}`
//!   record per slot with `slot` running 1, 2, 3, ...
//!
//! Generators for random scenarios, the adversarial hardness family and the
//! six-node comparison example live here as well.

use std::collections::BTreeSet;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::{CostKnobs, KnobError};
use crate::engine::{ObstaConfig, SelectionRule, StableSort};
use crate::fixtures::fig2_graph;
use crate::graph::{load_topology, Graph, GraphBuilder, GraphError, NodeId};
use crate::paths::global_spt;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("header: {0}")]
    Header(String),
    #[error("trace line {line}: {reason}")]
    Trace { line: usize, reason: String },
    #[error("slot {found}: expected slot {expected}")]
    SlotGap { expected: usize, found: usize },
    #[error("slot {slot}: unknown node {name:?}")]
    UnknownNode { slot: usize, name: String },
    #[error("slot {slot}: {name:?} is not a candidate destination")]
    NotACandidate { slot: usize, name: String },
    #[error("slot {slot}: {name:?} joined while already present")]
    JoinWhilePresent { slot: usize, name: String },
    #[error("slot {slot}: {name:?} left while absent")]
    LeaveWhileAbsent { slot: usize, name: String },
    #[error("invalid parameters: {0}")]
    Parameters(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Knob(#[from] KnobError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// Membership events of one slot.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SlotEvents {
    pub slot: usize,
    pub joins: Vec<NodeId>,
    pub leaves: Vec<NodeId>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub graph: Graph,
    pub source: NodeId,
    pub candidates: BTreeSet<NodeId>,
    pub slots: Vec<SlotEvents>,
    pub knobs: CostKnobs,
    pub seed: u64,
    pub selection: SelectionRule,
    pub stable_sort: StableSort,
}

impl Scenario {
    pub fn slot_count(&self) -> usize {
        self.slots.len()
    }

    /// Destination set after each slot.
    pub fn destination_sets(&self) -> Vec<BTreeSet<NodeId>> {
        let mut cur = BTreeSet::new();
        self.slots
            .iter()
            .map(|s| {
                for l in &s.leaves {
                    cur.remove(l);
                }
                cur.extend(s.joins.iter().copied());
                cur.clone()
            })
            .collect()
    }

    /// Largest destination-set size over all slots.
    pub fn d_max(&self) -> usize {
        self.destination_sets()
            .iter()
            .map(BTreeSet::len)
            .max()
            .unwrap_or(0)
    }

    /// Engine configuration for replaying this scenario; the stability
    /// horizon is the scenario length.
    pub fn obsta_config(&self) -> ObstaConfig {
        ObstaConfig {
            knobs: self.knobs,
            selection: self.selection,
            stable_sort: self.stable_sort,
            horizon: Some(self.slots.len()),
        }
    }

    pub fn name(&self, n: NodeId) -> &str {
        self.graph.name(n)
    }

    /// Checks knobs, reachability and membership consistency.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.knobs.validate()?;
        global_spt(&self.graph, self.source, &self.candidates)?;
        let mut cur = BTreeSet::new();
        for (i, s) in self.slots.iter().enumerate() {
            if s.slot != i + 1 {
                return Err(ScenarioError::SlotGap {
                    expected: i + 1,
                    found: s.slot,
                });
            }
            let name = |n: NodeId| self.graph.name(n).to_string();
            for &l in &s.leaves {
                if !cur.remove(&l) {
                    return Err(ScenarioError::LeaveWhileAbsent {
                        slot: s.slot,
                        name: name(l),
                    });
                }
            }
            for &j in &s.joins {
                if !self.candidates.contains(&j) {
                    return Err(ScenarioError::NotACandidate {
                        slot: s.slot,
                        name: name(j),
                    });
                }
                if !cur.insert(j) || s.leaves.contains(&j) {
                    return Err(ScenarioError::JoinWhilePresent {
                        slot: s.slot,
                        name: name(j),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn header(&self, topology: &str) -> ScenarioHeader {
        ScenarioHeader {
            topology: topology.to_string(),
            source: self.graph.name(self.source).to_string(),
            candidates: self
                .candidates
                .iter()
                .map(|&n| self.graph.name(n).to_string())
                .collect(),
            alpha: self.knobs.alpha,
            beta: self.knobs.beta,
            gamma: self.knobs.gamma,
            stability_threshold: self.knobs.stability_threshold,
            seed: self.seed,
            selection_prc_sign: self.selection.prc_sign,
            selection_prc_beta: self.selection.prc_beta,
            stable_sort: self.stable_sort,
        }
    }

    /// The trace as JSON lines.
    pub fn trace_jsonl(&self) -> String {
        let mut out = String::new();
        for s in &self.slots {
            let names = |v: &[NodeId]| v.iter().map(|&n| self.graph.name(n).to_string()).collect();
            let rec = TraceRecord {
                slot: s.slot,
                join: names(&s.joins),
                leave: names(&s.leaves),
            };
            out.push_str(&serde_json::to_string(&rec).expect("trace record serializes"));
            out.push('\n');
        }
        out
    }
}

fn default_sign() -> f64 {
    1.0
}

fn default_threshold() -> f64 {
    CostKnobs::default().stability_threshold
}

fn default_gamma() -> f64 {
    CostKnobs::default().gamma
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioHeader {
    pub topology: String,
    pub source: String,
    pub candidates: Vec<String>,
    pub alpha: f64,
    pub beta: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_threshold")]
    pub stability_threshold: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_sign")]
    pub selection_prc_sign: f64,
    #[serde(default)]
    pub selection_prc_beta: bool,
    #[serde(default)]
    pub stable_sort: StableSort,
}

impl ScenarioHeader {
    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        toml::from_str(text).map_err(|e| ScenarioError::Header(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("header serializes")
    }

    pub fn knobs(&self) -> CostKnobs {
        CostKnobs {
            alpha: self.alpha,
            beta: self.beta,
            gamma: self.gamma,
            stability_threshold: self.stability_threshold,
        }
    }
}

/// One line of a trace file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceRecord {
    pub slot: usize,
    #[serde(default)]
    pub join: Vec<String>,
    #[serde(default)]
    pub leave: Vec<String>,
}

/// Binds a header, its already-loaded topology and a trace stream into a
/// validated scenario.
pub fn parse_scenario<R: BufRead>(
    header: &ScenarioHeader,
    graph: Graph,
    trace: R,
) -> Result<Scenario, ScenarioError> {
    if header.selection_prc_sign != 1.0 && header.selection_prc_sign != -1.0 {
        return Err(ScenarioError::Header(format!(
            "selection_prc_sign must be 1 or -1, found {}",
            header.selection_prc_sign
        )));
    }
    let source = graph.require(&header.source)?;
    let candidates = header
        .candidates
        .iter()
        .map(|c| graph.require(c))
        .collect::<Result<BTreeSet<_>, _>>()?;
    let mut slots = Vec::new();
    for (i, line) in trace.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| ScenarioError::Trace {
            line: line_no,
            reason: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TraceRecord = serde_json::from_str(&line).map_err(|e| ScenarioError::Trace {
            line: line_no,
            reason: e.to_string(),
        })?;
        let expected = slots.len() + 1;
        if rec.slot != expected {
            return Err(ScenarioError::SlotGap {
                expected,
                found: rec.slot,
            });
        }
        let resolve = |names: &[String]| {
            names
                .iter()
                .map(|n| {
                    graph.node(n).ok_or_else(|| ScenarioError::UnknownNode {
                        slot: rec.slot,
                        name: n.clone(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()
        };
        slots.push(SlotEvents {
            slot: rec.slot,
            joins: resolve(&rec.join)?,
            leaves: resolve(&rec.leave)?,
        });
    }
    let scenario = Scenario {
        graph,
        source,
        candidates,
        slots,
        knobs: header.knobs(),
        seed: header.seed,
        selection: SelectionRule {
            prc_sign: header.selection_prc_sign,
            prc_beta: header.selection_prc_beta,
        },
        stable_sort: header.stable_sort,
    };
    scenario.validate()?;
    Ok(scenario)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ScenarioError + '_ {
    move |source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Default trace location for a header: `<dir>/<stem>.trace.jsonl`.
pub fn default_trace_path(header: &Path) -> PathBuf {
    let stem = header.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
    header.with_file_name(format!("{stem}.trace.jsonl"))
}

/// Loads a scenario from a header file and a trace file. The topology path
/// in the header is resolved relative to the header's directory.
pub fn load_scenario(header_path: &Path, trace_path: Option<&Path>) -> Result<Scenario, ScenarioError> {
    let text = fs::read_to_string(header_path).map_err(io_err(header_path))?;
    let header = ScenarioHeader::from_toml(&text)?;
    let dir = header_path.parent().unwrap_or(Path::new("."));
    let topo_path = dir.join(&header.topology);
    let topo = fs::File::open(&topo_path).map_err(io_err(&topo_path))?;
    let graph = load_topology(BufReader::new(topo))?;
    let trace_path = trace_path.map_or_else(|| default_trace_path(header_path), Path::to_path_buf);
    let trace = fs::File::open(&trace_path).map_err(io_err(&trace_path))?;
    parse_scenario(&header, graph, BufReader::new(trace))
}

/// Writes `<stem>.toml`, `<stem>.edges` and `<stem>.trace.jsonl` into `dir`
/// and returns the header path.
pub fn write_scenario(scenario: &Scenario, dir: &Path, stem: &str) -> Result<PathBuf, ScenarioError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let topo_name = format!("{stem}.edges");
    let header_path = dir.join(format!("{stem}.toml"));
    let write = |p: PathBuf, body: String| fs::write(&p, body).map_err(io_err(&p));
    write(dir.join(&topo_name), scenario.graph.to_edge_list())?;
    write(header_path.clone(), scenario.header(&topo_name).to_toml())?;
    write(default_trace_path(&header_path), scenario.trace_jsonl())?;
    Ok(header_path)
}

/// The six-node comparison example: `d1` joins in slot 1, `d2` in slot 2,
/// `alpha = 1`, `beta = 0.2`.
pub fn fig2_fixture() -> Scenario {
    let graph = fig2_graph();
    let n = |x: &str| graph.node(x).expect("fixture node");
    let (s, d1, d2) = (n("s"), n("d1"), n("d2"));
    Scenario {
        source: s,
        candidates: BTreeSet::from([d1, d2]),
        slots: vec![
            SlotEvents {
                slot: 1,
                joins: vec![d1],
                leaves: vec![],
            },
            SlotEvents {
                slot: 2,
                joins: vec![d2],
                leaves: vec![],
            },
        ],
        knobs: CostKnobs::new(1.0, 0.2),
        seed: 0,
        selection: SelectionRule::default(),
        stable_sort: StableSort::default(),
        graph,
    }
}

/// Parameters of [`generate_random_scenario`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomParams {
    pub nodes: usize,
    /// Probability that each non-tree node pair gets an extra edge.
    pub edge_density: f64,
    /// Number of candidate destinations.
    pub group_size: usize,
    pub churn: f64,
    pub slots: usize,
    pub seed: u64,
}

/// Per-slot join probability of an absent candidate is `churn * JOIN_BIAS`.
pub const JOIN_BIAS: f64 = 0.4;
/// Per-slot leave probability of a present candidate is `churn * LEAVE_BIAS`.
pub const LEAVE_BIAS: f64 = 0.1;
/// Join probability of each candidate in slot 1.
pub const INITIAL_JOIN: f64 = 0.5;

/// Draws a connected random scenario from a ChaCha8 stream seeded with
/// `params.seed`. The draws happen in this order:
///
/// 1. Nodes are named `n0, n1, ...`, zero-padded to a common width.
/// 2. For `i = 1..nodes`, node `i` links to a uniform node in `0..i` (a
///    random spanning tree).
/// 3. Every other pair `(i, j)`, `i < j`, in lexicographic order, gets an
///    edge with probability `edge_density` (one `f64` draw per pair).
/// 4. Edge weights are drawn in the same order as the edges were created,
///    uniformly from `{1.0, 1.1, ..., 10.0}`.
/// 5. The source is a uniform node index.
/// 6. Candidates are the first `group_size` picks of a partial
///    Fisher–Yates shuffle of the remaining node indices.
/// 7. Slot 1: each candidate, in id order, joins with probability
///    `INITIAL_JOIN`. Later slots: each candidate draws one `f64`; a present
///    one leaves if it is below `churn * LEAVE_BIAS`, an absent one joins if
///    it is below `churn * JOIN_BIAS`.
///
/// Knobs are the defaults.
pub fn generate_random_scenario(params: &RandomParams) -> Result<Scenario, ScenarioError> {
    let RandomParams {
        nodes,
        edge_density,
        group_size,
        churn,
        slots,
        seed,
    } = *params;
    if nodes < 2 {
        return Err(ScenarioError::Parameters("need at least two nodes".into()));
    }
    if group_size >= nodes {
        return Err(ScenarioError::Parameters(format!(
            "group size {group_size} must be below the node count {nodes}"
        )));
    }
    if !(0.0..=1.0).contains(&edge_density) || !(0.0..=1.0).contains(&churn) {
        return Err(ScenarioError::Parameters(
            "edge density and churn must lie in [0, 1]".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = (nodes - 1).to_string().len();
    let names: Vec<String> = (0..nodes).map(|i| format!("n{i:0width$}")).collect();

    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut linked = BTreeSet::new();
    for i in 1..nodes {
        let j = rng.gen_range(0..i);
        pairs.push((j, i));
        linked.insert((j, i));
    }
    for i in 0..nodes {
        for j in i + 1..nodes {
            if !linked.contains(&(i, j)) && rng.gen::<f64>() < edge_density {
                pairs.push((i, j));
            }
        }
    }
    let mut b = GraphBuilder::new();
    for n in &names {
        b.add_node(n.as_str());
    }
    for &(i, j) in &pairs {
        let w = f64::from(rng.gen_range(10u32..=100)) / 10.0;
        b.add_edge(names[i].as_str(), names[j].as_str(), w)?;
    }
    let graph = b.build();

    let source_idx = rng.gen_range(0..nodes);
    let mut pool: Vec<usize> = (0..nodes).filter(|&i| i != source_idx).collect();
    for k in 0..group_size {
        let pick = rng.gen_range(k..pool.len());
        pool.swap(k, pick);
    }
    let id = |i: usize| graph.node(&names[i]).expect("generated node");
    let source = id(source_idx);
    let candidates: BTreeSet<NodeId> = pool[..group_size].iter().map(|&i| id(i)).collect();

    let mut present = BTreeSet::new();
    let mut events = Vec::with_capacity(slots);
    for slot in 1..=slots {
        let mut ev = SlotEvents {
            slot,
            ..Default::default()
        };
        for &c in &candidates {
            let r: f64 = rng.gen();
            if slot == 1 {
                if r < INITIAL_JOIN {
                    ev.joins.push(c);
                }
            } else if present.contains(&c) {
                if r < churn * LEAVE_BIAS {
                    ev.leaves.push(c);
                }
            } else if r < churn * JOIN_BIAS {
                ev.joins.push(c);
            }
        }
        for l in &ev.leaves {
            present.remove(l);
        }
        present.extend(ev.joins.iter().copied());
        events.push(ev);
    }

    let scenario = Scenario {
        graph,
        source,
        candidates,
        slots: events,
        knobs: CostKnobs::default(),
        seed,
        selection: SelectionRule::default(),
        stable_sort: StableSort::default(),
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Input of the adversarial hardness construction: a graph `G_H` with a
/// start vertex `y`, an exponent `p` and a permutation of `G_H`'s nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct HardnessParams {
    pub base: Graph,
    pub start: String,
    pub p: u32,
    /// Join order within each clone; `None` means node order.
    pub permutation: Option<Vec<String>>,
}

impl HardnessParams {
    /// `G_H` = a path `h1 - h2 - ... - hm` starting at `h1`.
    pub fn path(m: usize, p: u32) -> Self {
        let mut b = GraphBuilder::new();
        let width = m.to_string().len();
        let name = |i: usize| format!("h{i:0width$}");
        b.add_node(name(1));
        for i in 1..m {
            b.add_edge(name(i), name(i + 1), 1.0).expect("unit edge");
        }
        HardnessParams {
            base: b.build(),
            start: name(1),
            p,
            permutation: None,
        }
    }

    pub fn m(&self) -> usize {
        self.base.node_count()
    }

    /// `m^p (m^(p+1) + 1) / 2`.
    pub fn alpha(&self) -> f64 {
        let m = self.m() as f64;
        let mp = m.powi(self.p as i32);
        mp * (mp * m + 1.0) / 2.0
    }
}

/// Name of the copy of `node` in clone `k` (1-based).
pub fn clone_name(k: usize, clones: usize, node: &str) -> String {
    let width = clones.to_string().len();
    format!("g{k:0width$}.{node}")
}

/// Builds the gap instance: a source `s` joined to the copy of the start
/// vertex in each of `m^p` clones of the base graph, unit weights
/// everywhere, `alpha = m^p (m^(p+1) + 1) / 2`, `beta = 0`. In slot
/// `i <= m^(p+1)` the copy in clone `ceil(i / m)` of the permutation's
/// `((i - 1) mod m) + 1`-th node joins; afterwards the members leave one per
/// slot in reverse join order.
pub fn generate_hardness_instance(params: &HardnessParams) -> Result<Scenario, ScenarioError> {
    let m = params.m();
    if m == 0 {
        return Err(ScenarioError::Parameters("empty base graph".into()));
    }
    params.base.require(&params.start)?;
    let order: Vec<String> = match &params.permutation {
        Some(p) => {
            let mut sorted = p.clone();
            sorted.sort();
            let nodes: Vec<String> = params
                .base
                .nodes()
                .map(|n| params.base.name(n).to_string())
                .collect();
            if sorted != nodes {
                return Err(ScenarioError::Parameters(
                    "permutation must list every base node exactly once".into(),
                ));
            }
            p.clone()
        }
        None => params
            .base
            .nodes()
            .map(|n| params.base.name(n).to_string())
            .collect(),
    };
    let clones = m
        .checked_pow(params.p)
        .filter(|c| c.checked_mul(m).is_some_and(|t| t <= 1 << 20))
        .ok_or_else(|| ScenarioError::Parameters("m^(p+1) is too large".into()))?;

    let mut b = GraphBuilder::new();
    b.add_node("s");
    for k in 1..=clones {
        for n in params.base.nodes() {
            b.add_node(clone_name(k, clones, params.base.name(n)));
        }
        for (u, v, _) in params.base.edges() {
            b.add_edge(
                clone_name(k, clones, params.base.name(u)),
                clone_name(k, clones, params.base.name(v)),
                1.0,
            )?;
        }
        b.add_edge("s", clone_name(k, clones, &params.start), 1.0)?;
    }
    let graph = b.build();
    let n = |name: String| graph.node(&name).expect("clone node");

    let total = clones * m;
    let join_order: Vec<NodeId> = (1..=total)
        .map(|i| n(clone_name(i.div_ceil(m), clones, &order[(i - 1) % m])))
        .collect();
    let mut slots: Vec<SlotEvents> = join_order
        .iter()
        .enumerate()
        .map(|(i, &d)| SlotEvents {
            slot: i + 1,
            joins: vec![d],
            leaves: vec![],
        })
        .collect();
    for (k, &d) in join_order.iter().rev().enumerate() {
        slots.push(SlotEvents {
            slot: total + k + 1,
            joins: vec![],
            leaves: vec![d],
        });
    }
    let scenario = Scenario {
        source: n("s".into()),
        candidates: join_order.iter().copied().collect(),
        slots,
        knobs: CostKnobs {
            alpha: params.alpha(),
            beta: 0.0,
            ..CostKnobs::default()
        },
        seed: 0,
        selection: SelectionRule::default(),
        stable_sort: StableSort::default(),
        graph,
    };
    scenario.validate()?;
    Ok(scenario)
}
