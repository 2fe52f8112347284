//! Trace replay: runs routing policies over scenarios and writes per-slot
//! CSV, summary JSON, comparison tables and bound reports.

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use obsta::baselines::{Baseline, BaselineKind};
use obsta::cost::{SlotLedger, EPS};
use obsta::engine::{Obsta, StableSort};
use obsta::oracle::{offline_optimum, OracleBudget, OracleError};
use obsta::policy::{CandidateSummary, RoutingPolicy, SlotOutcome, StepError};
use obsta::scenario::{Scenario, ScenarioError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("{algorithm}: {source}")]
    Step {
        algorithm: Algo,
        #[source]
        source: StepError,
    },
    #[error("no algorithm selected")]
    NoAlgorithm,
    #[error("comparison needs at least two algorithms")]
    TooFewAlgorithms,
    #[error("run sets disagree: {0}")]
    Mismatch(String),
    #[error("unknown algorithm {0:?} (expected obsta, spt or st)")]
    UnknownAlgo(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Obsta,
    Spt,
    St,
}

impl Algo {
    pub const ALL: [Algo; 3] = [Algo::Obsta, Algo::Spt, Algo::St];

    pub fn tag(self) -> &'static str {
        match self {
            Algo::Obsta => "obsta",
            Algo::Spt => BaselineKind::Spt.tag(),
            Algo::St => BaselineKind::St.tag(),
        }
    }

    /// Parses a comma-separated list such as `obsta,spt,st`.
    pub fn parse_list(s: &str) -> Result<Vec<Algo>, HarnessError> {
        s.split(',')
            .filter(|x| !x.trim().is_empty())
            .map(str::parse)
            .collect()
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Algo {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "obsta" => Ok(Algo::Obsta),
            "spt" => Ok(Algo::Spt),
            "st" => Ok(Algo::St),
            other => Err(HarnessError::UnknownAlgo(other.to_string())),
        }
    }
}

/// Knob and selection overrides applied on top of a scenario header.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Overrides {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub threshold: Option<f64>,
    pub prc_sign: Option<f64>,
    pub prc_beta: Option<bool>,
    pub stable_sort: Option<StableSort>,
}

impl Overrides {
    pub fn apply(&self, sc: &mut Scenario) -> Result<(), HarnessError> {
        let k = &mut sc.knobs;
        k.alpha = self.alpha.unwrap_or(k.alpha);
        k.beta = self.beta.unwrap_or(k.beta);
        k.gamma = self.gamma.unwrap_or(k.gamma);
        k.stability_threshold = self.threshold.unwrap_or(k.stability_threshold);
        k.validate().map_err(ScenarioError::from)?;
        sc.selection.prc_sign = self.prc_sign.unwrap_or(sc.selection.prc_sign);
        sc.selection.prc_beta = self.prc_beta.unwrap_or(sc.selection.prc_beta);
        sc.stable_sort = self.stable_sort.unwrap_or(sc.stable_sort);
        Ok(())
    }
}

/// One CSV row. Columns appear in field order; `wall_time_ms` is not part
/// of the CSV so that repeated runs are byte-identical.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlotReport {
    pub slot: usize,
    pub algorithm: Algo,
    pub tree_cost: f64,
    pub branch_cost: usize,
    pub rerouting_cost: f64,
    pub budget: f64,
    pub budget_sum_form: f64,
    pub deposit: f64,
    pub prc: f64,
    pub total: f64,
    pub cumulative_total: f64,
    #[serde(skip)]
    pub wall_time_ms: f64,
}

pub const CSV_COLUMNS: [&str; 11] = [
    "slot",
    "algorithm",
    "tree_cost",
    "branch_cost",
    "rerouting_cost",
    "budget",
    "budget_sum_form",
    "deposit",
    "prc",
    "total",
    "cumulative_total",
];

impl SlotReport {
    fn new(algorithm: Algo, l: &SlotLedger, cumulative_total: f64, wall_time_ms: f64) -> Self {
        SlotReport {
            slot: l.slot,
            algorithm,
            tree_cost: l.tree_cost,
            branch_cost: l.branch_cost,
            rerouting_cost: l.rerouting_cost,
            budget: l.budget,
            budget_sum_form: l.budget_sum_form,
            deposit: l.deposit,
            prc: l.potential_rc,
            total: l.total,
            cumulative_total,
            wall_time_ms,
        }
    }
}

/// Summed phase times of one run, in milliseconds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct PhaseMillis {
    pub reference_tree: f64,
    pub generation: f64,
    pub patching: f64,
    pub selection: f64,
}

/// The first slot at which an invariant broke, with the candidates that
/// were on the table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub algorithm: Algo,
    pub slot: usize,
    pub reason: String,
    pub ledger: Option<SlotLedger>,
    pub selected: Option<usize>,
    pub candidates: Vec<CandidateSummary>,
}

/// Invariant flags of one run. `feasible`: every deployed tree spans exactly
/// the slot's group. `deposit`: `dep >= beta * prc` at every slot.
/// `budget`: prefix sums of the budget dominate prefix sums of the total.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Invariants {
    pub feasible: bool,
    pub deposit: bool,
    pub budget: bool,
}

impl Invariants {
    pub fn all(&self) -> bool {
        self.feasible && self.deposit && self.budget
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlgoRun {
    pub algorithm: Algo,
    #[serde(skip)]
    pub rows: Vec<SlotReport>,
    pub cumulative_total: f64,
    pub cumulative_tree_cost: f64,
    pub cumulative_branch_cost: f64,
    pub cumulative_rerouting_cost: f64,
    pub cumulative_budget: f64,
    pub cumulative_budget_sum_form: f64,
    pub invariants: Invariants,
    /// Whether a broken invariant fails the run; only the online algorithm
    /// makes guarantees.
    pub enforced: bool,
    pub wall_time_ms: f64,
    pub mean_slot_ms: f64,
    pub phases_ms: PhaseMillis,
    pub slot_wall_ms: Vec<f64>,
    #[serde(skip)]
    pub violation: Option<Violation>,
}

impl AlgoRun {
    pub fn failed(&self) -> bool {
        self.enforced && !self.invariants.all()
    }

    pub fn metric(&self, m: Metric) -> f64 {
        match m {
            Metric::Total => self.cumulative_total,
            Metric::TreeCost => self.cumulative_tree_cost,
            Metric::BranchCost => self.cumulative_branch_cost,
            Metric::ReroutingCost => self.cumulative_rerouting_cost,
        }
    }
}

fn build_policy<'g>(algo: Algo, sc: &'g Scenario) -> Result<Box<dyn RoutingPolicy + 'g>, StepError> {
    Ok(match algo {
        Algo::Obsta => Box::new(Obsta::new(
            &sc.graph,
            sc.source,
            &sc.candidates,
            sc.obsta_config(),
        )?),
        Algo::Spt => Box::new(Baseline::new(
            BaselineKind::Spt,
            &sc.graph,
            sc.source,
            &sc.candidates,
            sc.knobs,
        )?),
        Algo::St => Box::new(Baseline::new(
            BaselineKind::St,
            &sc.graph,
            sc.source,
            &sc.candidates,
            sc.knobs,
        )?),
    })
}

/// Replays `sc` with one algorithm. Invariant breaches are recorded, not
/// returned as errors; a slot where the online algorithm discards every
/// candidate counts as a feasibility breach and ends the run.
pub fn run_algorithm(sc: &Scenario, algo: Algo) -> Result<AlgoRun, HarnessError> {
    let step_err = |source| HarnessError::Step {
        algorithm: algo,
        source,
    };
    let mut policy = build_policy(algo, sc).map_err(step_err)?;
    let expected = sc.destination_sets();
    let beta = sc.knobs.beta;
    let mut run = AlgoRun {
        algorithm: algo,
        rows: Vec::with_capacity(sc.slots.len()),
        cumulative_total: 0.0,
        cumulative_tree_cost: 0.0,
        cumulative_branch_cost: 0.0,
        cumulative_rerouting_cost: 0.0,
        cumulative_budget: 0.0,
        cumulative_budget_sum_form: 0.0,
        invariants: Invariants {
            feasible: true,
            deposit: true,
            budget: true,
        },
        enforced: algo == Algo::Obsta,
        wall_time_ms: 0.0,
        mean_slot_ms: 0.0,
        phases_ms: PhaseMillis::default(),
        slot_wall_ms: Vec::with_capacity(sc.slots.len()),
        violation: None,
    };
    let ms = |d: std::time::Duration| d.as_secs_f64() * 1e3;
    for (ev, want) in sc.slots.iter().zip(&expected) {
        let t = Instant::now();
        let res = policy.step(&ev.joins, &ev.leaves);
        let wall = ms(t.elapsed());
        let out: SlotOutcome = match res {
            Ok(o) => o,
            Err(StepError::AllDiscarded { slot, candidates }) => {
                run.invariants.feasible = false;
                run.violation.get_or_insert(Violation {
                    algorithm: algo,
                    slot,
                    reason: "every candidate was discarded".into(),
                    ledger: None,
                    selected: None,
                    candidates,
                });
                break;
            }
            Err(e) => return Err(step_err(e)),
        };
        let l = out.ledger;
        run.wall_time_ms += wall;
        run.slot_wall_ms.push(wall);
        if let Some(p) = out.phases {
            run.phases_ms.reference_tree += ms(p.reference_tree);
            run.phases_ms.generation += ms(p.generation);
            run.phases_ms.patching += ms(p.patching);
            run.phases_ms.selection += ms(p.selection);
        }
        run.cumulative_total += l.total;
        run.cumulative_tree_cost += l.tree_cost;
        run.cumulative_branch_cost += l.branch_cost as f64;
        run.cumulative_rerouting_cost += l.rerouting_cost;
        run.cumulative_budget += l.budget;
        run.cumulative_budget_sum_form += l.budget_sum_form;

        let tree = policy.tree();
        let mut reasons = Vec::new();
        if tree.validate().is_err() || tree.destinations() != want || !tree.is_pruned() {
            run.invariants.feasible = false;
            reasons.push("deployed tree does not span exactly the group");
        }
        if l.deposit < beta * l.potential_rc - EPS {
            run.invariants.deposit = false;
            reasons.push("deposit below beta * prc");
        }
        if run.cumulative_budget < run.cumulative_total - EPS {
            run.invariants.budget = false;
            reasons.push("cumulative budget below cumulative total");
        }
        if !reasons.is_empty() && run.violation.is_none() {
            run.violation = Some(Violation {
                algorithm: algo,
                slot: l.slot,
                reason: reasons.join("; "),
                ledger: Some(l),
                selected: out.selected,
                candidates: out.candidates,
            });
        }
        run.rows
            .push(SlotReport::new(algo, &l, run.cumulative_total, wall));
    }
    if !run.slot_wall_ms.is_empty() {
        run.mean_slot_ms = run.wall_time_ms / run.slot_wall_ms.len() as f64;
    }
    Ok(run)
}

/// All algorithms replayed over one scenario.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSet {
    pub seed: u64,
    pub slots: usize,
    pub d_max: usize,
    pub runs: Vec<AlgoRun>,
}

impl RunSet {
    pub fn failed(&self) -> bool {
        self.runs.iter().any(AlgoRun::failed)
    }

    pub fn get(&self, algo: Algo) -> Option<&AlgoRun> {
        self.runs.iter().find(|r| r.algorithm == algo)
    }

    pub fn violations(&self) -> Vec<&Violation> {
        self.runs
            .iter()
            .filter(|r| r.failed())
            .filter_map(|r| r.violation.as_ref())
            .collect()
    }
}

pub fn run(sc: &Scenario, algos: &[Algo]) -> Result<RunSet, HarnessError> {
    if algos.is_empty() {
        return Err(HarnessError::NoAlgorithm);
    }
    Ok(RunSet {
        seed: sc.seed,
        slots: sc.slots.len(),
        d_max: sc.d_max(),
        runs: algos
            .iter()
            .map(|&a| run_algorithm(sc, a))
            .collect::<Result<_, _>>()?,
    })
}

/// Per-slot CSV bytes for one run, header included.
pub fn csv_bytes(rows: &[SlotReport]) -> Result<Vec<u8>, HarnessError> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(CSV_COLUMNS)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner()
        .map_err(|e| csv::Error::from(e.into_error()).into())
}

/// Reads rows written by [`csv_bytes`].
pub fn read_csv(path: &Path) -> Result<Vec<SlotReport>, HarnessError> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize()
        .map(|row| row.map_err(HarnessError::from))
        .collect()
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    fs::write(path, bytes).map_err(io_err(path))
}

/// Writes `<algo>.csv` per run and `summary.json` into `dir`, plus
/// `violations.json` when an enforced invariant broke.
pub fn write_run_set(set: &RunSet, dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    for r in &set.runs {
        write_file(&dir.join(format!("{}.csv", r.algorithm)), &csv_bytes(&r.rows)?)?;
    }
    write_file(&dir.join("summary.json"), &serde_json::to_vec_pretty(set)?)?;
    let v = set.violations();
    if !v.is_empty() {
        write_file(&dir.join("violations.json"), &serde_json::to_vec_pretty(&v)?)?;
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Total,
    TreeCost,
    BranchCost,
    ReroutingCost,
}

impl Metric {
    pub const ALL: [Metric; 4] = [
        Metric::Total,
        Metric::TreeCost,
        Metric::BranchCost,
        Metric::ReroutingCost,
    ];
}

/// `a / b`, with `0 / 0 = 1`.
pub fn ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        if a == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        a / b
    }
}

/// One line of `compare.csv`: the first algorithm against another one on
/// one cumulative metric, over all seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub metric: String,
    pub numerator: Algo,
    pub denominator: Algo,
    pub seeds: usize,
    pub numerator_mean: f64,
    pub denominator_mean: f64,
    /// `numerator_mean / denominator_mean`.
    pub ratio_of_means: f64,
    /// Per-seed ratios, averaged.
    pub mean_ratio: f64,
}

/// Compares the first algorithm of every run set against each of the others.
pub fn compare(sets: &[RunSet]) -> Result<Vec<CompareRow>, HarnessError> {
    let Some(first) = sets.first() else {
        return Err(HarnessError::Mismatch("no run sets".into()));
    };
    let algos: Vec<Algo> = first.runs.iter().map(|r| r.algorithm).collect();
    if algos.len() < 2 {
        return Err(HarnessError::TooFewAlgorithms);
    }
    for s in sets {
        let a: Vec<Algo> = s.runs.iter().map(|r| r.algorithm).collect();
        if a != algos {
            return Err(HarnessError::Mismatch(format!("algorithms {a:?} vs {algos:?}")));
        }
        if s.slots != first.slots {
            return Err(HarnessError::Mismatch(format!(
                "seed {} has {} slots, seed {} has {}",
                s.seed, s.slots, first.seed, first.slots
            )));
        }
    }
    let n = sets.len() as f64;
    let mut rows = Vec::new();
    for m in Metric::ALL {
        for j in 1..algos.len() {
            let num: Vec<f64> = sets.iter().map(|s| s.runs[0].metric(m)).collect();
            let den: Vec<f64> = sets.iter().map(|s| s.runs[j].metric(m)).collect();
            let (nm, dm) = (num.iter().sum::<f64>() / n, den.iter().sum::<f64>() / n);
            rows.push(CompareRow {
                metric: serde_json::to_value(m)?.as_str().unwrap_or_default().to_string(),
                numerator: algos[0],
                denominator: algos[j],
                seeds: sets.len(),
                numerator_mean: nm,
                denominator_mean: dm,
                ratio_of_means: ratio(nm, dm),
                mean_ratio: num.iter().zip(&den).map(|(&a, &b)| ratio(a, b)).sum::<f64>() / n,
            });
        }
    }
    Ok(rows)
}

pub fn write_compare(rows: &[CompareRow], path: &Path) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    write_file(path, &bytes)
}

/// Online cost against the offline optimum for a scenario small enough for
/// the exhaustive oracle.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub obsta_total: f64,
    /// Sum of the incremental budgets, which the online total never exceeds.
    pub budget: f64,
    /// Sum of the budgets in `sum(dist) + alpha * |D|` form.
    pub budget_sum_form: f64,
    pub optimum: f64,
    pub d_max: usize,
    /// `obsta_total <= budget`.
    pub obsta_within_budget: bool,
    /// `budget_sum_form <= d_max * optimum`.
    pub budget_within_bound: bool,
    /// `obsta_total <= d_max * optimum`. Fails whenever `d_max = 0`, since
    /// the bare source is still charged one branch node per slot.
    pub obsta_within_bound: bool,
}

impl BoundReport {
    /// The budget chain: the first two flags.
    pub fn holds(&self) -> bool {
        self.obsta_within_budget && self.budget_within_bound
    }
}

pub fn check_bound(sc: &Scenario, budget: &OracleBudget) -> Result<BoundReport, HarnessError> {
    let opt = offline_optimum(sc, budget)?;
    let r = run_algorithm(sc, Algo::Obsta)?;
    let bound = sc.d_max() as f64 * opt.cost;
    Ok(BoundReport {
        obsta_total: r.cumulative_total,
        budget: r.cumulative_budget,
        budget_sum_form: r.cumulative_budget_sum_form,
        optimum: opt.cost,
        d_max: sc.d_max(),
        obsta_within_budget: r.cumulative_total <= r.cumulative_budget + EPS,
        budget_within_bound: r.cumulative_budget_sum_form <= bound + EPS,
        obsta_within_bound: r.cumulative_total <= bound + EPS,
    })
}
