use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use obsta::engine::StableSort;
use obsta::graph::parse_edge_list;
use obsta::oracle::{offline_optimum, OracleBudget};
use obsta::scenario::{
    fig2_fixture, generate_hardness_instance, generate_random_scenario, load_scenario, write_scenario,
    HardnessParams, RandomParams, Scenario,
};
use obsta_harness::{check_bound, compare, run, write_compare, write_run_set, Algo, Overrides, RunSet};

#[derive(Parser)]
#[command(
    name = "obsta",
    version,
    about = "Replay dynamic multicast traces through OBSTA and baselines"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Replay scenarios and write per-slot CSV plus summary.json.
    Run(RunArgs),
    /// Like `run`, then write compare.csv with ratios of the first algorithm
    /// against the others, averaged over seeds.
    Compare(RunArgs),
    /// Write a scenario (header, edge list, trace) to disk.
    #[command(subcommand)]
    Generate(Gen),
    /// Print the offline optimum of a small scenario as JSON.
    Oracle(InputArgs),
    /// Compare OBSTA's total against the budget and |D_max| times the optimum.
    CheckBound(InputArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Scenario header (TOML).
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Trace file; defaults to `<header stem>.trace.jsonl`.
    #[arg(long, requires = "scenario")]
    trace: Option<PathBuf>,
    /// Use the built-in two-slot example instead of a file.
    #[arg(long, conflicts_with = "scenario")]
    fig2: bool,
    #[command(flatten)]
    knobs: KnobArgs,
}

#[derive(Args)]
struct KnobArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Stability threshold H.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    selection_prc_sign: Option<f64>,
    #[arg(long)]
    selection_prc_beta: Option<bool>,
    /// `si` or `rt-distance`.
    #[arg(long, value_parser = parse_sort)]
    stable_sort: Option<StableSort>,
}

fn parse_sort(s: &str) -> Result<StableSort, String> {
    match s {
        "si" => Ok(StableSort::Si),
        "rt-distance" | "rt_distance" => Ok(StableSort::RtDistance),
        _ => Err(format!("unknown stable sort {s:?} (expected si or rt-distance)")),
    }
}

impl KnobArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            alpha: self.alpha,
            beta: self.beta,
            gamma: self.gamma,
            threshold: self.threshold,
            prc_sign: self.selection_prc_sign,
            prc_beta: self.selection_prc_beta,
            stable_sort: self.stable_sort,
        }
    }
}

#[derive(Args)]
struct RandomArgs {
    #[arg(long, default_value_t = 200)]
    nodes: usize,
    #[arg(long, default_value_t = 0.02)]
    density: f64,
    #[arg(long, default_value_t = 30)]
    group: usize,
    #[arg(long, default_value_t = 0.3)]
    churn: f64,
    #[arg(long, default_value_t = 100)]
    slots: usize,
}

impl RandomArgs {
    fn params(&self, seed: u64) -> RandomParams {
        RandomParams {
            nodes: self.nodes,
            edge_density: self.density,
            group_size: self.group,
            churn: self.churn,
            slots: self.slots,
            seed,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Generate synthetic scenarios, one per seed, instead of reading a file.
    #[arg(long, conflicts_with_all = ["scenario", "fig2"])]
    random: bool,
    #[command(flatten)]
    gen: RandomArgs,
    #[arg(long, default_value = "obsta,spt,st")]
    algo: String,
    /// Seeds for `--random`.
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    /// Shorthand for seeds 0..N with `--random`, or N replays of a file.
    #[arg(long)]
    repeat: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Gen {
    Random {
        #[command(flatten)]
        gen: RandomArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "random")]
        stem: String,
    },
    /// Lower-bound instance on a path of `m` nodes (or an edge-list base graph).
    Hardness {
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        p: u32,
        /// Base graph edge list; its nodes replace the path.
        #[arg(long, requires = "start")]
        base: Option<PathBuf>,
        #[arg(long)]
        start: Option<String>,
        /// Comma-separated node order of the joins.
        #[arg(long, value_delimiter = ',')]
        permutation: Option<Vec<String>>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "hardness")]
        stem: String,
    },
    Fig2 {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "fig2")]
        stem: String,
    },
}

fn load(input: &InputArgs) -> Result<Scenario> {
    let mut sc = if input.fig2 {
        fig2_fixture()
    } else if let Some(path) = &input.scenario {
        load_scenario(path, input.trace.as_deref()).with_context(|| format!("loading {}", path.display()))?
    } else {
        bail!("give --scenario <file> or --fig2");
    };
    input.knobs.overrides().apply(&mut sc)?;
    sc.validate()?;
    Ok(sc)
}

fn scenarios(args: &RunArgs) -> Result<Vec<Scenario>> {
    if args.random {
        let mut seeds = args.seeds.clone();
        if seeds.is_empty() {
            seeds = (0..args.repeat.unwrap_or(1)).collect();
        }
        let o = args.input.knobs.overrides();
        return seeds
            .into_iter()
            .map(|seed| {
                let mut sc = generate_random_scenario(&args.gen.params(seed))?;
                o.apply(&mut sc)?;
                Ok(sc)
            })
            .collect();
    }
    if !args.seeds.is_empty() {
        bail!("--seeds needs --random; a scenario file carries its own seed");
    }
    let sc = load(&args.input)?;
    Ok(vec![sc; args.repeat.unwrap_or(1).max(1) as usize])
}

fn replay(args: &RunArgs) -> Result<(Vec<RunSet>, Vec<PathBuf>)> {
    let algos = Algo::parse_list(&args.algo)?;
    let scs = scenarios(args)?;
    let many = scs.len() > 1;
    let mut sets = Vec::new();
    let mut dirs = Vec::new();
    for (i, sc) in scs.iter().enumerate() {
        let set = run(sc, &algos)?;
        let dir = match (many, args.random) {
            (false, _) => args.out.clone(),
            (true, true) => args.out.join(format!("seed-{}", sc.seed)),
            (true, false) => args.out.join(format!("repeat-{i}")),
        };
        write_run_set(&set, &dir)?;
        sets.push(set);
        dirs.push(dir);
    }
    Ok((sets, dirs))
}

fn report_failures(sets: &[RunSet], dirs: &[PathBuf]) -> ExitCode {
    let mut failed = false;
    for (s, d) in sets.iter().zip(dirs) {
        for v in s.violations() {
            failed = true;
            eprintln!(
                "invariant broken: {} slot {}: {} (candidates in {})",
                v.algorithm,
                v.slot,
                v.reason,
                d.join("violations.json").display()
            );
        }
    }
    if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

fn print_totals(sets: &[RunSet]) {
    for s in sets {
        let parts: Vec<String> = s
            .runs
            .iter()
            .map(|r| {
                format!(
                    "{} {:.4} ({:.3} ms/slot)",
                    r.algorithm, r.cumulative_total, r.mean_slot_ms
                )
            })
            .collect();
        println!("seed {}: {}", s.seed, parts.join(", "));
    }
}

fn write_generated(sc: &Scenario, dir: &Path, stem: &str) -> Result<()> {
    let header = write_scenario(sc, dir, stem)?;
    println!("{}", header.display());
    Ok(())
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            let mut msg = String::new();
            for cause in e.chain() {
                let c = cause.to_string();
                if !msg.ends_with(&c) {
                    if !msg.is_empty() {
                        msg.push_str(": ");
                    }
                    msg.push_str(&c);
                }
            }
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Run(args) => {
            let (sets, dirs) = replay(&args)?;
            print_totals(&sets);
            Ok(report_failures(&sets, &dirs))
        }
        Cmd::Compare(args) => {
            let (sets, dirs) = replay(&args)?;
            let rows = compare(&sets)?;
            let path = args.out.join("compare.csv");
            write_compare(&rows, &path)?;
            for r in &rows {
                println!(
                    "{} {}/{}: {:.4} (mean of per-seed ratios {:.4})",
                    r.metric, r.numerator, r.denominator, r.ratio_of_means, r.mean_ratio
                );
            }
            Ok(report_failures(&sets, &dirs))
        }
        Cmd::Generate(g) => {
            match g {
                Gen::Random { gen, seed, out, stem } => {
                    write_generated(&generate_random_scenario(&gen.params(seed))?, &out, &stem)?
                }
                Gen::Hardness {
                    m,
                    p,
                    base,
                    start,
                    permutation,
                    out,
                    stem,
                } => {
                    let mut params = match base {
                        Some(path) => HardnessParams {
                            base: parse_edge_list(
                                &std::fs::read_to_string(&path)
                                    .with_context(|| format!("reading {}", path.display()))?,
                            )?,
                            start: start.unwrap_or_default(),
                            p,
                            permutation: None,
                        },
                        None => HardnessParams::path(m, p),
                    };
                    params.permutation = permutation;
                    write_generated(&generate_hardness_instance(&params)?, &out, &stem)?
                }
                Gen::Fig2 { out, stem } => write_generated(&fig2_fixture(), &out, &stem)?,
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Oracle(input) => {
            let sc = load(&input)?;
            let opt = offline_optimum(&sc, &OracleBudget::default())?;
            let trees: Vec<Vec<(String, String)>> = opt
                .trees
                .iter()
                .map(|t| {
                    t.edges()
                        .edges()
                        .map(|e| {
                            let (a, b) = e.endpoints();
                            (sc.name(a).to_string(), sc.name(b).to_string())
                        })
                        .collect()
                })
                .collect();
            let v = serde_json::json!({ "cost": opt.cost, "per_slot": opt.per_slot, "trees": trees });
            println!("{}", serde_json::to_string_pretty(&v)?);
            Ok(ExitCode::SUCCESS)
        }
        Cmd::CheckBound(input) => {
            let sc = load(&input)?;
            let r = check_bound(&sc, &OracleBudget::default())?;
            println!("{}", serde_json::to_string_pretty(&r)?);
            Ok(if r.holds() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    }
}
