//! `sqvd` command line: plan a scenario file, run benchmark suites, or write a
//! demo scenario for editing.

pub mod bench;
pub mod plot;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sqvd_core::pipeline::{self, Plan, Precomputed};
use sqvd_core::scenario::{
    compute_metrics, load_scenario, save_scenario, save_trajectory, write_atomic, Benchmark, MetricsReport, Scenario,
    Timings,
};
use sqvd_core::Dim;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_NO_PATH: i32 = 4;

/// Machine-readable reason written when expansion closes every passage.
pub const NO_PATH_REASON: &str = "no-feasible-passage";

#[derive(Debug, Parser)]
#[command(name = "sqvd", version, about = "Superquadric Voronoi roadmap planner")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Plan one scenario file and write trajectory, metrics and plots.
    Plan(PlanArgs),
    /// Run benchmark suites and print the results table.
    Bench(BenchArgs),
    /// Write a generated benchmark scenario for editing.
    Demo(DemoArgs),
}

#[derive(Debug, clap::Args)]
pub struct PlanArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Write SVG layers (2D) or OBJ plus a top-down SVG (3D).
    #[arg(long)]
    pub plot: bool,
    /// Bridging threshold in metres.
    #[arg(long)]
    pub h: Option<f64>,
    /// Basis functions per degree of freedom.
    #[arg(long)]
    pub dmp_basis: Option<usize>,
    /// Rollout time step in seconds.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Recorded in the metrics; planning itself draws no random numbers.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    #[value(name = "2d")]
    #[serde(rename = "2d")]
    TwoD,
    #[value(name = "3d")]
    #[serde(rename = "3d")]
    ThreeD,
    All,
}

impl Suite {
    pub fn benchmarks(self) -> Vec<Benchmark> {
        Benchmark::ALL
            .into_iter()
            .filter(|b| match self {
                Suite::TwoD => b.dim() == Dim::Two,
                Suite::ThreeD => b.dim() == Dim::Three,
                Suite::All => true,
            })
            .collect()
    }
}

#[derive(Debug, clap::Args)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    pub runs: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Run r of every benchmark uses seed `seed + r`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, clap::Args)]
pub struct DemoArgs {
    #[arg(long)]
    pub name: String,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad input file or option value.
    #[error("{0}")]
    Input(sqvd_core::Error),
    #[error("{NO_PATH_REASON}: every passage between start and goal is narrower than the robot")]
    NoPath,
    #[error(transparent)]
    Internal(sqvd_core::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_VALIDATION,
            CliError::NoPath => EXIT_NO_PATH,
            CliError::Internal(_) | CliError::Io(_) => EXIT_INTERNAL,
        }
    }

    pub fn reason(&self) -> String {
        match self {
            CliError::NoPath => NO_PATH_REASON.to_string(),
            other => other.to_string(),
        }
    }
}

/// Reason string recorded in metrics for a failed run.
pub fn failure_reason(e: sqvd_core::Error) -> String {
    CliError::from(e).reason()
}

impl From<sqvd_core::Error> for CliError {
    fn from(e: sqvd_core::Error) -> Self {
        use sqvd_core::Error as E;
        match e {
            E::NoPath => CliError::NoPath,
            E::Parse(_)
            | E::Validation { .. }
            | E::UnknownBenchmark { .. }
            | E::InvalidShape(_)
            | E::DimensionMismatch { .. } => CliError::Input(e),
            other => CliError::Internal(other),
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Plan(args) => cmd_plan(&args).map(|_| ()),
        Command::Bench(args) => bench::cmd_bench(&args).map(|_| ()),
        Command::Demo(args) => cmd_demo(&args).map(|_| ()),
    }
}

fn create_dir(out: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::from)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())?;
    Ok(())
}

/// Metrics file of `plan`.
#[derive(Debug, Serialize)]
pub struct PlanReport {
    pub scenario: String,
    pub seed: Option<u64>,
    pub bridge_threshold_m: f64,
    pub clusters: usize,
    pub graph_nodes: usize,
    pub graph_edges: usize,
    pub path_nodes: usize,
    #[serde(flatten)]
    pub metrics: MetricsReport,
}

/// Everything one planning run produced, for callers that need more than the files.
pub struct PlanOutcome {
    pub scenario: Scenario,
    pub precomputed: Precomputed,
    pub plan: Plan,
    pub metrics: MetricsReport,
}

fn apply_overrides(scenario: &mut Scenario, args: &PlanArgs) -> Result<(), CliError> {
    if let Some(h) = args.h {
        scenario.params.h = Some(h);
        scenario.params.bridging = true;
    }
    if let Some(p) = args.dmp_basis {
        scenario.params.dmp_basis = p;
    }
    if let Some(dt) = args.dt {
        scenario.params.dt = Some(dt);
    }
    scenario.params.validate().map_err(CliError::Input)
}

pub fn cmd_plan(args: &PlanArgs) -> Result<PlanOutcome, CliError> {
    let mut scenario = load_scenario(&args.scenario).map_err(CliError::Input)?;
    apply_overrides(&mut scenario, args)?;
    create_dir(&args.out)?;
    let label = args.scenario.display().to_string();

    let pre = pipeline::precompute(&scenario)?;
    let plan = match pipeline::query(&pre, &scenario) {
        Ok(plan) => plan,
        Err(e) => {
            let err = CliError::from(e);
            let reason = err.reason();
            let timings = Timings {
                precompute_s: pre.elapsed_s,
                ..Timings::default()
            };
            let report = PlanReport {
                scenario: label,
                seed: args.seed,
                bridge_threshold_m: pre.h,
                clusters: pre.diagram.clusters.len(),
                graph_nodes: pre.graph.nodes.len(),
                graph_edges: pre.graph.edges.len(),
                path_nodes: 0,
                metrics: MetricsReport::failure(&scenario, timings, &reason),
            };
            write_json(&args.out.join("metrics.json"), &report)?;
            return Err(err);
        }
    };

    let metrics = compute_metrics(&plan.trajectory, &scenario, plan.timings, plan.validation.fallback);
    log::info!(
        "{label}: arc {:.4} m, min distance {:.4} m, query {:.4} s",
        metrics.arc_length_m,
        metrics.min_distance_m,
        metrics.planning_time_s
    );
    save_trajectory(&plan.trajectory, &args.out.join("trajectory.csv"))?;
    save_trajectory(&plan.raw, &args.out.join("raw.csv"))?;
    let report = PlanReport {
        scenario: label,
        seed: args.seed,
        bridge_threshold_m: pre.h,
        clusters: pre.diagram.clusters.len(),
        graph_nodes: plan.graph.nodes.len(),
        graph_edges: plan.graph.edges.len(),
        path_nodes: plan.path.nodes.len(),
        metrics: metrics.clone(),
    };
    write_json(&args.out.join("metrics.json"), &report)?;

    let mut debug = pipeline::debug_geometry(&pre.diagram, &plan.graph);
    debug["path"] = serde_json::json!(plan.path.nodes);
    debug["path_length"] = serde_json::json!(plan.path.length);
    debug["waypoints"] = serde_json::json!(plan
        .waypoints
        .iter()
        .map(|w| sqvd_core::smoother::pose_to_dofs(scenario.dim, &w.pose))
        .collect::<Vec<_>>());
    debug["fallback"] = serde_json::json!(plan.validation.fallback);
    write_json(&args.out.join("debug.json"), &debug)?;

    if args.plot {
        let svg = plot::svg(&scenario.obstacles, &scenario.robot, &pre, &plan);
        match scenario.dim {
            Dim::Two => write_atomic(&args.out.join("plan.svg"), svg.as_bytes())?,
            Dim::Three => {
                write_atomic(&args.out.join("top.svg"), svg.as_bytes())?;
                let obj = plot::obj(&scenario.obstacles, &pre, &plan);
                write_atomic(&args.out.join("plan.obj"), obj.as_bytes())?;
            }
        }
    }
    Ok(PlanOutcome {
        scenario,
        precomputed: pre,
        plan,
        metrics,
    })
}

pub fn cmd_demo(args: &DemoArgs) -> Result<PathBuf, CliError> {
    let bench = Benchmark::from_name(&args.name).map_err(CliError::Input)?;
    create_dir(&args.out)?;
    let path = args.out.join(format!("{}.json", bench.name()));
    save_scenario(&bench.generate(args.seed), &path)?;
    println!("{}", path.display());
    Ok(path)
}
