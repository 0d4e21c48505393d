//! Benchmark suites: repeated runs per scene with seeded starts and goals, a
//! metrics-by-scene table and a results JSON.

use std::fmt::Write;

use serde::{Deserialize, Serialize};
use sqvd_core::pipeline;
use sqvd_core::scenario::{compute_metrics, write_atomic, Benchmark, MetricsReport, Timings};

use crate::{create_dir, failure_reason, write_json, BenchArgs, CliError, Suite};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub seed: u64,
    #[serde(flatten)]
    pub metrics: MetricsReport,
}

/// Means over the successful runs; `None` when every run failed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub successes: usize,
    pub fallbacks: usize,
    pub mean_planning_time_s: Option<f64>,
    pub mean_precompute_time_s: Option<f64>,
    pub mean_arc_length_m: Option<f64>,
    pub mean_min_distance_m: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneResult {
    pub name: String,
    pub dim: usize,
    pub runs: Vec<RunResult>,
    pub summary: Summary,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub suite: Suite,
    pub runs: u64,
    pub seed: u64,
    pub scenes: Vec<SceneResult>,
}

pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

pub fn summarize(runs: &[RunResult]) -> Summary {
    let ok: Vec<&MetricsReport> = runs.iter().map(|r| &r.metrics).filter(|m| m.success).collect();
    let pick = |f: fn(&MetricsReport) -> f64| mean(&ok.iter().map(|m| f(m)).collect::<Vec<_>>());
    Summary {
        successes: ok.len(),
        fallbacks: ok.iter().filter(|m| m.fallback).count(),
        mean_planning_time_s: pick(|m| m.planning_time_s),
        mean_precompute_time_s: pick(|m| m.precompute_time_s),
        mean_arc_length_m: pick(|m| m.arc_length_m),
        mean_min_distance_m: pick(|m| m.min_distance_m),
    }
}

/// Plans one generated scene; failures become a failed metrics record.
pub fn run_once(bench: Benchmark, seed: u64) -> RunResult {
    let scenario = bench.generate(seed);
    let metrics = match pipeline::precompute(&scenario) {
        Err(e) => MetricsReport::failure(&scenario, Timings::default(), &failure_reason(e)),
        Ok(pre) => match pipeline::query(&pre, &scenario) {
            Ok(plan) => compute_metrics(&plan.trajectory, &scenario, plan.timings, plan.validation.fallback),
            Err(e) => {
                let timings = Timings {
                    precompute_s: pre.elapsed_s,
                    ..Timings::default()
                };
                MetricsReport::failure(&scenario, timings, &failure_reason(e))
            }
        },
    };
    if let Some(reason) = &metrics.reason {
        log::warn!("{} seed {seed}: {reason}", bench.name());
    }
    RunResult { seed, metrics }
}

fn cell(value: Option<f64>, scale: f64, digits: usize) -> String {
    value.map_or_else(|| "-".to_string(), |v| format!("{:.*}", digits, v * scale))
}

/// One table per dimension, metrics down the side and scenes across.
pub fn table(scenes: &[SceneResult]) -> String {
    let mut out = String::new();
    for dim in [2, 3] {
        let group: Vec<&SceneResult> = scenes.iter().filter(|s| s.dim == dim).collect();
        if group.is_empty() {
            continue;
        }
        let (unit, scale, digits) = if dim == 2 { ("mm", 1e3, 1) } else { ("m", 1.0, 3) };
        let labels = [
            "success".to_string(),
            "planning time (s)".to_string(),
            "precompute (s)".to_string(),
            "arc length (m)".to_string(),
            format!("min-distance ({unit})"),
        ];
        let columns: Vec<[String; 5]> = group
            .iter()
            .map(|s| {
                let m = &s.summary;
                [
                    format!("{}/{}", m.successes, s.runs.len()),
                    cell(m.mean_planning_time_s, 1.0, 4),
                    cell(m.mean_precompute_time_s, 1.0, 4),
                    cell(m.mean_arc_length_m, 1.0, 3),
                    cell(m.mean_min_distance_m, scale, digits),
                ]
            })
            .collect();
        let _ = writeln!(out, "{dim}D benchmark");
        let _ = write!(out, "{:<20}", "metric");
        for s in &group {
            let _ = write!(out, "{:>14}", s.name);
        }
        out.push('\n');
        for (row, label) in labels.iter().enumerate() {
            let _ = write!(out, "{label:<20}");
            for c in &columns {
                let _ = write!(out, "{:>14}", c[row]);
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

pub fn cmd_bench(args: &BenchArgs) -> Result<BenchReport, CliError> {
    create_dir(&args.out)?;
    let mut scenes = Vec::new();
    for bench in args.suite.benchmarks() {
        let runs: Vec<RunResult> = (0..args.runs).map(|r| run_once(bench, args.seed + r)).collect();
        let summary = summarize(&runs);
        scenes.push(SceneResult {
            name: bench.name().to_string(),
            dim: bench.dim().n(),
            runs,
            summary,
        });
    }
    let report = BenchReport {
        suite: args.suite,
        runs: args.runs,
        seed: args.seed,
        scenes,
    };
    let text = table(&report.scenes);
    print!("{text}");
    write_atomic(&args.out.join("table.txt"), text.as_bytes())?;
    write_json(&args.out.join("bench.json"), &report)?;
    Ok(report)
}
