//! End-to-end planning: expand, cluster, diagram, graph, search, poses, smoothing.
//!
//! Work that depends only on the obstacles (closest pairs, clusters, cells and
//! the roadmap) is the precompute phase; everything that depends on the start
//! and goal is the query phase. The two are timed separately.

use std::time::Instant;

use serde_json::{json, Value};

use crate::error::Result;
use crate::pose_planner::{plan_poses, PoseWaypoint};
use crate::roadmap::{build_graph, project_terminal, shortest_path, GraphPath, Projection, RoadmapGraph};
use crate::scenario::{Scenario, Timings};
use crate::smoother::{
    fit_lwr, interpolate_waypoints, rollout, validate_and_finalize, Demonstration, PoseTrajectory, Validation,
};
use crate::voronoi::{build_diagram, Diagram};

#[derive(Clone, Debug)]
pub struct Precomputed {
    pub diagram: Diagram,
    pub graph: RoadmapGraph,
    pub h: f64,
    pub elapsed_s: f64,
}

pub fn precompute(scenario: &Scenario) -> Result<Precomputed> {
    let t0 = Instant::now();
    let diagram = build_diagram(
        &scenario.robot,
        &scenario.obstacles,
        &scenario.world,
        &scenario.params.proximity(),
    )?;
    let h = scenario.bridge_threshold();
    let graph = build_graph(&diagram, h);
    log::debug!(
        "roadmap: {} nodes, {} edges (h = {h:.4})",
        graph.nodes.len(),
        graph.edges.len()
    );
    Ok(Precomputed {
        diagram,
        graph,
        h,
        elapsed_s: t0.elapsed().as_secs_f64(),
    })
}

#[derive(Clone, Debug)]
pub struct Plan {
    /// Roadmap with the start and goal attached.
    pub graph: RoadmapGraph,
    pub start: Projection,
    pub goal: Projection,
    pub path: GraphPath,
    pub waypoints: Vec<PoseWaypoint>,
    pub raw: Demonstration,
    /// DMP rollout before validation.
    pub smoothed: PoseTrajectory,
    /// Trajectory that passed validation (smoothed, or raw on fallback).
    pub trajectory: PoseTrajectory,
    pub validation: Validation,
    pub timings: Timings,
}

/// Demo sample count and rollout step for a trajectory of `duration` seconds.
fn time_grid(scenario: &Scenario, duration: f64) -> (usize, f64) {
    match scenario.params.dt {
        Some(dt) => {
            let steps = (duration / dt).ceil().clamp(10.0, 1e6) as usize;
            (steps + 1, dt)
        }
        None => {
            let n = scenario.params.demo_samples;
            (n, duration / (n - 1) as f64)
        }
    }
}

pub fn query(pre: &Precomputed, scenario: &Scenario) -> Result<Plan> {
    let t0 = Instant::now();
    let mut graph = pre.graph.clone();
    let start = project_terminal(&scenario.start.translation, &mut graph)?;
    let goal = project_terminal(&scenario.goal.translation, &mut graph)?;
    let path = shortest_path(&graph, start.terminal, goal.terminal)?;
    let waypoints = plan_poses(&path.nodes, &graph, &pre.diagram)?;

    let dim = scenario.dim;
    let length: f64 = waypoints
        .windows(2)
        .map(|w| (w[1].pose.translation - w[0].pose.translation).norm())
        .sum();
    let (n, dt) = time_grid(scenario, length);
    let raw = interpolate_waypoints(dim, &waypoints, n)?;
    let model = fit_lwr(&raw, scenario.params.dmp_basis)?;
    let smoothed = rollout(&model, dt);
    let query_s = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let (trajectory, validation) = validate_and_finalize(
        smoothed.clone(),
        &raw,
        &scenario.robot,
        &scenario.obstacles,
        waypoints.len(),
        &scenario.params.proximity(),
    )?;
    let validation_s = t1.elapsed().as_secs_f64();

    Ok(Plan {
        graph,
        start,
        goal,
        path,
        waypoints,
        raw,
        smoothed,
        trajectory,
        validation,
        timings: Timings {
            precompute_s: pre.elapsed_s,
            query_s,
            validation_s,
        },
    })
}

pub fn plan(scenario: &Scenario) -> Result<(Precomputed, Plan)> {
    let pre = precompute(scenario)?;
    let plan = query(&pre, scenario)?;
    Ok((pre, plan))
}

fn coords(p: &crate::Point, n: usize) -> Vec<f64> {
    p.iter().take(n).copied().collect()
}

/// Diagram and roadmap as one JSON document for inspection.
pub fn debug_geometry(diagram: &Diagram, graph: &RoadmapGraph) -> Value {
    let n = diagram.world.dim.n();
    let clusters: Vec<Value> = diagram
        .clusters
        .iter()
        .map(|c| json!({ "id": c.id, "members": c.members }))
        .collect();
    let planes: Vec<Value> = diagram
        .hyperplanes
        .iter()
        .map(|h| {
            json!({
                "id": h.id,
                "normal": coords(&h.normal, n),
                "offset": h.offset,
                "clusters": [h.clusters.0, h.clusters.1],
                "witnesses": [coords(&h.witnesses.0, n), coords(&h.witnesses.1, n)],
                "distance": h.distance,
            })
        })
        .collect();
    let cells: Vec<Value> = diagram
        .cells
        .iter()
        .map(|c| {
            json!({
                "cluster": c.cluster_id,
                "vertices": c.vertices.iter().map(|v| coords(v, n)).collect::<Vec<_>>(),
                "edges": c.edges,
                "faces": c.faces,
                "planes": c.planes,
            })
        })
        .collect();
    let nodes: Vec<Value> = graph
        .nodes
        .iter()
        .map(|v| json!({ "position": coords(&v.position, n), "kind": v.kind }))
        .collect();
    let edges: Vec<Value> = graph
        .edges
        .iter()
        .map(|e| {
            let kind = match &e.kind {
                crate::roadmap::EdgeKind::Cell { .. } => "cell",
                crate::roadmap::EdgeKind::Bridge => "bridge",
                crate::roadmap::EdgeKind::Stub => "stub",
            };
            json!({ "a": e.a, "b": e.b, "weight": e.weight, "kind": kind, "planes": e.kind.plane_ids() })
        })
        .collect();
    json!({
        "dim": n,
        "world": { "min": coords(&diagram.world.min, n), "max": coords(&diagram.world.max, n) },
        "margin": diagram.margin,
        "expanded": diagram.expanded.iter().map(|s| json!({
            "eps": s.eps(), "axes": s.axes(), "position": coords(&s.center(), n),
        })).collect::<Vec<_>>(),
        "clusters": clusters,
        "hyperplanes": planes,
        "cells": cells,
        "graph": { "nodes": nodes, "edges": edges },
    })
}
