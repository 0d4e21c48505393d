#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use sqvd_core::scenario::{robot_2d, Params, Scenario};
use sqvd_core::{RigidPose, Superquadric, WorldBox};

/// Height of the gap centre in [`two_walls`].
pub const GAP_Y: f64 = 0.2;
pub const WALL_X: f64 = 0.25;

/// A boxy wall across the whole world at `WALL_X` with one gap of width `gap`
/// centred at `GAP_Y`.
pub fn two_walls(gap: f64) -> Scenario {
    let world = WorldBox::new_2d([0.0, 0.0], [0.5, 0.4]).unwrap();
    let block =
        |lo: f64, hi: f64| Superquadric::new_2d(0.2, [0.03, (hi - lo) / 2.0], [WALL_X, (lo + hi) / 2.0], 0.0).unwrap();
    let obstacles = vec![block(-0.05, GAP_Y - gap / 2.0), block(GAP_Y + gap / 2.0, 0.45)];
    Scenario::new(
        world,
        robot_2d(),
        obstacles,
        RigidPose::planar(0.08, 0.12, 0.0),
        RigidPose::planar(0.42, 0.28, 0.0),
        Params::default(),
    )
    .unwrap()
}

pub fn sqvd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sqvd"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Bench JSON with every timing field removed.
pub fn without_timings(v: &serde_json::Value) -> serde_json::Value {
    match v {
        serde_json::Value::Object(map) => map
            .iter()
            .filter(|(k, _)| !k.ends_with("_time_s"))
            .map(|(k, x)| (k.clone(), without_timings(x)))
            .collect::<serde_json::Map<_, _>>()
            .into(),
        serde_json::Value::Array(xs) => xs.iter().map(without_timings).collect(),
        other => other.clone(),
    }
}
