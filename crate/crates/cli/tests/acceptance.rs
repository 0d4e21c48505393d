//! One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

mod common;
#[path = "../../core/tests/common/mod.rs"]
mod oracle;

use std::f64::consts::PI;
use std::time::Instant;

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sqvd_core::pipeline::{self, Plan, Precomputed};
use sqvd_core::pose_planner::{frame_3d, robot_at};
use sqvd_core::proximity::{closest_pair, ProximityOptions};
use sqvd_core::scenario::{compute_metrics, Benchmark, Scenario};
use sqvd_core::smoother::{fit_lwr, rollout, DmpModel, PoseTrajectory};
use sqvd_core::so3::{exp, log};
use sqvd_core::voronoi::build_diagram;
use sqvd_core::{Dim, Error, Point, Superquadric, WorldBox};

use common::*;

type Outcome = (bool, String);
type Check = (&'static str, fn() -> Outcome);

fn plan(scn: &Scenario) -> (Precomputed, Plan) {
    pipeline::plan(scn).unwrap_or_else(|e| panic!("planning failed: {e}"))
}

/// Coordinates of the first point where the trajectory crosses `x = plane`.
fn crossing(t: &PoseTrajectory, plane: f64) -> Option<Point> {
    (1..t.len()).find_map(|k| {
        let (a, b) = (t.position(k - 1), t.position(k));
        if (a.x - plane) * (b.x - plane) > 0.0 || a.x == b.x {
            return None;
        }
        let s = (plane - a.x) / (b.x - a.x);
        Some(a + (b - a) * s)
    })
}

fn passability() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    let half = 0.02;
    for (gap, open) in [(2.0 * half + 0.004, true), (2.0 * half - 0.004, false)] {
        let scn = two_walls(gap);
        let t0 = Instant::now();
        let result = pipeline::plan(&scn);
        let secs = t0.elapsed().as_secs_f64();
        let through = match &result {
            Ok((_, p)) => crossing(&p.trajectory, WALL_X).is_some_and(|c| (c.y - GAP_Y).abs() < gap / 2.0),
            Err(Error::NoPath) => false,
            Err(e) => panic!("gap {gap}: {e}"),
        };
        let verdict = match &result {
            Ok(_) if through => "through the gap",
            Ok(_) => "detour",
            Err(_) => "no-feasible-passage",
        };
        ok &= through == open && secs < 1.0;
        notes.push(format!("g = {:.0} mm: {verdict} in {secs:.3} s", gap * 1e3));
    }
    (ok, notes.join("; "))
}

fn clearance() -> Outcome {
    let mut worst = f64::INFINITY;
    let mut notes = Vec::new();
    for b in [Benchmark::Narrow2d, Benchmark::TBlock, Benchmark::UBlock] {
        let mut scene = f64::INFINITY;
        for seed in 0..3 {
            let scn = b.generate(seed);
            let (_, p) = plan(&scn);
            let m = compute_metrics(&p.trajectory, &scn, p.timings, p.validation.fallback);
            scene = scene.min(m.min_distance_m);
        }
        worst = worst.min(scene);
        notes.push(format!("{} {:.1} mm", b.name(), scene * 1e3));
    }
    (worst > 0.010, format!("min over seeds 0-2: {}", notes.join(", ")))
}

fn timing() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for b in Benchmark::ALL {
        let bound = if b.dim() == Dim::Two { 0.5 } else { 2.0 };
        let mut slowest: f64 = 0.0;
        for seed in 0..3 {
            let (_, p) = plan(&b.generate(seed));
            slowest = slowest.max(p.timings.query_s);
        }
        ok &= slowest <= bound;
        notes.push(format!("{} {slowest:.3} s", b.name()));
    }
    (ok, format!("slowest query over seeds 0-2: {}", notes.join(", ")))
}

fn trap() -> Outcome {
    let mut ok = true;
    let mut deepest = f64::INFINITY;
    for seed in 0..3 {
        let scn = Benchmark::UBlock.generate(seed);
        let (pre, p) = plan(&scn);
        let d = &pre.diagram;
        let trap = Benchmark::UBlock.trap_members();
        let ids: Vec<usize> = (0..trap).map(|m| d.cluster_of[m]).collect();
        let one_cluster = ids.iter().all(|&c| c == ids[0]) && d.clusters[ids[0]].members.len() == trap;
        let t = &p.trajectory;
        let inside = (0..t.len())
            .flat_map(|k| d.expanded.iter().map(move |o| o.inside_outside(&t.position(k))))
            .fold(f64::INFINITY, f64::min);
        deepest = deepest.min(inside);
        ok &= one_cluster && inside > 0.0;
    }
    (
        ok,
        format!("trap is one cluster; min inside-outside along the path {deepest:.3e}"),
    )
}

fn pillars() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for seed in 0..3 {
        let scn = Benchmark::Pillars3d.generate(seed);
        let mut spans: Vec<(f64, f64)> = scn
            .obstacles
            .iter()
            .map(|o| (o.center().y - o.axes()[1], o.center().y + o.axes()[1]))
            .collect();
        spans.sort_by(|a, b| a.0.total_cmp(&b.0));
        let gap = spans
            .windows(2)
            .map(|w| (w[0].1, w[1].0))
            .find(|(lo, hi)| hi - lo > 2.0 * scn.robot.min_axis())
            .unwrap();
        let plane = scn.obstacles[0].center().x;
        let (_, p) = plan(&scn);
        let t = &p.trajectory;
        let through = crossing(t, plane).is_some_and(|c| c.y > gap.0 && c.y < gap.1);
        let mut nearest: Vec<usize> = (0..t.len()).collect();
        nearest.sort_by(|&a, &b| {
            (t.position(a).x - plane)
                .abs()
                .total_cmp(&(t.position(b).x - plane).abs())
        });
        let worst = nearest[..3]
            .iter()
            .map(|&k| {
                let body = robot_at(&scn.robot, &t.pose(k));
                let axis = body.rotation_matrix().column(body.shortest_axis_index()).into_owned();
                axis.dot(&Vector3::y()).abs().min(1.0).acos().to_degrees()
            })
            .fold(0.0, f64::max);
        ok &= through && worst <= 5.0;
        notes.push(format!(
            "seed {seed}: {} gap, {worst:.2} deg",
            if through { "through" } else { "missed" }
        ));
    }
    (ok, notes.join("; "))
}

fn point_sites() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let world = WorldBox::new_2d([0.0, 0.0], [10.0, 10.0]).unwrap();
    let robot = Superquadric::new_2d(1.0, [1e-3, 1e-3], [0.0, 0.0], 0.0).unwrap();
    let mut worst: f64 = 1.0;
    for _ in 0..5 {
        let sites: Vec<Point> = (0..5)
            .map(|_| Point::new(rng.gen_range(0.5..9.5), rng.gen_range(0.5..9.5), 0.0))
            .collect();
        let obstacles: Vec<Superquadric> = sites
            .iter()
            .map(|s| Superquadric::new_2d(1.0, [1e-3, 1e-3], [s.x, s.y], 0.0).unwrap())
            .collect();
        let d = build_diagram(&robot, &obstacles, &world, &ProximityOptions::default()).unwrap();
        let mut agree = 0;
        for gx in 0..200 {
            for gy in 0..200 {
                let p = Point::new((gx as f64 + 0.5) * 0.05, (gy as f64 + 0.5) * 0.05, 0.0);
                let nearest = (0..5)
                    .min_by(|&a, &b| (p - sites[a]).norm().total_cmp(&(p - sites[b]).norm()))
                    .unwrap();
                let cell = &d.cells[d.cluster_of[nearest]];
                if cell.contains(&d.cell_halfspaces(cell), &d.world, &p, 1e-9) {
                    agree += 1;
                }
            }
        }
        worst = worst.min(agree as f64 / 40_000.0);
    }
    (
        worst >= 0.995,
        format!("worst agreement over 5 scenes {:.2}%", worst * 100.0),
    )
}

fn disjoint_pairs(dim: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<(Superquadric, Superquadric)> {
    let mut out = Vec::new();
    while out.len() < count {
        let (a, b, n) = if dim == 2 {
            (
                oracle::random_2d(rng, (0.3, 1.8), 3.0),
                oracle::random_2d(rng, (0.3, 1.8), 3.0),
                10_000,
            )
        } else {
            (
                oracle::random_3d(rng, (0.3, 1.8), 3.0),
                oracle::random_3d(rng, (0.3, 1.8), 3.0),
                100,
            )
        };
        let (sa, sb) = (oracle::sample_surface(&a, n), oracle::sample_surface(&b, n));
        if oracle::disjoint_by_samples(&a, &sa, &b, &sb) {
            out.push((a, b));
        }
    }
    out
}

fn proximity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut pairs: Vec<(usize, Superquadric, Superquadric)> = disjoint_pairs(2, 100, &mut rng)
        .into_iter()
        .map(|(a, b)| (2, a, b))
        .collect();
    pairs.extend(disjoint_pairs(3, 50, &mut rng).into_iter().map(|(a, b)| (3, a, b)));
    let worst_rel = pairs
        .par_iter()
        .map(|(dim, a, b)| {
            let truth = oracle::sampled_distance(a, b, if *dim == 2 { 1 } else { 3 });
            (closest_pair(a, b).distance - truth).abs() / truth
        })
        .reduce(|| 0.0, f64::max);

    let mut worst_sphere: f64 = 0.0;
    for _ in 0..100 {
        let r = [rng.gen_range(0.2..2.0), rng.gen_range(0.2..2.0)];
        let c: Vec<Vector3<f64>> = (0..2)
            .map(|_| {
                Vector3::new(
                    rng.gen_range(-6.0..6.0),
                    rng.gen_range(-6.0..6.0),
                    rng.gen_range(-6.0..6.0),
                )
            })
            .collect();
        let spatial = (c[1] - c[0]).norm() - r[0] - r[1];
        if spatial > 0.01 {
            let s = |i: usize| Superquadric::new_3d([1.0, 1.0], [r[i]; 3], c[i].into(), [0.0; 3]).unwrap();
            worst_sphere = worst_sphere.max((closest_pair(&s(0), &s(1)).distance - spatial).abs());
        }
        let planar = (c[1].xy() - c[0].xy()).norm() - r[0] - r[1];
        if planar > 0.01 {
            let s = |i: usize| Superquadric::new_2d(1.0, [r[i]; 2], [c[i].x, c[i].y], 0.0).unwrap();
            worst_sphere = worst_sphere.max((closest_pair(&s(0), &s(1)).distance - planar).abs());
        }
    }
    (
        worst_rel <= 1e-3 && worst_sphere <= 1e-9,
        format!("150 pairs worst relative error {worst_rel:.2e}; spheres and circles worst {worst_sphere:.2e}"),
    )
}

fn unit(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        if v.norm() > 0.1 && v.norm() <= 1.0 {
            return v.normalize();
        }
    }
}

fn rotations() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut roundtrip: f64 = 0.0;
    for k in 0..10_000 {
        let angle = match k % 3 {
            0 => rng.gen_range(0.0..PI),
            1 => rng.gen_range(0.0..1e-6),
            _ => PI - rng.gen_range(0.0..1e-6),
        };
        let r = exp(&(unit(&mut rng) * angle));
        roundtrip = roundtrip.max((exp(&log(&r).unwrap()) - r).abs().max());
    }
    let mut frame: f64 = 0.0;
    for _ in 0..10_000 {
        let a = Point::new(
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..5.0),
        );
        let d = unit(&mut rng) * rng.gen_range(0.01..3.0);
        if let Ok(r) = frame_3d(&a, &(a + d), &unit(&mut rng)) {
            frame = frame
                .max((r.transpose() * r - Matrix3::identity()).abs().max())
                .max((r.determinant() - 1.0).abs());
        }
    }
    (
        roundtrip <= 1e-9 && frame <= 1e-9,
        format!("exp/log worst {roundtrip:.2e}; frame orthonormality and det worst {frame:.2e}"),
    )
}

fn dmp() -> Outcome {
    // fitted rollouts of every benchmark plan
    let mut end: f64 = 0.0;
    for b in Benchmark::ALL {
        for seed in 0..3 {
            let (_, p) = plan(&b.generate(seed));
            let (raw, s) = (&p.raw.samples, &p.smoothed.samples);
            let goal = raw.last().unwrap();
            let err = s
                .last()
                .unwrap()
                .iter()
                .zip(goal)
                .map(|(a, g)| (a - g).powi(2))
                .sum::<f64>()
                .sqrt();
            let span = goal
                .iter()
                .zip(&raw[0])
                .map(|(a, g)| (a - g).powi(2))
                .sum::<f64>()
                .sqrt();
            end = end.max(err / span);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut monotone = true;
    for _ in 0..20 {
        let start: Vec<f64> = (0..6).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let goal: Vec<f64> = (0..6).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let m = DmpModel::unforced(Dim::Three, start.clone(), goal.clone(), rng.gen_range(0.5..4.0), 25);
        let r = rollout(&m, m.duration / 500.0);
        for c in 0..6 {
            let dir = (goal[c] - start[c]).signum();
            monotone &= r.samples.windows(2).all(|w| dir * (w[1][c] - w[0][c]) >= -1e-12);
            monotone &= r.samples.iter().all(|u| dir * (u[c] - goal[c]) <= 1e-12);
        }
    }

    let n = 1001;
    let length = 2.0;
    let times: Vec<f64> = (0..n).map(|k| length * k as f64 / (n - 1) as f64).collect();
    let samples = times
        .iter()
        .map(|&t| {
            let s = t / length;
            let p = length * (10.0 * s.powi(3) - 15.0 * s.powi(4) + 6.0 * s.powi(5));
            vec![p * 0.6, p * 0.8, 0.0]
        })
        .collect();
    let line = PoseTrajectory {
        dim: Dim::Two,
        times,
        samples,
    };
    let r = rollout(&fit_lwr(&line, 25).unwrap(), length / (n - 1) as f64);
    let off = r
        .samples
        .iter()
        .map(|u| (u[0] * 0.8 - u[1] * 0.6).powi(2) + u[2].powi(2))
        .sum::<f64>()
        / r.len() as f64;
    let line_rms = off.sqrt() / line.arc_length();
    (
        end <= 1e-3 && monotone && line_rms <= 0.01,
        format!(
            "worst plan end error {end:.2e} of span; unforced rollouts monotone: {monotone}; line deviation {:.3}% of length",
            line_rms * 100.0
        ),
    )
}

fn determinism() -> Outcome {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut reports = Vec::new();
    let mut tables = Vec::new();
    for d in &dirs {
        let o = sqvd(&[
            "bench",
            "--suite",
            "all",
            "--runs",
            "2",
            "--seed",
            "0",
            "--out",
            path_str(d.path()),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let text = std::fs::read_to_string(d.path().join("bench.json")).unwrap();
        reports.push(without_timings(&serde_json::from_str(&text).unwrap()));
        let table = std::fs::read_to_string(d.path().join("table.txt")).unwrap();
        tables.push(
            table
                .lines()
                .filter(|l| !l.contains("(s)"))
                .collect::<Vec<_>>()
                .join("\n"),
        );
    }
    let same = reports[0] == reports[1] && tables[0] == tables[1];
    (
        same,
        format!("bench --suite all twice, runs 2: non-timing output identical: {same}"),
    )
}

fn main() {
    let criteria: [Check; 10] = [
        ("passability", passability),
        ("clearance", clearance),
        ("timing", timing),
        ("trap handling", trap),
        ("pillar orientation", pillars),
        ("point-site diagram", point_sites),
        ("proximity oracle", proximity),
        ("rotations", rotations),
        ("DMP convergence", dmp),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let (ok, detail) = match std::panic::catch_unwind(check) {
            Ok(outcome) => outcome,
            Err(e) => (
                false,
                format!("panicked: {}", e.downcast_ref::<String>().cloned().unwrap_or_default()),
            ),
        };
        failed += usize::from(!ok);
        println!(
            "criterion {:>2} {} {name}: {detail}",
            k + 1,
            if ok { "PASS" } else { "FAIL" }
        );
    }
    println!("acceptance: {}/10 passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
