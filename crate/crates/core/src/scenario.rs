//! Scenario files, benchmark scenes, trajectory CSV and metrics.

use std::f64::consts::FRAC_PI_2;
use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Dim, RigidPose, Superquadric, WorldBox};
use crate::pose_planner::robot_at;
use crate::proximity::{closest_pair_with, distance_lower_bound, ProximityOptions};
use crate::smoother::{dofs, PoseTrajectory};

pub const FORMAT_VERSION: u32 = 1;

/// Samples used for the minimum-distance metric.
pub const METRIC_SAMPLES: usize = 400;

/// Planner knobs carried by a scenario file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// Bridging threshold in meters; `None` means 2% of the world diagonal.
    pub h: Option<f64>,
    pub bridging: bool,
    /// Basis functions per degree of freedom.
    pub dmp_basis: usize,
    /// Rollout step in seconds; `None` derives it from `demo_samples`.
    pub dt: Option<f64>,
    pub demo_samples: usize,
    pub proximity_seeds_2d: usize,
    pub proximity_grid_3d: usize,
}

impl Default for Params {
    fn default() -> Self {
        let prox = ProximityOptions::default();
        Params {
            h: None,
            bridging: true,
            dmp_basis: 25,
            dt: None,
            demo_samples: 1001,
            proximity_seeds_2d: prox.seeds_2d,
            proximity_grid_3d: prox.grid_3d,
        }
    }
}

impl Params {
    pub fn validate(&self) -> Result<()> {
        if let Some(h) = self.h {
            if !(h >= 0.0 && h.is_finite()) {
                return Err(Error::validation("params.h", format!("must be >= 0, got {h}")));
            }
        }
        if self.dmp_basis < 2 {
            return Err(Error::validation("params.dmp_basis", "must be at least 2"));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::validation("params.dt", format!("must be > 0, got {dt}")));
            }
        }
        if self.demo_samples < 11 {
            return Err(Error::validation("params.demo_samples", "must be at least 11"));
        }
        if self.proximity_seeds_2d == 0 {
            return Err(Error::validation("params.proximity_seeds_2d", "must be positive"));
        }
        if self.proximity_grid_3d == 0 {
            return Err(Error::validation("params.proximity_grid_3d", "must be positive"));
        }
        Ok(())
    }

    pub fn proximity(&self) -> ProximityOptions {
        ProximityOptions {
            seeds_2d: self.proximity_seeds_2d,
            grid_3d: self.proximity_grid_3d,
            ..ProximityOptions::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub dim: Dim,
    pub world: WorldBox,
    pub robot: Superquadric,
    pub obstacles: Vec<Superquadric>,
    pub start: RigidPose,
    pub goal: RigidPose,
    pub params: Params,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WorldSpec {
    min: Vec<f64>,
    max: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ShapeSpec {
    eps: Vec<f64>,
    axes: Vec<f64>,
    #[serde(default)]
    position: Vec<f64>,
    #[serde(default)]
    rotation: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoseSpec {
    position: Vec<f64>,
    #[serde(default)]
    rotation: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    version: u32,
    dim: usize,
    world: WorldSpec,
    robot: ShapeSpec,
    obstacles: Vec<ShapeSpec>,
    start: PoseSpec,
    goal: PoseSpec,
    #[serde(default)]
    params: Params,
}

fn fixed<const N: usize>(v: &[f64], path: &str) -> Result<[f64; N]> {
    if v.len() != N {
        return Err(Error::validation(path, format!("expected {N} values, got {}", v.len())));
    }
    if let Some(k) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::validation(format!("{path}[{k}]"), "must be finite"));
    }
    let mut out = [0.0; N];
    out.copy_from_slice(v);
    Ok(out)
}

/// Missing position or rotation defaults to zero.
fn or_zeros(v: &[f64], n: usize) -> Vec<f64> {
    if v.is_empty() {
        vec![0.0; n]
    } else {
        v.to_vec()
    }
}

fn shape_from_spec(dim: Dim, s: &ShapeSpec, path: &str) -> Result<Superquadric> {
    let position = or_zeros(&s.position, dim.n());
    let rotation = or_zeros(&s.rotation, dim.orientation_dofs());
    let built = match dim {
        Dim::Two => {
            let eps: [f64; 1] = fixed(&s.eps, &format!("{path}.eps"))?;
            let axes: [f64; 2] = fixed(&s.axes, &format!("{path}.axes"))?;
            let p: [f64; 2] = fixed(&position, &format!("{path}.position"))?;
            let r: [f64; 1] = fixed(&rotation, &format!("{path}.rotation"))?;
            Superquadric::new_2d(eps[0], axes, p, r[0])
        }
        Dim::Three => {
            let eps: [f64; 2] = fixed(&s.eps, &format!("{path}.eps"))?;
            let axes: [f64; 3] = fixed(&s.axes, &format!("{path}.axes"))?;
            let p: [f64; 3] = fixed(&position, &format!("{path}.position"))?;
            let r: [f64; 3] = fixed(&rotation, &format!("{path}.rotation"))?;
            Superquadric::new_3d(eps, axes, p, r)
        }
    };
    built.map_err(|e| match e {
        Error::InvalidShape(msg) => Error::validation(path, msg),
        other => other,
    })
}

fn pose_from_spec(dim: Dim, s: &PoseSpec, path: &str) -> Result<RigidPose> {
    let rotation = or_zeros(&s.rotation, dim.orientation_dofs());
    Ok(match dim {
        Dim::Two => {
            let p: [f64; 2] = fixed(&s.position, &format!("{path}.position"))?;
            let r: [f64; 1] = fixed(&rotation, &format!("{path}.rotation"))?;
            RigidPose::planar(p[0], p[1], r[0])
        }
        Dim::Three => {
            let p: [f64; 3] = fixed(&s.position, &format!("{path}.position"))?;
            let r: [f64; 3] = fixed(&rotation, &format!("{path}.rotation"))?;
            RigidPose::spatial(Vector3::from(p), Vector3::from(r))
        }
    })
}

fn rotation_values(dim: Dim, pose: &RigidPose) -> Vec<f64> {
    match dim {
        Dim::Two => vec![pose.angle()],
        Dim::Three => pose.rotation.iter().copied().collect(),
    }
}

fn shape_to_spec(s: &Superquadric) -> ShapeSpec {
    let dim = s.dim();
    ShapeSpec {
        eps: s.eps().to_vec(),
        axes: s.axes().to_vec(),
        position: s.center().iter().take(dim.n()).copied().collect(),
        rotation: rotation_values(dim, s.pose()),
    }
}

fn pose_to_spec(dim: Dim, p: &RigidPose) -> PoseSpec {
    PoseSpec {
        position: p.translation.iter().take(dim.n()).copied().collect(),
        rotation: rotation_values(dim, p),
    }
}

impl Scenario {
    /// Builds a scenario and checks every invariant.
    pub fn new(
        world: WorldBox,
        robot: Superquadric,
        obstacles: Vec<Superquadric>,
        start: RigidPose,
        goal: RigidPose,
        params: Params,
    ) -> Result<Self> {
        let s = Scenario {
            dim: world.dim,
            world,
            robot,
            obstacles,
            start,
            goal,
            params,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.robot.dim() != self.dim {
            return Err(Error::validation("robot", "dimension differs from the scenario"));
        }
        for (k, o) in self.obstacles.iter().enumerate() {
            if o.dim() != self.dim {
                return Err(Error::validation(
                    format!("obstacles[{k}]"),
                    "dimension differs from the scenario",
                ));
            }
        }
        for (name, pose) in [("start", &self.start), ("goal", &self.goal)] {
            let p = pose.translation;
            if !self.world.contains(&p, 0.0) {
                return Err(Error::validation(format!("{name}.position"), "outside the world box"));
            }
            if let Some(k) = self.obstacles.iter().position(|o| o.inside_outside(&p) <= 0.0) {
                return Err(Error::validation(
                    format!("{name}.position"),
                    format!("inside obstacles[{k}]"),
                ));
            }
        }
        self.params.validate()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: ScenarioFile = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Parse(format!("{path}: {}", e.into_inner()))
        })?;
        if file.version != FORMAT_VERSION {
            return Err(Error::validation(
                "version",
                format!("unsupported version {} (expected {FORMAT_VERSION})", file.version),
            ));
        }
        let dim = Dim::from_usize(file.dim).ok_or_else(|| Error::validation("dim", "must be 2 or 3"))?;
        let world = match dim {
            Dim::Two => WorldBox::new_2d(
                fixed(&file.world.min, "world.min")?,
                fixed(&file.world.max, "world.max")?,
            )?,
            Dim::Three => WorldBox::new_3d(
                fixed(&file.world.min, "world.min")?,
                fixed(&file.world.max, "world.max")?,
            )?,
        };
        let robot = shape_from_spec(dim, &file.robot, "robot")?;
        let obstacles = file
            .obstacles
            .iter()
            .enumerate()
            .map(|(k, o)| shape_from_spec(dim, o, &format!("obstacles[{k}]")))
            .collect::<Result<Vec<_>>>()?;
        let start = pose_from_spec(dim, &file.start, "start")?;
        let goal = pose_from_spec(dim, &file.goal, "goal")?;
        Scenario::new(world, robot, obstacles, start, goal, file.params)
    }

    pub fn to_json(&self) -> String {
        let n = self.dim.n();
        let file = ScenarioFile {
            version: FORMAT_VERSION,
            dim: n,
            world: WorldSpec {
                min: self.world.min.iter().take(n).copied().collect(),
                max: self.world.max.iter().take(n).copied().collect(),
            },
            robot: shape_to_spec(&self.robot),
            obstacles: self.obstacles.iter().map(shape_to_spec).collect(),
            start: pose_to_spec(self.dim, &self.start),
            goal: pose_to_spec(self.dim, &self.goal),
            params: self.params.clone(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("scenario serializes");
        s.push('\n');
        s
    }

    /// Bridging threshold after applying the default and the toggle.
    pub fn bridge_threshold(&self) -> f64 {
        if !self.params.bridging {
            return 0.0;
        }
        self.params.h.unwrap_or(0.02 * self.world.diagonal())
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    Scenario::from_json(&fs::read_to_string(path)?)
}

pub fn save_scenario(scenario: &Scenario, path: &Path) -> Result<()> {
    write_atomic(path, scenario.to_json().as_bytes())
}

/// Writes to a temporary file in the target directory, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn csv_header(dim: Dim) -> &'static [&'static str] {
    match dim {
        Dim::Two => &["t", "x", "y", "theta"],
        Dim::Three => &["t", "x", "y", "z", "rx", "ry", "rz"],
    }
}

pub fn trajectory_csv(traj: &PoseTrajectory) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Parse(e.to_string());
    w.write_record(csv_header(traj.dim)).map_err(csv_err)?;
    for (t, u) in traj.times.iter().zip(&traj.samples) {
        let row: Vec<String> = std::iter::once(t).chain(u).map(|v| format!("{v:.16e}")).collect();
        w.write_record(&row).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub fn save_trajectory(traj: &PoseTrajectory, path: &Path) -> Result<()> {
    write_atomic(path, &trajectory_csv(traj)?)
}

pub fn load_trajectory(path: &Path) -> Result<PoseTrajectory> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Parse(e.to_string()))?;
    let header = r.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
    let dim = [Dim::Two, Dim::Three]
        .into_iter()
        .find(|&d| header.iter().eq(csv_header(d).iter().copied()))
        .ok_or_else(|| Error::Parse(format!("unexpected trajectory header {:?}", header.as_slice())))?;
    let mut traj = PoseTrajectory {
        dim,
        times: Vec::new(),
        samples: Vec::new(),
    };
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        let vals = rec
            .iter()
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse(format!("row {}: {e}", line + 1)))?;
        if vals.len() != 1 + dofs(dim) {
            return Err(Error::Parse(format!(
                "row {}: expected {} columns",
                line + 1,
                1 + dofs(dim)
            )));
        }
        traj.times.push(vals[0]);
        traj.samples.push(vals[1..].to_vec());
    }
    Ok(traj)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub precompute_s: f64,
    pub query_s: f64,
    pub validation_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub success: bool,
    /// The smoothed trajectory collided and the raw one was kept.
    pub fallback: bool,
    /// Machine-readable failure reason.
    pub reason: Option<String>,
    pub planning_time_s: f64,
    pub precompute_time_s: f64,
    pub validation_time_s: f64,
    pub arc_length_m: f64,
    pub min_distance_m: f64,
    pub straight_line_m: f64,
    pub samples: usize,
}

impl MetricsReport {
    pub fn failure(scenario: &Scenario, timings: Timings, reason: &str) -> Self {
        MetricsReport {
            success: false,
            fallback: false,
            reason: Some(reason.to_string()),
            planning_time_s: timings.query_s,
            precompute_time_s: timings.precompute_s,
            validation_time_s: timings.validation_s,
            arc_length_m: 0.0,
            min_distance_m: 0.0,
            straight_line_m: (scenario.goal.translation - scenario.start.translation).norm(),
            samples: 0,
        }
    }
}

/// Smallest distance between the posed robot and any obstacle over the sampled
/// poses; overlaps count as zero.
pub fn min_distance(
    traj: &PoseTrajectory,
    robot: &Superquadric,
    obstacles: &[Superquadric],
    samples: usize,
    opts: &ProximityOptions,
) -> f64 {
    let mut best = f64::INFINITY;
    for k in traj.sample_indices(samples) {
        let body = robot_at(robot, &traj.pose(k));
        // nearest bounds first so the running minimum prunes early
        let mut order: Vec<(f64, usize)> = obstacles
            .iter()
            .enumerate()
            .map(|(j, o)| (distance_lower_bound(&body, o), j))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (lower, j) in order {
            if lower >= best {
                break;
            }
            best = best.min(closest_pair_with(&body, &obstacles[j], opts).distance);
        }
    }
    best.max(0.0)
}

pub fn compute_metrics(traj: &PoseTrajectory, scenario: &Scenario, timings: Timings, fallback: bool) -> MetricsReport {
    let opts = scenario.params.proximity();
    MetricsReport {
        success: true,
        fallback,
        reason: None,
        planning_time_s: timings.query_s,
        precompute_time_s: timings.precompute_s,
        validation_time_s: timings.validation_s,
        arc_length_m: traj.arc_length(),
        min_distance_m: if traj.is_empty() {
            0.0
        } else {
            min_distance(traj, &scenario.robot, &scenario.obstacles, METRIC_SAMPLES, &opts)
        },
        straight_line_m: (scenario.goal.translation - scenario.start.translation).norm(),
        samples: traj.len(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Benchmark {
    Narrow2d,
    TBlock,
    UBlock,
    Pillars3d,
    Moderate3d,
    Dense3d,
}

impl Benchmark {
    pub const ALL: [Benchmark; 6] = [
        Benchmark::Narrow2d,
        Benchmark::TBlock,
        Benchmark::UBlock,
        Benchmark::Pillars3d,
        Benchmark::Moderate3d,
        Benchmark::Dense3d,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Benchmark::Narrow2d => "narrow2d",
            Benchmark::TBlock => "t_block",
            Benchmark::UBlock => "u_block",
            Benchmark::Pillars3d => "pillars3d",
            Benchmark::Moderate3d => "moderate3d",
            Benchmark::Dense3d => "dense3d",
        }
    }

    pub fn dim(self) -> Dim {
        match self {
            Benchmark::Narrow2d | Benchmark::TBlock | Benchmark::UBlock => Dim::Two,
            _ => Dim::Three,
        }
    }

    /// The first `n` obstacles of the scene form its trap.
    pub fn trap_members(self) -> usize {
        match self {
            Benchmark::TBlock => 2,
            Benchmark::UBlock => 3,
            _ => 0,
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|b| b.name() == name)
            .ok_or_else(|| Error::UnknownBenchmark {
                name: name.to_string(),
                valid: Self::ALL.map(|b| b.name()).join(", "),
            })
    }

    pub fn generate(self, seed: u64) -> Scenario {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (0x5eed_0000 + self as u64));
        match self {
            Benchmark::Narrow2d => narrow2d(&mut rng),
            Benchmark::TBlock => t_block(&mut rng),
            Benchmark::UBlock => u_block(&mut rng),
            Benchmark::Pillars3d => pillars3d(&mut rng),
            Benchmark::Moderate3d => field3d(&mut rng, 10),
            Benchmark::Dense3d => field3d(&mut rng, 22),
        }
    }
}

pub fn generate_benchmark(name: &str, seed: u64) -> Result<Scenario> {
    Ok(Benchmark::from_name(name)?.generate(seed))
}

/// Robot used by the planar scenes: a 40 x 120 mm ellipse.
pub fn robot_2d() -> Superquadric {
    Superquadric::new_2d(1.0, [0.02, 0.06], [0.0, 0.0], 0.0).expect("valid robot")
}

/// Drone used by the spatial scenes: a flat ellipsoid.
pub fn robot_3d() -> Superquadric {
    Superquadric::new_3d([1.0, 1.0], [0.2, 0.5, 0.6], [0.0; 3], [0.0; 3]).expect("valid robot")
}

/// Gap left open in planar walls; wide enough to keep 30 mm of clearance.
pub const WALL_GAP_2D: f64 = 0.10;

fn sq2(eps: f64, axes: [f64; 2], p: [f64; 2], theta: f64) -> Superquadric {
    Superquadric::new_2d(eps, axes, p, theta).expect("generator shapes are valid")
}

/// A vertical wall of stacked superellipses at `x` spanning `[y0, y1]` with
/// the given gaps (bottom to top).
fn wall(rng: &mut ChaCha8Rng, x: f64, y0: f64, y1: f64, half_thickness: f64, gaps: &[f64]) -> Vec<Superquadric> {
    let n = gaps.len() + 1;
    let half = (y1 - y0 - gaps.iter().sum::<f64>()) / (2.0 * n as f64);
    let mut y = y0;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let eps = rng.gen_range(0.3..0.8);
        out.push(sq2(eps, [half_thickness, half], [x, y + half], 0.0));
        y += 2.0 * half + gaps.get(k).copied().unwrap_or(0.0);
    }
    out
}

fn wall_gaps(rng: &mut ChaCha8Rng, count: usize) -> Vec<f64> {
    let open = rng.gen_range(0..count);
    (0..count)
        .map(|k| {
            if k == open {
                WALL_GAP_2D + rng.gen_range(-0.005..0.005)
            } else {
                // below the 40 mm threshold set by the robot's minor axis
                rng.gen_range(0.012..0.03)
            }
        })
        .collect()
}

fn narrow2d(rng: &mut ChaCha8Rng) -> Scenario {
    let world = WorldBox::new_2d([0.0, 0.0], [0.56, 0.5]).expect("valid box");
    let mut obstacles = Vec::new();
    for x in [0.16, 0.4] {
        let gaps = wall_gaps(rng, 3);
        obstacles.extend(wall(rng, x, -0.03, 0.53, 0.025, &gaps));
    }
    let start = RigidPose::planar(0.05, rng.gen_range(0.15..0.35), 0.0);
    let goal = RigidPose::planar(0.51, rng.gen_range(0.15..0.35), 0.0);
    Scenario::new(world, robot_2d(), obstacles, start, goal, Params::default()).expect("valid scenario")
}

/// Four long superellipses just outside the world box standing in for the
/// table edges; they are separate clusters, so the bisectors between them and
/// a central trap ring the trap.
fn table_edges(rng: &mut ChaCha8Rng, world: &WorldBox) -> Vec<Superquadric> {
    let c = world.center();
    let (wx, wy) = (world.max.x - world.min.x, world.max.y - world.min.y);
    let t = 0.04;
    let eps = rng.gen_range(0.3..0.6);
    vec![
        sq2(eps, [t, 0.43 * wx], [c.x, world.min.y - t], FRAC_PI_2),
        sq2(eps, [t, 0.43 * wx], [c.x, world.max.y + t], FRAC_PI_2),
        sq2(eps, [t, 0.43 * wy], [world.min.x - t, c.y], 0.0),
        sq2(eps, [t, 0.43 * wy], [world.max.x + t, c.y], 0.0),
    ]
}

fn t_block(rng: &mut ChaCha8Rng) -> Scenario {
    let world = WorldBox::new_2d([0.0, 0.0], [0.6, 0.6]).expect("valid box");
    let y = 0.3 + rng.gen_range(-0.02..0.02);
    let eps = rng.gen_range(0.3..0.5);
    let trap = vec![
        // bar across the direct route
        sq2(eps, [0.02, 0.15], [0.37, y], 0.0),
        // stem pointing back toward the start, splitting its side into two pockets
        sq2(eps, [0.02, 0.085], [0.265, y], FRAC_PI_2),
    ];
    let start = RigidPose::planar(0.25, y + 0.1, 0.0);
    let goal = RigidPose::planar(0.52, 0.3 + rng.gen_range(-0.05..0.05), 0.0);
    let mut obstacles = trap;
    obstacles.extend(table_edges(rng, &world));
    Scenario::new(world, robot_2d(), obstacles, start, goal, Params::default()).expect("valid scenario")
}

fn u_block(rng: &mut ChaCha8Rng) -> Scenario {
    let world = WorldBox::new_2d([0.0, 0.0], [0.6, 0.6]).expect("valid box");
    let y = 0.3 + rng.gen_range(-0.02..0.02);
    let eps = rng.gen_range(0.3..0.5);
    let trap = vec![
        // closed end of the U, between the start and the goal
        sq2(eps, [0.02, 0.12], [0.37, y], 0.0),
        sq2(eps, [0.02, 0.08], [0.29, y + 0.1], FRAC_PI_2),
        sq2(eps, [0.02, 0.08], [0.29, y - 0.1], FRAC_PI_2),
    ];
    let start = RigidPose::planar(0.26, y, 0.0);
    let goal = RigidPose::planar(0.52, 0.3 + rng.gen_range(-0.05..0.05), 0.0);
    let mut obstacles = trap;
    obstacles.extend(table_edges(rng, &world));
    Scenario::new(world, robot_2d(), obstacles, start, goal, Params::default()).expect("valid scenario")
}

fn sq3(eps: [f64; 2], axes: [f64; 3], p: [f64; 3], r: [f64; 3]) -> Superquadric {
    Superquadric::new_3d(eps, axes, p, r).expect("generator shapes are valid")
}

/// Face-to-face gap of the passable pillar pair; between the drone's shortest
/// and longest diameters.
pub const PILLAR_GAP: f64 = 0.8;

fn pillars3d(rng: &mut ChaCha8Rng) -> Scenario {
    let world = WorldBox::new_3d([0.0, 0.0, 0.0], [20.0, 20.0, 8.0]).expect("valid box");
    let open = rng.gen_range(0..3);
    let gaps: Vec<f64> = (0..3).map(|k| if k == open { PILLAR_GAP } else { 0.3 }).collect();
    // the row overhangs the world so the gaps are the only way through
    let (y0, y1) = (-1.4, 21.4);
    let half = (y1 - y0 - gaps.iter().sum::<f64>()) / 8.0;
    let mut y = y0;
    let mut obstacles = Vec::new();
    for k in 0..4 {
        obstacles.push(sq3([0.3, 0.3], [1.0, half, 5.0], [10.0, y + half, 4.0], [0.0; 3]));
        y += 2.0 * half + gaps.get(k).copied().unwrap_or(0.0);
    }
    let start = RigidPose::spatial(
        Vector3::new(3.0, rng.gen_range(4.0..16.0), rng.gen_range(2.0..6.0)),
        Vector3::zeros(),
    );
    let goal = RigidPose::spatial(
        Vector3::new(17.0, rng.gen_range(4.0..16.0), rng.gen_range(2.0..6.0)),
        Vector3::zeros(),
    );
    Scenario::new(world, robot_3d(), obstacles, start, goal, Params::default()).expect("valid scenario")
}

fn field3d(rng: &mut ChaCha8Rng, count: usize) -> Scenario {
    let world = WorldBox::new_3d([0.0, 0.0, 0.0], [20.0, 20.0, 8.0]).expect("valid box");
    let start = Vector3::new(
        rng.gen_range(1.0..2.5),
        rng.gen_range(3.0..17.0),
        rng.gen_range(2.0..6.0),
    );
    let goal = Vector3::new(
        rng.gen_range(17.5..19.0),
        rng.gen_range(3.0..17.0),
        rng.gen_range(2.0..6.0),
    );
    let mut obstacles = Vec::with_capacity(count);
    while obstacles.len() < count {
        let mut axes = [
            rng.gen_range(0.6..2.0),
            rng.gen_range(0.6..2.0),
            rng.gen_range(0.8..3.0),
        ];
        axes.sort_by(f64::total_cmp);
        let o = sq3(
            [rng.gen_range(0.4..1.2), rng.gen_range(0.4..1.2)],
            axes,
            [
                rng.gen_range(3.0..17.0),
                rng.gen_range(1.0..19.0),
                rng.gen_range(1.0..7.0),
            ],
            [
                rng.gen_range(-1.5..1.5),
                rng.gen_range(-1.5..1.5),
                rng.gen_range(-1.5..1.5),
            ],
        );
        let r = o.bounding_radius() + 1.5;
        if (o.center() - start).norm() > r && (o.center() - goal).norm() > r {
            obstacles.push(o);
        }
    }
    Scenario::new(
        world,
        robot_3d(),
        obstacles,
        RigidPose::spatial(start, Vector3::zeros()),
        RigidPose::spatial(goal, Vector3::zeros()),
        Params::default(),
    )
    .expect("valid scenario")
}
