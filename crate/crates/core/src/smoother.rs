//! Waypoint interpolation, DMP fitting by locally weighted regression, rollout
//! and clearance validation.
//!
//! A trajectory sample is the pose as a flat vector: `[x, y, theta]` in the
//! plane and `[x, y, z, rx, ry, rz]` in space, with angles unwrapped so the
//! channels are continuous.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Vector3};

use crate::error::{Error, Result};
use crate::geometry::{Dim, Point, RigidPose, Superquadric};
use crate::pose_planner::{robot_at, PoseWaypoint};
use crate::proximity::{closest_pair_with, distance_lower_bound, overlaps, ProximityOptions, CONTACT_TOL};

/// Reference speed turning arc length into duration (m/s).
pub const REFERENCE_SPEED: f64 = 1.0;
/// Share of each segment, at either end, over which the orientation changes.
pub const TURN_FRACTION: f64 = 0.2;
/// Largest slope/secant ratio for which a zero-curvature quintic piece stays monotone.
const MAX_SLOPE_RATIO: f64 = 2.0;
/// Goal offsets below this use unit forcing amplitude.
pub const AMPLITUDE_EPS: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct PoseTrajectory {
    pub dim: Dim,
    pub times: Vec<f64>,
    pub samples: Vec<Vec<f64>>,
}

/// The interpolated via-point trajectory that the DMP imitates.
pub type Demonstration = PoseTrajectory;

pub fn dofs(dim: Dim) -> usize {
    dim.n() + dim.orientation_dofs()
}

pub fn pose_to_dofs(dim: Dim, pose: &RigidPose) -> Vec<f64> {
    match dim {
        Dim::Two => vec![pose.translation.x, pose.translation.y, pose.angle()],
        Dim::Three => pose.translation.iter().chain(pose.rotation.iter()).copied().collect(),
    }
}

pub fn dofs_to_pose(dim: Dim, u: &[f64]) -> RigidPose {
    match dim {
        Dim::Two => RigidPose::planar(u[0], u[1], u[2]),
        Dim::Three => RigidPose::spatial(Vector3::new(u[0], u[1], u[2]), Vector3::new(u[3], u[4], u[5])),
    }
}

impl PoseTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn pose(&self, k: usize) -> RigidPose {
        dofs_to_pose(self.dim, &self.samples[k])
    }

    pub fn position(&self, k: usize) -> Point {
        let u = &self.samples[k];
        match self.dim {
            Dim::Two => Point::new(u[0], u[1], 0.0),
            Dim::Three => Point::new(u[0], u[1], u[2]),
        }
    }

    pub fn arc_length(&self) -> f64 {
        (1..self.len())
            .map(|k| (self.position(k) - self.position(k - 1)).norm())
            .sum()
    }

    /// `count` evenly spaced sample indices (all samples if there are fewer).
    pub fn sample_indices(&self, count: usize) -> Vec<usize> {
        let n = self.len();
        if n <= count || count < 2 {
            return (0..n).collect();
        }
        let mut idx: Vec<usize> = (0..count)
            .map(|k| ((k as f64) * (n - 1) as f64 / (count - 1) as f64).round() as usize)
            .collect();
        idx.dedup();
        idx
    }
}

/// Monotone piecewise quintic Hermite with zero second derivative at the
/// knots, so the curve is C2. Slopes follow Fritsch-Carlson, limited to twice
/// the neighbouring secants, which keeps every piece monotone: the curve never
/// overshoots its data and runs of equal values stay flat.
#[derive(Clone, Debug)]
pub struct MonotoneHermite {
    t: Vec<f64>,
    y: Vec<f64>,
    slope: Vec<f64>,
}

impl MonotoneHermite {
    pub fn new(t: &[f64], y: &[f64]) -> Self {
        Self::build(t, y, false)
    }

    /// Same curve family with zero slope at both ends (starts and stops at rest).
    pub fn at_rest(t: &[f64], y: &[f64]) -> Self {
        Self::build(t, y, true)
    }

    fn build(t: &[f64], y: &[f64], rest: bool) -> Self {
        let n = t.len();
        assert!(n >= 2 && y.len() == n);
        let secant: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (t[i + 1] - t[i])).collect();
        let mut slope = vec![0.0; n];
        slope[0] = secant[0];
        slope[n - 1] = secant[n - 2];
        for i in 1..n - 1 {
            slope[i] = if secant[i - 1] * secant[i] <= 0.0 {
                0.0
            } else {
                (secant[i - 1] + secant[i]) / 2.0
            };
        }
        for i in 0..n - 1 {
            if secant[i] == 0.0 {
                slope[i] = 0.0;
                slope[i + 1] = 0.0;
                continue;
            }
            for j in [i, i + 1] {
                if slope[j] / secant[i] > MAX_SLOPE_RATIO {
                    slope[j] = MAX_SLOPE_RATIO * secant[i];
                }
            }
        }
        if rest {
            slope[0] = 0.0;
            slope[n - 1] = 0.0;
        }
        MonotoneHermite {
            t: t.to_vec(),
            y: y.to_vec(),
            slope,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.t.len();
        let i = self.t.partition_point(|&tk| tk <= x).clamp(1, n - 1) - 1;
        let h = self.t[i + 1] - self.t[i];
        let s = (x - self.t[i]) / h;
        let (s3, s4, s5) = (s.powi(3), s.powi(4), s.powi(5));
        let rise = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
        (1.0 - rise) * self.y[i]
            + rise * self.y[i + 1]
            + (s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5) * h * self.slope[i]
            + (-4.0 * s3 + 7.0 * s4 - 3.0 * s5) * h * self.slope[i + 1]
    }
}

/// Rotation vector equivalent to `v` closest to `prev` (same rotation, magnitude shifted by 2 pi k).
fn nearest_equivalent(v: &Vector3<f64>, prev: &Vector3<f64>) -> Vector3<f64> {
    let theta = v.norm();
    let axis = if theta > 1e-12 {
        v / theta
    } else if prev.norm() > 1e-12 {
        prev.normalize()
    } else {
        return *v;
    };
    (-3..=3)
        .map(|k| axis * (theta + 2.0 * PI * k as f64))
        .min_by(|a, b| (a - prev).norm().total_cmp(&(b - prev).norm()))
        .unwrap()
}

/// Poses as continuous dof vectors: angle unwrapping in the plane,
/// nearest-equivalent rotation vectors in space.
pub fn unwrap_poses(dim: Dim, poses: &[RigidPose]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(poses.len());
    for pose in poses {
        let mut u = pose_to_dofs(dim, pose);
        if let Some(prev) = out.last() {
            match dim {
                Dim::Two => u[2] = prev[2] + crate::so3::wrap_angle(u[2] - prev[2]),
                Dim::Three => {
                    let v = nearest_equivalent(
                        &Vector3::new(u[3], u[4], u[5]),
                        &Vector3::new(prev[3], prev[4], prev[5]),
                    );
                    u[3..6].copy_from_slice(v.as_slice());
                }
            }
        }
        out.push(u);
    }
    out
}

/// Orientation halfway between `a` and `b` along the shorter arc.
fn mid_rotation(dim: Dim, a: &RigidPose, b: &RigidPose) -> Vector3<f64> {
    match dim {
        Dim::Two => Vector3::new(
            0.0,
            0.0,
            a.angle() + crate::so3::wrap_angle(b.angle() - a.angle()) / 2.0,
        ),
        Dim::Three => {
            let (ra, rb) = (a.rotation_matrix(), b.rotation_matrix());
            let half = crate::so3::log_unchecked(&(ra.transpose() * rb)) * 0.5;
            crate::so3::log_unchecked(&(ra * crate::so3::exp(&half)))
        }
    }
}

/// Interpolates the waypoints over arc-length time and samples `n_samples`
/// uniform times.
///
/// Every channel uses a monotone cubic, so straight segments stay straight and
/// turns do not ring. Each segment carries its own orientation at 20% and 80%
/// of its length and interior nodes sit halfway through the turn, so the robot
/// travels aligned and turns around the nodes.
pub fn interpolate_waypoints(dim: Dim, waypoints: &[PoseWaypoint], n_samples: usize) -> Result<Demonstration> {
    let mut kept: Vec<PoseWaypoint> = Vec::with_capacity(waypoints.len());
    for w in waypoints {
        if kept
            .last()
            .is_none_or(|k| (k.pose.translation - w.pose.translation).norm() > 1e-12)
        {
            kept.push(w.clone());
        }
    }
    if kept.len() < 2 {
        return Err(Error::InvalidTrajectory("fewer than two distinct waypoints".into()));
    }
    if n_samples < 2 {
        return Err(Error::InvalidTrajectory("need at least two samples".into()));
    }
    let last = kept.len() - 1;
    let mut knots = vec![0.0];
    let mut poses = vec![kept[0].pose];
    for k in 1..=last {
        let (a, b) = (&kept[k - 1].pose, &kept[k].pose);
        let step = (b.translation - a.translation).norm() / REFERENCE_SPEED;
        let t0 = *knots.last().unwrap();
        for f in [TURN_FRACTION, 1.0 - TURN_FRACTION] {
            knots.push(t0 + f * step);
            poses.push(RigidPose {
                translation: a.translation + (b.translation - a.translation) * f,
                rotation: a.rotation,
            });
        }
        knots.push(t0 + step);
        poses.push(if k == last {
            *b
        } else {
            RigidPose {
                translation: b.translation,
                rotation: mid_rotation(dim, a, b),
            }
        });
    }
    let values = unwrap_poses(dim, &poses);
    let total = *knots.last().unwrap();
    let curves: Vec<MonotoneHermite> = (0..dofs(dim))
        .map(|c| MonotoneHermite::at_rest(&knots, &values.iter().map(|v| v[c]).collect::<Vec<_>>()))
        .collect();
    let times: Vec<f64> = (0..n_samples)
        .map(|k| total * k as f64 / (n_samples - 1) as f64)
        .collect();
    let mut samples: Vec<Vec<f64>> = times
        .iter()
        .map(|&t| curves.iter().map(|s| s.eval(t)).collect())
        .collect();
    // pin endpoints to the waypoints exactly
    samples[0] = values[0].clone();
    *samples.last_mut().unwrap() = values.last().unwrap().clone();
    Ok(PoseTrajectory { dim, times, samples })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DmpGains {
    pub alpha_z: f64,
    pub beta_z: f64,
    pub alpha_x: f64,
}

impl Default for DmpGains {
    fn default() -> Self {
        DmpGains {
            alpha_z: 25.0,
            beta_z: 6.25,
            alpha_x: 25.0 / 3.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DmpModel {
    pub dim: Dim,
    /// `K x P` forcing weights.
    pub weights: Vec<Vec<f64>>,
    pub centers: Vec<f64>,
    pub widths: Vec<f64>,
    pub gains: DmpGains,
    pub duration: f64,
    pub start: Vec<f64>,
    pub goal: Vec<f64>,
}

impl DmpModel {
    pub fn basis_count(&self) -> usize {
        self.centers.len()
    }

    /// Zero-weight model between two dof vectors.
    pub fn unforced(dim: Dim, start: Vec<f64>, goal: Vec<f64>, duration: f64, basis: usize) -> Self {
        let (centers, widths) = basis_functions(basis, DmpGains::default().alpha_x);
        DmpModel {
            dim,
            weights: vec![vec![0.0; basis]; start.len()],
            centers,
            widths,
            gains: DmpGains::default(),
            duration,
            start,
            goal,
        }
    }

    fn amplitude(&self, c: usize) -> f64 {
        let a = self.goal[c] - self.start[c];
        if a.abs() < AMPLITUDE_EPS {
            1.0
        } else {
            a
        }
    }

    fn forcing(&self, c: usize, x: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, (&ci, &hi)) in self.centers.iter().zip(&self.widths).enumerate() {
            let psi = (-hi * (x - ci) * (x - ci)).exp();
            num += psi * self.weights[c][i];
            den += psi;
        }
        if den < 1e-300 {
            0.0
        } else {
            num / den * x * self.amplitude(c)
        }
    }
}

/// Centers exponentially spaced along the phase; neighbouring kernels cross at one half
/// midway between their centers.
fn basis_functions(p: usize, alpha_x: f64) -> (Vec<f64>, Vec<f64>) {
    let centers: Vec<f64> = (0..p)
        .map(|i| (-alpha_x * i as f64 / (p - 1).max(1) as f64).exp())
        .collect();
    let widths = (0..p)
        .map(|i| {
            let gap = if i + 1 < p {
                centers[i] - centers[i + 1]
            } else {
                centers[i - 1] - centers[i]
            };
            4.0 * std::f64::consts::LN_2 / (gap * gap)
        })
        .collect();
    (centers, widths)
}

fn phase(gains: &DmpGains, t: f64, tau: f64) -> f64 {
    (-gains.alpha_x * t / tau).exp()
}

/// Finite-difference derivative on a uniform grid (central inside, second-order one-sided at the ends).
fn derivative(v: &[f64], dt: f64) -> Vec<f64> {
    let n = v.len();
    if n < 3 {
        let d = if n == 2 { (v[1] - v[0]) / dt } else { 0.0 };
        return vec![d; n];
    }
    (0..n)
        .map(|k| {
            if k == 0 {
                (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dt)
            } else if k == n - 1 {
                (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * dt)
            } else {
                (v[k + 1] - v[k - 1]) / (2.0 * dt)
            }
        })
        .collect()
}

/// Normalised kernel activations times phase: the forcing for unit weights and unit amplitude.
fn features(model: &DmpModel, x: f64) -> Vec<f64> {
    let psi: Vec<f64> = model
        .centers
        .iter()
        .zip(&model.widths)
        .map(|(&ci, &hi)| (-hi * (x - ci) * (x - ci)).exp())
        .collect();
    let sum: f64 = psi.iter().sum::<f64>().max(1e-300);
    psi.into_iter().map(|p| p / sum * x).collect()
}

/// One RK4 step of a channel's transformation system; `force` holds the
/// forcing at the start, middle and end of the step.
fn rk4_step(g: &DmpGains, tau: f64, goal: f64, h: f64, (y, z): (f64, f64), force: [f64; 3]) -> (f64, f64) {
    let d = |y: f64, z: f64, f: f64| (z / tau, (g.alpha_z * (g.beta_z * (goal - y) - z) + f) / tau);
    let (k1y, k1z) = d(y, z, force[0]);
    let (k2y, k2z) = d(y + h / 2.0 * k1y, z + h / 2.0 * k1z, force[1]);
    let (k3y, k3z) = d(y + h / 2.0 * k2y, z + h / 2.0 * k2z, force[1]);
    let (k4y, k4z) = d(y + h * k3y, z + h * k3z, force[2]);
    (
        y + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y),
        z + h / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z),
    )
}

fn rollout_steps(tau: f64, dt: f64) -> usize {
    ((tau / dt.max(1e-12)).ceil() as usize).max(10)
}

/// Final state of one channel integrated over `steps` RK4 steps, with the
/// forcing sampled on the half-step grid.
fn final_state(g: &DmpGains, tau: f64, goal: f64, start: (f64, f64), force: &[f64]) -> (f64, f64) {
    let h = tau / ((force.len() - 1) / 2) as f64;
    force
        .windows(3)
        .step_by(2)
        .fold(start, |state, f| rk4_step(g, tau, goal, h, state, [f[0], f[1], f[2]]))
}

/// Fits forcing weights per channel.
///
/// The forcing model is the usual normalised Gaussian-kernel mixture. All
/// kernel weights of a channel are solved jointly in one least-squares problem
/// constrained so that the rollout on the demonstration's time grid ends at the
/// goal with zero velocity. The rollout is linear in the weights, so the
/// constraint is two linear equations per channel.
pub fn fit_lwr(demo: &Demonstration, basis: usize) -> Result<DmpModel> {
    if basis < 2 {
        return Err(Error::InvalidTrajectory("need at least two basis functions".into()));
    }
    let tau = demo.duration();
    if !(tau > 0.0) || demo.len() < 3 {
        return Err(Error::InvalidTrajectory("demonstration has zero duration".into()));
    }
    let gains = DmpGains::default();
    let (centers, widths) = basis_functions(basis, gains.alpha_x);
    let dt = tau / (demo.len() - 1) as f64;
    let start = demo.samples[0].clone();
    let goal = demo.samples.last().unwrap().clone();

    let mut model = DmpModel {
        dim: demo.dim,
        weights: Vec::new(),
        centers,
        widths,
        gains,
        duration: tau,
        start,
        goal,
    };
    let rows: Vec<Vec<f64>> = demo
        .times
        .iter()
        .map(|&t| features(&model, phase(&gains, t, tau)))
        .collect();
    let design = DMatrix::from_fn(rows.len(), basis, |k, i| rows[k][i]);

    // final position and velocity produced by each unit weight
    let steps = rollout_steps(tau, dt);
    let half: Vec<Vec<f64>> = (0..=2 * steps)
        .map(|k| features(&model, phase(&gains, tau * k as f64 / (2 * steps) as f64, tau)))
        .collect();
    let response = DMatrix::from_fn(2, basis, |r, i| {
        let force: Vec<f64> = half.iter().map(|f| f[i]).collect();
        let (y, z) = final_state(&gains, tau, 0.0, (0.0, 0.0), &force);
        if r == 0 {
            y
        } else {
            z
        }
    });
    let gram = &response * response.transpose();
    let pinv = gram.try_inverse().map(|inv| response.transpose() * inv);
    let projector = pinv
        .as_ref()
        .map(|pinv| DMatrix::identity(basis, basis) - pinv * &response);
    let reduced = match &projector {
        Some(n) => &design * n,
        None => design.clone(),
    };
    let svd = reduced.svd(true, true);
    let zeros = vec![0.0; 2 * steps + 1];

    for c in 0..dofs(demo.dim) {
        let y: Vec<f64> = demo.samples.iter().map(|u| u[c]).collect();
        let yd = derivative(&y, dt);
        let ydd = derivative(&yd, dt);
        let amp = model.amplitude(c);
        let g = model.goal[c];
        let target = DVector::from_fn(y.len(), |k, _| {
            (tau * tau * ydd[k] - gains.alpha_z * (gains.beta_z * (g - y[k]) - tau * yd[k])) / amp
        });
        let (yf, zf) = final_state(&gains, tau, g, (model.start[c], 0.0), &zeros);
        let particular = match &pinv {
            Some(pinv) => pinv * DVector::from_vec(vec![(g - yf) / amp, -zf / amp]),
            None => DVector::zeros(basis),
        };
        let v = svd
            .solve(&(target - &design * &particular), 1e-12 * svd.singular_values.max())
            .map_err(|e| Error::InvalidTrajectory(format!("forcing fit failed: {e}")))?;
        let w = match &projector {
            Some(n) => particular + n * v,
            None => v,
        };
        model.weights.push(w.iter().copied().collect());
    }
    Ok(model)
}

/// Integrates the transformation system with RK4 (phase evaluated in closed form).
/// The step is shortened so that samples land on `t = 0` and `t = T` exactly and
/// there are at least ten steps.
pub fn rollout(model: &DmpModel, dt: f64) -> PoseTrajectory {
    let tau = model.duration;
    let k_dofs = model.start.len();
    if !(tau > 0.0) {
        return PoseTrajectory {
            dim: model.dim,
            times: vec![0.0],
            samples: vec![model.start.clone()],
        };
    }
    let steps = rollout_steps(tau, dt);
    let h = tau / steps as f64;
    let g = &model.gains;

    let mut times = Vec::with_capacity(steps + 1);
    let mut samples = Vec::with_capacity(steps + 1);
    let mut y = model.start.clone();
    let mut z = vec![0.0; k_dofs];
    times.push(0.0);
    samples.push(y.clone());
    for s in 0..steps {
        let t = s as f64 * h;
        let x = [phase(g, t, tau), phase(g, t + h / 2.0, tau), phase(g, t + h, tau)];
        for c in 0..k_dofs {
            let force = x.map(|x| model.forcing(c, x));
            (y[c], z[c]) = rk4_step(g, tau, model.goal[c], h, (y[c], z[c]), force);
        }
        times.push(if s + 1 == steps { tau } else { (s + 1) as f64 * h });
        samples.push(y.clone());
    }
    PoseTrajectory {
        dim: model.dim,
        times,
        samples,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Validation {
    /// True when the smoothed trajectory collided and the raw one was returned.
    pub fallback: bool,
    pub checked_samples: usize,
}

/// Sample count for the clearance check.
pub fn validation_samples(waypoints: usize) -> usize {
    200.max(4 * waypoints)
}

/// First `(sample, obstacle)` where the posed robot overlaps an obstacle.
pub fn first_collision(
    traj: &PoseTrajectory,
    robot: &Superquadric,
    obstacles: &[Superquadric],
    indices: &[usize],
    opts: &ProximityOptions,
) -> Option<(usize, usize)> {
    for &k in indices {
        let body = robot_at(robot, &traj.pose(k));
        for (j, o) in obstacles.iter().enumerate() {
            if distance_lower_bound(&body, o) > CONTACT_TOL {
                continue;
            }
            if overlaps(&body, o, &closest_pair_with(&body, o, opts)) {
                return Some((k, j));
            }
        }
    }
    None
}

/// Keeps the smoothed trajectory when it is collision-free at the sampled
/// poses, otherwise falls back to the raw demonstration.
pub fn validate_and_finalize(
    smoothed: PoseTrajectory,
    raw: &Demonstration,
    robot: &Superquadric,
    obstacles: &[Superquadric],
    waypoints: usize,
    opts: &ProximityOptions,
) -> Result<(PoseTrajectory, Validation)> {
    if smoothed.is_empty() || raw.is_empty() {
        return Err(Error::InvalidTrajectory("empty trajectory".into()));
    }
    let count = validation_samples(waypoints);
    let idx = smoothed.sample_indices(count);
    match first_collision(&smoothed, robot, obstacles, &idx, opts) {
        None => Ok((
            smoothed,
            Validation {
                fallback: false,
                checked_samples: idx.len(),
            },
        )),
        Some((k, j)) => {
            log::info!("smoothed trajectory hits obstacle {j} at sample {k}; using raw trajectory");
            let raw_idx = raw.sample_indices(count);
            if let Some((sample, obstacle)) = first_collision(raw, robot, obstacles, &raw_idx, opts) {
                return Err(Error::RawTrajectoryCollides { sample, obstacle });
            }
            Ok((
                raw.clone(),
                Validation {
                    fallback: true,
                    checked_samples: raw_idx.len(),
                },
            ))
        }
    }
}
