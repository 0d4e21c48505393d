//! Superquadric shapes, rigid poses and the minor-axis expansion.
//!
//! Planar shapes (superellipses) and spatial shapes (superquadrics) share one type.
//! Points are always stored as 3-vectors; planar points keep `z = 0` and planar
//! rotations are rotations about `z`.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::so3;

pub type Point = Vector3<f64>;

/// Admissible range for shape exponents.
pub const EPS_MIN: f64 = 0.1;
pub const EPS_MAX: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dim {
    Two,
    Three,
}

impl Dim {
    pub fn from_usize(n: usize) -> Option<Dim> {
        match n {
            2 => Some(Dim::Two),
            3 => Some(Dim::Three),
            _ => None,
        }
    }

    pub fn n(self) -> usize {
        match self {
            Dim::Two => 2,
            Dim::Three => 3,
        }
    }

    /// Number of angular surface parameters.
    pub fn surface_params(self) -> usize {
        self.n() - 1
    }

    /// Orientation coordinates: one angle in the plane, a rotation vector in space.
    pub fn orientation_dofs(self) -> usize {
        match self {
            Dim::Two => 1,
            Dim::Three => 3,
        }
    }
}

/// `sign(x) * |x|^e`.
#[inline]
pub fn signed_pow(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(e)
    }
}

/// Rigid transform. Planar poses use `rotation = (0, 0, theta)` and `translation.z = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidPose {
    pub translation: Vector3<f64>,
    /// Rotation vector with magnitude in `[0, pi]`.
    pub rotation: Vector3<f64>,
}

impl RigidPose {
    pub fn identity() -> Self {
        RigidPose {
            translation: Vector3::zeros(),
            rotation: Vector3::zeros(),
        }
    }

    pub fn planar(x: f64, y: f64, theta: f64) -> Self {
        RigidPose {
            translation: Vector3::new(x, y, 0.0),
            rotation: Vector3::new(0.0, 0.0, so3::wrap_angle(theta)),
        }
    }

    pub fn spatial(translation: Vector3<f64>, rotation: Vector3<f64>) -> Self {
        RigidPose {
            translation,
            rotation: so3::canonicalize(&rotation),
        }
    }

    /// Builds a pose from a rotation matrix, which must be proper.
    pub fn from_matrix(translation: Vector3<f64>, r: &Matrix3<f64>) -> Result<Self> {
        Ok(RigidPose {
            translation,
            rotation: so3::log(r)?,
        })
    }

    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        so3::exp(&self.rotation)
    }

    /// Planar heading; meaningful for planar poses only.
    pub fn angle(&self) -> f64 {
        self.rotation.z
    }

    pub fn transform_point(&self, local: &Point) -> Point {
        self.rotation_matrix() * local + self.translation
    }

    pub fn inverse_transform_point(&self, world: &Point) -> Point {
        self.rotation_matrix().transpose() * (world - self.translation)
    }
}

/// A superellipse (`dim = 2`) or superquadric (`dim = 3`) in general position.
///
/// In space, `eps = [e1, e2]` where `e1` shapes the local `z` profile and `e2`
/// the `xy` cross-section. In the plane only `eps[0]` is used.
#[derive(Clone, Debug, PartialEq)]
pub struct Superquadric {
    dim: Dim,
    eps: [f64; 2],
    axes: [f64; 3],
    pose: RigidPose,
    // Cached rotation matrix of `pose`.
    rot: Matrix3<f64>,
}

impl Superquadric {
    /// Planar superellipse with semi-axes `axes` along its local `x`, `y`.
    pub fn new_2d(eps: f64, axes: [f64; 2], position: [f64; 2], theta: f64) -> Result<Self> {
        check_eps(eps, 0)?;
        check_axes(&axes)?;
        let (axes, theta) = if axes[0] > axes[1] {
            ([axes[1], axes[0]], theta + FRAC_PI_2)
        } else {
            (axes, theta)
        };
        Ok(Self::assemble(
            Dim::Two,
            [eps, eps],
            [axes[0], axes[1], 0.0],
            RigidPose::planar(position[0], position[1], theta),
        ))
    }

    /// Spatial superquadric with semi-axes along its local `x`, `y`, `z`.
    ///
    /// Axes are reordered ascending and the rotation compensated. When `e1 != e2`
    /// only the `x`/`y` pair can be exchanged without changing the shape, so a
    /// non-largest `z` axis stays in place.
    pub fn new_3d(eps: [f64; 2], axes: [f64; 3], position: [f64; 3], rotation: [f64; 3]) -> Result<Self> {
        check_eps(eps[0], 0)?;
        check_eps(eps[1], 1)?;
        check_axes(&axes)?;
        let base = so3::exp(&Vector3::from(rotation));

        let order: [usize; 3] = if (eps[0] - eps[1]).abs() <= 1e-12 {
            let mut idx = [0usize, 1, 2];
            idx.sort_by(|&i, &j| axes[i].total_cmp(&axes[j]));
            idx
        } else if axes[0] > axes[1] {
            [1, 0, 2]
        } else {
            [0, 1, 2]
        };

        // Column k maps new local axis k onto native axis order[k].
        let mut perm = Matrix3::zeros();
        for (k, &src) in order.iter().enumerate() {
            perm[(src, k)] = 1.0;
        }
        if perm.determinant() < 0.0 {
            perm.column_mut(2).neg_mut();
        }
        let sorted = [axes[order[0]], axes[order[1]], axes[order[2]]];
        let r = base * perm;
        // keep the given rotation vector when nothing moved so files roundtrip exactly
        let rotation = if order == [0, 1, 2] {
            Vector3::from(rotation)
        } else {
            so3::log_unchecked(&r)
        };
        let pose = RigidPose {
            translation: Vector3::from(position),
            rotation,
        };
        Ok(Self::assemble(Dim::Three, eps, sorted, pose))
    }

    /// Assembles a shape whose axes are already canonical.
    fn assemble(dim: Dim, eps: [f64; 2], axes: [f64; 3], pose: RigidPose) -> Self {
        let rot = pose.rotation_matrix();
        Superquadric {
            dim,
            eps,
            axes,
            pose,
            rot,
        }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    /// Shape exponents: one value in the plane, `[e1, e2]` in space.
    pub fn eps(&self) -> &[f64] {
        match self.dim {
            Dim::Two => &self.eps[..1],
            Dim::Three => &self.eps[..],
        }
    }

    pub fn axes(&self) -> &[f64] {
        &self.axes[..self.dim.n()]
    }

    pub fn pose(&self) -> &RigidPose {
        &self.pose
    }

    pub fn center(&self) -> Point {
        self.pose.translation
    }

    pub fn rotation_matrix(&self) -> &Matrix3<f64> {
        &self.rot
    }

    pub fn min_axis(&self) -> f64 {
        self.axes().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_axis(&self) -> f64 {
        self.axes().iter().copied().fold(0.0, f64::max)
    }

    /// Local axis index of the shortest semi-axis.
    pub fn shortest_axis_index(&self) -> usize {
        argext(self.axes(), |a, b| a < b)
    }

    /// Local axis index of the longest semi-axis.
    pub fn longest_axis_index(&self) -> usize {
        argext(self.axes(), |a, b| a > b)
    }

    /// Radius of a ball about the center that contains the shape.
    pub fn bounding_radius(&self) -> f64 {
        self.axes().iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    /// Distance from `world` to the shape's local bounding box, a lower bound
    /// on the distance to the shape itself.
    pub fn box_distance(&self, world: &Point) -> f64 {
        let p = self.from_world(world);
        self.axes()
            .iter()
            .enumerate()
            .map(|(i, a)| (p[i].abs() - a).max(0.0).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Same shape and exponents with a new pose.
    pub fn with_pose(&self, pose: RigidPose) -> Self {
        Self::assemble(self.dim, self.eps, self.axes, pose)
    }

    /// Grows every semi-axis by `margin`.
    pub fn expand(&self, margin: f64) -> Result<Self> {
        if !(margin >= 0.0) {
            return Err(Error::NegativeMargin(margin));
        }
        let mut axes = self.axes;
        for a in axes.iter_mut().take(self.dim.n()) {
            *a += margin;
        }
        Ok(Self::assemble(self.dim, self.eps, axes, self.pose))
    }

    pub fn to_world(&self, local: &Point) -> Point {
        self.rot * local + self.pose.translation
    }

    pub fn from_world(&self, world: &Point) -> Point {
        self.rot.transpose() * (world - self.pose.translation)
    }

    /// Implicit function in local coordinates.
    pub fn inside_outside_local(&self, p: &Point) -> f64 {
        match self.dim {
            Dim::Two => {
                let e = 2.0 / self.eps[0];
                (p.x.abs() / self.axes[0]).powf(e) + (p.y.abs() / self.axes[1]).powf(e) - 1.0
            }
            Dim::Three => {
                let [e1, e2] = self.eps;
                let xy = (p.x.abs() / self.axes[0]).powf(2.0 / e2) + (p.y.abs() / self.axes[1]).powf(2.0 / e2);
                xy.powf(e2 / e1) + (p.z.abs() / self.axes[2]).powf(2.0 / e1) - 1.0
            }
        }
    }

    /// Negative strictly inside, zero on the surface, positive outside.
    pub fn inside_outside(&self, world: &Point) -> f64 {
        self.inside_outside_local(&self.from_world(world))
    }

    /// Signed-power parametrisation in local coordinates.
    /// `angles = [omega]` in the plane, `[eta, omega]` in space.
    pub fn local_surface_point(&self, angles: &[f64]) -> Point {
        match self.dim {
            Dim::Two => {
                let (s, c) = angles[0].sin_cos();
                let e = self.eps[0];
                Vector3::new(self.axes[0] * signed_pow(c, e), self.axes[1] * signed_pow(s, e), 0.0)
            }
            Dim::Three => {
                let [e1, e2] = self.eps;
                let (se, ce) = angles[0].sin_cos();
                let (so, co) = angles[1].sin_cos();
                let ce1 = signed_pow(ce, e1);
                Vector3::new(
                    self.axes[0] * ce1 * signed_pow(co, e2),
                    self.axes[1] * ce1 * signed_pow(so, e2),
                    self.axes[2] * signed_pow(se, e1),
                )
            }
        }
    }

    pub fn surface_point(&self, angles: &[f64]) -> Point {
        self.to_world(&self.local_surface_point(angles))
    }

    /// Surface point hit by the ray from the center along the direction with
    /// polar angles `angles` (`[phi]` in the plane, `[elevation, azimuth]` in space).
    ///
    /// This parametrisation is smooth for every admissible exponent, which makes
    /// it the better-conditioned choice for local optimisation.
    pub fn local_radial_point(&self, angles: &[f64]) -> Point {
        let dir = match self.dim {
            Dim::Two => {
                let (s, c) = angles[0].sin_cos();
                Vector3::new(c, s, 0.0)
            }
            Dim::Three => {
                let (se, ce) = angles[0].sin_cos();
                let (so, co) = angles[1].sin_cos();
                Vector3::new(ce * co, ce * so, se)
            }
        };
        // F(r d) + 1 = r^(2 / e_outer) (F(d) + 1)
        let g = self.inside_outside_local(&dir) + 1.0;
        dir * g.powf(-0.5 * self.eps[0])
    }

    pub fn radial_point(&self, angles: &[f64]) -> Point {
        self.to_world(&self.local_radial_point(angles))
    }

    /// Polar angles of the ray through a local point (inverse direction of
    /// [`Self::local_radial_point`]).
    pub fn radial_angles(&self, local: &Point) -> [f64; 2] {
        match self.dim {
            Dim::Two => [local.y.atan2(local.x), 0.0],
            Dim::Three => {
                let rho = local.x.hypot(local.y);
                [local.z.atan2(rho), local.y.atan2(local.x)]
            }
        }
    }
}

fn argext(v: &[f64], better: impl Fn(f64, f64) -> bool) -> usize {
    let mut best = 0;
    for (i, &a) in v.iter().enumerate().skip(1) {
        if better(a, v[best]) {
            best = i;
        }
    }
    best
}

fn check_eps(e: f64, index: usize) -> Result<()> {
    if !(EPS_MIN..=EPS_MAX).contains(&e) {
        return Err(Error::InvalidShape(format!(
            "eps[{index}] = {e} outside [{EPS_MIN}, {EPS_MAX}]"
        )));
    }
    Ok(())
}

fn check_axes(axes: &[f64]) -> Result<()> {
    for (i, &a) in axes.iter().enumerate() {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidShape(format!("axes[{i}] = {a} must be > 0")));
        }
    }
    Ok(())
}

/// Axis-aligned world box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WorldBox {
    pub dim: Dim,
    pub min: Point,
    pub max: Point,
}

impl WorldBox {
    pub fn new_2d(min: [f64; 2], max: [f64; 2]) -> Result<Self> {
        Self::new(
            Dim::Two,
            Vector3::new(min[0], min[1], 0.0),
            Vector3::new(max[0], max[1], 0.0),
        )
    }

    pub fn new_3d(min: [f64; 3], max: [f64; 3]) -> Result<Self> {
        Self::new(Dim::Three, Vector3::from(min), Vector3::from(max))
    }

    fn new(dim: Dim, min: Point, max: Point) -> Result<Self> {
        for k in 0..dim.n() {
            if !(max[k] > min[k]) {
                return Err(Error::validation(
                    format!("world.max[{k}]"),
                    format!("must exceed world.min[{k}] ({} <= {})", max[k], min[k]),
                ));
            }
        }
        Ok(WorldBox { dim, min, max })
    }

    pub fn diagonal(&self) -> f64 {
        (self.max - self.min).norm()
    }

    pub fn contains(&self, p: &Point, tol: f64) -> bool {
        (0..self.dim.n()).all(|k| p[k] >= self.min[k] - tol && p[k] <= self.max[k] + tol)
    }

    pub fn center(&self) -> Point {
        (self.min + self.max) * 0.5
    }
}
