//! Closest points between superquadrics and from points to superquadrics.
//!
//! Distances are minimised over the polar-angle surface parametrisation
//! ([`Superquadric::radial_point`]) from a uniform grid of starting angles.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::geometry::{Dim, Point, Superquadric};
use crate::optim::{bfgs, MinimizeOptions};

/// Shapes whose surfaces come closer than this are treated as touching.
pub const CONTACT_TOL: f64 = 1e-7;

#[derive(Clone, Debug)]
pub struct ProximityOptions {
    /// Starting angles per shape in the plane.
    pub seeds_2d: usize,
    /// Per-angle grid size per shape in space (`n x n` starts per shape).
    pub grid_3d: usize,
    /// Refine only the best `k` start pairs (ranked by their initial distance)
    /// in the plane; `None` refines every start.
    pub refine_best_2d: Option<usize>,
    /// Same for spatial shapes.
    pub refine_best_3d: Option<usize>,
    pub minimize: MinimizeOptions,
}

impl Default for ProximityOptions {
    fn default() -> Self {
        ProximityOptions {
            seeds_2d: 8,
            grid_3d: 4,
            refine_best_2d: None,
            refine_best_3d: Some(16),
            minimize: MinimizeOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClosestPair {
    /// Point on the first shape.
    pub p_i: Point,
    /// Point on the second shape.
    pub p_j: Point,
    pub distance: f64,
    pub converged: bool,
}

fn seed_angles(dim: Dim, opts: &ProximityOptions) -> Vec<[f64; 2]> {
    match dim {
        Dim::Two => {
            let n = opts.seeds_2d.max(1);
            (0..n).map(|k| [-PI + 2.0 * PI * k as f64 / n as f64, 0.0]).collect()
        }
        Dim::Three => {
            let n = opts.grid_3d.max(1);
            let mut out = Vec::with_capacity(n * n);
            for a in 0..n {
                let eta = -PI / 2.0 + PI * (a as f64 + 0.5) / n as f64;
                for b in 0..n {
                    out.push([eta, -PI + 2.0 * PI * b as f64 / n as f64]);
                }
            }
            out
        }
    }
}

fn select_starts(mut scored: Vec<(f64, usize)>, keep: Option<usize>) -> Vec<usize> {
    if let Some(k) = keep {
        scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        scored.truncate(k.max(1));
    }
    scored.into_iter().map(|(_, i)| i).collect()
}

pub fn closest_pair(a: &Superquadric, b: &Superquadric) -> ClosestPair {
    closest_pair_with(a, b, &ProximityOptions::default())
}

/// Closest surface points between two shapes of the same dimension.
///
/// For interpenetrating shapes the returned points sit near the intersection of
/// the two surfaces and the distance is close to zero; use [`overlaps`] to
/// classify.
pub fn closest_pair_with(a: &Superquadric, b: &Superquadric, opts: &ProximityOptions) -> ClosestPair {
    assert_eq!(a.dim(), b.dim(), "closest_pair on shapes of different dimension");
    let seeds = seed_angles(a.dim(), opts);
    let mut starts = Vec::with_capacity(seeds.len() * seeds.len());
    for u in &seeds {
        for v in &seeds {
            starts.push((*u, *v));
        }
    }

    match a.dim() {
        Dim::Two => {
            let f = |x: &[f64; 2]| (a.radial_point(&x[..1]) - b.radial_point(&x[1..])).norm_squared();
            let scored = starts
                .iter()
                .enumerate()
                .map(|(k, (u, v))| (f(&[u[0], v[0]]), k))
                .collect();
            let mut best: Option<(f64, [f64; 2], bool)> = None;
            for k in select_starts(scored, opts.refine_best_2d) {
                let (u, v) = starts[k];
                let m = bfgs(f, [u[0], v[0]], &opts.minimize);
                if best.is_none_or(|b| m.value < b.0) {
                    best = Some((m.value, m.x, m.converged));
                }
            }
            let (_, x, converged) = best.expect("at least one start");
            finish(a.radial_point(&x[..1]), b.radial_point(&x[1..]), converged)
        }
        Dim::Three => {
            let f = |x: &[f64; 4]| (a.radial_point(&x[..2]) - b.radial_point(&x[2..])).norm_squared();
            let scored = starts
                .iter()
                .enumerate()
                .map(|(k, (u, v))| (f(&[u[0], u[1], v[0], v[1]]), k))
                .collect();
            let mut best: Option<(f64, [f64; 4], bool)> = None;
            for k in select_starts(scored, opts.refine_best_3d) {
                let (u, v) = starts[k];
                let m = bfgs(f, [u[0], u[1], v[0], v[1]], &opts.minimize);
                if best.is_none_or(|b| m.value < b.0) {
                    best = Some((m.value, m.x, m.converged));
                }
            }
            let (_, x, converged) = best.expect("at least one start");
            finish(a.radial_point(&x[..2]), b.radial_point(&x[2..]), converged)
        }
    }
}

fn finish(p_i: Point, p_j: Point, converged: bool) -> ClosestPair {
    ClosestPair {
        distance: (p_i - p_j).norm(),
        p_i,
        p_j,
        converged,
    }
}

/// Cheap lower bound on the distance between two shapes (negative when the
/// bounds overlap): the better of the bounding-sphere gap and each center's
/// distance to the other's bounding box less its own bounding radius.
pub fn distance_lower_bound(a: &Superquadric, b: &Superquadric) -> f64 {
    let spheres = (a.center() - b.center()).norm() - a.bounding_radius() - b.bounding_radius();
    let a_to_box = b.box_distance(&a.center()) - a.bounding_radius();
    let b_to_box = a.box_distance(&b.center()) - b.bounding_radius();
    spheres.max(a_to_box).max(b_to_box)
}

/// Overlap test on a computed closest pair: either witness lies in the other shape,
/// or the surfaces touch.
pub fn overlaps(a: &Superquadric, b: &Superquadric, pair: &ClosestPair) -> bool {
    a.inside_outside(&pair.p_j) <= 0.0 || b.inside_outside(&pair.p_i) <= 0.0 || pair.distance <= CONTACT_TOL
}

/// Closest pair for every `i < j`, in row-major pair order.
///
/// Pairs are evaluated in parallel; the output does not depend on scheduling.
pub fn all_pairs(shapes: &[Superquadric], opts: &ProximityOptions) -> Vec<((usize, usize), ClosestPair)> {
    let pairs: Vec<(usize, usize)> = (0..shapes.len())
        .flat_map(|i| (i + 1..shapes.len()).map(move |j| (i, j)))
        .collect();
    pairs
        .into_par_iter()
        .map(|(i, j)| ((i, j), closest_pair_with(&shapes[i], &shapes[j], opts)))
        .collect()
}

/// Closest surface point to `point` and the distance to the shape (zero inside).
pub fn point_distance(point: &Point, sq: &Superquadric) -> (Point, f64) {
    point_distance_with(point, sq, &ProximityOptions::default())
}

pub fn point_distance_with(point: &Point, sq: &Superquadric, opts: &ProximityOptions) -> (Point, f64) {
    let inside = sq.inside_outside(point) < 0.0;
    let ray = sq.radial_angles(&sq.from_world(point));
    let mut seeds = seed_angles(sq.dim(), opts);
    seeds.push(ray);

    let best = match sq.dim() {
        Dim::Two => {
            let f = |x: &[f64; 1]| (sq.radial_point(x) - point).norm_squared();
            seeds
                .iter()
                .map(|s| bfgs(f, [s[0]], &opts.minimize))
                .min_by(|a, b| a.value.total_cmp(&b.value))
                .map(|m| sq.radial_point(&m.x))
        }
        Dim::Three => {
            let f = |x: &[f64; 2]| (sq.radial_point(x) - point).norm_squared();
            seeds
                .iter()
                .map(|s| bfgs(f, *s, &opts.minimize))
                .min_by(|a, b| a.value.total_cmp(&b.value))
                .map(|m| sq.radial_point(&m.x))
        }
    }
    .expect("seeds are never empty");

    let d = if inside { 0.0 } else { (best - point).norm() };
    (best, d)
}

/// Separation of two shapes: zero when they overlap.
pub fn separation(a: &Superquadric, b: &Superquadric, opts: &ProximityOptions) -> f64 {
    let pair = closest_pair_with(a, b, opts);
    if overlaps(a, b, &pair) {
        0.0
    } else {
        pair.distance
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn circle(x: f64, y: f64, r: f64) -> Superquadric {
        Superquadric::new_2d(1.0, [r, r], [x, y], 0.0).unwrap()
    }

    #[test]
    fn collinear_circles() {
        let p = closest_pair(&circle(0.0, 0.0, 1.0), &circle(4.0, 0.0, 1.0));
        assert_relative_eq!(p.distance, 2.0, epsilon = 1e-9);
        assert_relative_eq!(p.p_i, Point::new(1.0, 0.0, 0.0), epsilon = 1e-6);
        assert_relative_eq!(p.p_j, Point::new(3.0, 0.0, 0.0), epsilon = 1e-6);
    }

    #[test]
    fn ellipse_and_circle() {
        // major semi-axis 2 along x
        let e = Superquadric::new_2d(1.0, [2.0, 1.0], [0.0, 0.0], 0.0).unwrap();
        let p = closest_pair(&e, &circle(5.0, 0.0, 1.0));
        assert_relative_eq!(p.distance, 2.0, epsilon = 1e-8);
    }

    #[test]
    fn overlap_examples() {
        let (a, b) = (circle(0.0, 0.0, 1.0), circle(4.0, 0.0, 1.0));
        assert!(!overlaps(&a, &b, &closest_pair(&a, &b)));
        let c = circle(1.0, 0.0, 1.0);
        assert!(overlaps(&a, &c, &closest_pair(&a, &c)));
        let t = circle(2.0, 0.0, 1.0);
        assert!(overlaps(&a, &t, &closest_pair(&a, &t)));
    }

    #[test]
    fn nested_shapes_overlap() {
        let big = circle(0.0, 0.0, 3.0);
        let small = circle(0.5, 0.0, 0.5);
        assert!(overlaps(&big, &small, &closest_pair(&big, &small)));
        assert!(overlaps(&small, &big, &closest_pair(&small, &big)));
    }

    #[test]
    fn point_distance_examples() {
        let c = circle(0.0, 0.0, 1.0);
        let (p, d) = point_distance(&Point::new(3.0, 0.0, 0.0), &c);
        assert_relative_eq!(d, 2.0, epsilon = 1e-9);
        assert_relative_eq!(p, Point::new(1.0, 0.0, 0.0), epsilon = 1e-6);
        let (p, d) = point_distance(&Point::zeros(), &c);
        assert_eq!(d, 0.0);
        assert!(c.inside_outside(&p).abs() < 1e-9);
    }

    #[test]
    fn spheres_exact() {
        let a = Superquadric::new_3d([1.0, 1.0], [1.0; 3], [0.0; 3], [0.0; 3]).unwrap();
        let b = Superquadric::new_3d([1.0, 1.0], [0.5; 3], [2.0, 1.0, -1.0], [0.3, 0.0, 0.1]).unwrap();
        let p = closest_pair(&a, &b);
        assert_relative_eq!(p.distance, 6f64.sqrt() - 1.5, epsilon = 1e-9);
    }

    #[test]
    fn batch_matches_serial() {
        let shapes: Vec<_> = (0..5).map(|k| circle(3.0 * k as f64, (k % 2) as f64, 1.0)).collect();
        let batch = all_pairs(&shapes, &ProximityOptions::default());
        assert_eq!(batch.len(), 10);
        for ((i, j), p) in batch {
            assert_eq!(p, closest_pair(&shapes[i], &shapes[j]));
        }
    }
}
