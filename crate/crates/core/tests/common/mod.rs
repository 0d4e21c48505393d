#![allow(dead_code)]

use std::f64::consts::PI;

use rand::Rng;
use sqvd_core::{Point, Superquadric};

/// Samples the signed-power parametrisation on a uniform angle grid
/// (`n` points in the plane, `n x n` in space).
pub fn sample_surface(sq: &Superquadric, n: usize) -> Vec<Point> {
    match sq.dim() {
        sqvd_core::Dim::Two => (0..n)
            .map(|k| sq.surface_point(&[-PI + 2.0 * PI * k as f64 / n as f64]))
            .collect(),
        sqvd_core::Dim::Three => {
            let mut out = Vec::with_capacity(n * n);
            for a in 0..n {
                let eta = -PI / 2.0 + PI * a as f64 / (n - 1) as f64;
                for b in 0..n {
                    out.push(sq.surface_point(&[eta, -PI + 2.0 * PI * b as f64 / n as f64]));
                }
            }
            out
        }
    }
}

/// Exact minimum distance between two point sets (sweep over x with pruning).
pub fn min_set_distance(a: &[Point], b: &[Point]) -> f64 {
    closest_in_sets(a, b).0
}

/// Minimum distance plus the indices realising it.
pub fn closest_in_sets(a: &[Point], b: &[Point]) -> (f64, usize, usize) {
    closest_in_sets_below(a, b, f64::INFINITY)
}

/// As [`closest_in_sets`], skipping pairs farther apart than `bound`.
pub fn closest_in_sets_below(a: &[Point], b: &[Point], bound: f64) -> (f64, usize, usize) {
    let mut order: Vec<usize> = (0..b.len()).collect();
    order.sort_by(|&p, &q| b[p].x.total_cmp(&b[q].x));
    let xs: Vec<f64> = order.iter().map(|&k| b[k].x).collect();
    let mut best = (bound, usize::MAX, usize::MAX);
    for (ia, p) in a.iter().enumerate() {
        let start = xs.partition_point(|&x| x < p.x);
        for &k in order[start..].iter() {
            if b[k].x - p.x >= best.0 {
                break;
            }
            let d = (p - b[k]).norm();
            if d < best.0 {
                best = (d, ia, k);
            }
        }
        for &k in order[..start].iter().rev() {
            if p.x - b[k].x >= best.0 {
                break;
            }
            let d = (p - b[k]).norm();
            if d < best.0 {
                best = (d, ia, k);
            }
        }
    }
    best
}

/// Surface point on the ray from the center along the local direction `dir`,
/// located by bisection on the implicit function.
pub fn ray_surface_point(sq: &Superquadric, dir: Point) -> Point {
    let mut hi = 2.0 * sq.bounding_radius();
    let mut lo = 0.0;
    for _ in 0..56 {
        let mid = 0.5 * (lo + hi);
        if sq.inside_outside_local(&(dir * mid)) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    sq.to_world(&(dir * (0.5 * (lo + hi))))
}

fn ray_dir(dim: sqvd_core::Dim, a: [f64; 2]) -> Point {
    match dim {
        sqvd_core::Dim::Two => Point::new(a[0].cos(), a[0].sin(), 0.0),
        sqvd_core::Dim::Three => Point::new(a[0].cos() * a[1].cos(), a[0].cos() * a[1].sin(), a[0].sin()),
    }
}

fn polar_of(sq: &Superquadric, p: &Point) -> [f64; 2] {
    let l = sq.from_world(p);
    match sq.dim() {
        sqvd_core::Dim::Two => [l.y.atan2(l.x), 0.0],
        sqvd_core::Dim::Three => [l.z.atan2(l.x.hypot(l.y)), l.y.atan2(l.x)],
    }
}

fn ray_grid(sq: &Superquadric, center: [f64; 2], half: [f64; 2], n: usize) -> Vec<Point> {
    let lin = |c: f64, h: f64, k: usize| c - h + 2.0 * h * k as f64 / (n - 1) as f64;
    match sq.dim() {
        sqvd_core::Dim::Two => (0..n)
            .map(|k| ray_surface_point(sq, ray_dir(sq.dim(), [lin(center[0], half[0], k), 0.0])))
            .collect(),
        sqvd_core::Dim::Three => {
            let mut out = Vec::with_capacity(n * n);
            for a in 0..n {
                let eta = lin(center[0], half[0], a).clamp(-PI / 2.0, PI / 2.0);
                for b in 0..n {
                    out.push(ray_surface_point(
                        sq,
                        ray_dir(sq.dim(), [eta, lin(center[1], half[1], b)]),
                    ));
                }
            }
            out
        }
    }
}

/// Keeps the samples that could be within `reach` of `other`.
fn near(points: Vec<Point>, other: &Superquadric, reach: f64) -> Vec<Point> {
    let r = other.bounding_radius() + reach;
    points
        .into_iter()
        .filter(|p| (p - other.center()).norm() <= r)
        .collect()
}

/// Brute-force surface distance. Level 0 is the exhaustive minimum over 10^4
/// signed-power samples plus 10^4 ray samples per shape; each further level
/// re-samples 10^4 rays in a window around the best pair found so far.
pub fn sampled_distance(a: &Superquadric, b: &Superquadric, levels: usize) -> f64 {
    let (n, half0) = match a.dim() {
        sqvd_core::Dim::Two => (10_000, [PI, 0.0]),
        sqvd_core::Dim::Three => (100, [PI / 2.0, PI]),
    };
    let upper = min_set_distance(&sample_surface(a, 64), &sample_surface(b, 64));
    let mut sa = sample_surface(a, n);
    sa.extend(ray_grid(a, [0.0, 0.0], half0, n));
    let mut sb = sample_surface(b, n);
    sb.extend(ray_grid(b, [0.0, 0.0], half0, n));
    let sa = near(sa, b, 2.0 * upper);
    let sb = near(sb, a, 2.0 * upper);
    let (mut best, mut ia, mut ib) = closest_in_sets_below(&sa, &sb, upper * (1.0 + 1e-9));
    if ia == usize::MAX {
        (best, ia, ib) = closest_in_sets(&sa, &sb);
    }
    let (mut pa, mut pb) = (sa[ia], sb[ib]);

    // refinement windows: 10^3 samples per shape, 4 grid spacings wide
    let m = match a.dim() {
        sqvd_core::Dim::Two => 1000,
        sqvd_core::Dim::Three => 32,
    };
    let mut half = match a.dim() {
        sqvd_core::Dim::Two => [4.0 * 2.0 * PI / n as f64, 0.0],
        sqvd_core::Dim::Three => [4.0 * PI / n as f64, 4.0 * 2.0 * PI / n as f64],
    };
    for _ in 0..levels {
        let ga = ray_grid(a, polar_of(a, &pa), half, m);
        let gb = ray_grid(b, polar_of(b, &pb), half, m);
        let (d, ia, ib) = closest_in_sets_below(&ga, &gb, best);
        if ia != usize::MAX && d < best {
            best = d;
            pa = ga[ia];
            pb = gb[ib];
        }
        half = [half[0] * 8.0 / (m - 1) as f64, half[1] * 8.0 / (m - 1) as f64];
    }
    best
}

pub fn random_2d(rng: &mut impl Rng, eps: (f64, f64), center_span: f64) -> Superquadric {
    Superquadric::new_2d(
        rng.gen_range(eps.0..eps.1),
        [rng.gen_range(0.2..1.5), rng.gen_range(0.2..1.5)],
        [
            rng.gen_range(-center_span..center_span),
            rng.gen_range(-center_span..center_span),
        ],
        rng.gen_range(-PI..PI),
    )
    .unwrap()
}

pub fn random_3d(rng: &mut impl Rng, eps: (f64, f64), center_span: f64) -> Superquadric {
    Superquadric::new_3d(
        [rng.gen_range(eps.0..eps.1), rng.gen_range(eps.0..eps.1)],
        [
            rng.gen_range(0.2..1.5),
            rng.gen_range(0.2..1.5),
            rng.gen_range(0.2..1.5),
        ],
        [
            rng.gen_range(-center_span..center_span),
            rng.gen_range(-center_span..center_span),
            rng.gen_range(-center_span..center_span),
        ],
        [
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        ],
    )
    .unwrap()
}

/// True when no sample of either shape lies inside the other.
pub fn disjoint_by_samples(a: &Superquadric, sa: &[Point], b: &Superquadric, sb: &[Point]) -> bool {
    sa.iter().all(|p| b.inside_outside(p) > 0.0) && sb.iter().all(|p| a.inside_outside(p) > 0.0)
}
