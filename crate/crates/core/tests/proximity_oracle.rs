mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sqvd_core::proximity::{closest_pair, distance_lower_bound, point_distance, ProximityOptions};
use sqvd_core::{Point, Superquadric};

use common::*;

fn disjoint_pairs(dim: usize, count: usize, seed: u64) -> Vec<(Superquadric, Superquadric)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let (a, b, n) = if dim == 2 {
            (
                random_2d(&mut rng, (0.3, 1.8), 3.0),
                random_2d(&mut rng, (0.3, 1.8), 3.0),
                10_000,
            )
        } else {
            (
                random_3d(&mut rng, (0.3, 1.8), 3.0),
                random_3d(&mut rng, (0.3, 1.8), 3.0),
                100,
            )
        };
        let sa = sample_surface(&a, n);
        let sb = sample_surface(&b, n);
        if disjoint_by_samples(&a, &sa, &b, &sb) {
            out.push((a, b));
        }
    }
    out
}

fn oracle_pairs(dim: usize, count: usize, seed: u64) -> Vec<(Superquadric, Superquadric, f64)> {
    disjoint_pairs(dim, count, seed)
        .into_par_iter()
        .map(|(a, b)| {
            let d = sampled_distance(&a, &b, if dim == 2 { 1 } else { 3 });
            (a, b, d)
        })
        .collect()
}

#[test]
fn planar_pairs_match_sampling_oracle() {
    for (k, (a, b, oracle)) in oracle_pairs(2, 40, 7).into_iter().enumerate() {
        let p = closest_pair(&a, &b);
        let rel = (p.distance - oracle).abs() / oracle;
        assert!(rel <= 1e-3, "pair {k}: {} vs oracle {oracle} (rel {rel:e})", p.distance);
        assert!(a.inside_outside(&p.p_i).abs() < 1e-6 && b.inside_outside(&p.p_j).abs() < 1e-6);
    }
}

#[test]
fn spatial_pairs_match_sampling_oracle() {
    for (k, (a, b, oracle)) in oracle_pairs(3, 15, 11).into_iter().enumerate() {
        let p = closest_pair(&a, &b);
        let rel = (p.distance - oracle).abs() / oracle;
        assert!(rel <= 1e-3, "pair {k}: {} vs oracle {oracle} (rel {rel:e})", p.distance);
    }
}

#[test]
fn distance_is_symmetric() {
    for (a, b) in disjoint_pairs(2, 30, 3).into_iter().chain(disjoint_pairs(3, 10, 5)) {
        let ab = closest_pair(&a, &b).distance;
        let ba = closest_pair(&b, &a).distance;
        assert!((ab - ba).abs() <= 1e-6, "{ab} vs {ba}");
    }
}

#[test]
fn distance_respects_cheap_lower_bounds() {
    for (a, b) in disjoint_pairs(2, 40, 13).into_iter().chain(disjoint_pairs(3, 10, 17)) {
        let d = closest_pair(&a, &b).distance;
        let sep = (a.center() - b.center()).norm();
        let bound = (sep - a.bounding_radius() - b.bounding_radius()).max(0.0);
        assert!(d + 1e-12 >= bound);
        assert!(
            d + 1e-12 >= distance_lower_bound(&a, &b),
            "{d} vs {}",
            distance_lower_bound(&a, &b)
        );
        // max semi-axis bounds the shape only for eps >= 1
        if a.eps().iter().chain(b.eps()).all(|&e| e >= 1.0) {
            assert!(d + 1e-12 >= (sep - a.max_axis() - b.max_axis()).max(0.0));
        }
    }
}

#[test]
fn point_distance_matches_sampling_oracle() {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..50 {
        let sq = random_2d(&mut rng, (0.3, 1.8), 1.0);
        let p = Point::new(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0), 0.0);
        if sq.inside_outside(&p) <= 0.0 {
            continue;
        }
        let oracle = min_set_distance(&[p], &sample_surface(&sq, 10_000));
        let (_, d) = point_distance(&p, &sq);
        assert!((d - oracle).abs() <= 1e-3 * oracle.max(1e-3), "{d} vs {oracle}");
    }
    for _ in 0..20 {
        let sq = random_3d(&mut rng, (0.3, 1.8), 1.0);
        let p = Point::new(
            rng.gen_range(-4.0..4.0),
            rng.gen_range(-4.0..4.0),
            rng.gen_range(-4.0..4.0),
        );
        if sq.inside_outside(&p) <= 0.0 {
            continue;
        }
        let oracle = min_set_distance(&[p], &sample_surface(&sq, 200));
        let (_, d) = point_distance(&p, &sq);
        assert!((d - oracle).abs() <= 1e-3 * oracle.max(1e-2), "{d} vs {oracle}");
    }
}

#[test]
fn refining_a_subset_of_starts_agrees() {
    let all = ProximityOptions {
        refine_best_2d: None,
        refine_best_3d: None,
        ..Default::default()
    };
    let opts = ProximityOptions {
        refine_best_2d: Some(8),
        refine_best_3d: Some(8),
        ..Default::default()
    };
    for (a, b) in disjoint_pairs(2, 30, 23).into_iter().chain(disjoint_pairs(3, 15, 29)) {
        let full = sqvd_core::proximity::closest_pair_with(&a, &b, &all).distance;
        let fast = sqvd_core::proximity::closest_pair_with(&a, &b, &opts).distance;
        assert!((full - fast).abs() <= 1e-6 * full.max(1.0), "{full} vs {fast}");
    }
}
