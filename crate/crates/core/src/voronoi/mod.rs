//! Generalized Voronoi diagram over clusters of expanded obstacles.
//!
//! Overlapping obstacles are merged into clusters, every pair of clusters is
//! split by the bisector of its closest witness pair, and each cluster's cell is
//! the world box intersected with the halfspaces on its side.

mod cell;

use std::collections::HashMap;

use rayon::prelude::*;

pub use cell::{boundary_halfspace, clip_box, Boundary, CellEdge, CellFace, Halfspace, PolytopeCell, GEOM_EPS};

use crate::error::{Error, Result};
use crate::geometry::{Point, Superquadric, WorldBox};
use crate::proximity::{all_pairs, overlaps, ClosestPair, ProximityOptions};

/// Witness distance below which two clusters are considered touching.
pub const TOUCH_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cluster {
    pub id: usize,
    /// Obstacle indices, ascending.
    pub members: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Hyperplane {
    pub id: usize,
    /// Unit normal `normalize(p_i - p_j)`, pointing toward cluster `clusters.0`.
    pub normal: Point,
    pub offset: f64,
    /// `(i, j)` cluster ids with `i < j`.
    pub clusters: (usize, usize),
    /// Closest points on clusters `i` and `j`.
    pub witnesses: (Point, Point),
    pub distance: f64,
}

impl Hyperplane {
    /// Halfspace on the side of `cluster`, which must be one of the two sources.
    pub fn halfspace_for(&self, cluster: usize) -> Halfspace {
        if cluster == self.clusters.0 {
            Halfspace {
                normal: -self.normal,
                offset: -self.offset,
            }
        } else {
            debug_assert_eq!(cluster, self.clusters.1);
            Halfspace {
                normal: self.normal,
                offset: self.offset,
            }
        }
    }

    /// The other cluster of the pair.
    pub fn other(&self, cluster: usize) -> usize {
        if cluster == self.clusters.0 {
            self.clusters.1
        } else {
            self.clusters.0
        }
    }
}

/// Closest pairs of all obstacles, keyed by `(i, j)` with `i < j`.
pub type PairTable = HashMap<(usize, usize), ClosestPair>;

pub fn pair_table(shapes: &[Superquadric], opts: &ProximityOptions) -> PairTable {
    all_pairs(shapes, opts).into_iter().collect()
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Connected components of the overlap relation over precomputed pairs.
pub fn clusters_from_pairs(shapes: &[Superquadric], pairs: &PairTable) -> Vec<Cluster> {
    let n = shapes.len();
    let mut parent: Vec<usize> = (0..n).collect();
    let mut keys: Vec<&(usize, usize)> = pairs.keys().collect();
    keys.sort();
    for &(i, j) in keys {
        if overlaps(&shapes[i], &shapes[j], &pairs[&(i, j)]) {
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            // lowest index becomes the root so ids follow the lowest member
            parent[ri.max(rj)] = ri.min(rj);
        }
    }
    let mut by_root: Vec<Vec<usize>> = vec![Vec::new(); n];
    for k in 0..n {
        let r = find(&mut parent, k);
        by_root[r].push(k);
    }
    by_root
        .into_iter()
        .filter(|m| !m.is_empty())
        .enumerate()
        .map(|(id, members)| Cluster { id, members })
        .collect()
}

/// Clusters of mutually overlapping shapes.
pub fn build_clusters(shapes: &[Superquadric], opts: &ProximityOptions) -> Vec<Cluster> {
    clusters_from_pairs(shapes, &pair_table(shapes, opts))
}

/// Maximum-margin hyperplane between two clusters from precomputed member pairs.
pub fn hyperplane_from_pairs(id: usize, ci: &Cluster, cj: &Cluster, pairs: &PairTable) -> Result<Hyperplane> {
    let mut best: Option<(f64, Point, Point)> = None;
    for &a in &ci.members {
        for &b in &cj.members {
            let (p_i, p_j) = if a < b {
                let p = &pairs[&(a, b)];
                (p.p_i, p.p_j)
            } else {
                let p = &pairs[&(b, a)];
                (p.p_j, p.p_i)
            };
            let d = (p_i - p_j).norm();
            if best.is_none_or(|(bd, _, _)| d < bd) {
                best = Some((d, p_i, p_j));
            }
        }
    }
    let (distance, p_i, p_j) = best.expect("clusters are non-empty");
    if distance <= TOUCH_TOL {
        return Err(Error::ClusteringInconsistency(ci.id, cj.id, distance));
    }
    let normal = (p_i - p_j) / distance;
    let offset = normal.dot(&((p_i + p_j) * 0.5));
    let ((ia, wa), (ib, wb)) = if ci.id < cj.id {
        ((ci.id, p_i), (cj.id, p_j))
    } else {
        ((cj.id, p_j), (ci.id, p_i))
    };
    let sign = if ci.id < cj.id { 1.0 } else { -1.0 };
    Ok(Hyperplane {
        id,
        normal: normal * sign,
        offset: offset * sign,
        clusters: (ia, ib),
        witnesses: (wa, wb),
        distance,
    })
}

/// Maximum-margin hyperplane between two clusters of `shapes`.
pub fn separating_hyperplane(
    id: usize,
    ci: &Cluster,
    cj: &Cluster,
    shapes: &[Superquadric],
    opts: &ProximityOptions,
) -> Result<Hyperplane> {
    let mut pairs = PairTable::new();
    for &a in &ci.members {
        for &b in &cj.members {
            let (lo, hi) = (a.min(b), a.max(b));
            pairs.insert(
                (lo, hi),
                crate::proximity::closest_pair_with(&shapes[lo], &shapes[hi], opts),
            );
        }
    }
    hyperplane_from_pairs(id, ci, cj, &pairs)
}

/// Cell of `cluster`: the world box clipped by the cluster's side of every plane
/// that involves it.
pub fn build_cell(cluster: &Cluster, planes: &[Hyperplane], world: &WorldBox) -> Result<PolytopeCell> {
    let halfspaces: Vec<(usize, Halfspace)> = planes
        .iter()
        .filter(|p| p.clusters.0 == cluster.id || p.clusters.1 == cluster.id)
        .map(|p| (p.id, p.halfspace_for(cluster.id)))
        .collect();
    clip_box(cluster.id, world, &halfspaces)
}

#[derive(Clone, Debug)]
pub struct Diagram {
    pub world: WorldBox,
    /// Margin added to every obstacle axis (the robot's shortest semi-axis).
    pub margin: f64,
    pub expanded: Vec<Superquadric>,
    pub clusters: Vec<Cluster>,
    /// Cluster id of each obstacle.
    pub cluster_of: Vec<usize>,
    pub hyperplanes: Vec<Hyperplane>,
    /// One cell per cluster, indexed by cluster id.
    pub cells: Vec<PolytopeCell>,
}

impl Diagram {
    pub fn plane(&self, id: usize) -> &Hyperplane {
        &self.hyperplanes[id]
    }

    /// Halfspace inequalities of every boundary element of `cell`.
    pub fn cell_halfspaces(&self, cell: &PolytopeCell) -> Vec<Halfspace> {
        cell.planes
            .iter()
            .map(|&id| self.hyperplanes[id].halfspace_for(cell.cluster_id))
            .collect()
    }
}

/// Expand, cluster, separate and clip.
pub fn build_diagram(
    robot: &Superquadric,
    obstacles: &[Superquadric],
    world: &WorldBox,
    opts: &ProximityOptions,
) -> Result<Diagram> {
    for (k, o) in obstacles.iter().enumerate() {
        if o.dim() != robot.dim() {
            return Err(Error::validation(
                format!("obstacles[{k}]"),
                "dimension differs from the robot",
            ));
        }
    }
    let margin = robot.min_axis();
    let expanded = obstacles.iter().map(|o| o.expand(margin)).collect::<Result<Vec<_>>>()?;
    let pairs = pair_table(&expanded, opts);
    let clusters = clusters_from_pairs(&expanded, &pairs);
    let mut cluster_of = vec![0; expanded.len()];
    for c in &clusters {
        for &m in &c.members {
            cluster_of[m] = c.id;
        }
    }

    let cluster_pairs: Vec<(usize, usize)> = (0..clusters.len())
        .flat_map(|i| (i + 1..clusters.len()).map(move |j| (i, j)))
        .collect();
    let hyperplanes = cluster_pairs
        .iter()
        .enumerate()
        .map(|(id, &(i, j))| hyperplane_from_pairs(id, &clusters[i], &clusters[j], &pairs))
        .collect::<Result<Vec<_>>>()?;

    let cells = clusters
        .par_iter()
        .map(|c| build_cell(c, &hyperplanes, world))
        .collect::<Result<Vec<_>>>()?;
    log::debug!(
        "diagram: {} obstacles, {} clusters, {} hyperplanes",
        expanded.len(),
        clusters.len(),
        hyperplanes.len()
    );

    Ok(Diagram {
        world: *world,
        margin,
        expanded,
        clusters,
        cluster_of,
        hyperplanes,
        cells,
    })
}
