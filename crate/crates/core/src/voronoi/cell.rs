//! Convex cells as world boxes clipped by halfspaces.
//!
//! Planar cells are convex polygons clipped edge by edge. Spatial cells are
//! convex polyhedra with explicit face loops; every clip re-closes the solid
//! with a cap face lying on the clipping plane.

use std::collections::{BTreeSet, HashMap};

use nalgebra::Vector3;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Dim, Point, WorldBox};

/// Classification tolerance for vertices against a clipping plane.
pub const GEOM_EPS: f64 = 1e-9;

/// `normal . x <= offset`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Halfspace {
    pub normal: Vector3<f64>,
    pub offset: f64,
}

impl Halfspace {
    pub fn signed_distance(&self, p: &Point) -> f64 {
        self.normal.dot(p) - self.offset
    }
}

/// What generated a boundary element of a cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Boundary {
    /// Side of the world box along `axis`, at the max corner when `upper`.
    World { axis: usize, upper: bool },
    /// A separating hyperplane, by id.
    Plane { id: usize },
}

impl Boundary {
    pub fn plane_id(&self) -> Option<usize> {
        match *self {
            Boundary::Plane { id } => Some(id),
            Boundary::World { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellFace {
    /// Vertex loop, counter-clockwise seen from outside.
    pub vertices: Vec<usize>,
    pub boundary: Boundary,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellEdge {
    pub a: usize,
    pub b: usize,
    /// Boundaries containing the edge: one in the plane, two adjacent faces in space.
    pub boundaries: Vec<Boundary>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolytopeCell {
    pub cluster_id: usize,
    pub dim: Dim,
    pub vertices: Vec<Point>,
    pub edges: Vec<CellEdge>,
    /// Spatial cells only.
    pub faces: Vec<CellFace>,
    /// Ids of the hyperplanes that bound the final cell.
    pub planes: Vec<usize>,
}

impl PolytopeCell {
    /// True when `p` satisfies all of `halfspaces` within `tol`.
    pub fn contains(&self, halfspaces: &[Halfspace], world: &WorldBox, p: &Point, tol: f64) -> bool {
        world.contains(p, tol) && halfspaces.iter().all(|h| h.signed_distance(p) <= tol)
    }
}

fn world_halfspace(world: &WorldBox, axis: usize, upper: bool) -> Halfspace {
    let mut n = Vector3::zeros();
    if upper {
        n[axis] = 1.0;
        Halfspace {
            normal: n,
            offset: world.max[axis],
        }
    } else {
        n[axis] = -1.0;
        Halfspace {
            normal: n,
            offset: -world.min[axis],
        }
    }
}

/// Clips the world box by `halfspaces` (tagged with their plane ids).
pub fn clip_box(cluster_id: usize, world: &WorldBox, halfspaces: &[(usize, Halfspace)]) -> Result<PolytopeCell> {
    match world.dim {
        Dim::Two => {
            let mut poly = Polygon::from_box(world);
            for (id, h) in halfspaces {
                poly.clip(h, Boundary::Plane { id: *id })
                    .ok_or(Error::EmptyCell(cluster_id))?;
            }
            Ok(poly.into_cell(cluster_id))
        }
        Dim::Three => {
            let mut solid = Polyhedron::from_box(world);
            for (id, h) in halfspaces {
                solid
                    .clip(h, Boundary::Plane { id: *id })
                    .ok_or(Error::EmptyCell(cluster_id))?;
            }
            Ok(solid.into_cell(cluster_id))
        }
    }
}

/// Halfspace description of a cell boundary element.
pub fn boundary_halfspace(boundary: Boundary, world: &WorldBox, plane: impl Fn(usize) -> Halfspace) -> Halfspace {
    match boundary {
        Boundary::World { axis, upper } => world_halfspace(world, axis, upper),
        Boundary::Plane { id } => plane(id),
    }
}

/// Convex polygon; edge `k` runs from vertex `k` to `k + 1` and carries `tags[k]`.
#[derive(Clone, Debug)]
pub(crate) struct Polygon {
    pub verts: Vec<Point>,
    pub tags: Vec<Boundary>,
}

impl Polygon {
    pub fn from_box(world: &WorldBox) -> Self {
        let (lo, hi) = (world.min, world.max);
        Polygon {
            verts: vec![
                Point::new(lo.x, lo.y, 0.0),
                Point::new(hi.x, lo.y, 0.0),
                Point::new(hi.x, hi.y, 0.0),
                Point::new(lo.x, hi.y, 0.0),
            ],
            tags: vec![
                Boundary::World { axis: 1, upper: false },
                Boundary::World { axis: 0, upper: true },
                Boundary::World { axis: 1, upper: true },
                Boundary::World { axis: 0, upper: false },
            ],
        }
    }

    /// Returns `None` when nothing of positive area remains.
    pub fn clip(&mut self, h: &Halfspace, tag: Boundary) -> Option<()> {
        let d: Vec<f64> = self.verts.iter().map(|v| h.signed_distance(v)).collect();
        if d.iter().all(|&x| x <= GEOM_EPS) {
            return Some(());
        }
        if d.iter().all(|&x| x > -GEOM_EPS) {
            return None;
        }
        let n = self.verts.len();
        let mut verts = Vec::with_capacity(n + 1);
        let mut tags = Vec::with_capacity(n + 1);
        for k in 0..n {
            let next = (k + 1) % n;
            let (dk, dn) = (d[k], d[next]);
            let crossing = || {
                let t = dk / (dk - dn);
                let p = self.verts[k] + (self.verts[next] - self.verts[k]) * t;
                p - h.normal * h.signed_distance(&p)
            };
            if dk <= GEOM_EPS {
                if dn > GEOM_EPS {
                    if dk < -GEOM_EPS {
                        verts.push(self.verts[k]);
                        tags.push(self.tags[k]);
                        verts.push(crossing());
                        tags.push(tag);
                    } else {
                        verts.push(self.verts[k]);
                        tags.push(tag);
                    }
                } else {
                    verts.push(self.verts[k]);
                    tags.push(self.tags[k]);
                }
            } else if dn < -GEOM_EPS {
                verts.push(crossing());
                tags.push(self.tags[k]);
            }
        }
        if verts.len() < 3 {
            return None;
        }
        self.verts = verts;
        self.tags = tags;
        Some(())
    }

    pub fn into_cell(self, cluster_id: usize) -> PolytopeCell {
        let n = self.verts.len();
        let edges = (0..n)
            .map(|k| CellEdge {
                a: k,
                b: (k + 1) % n,
                boundaries: vec![self.tags[k]],
            })
            .collect();
        let planes = plane_ids(self.tags.iter());
        PolytopeCell {
            cluster_id,
            dim: Dim::Two,
            vertices: self.verts,
            edges,
            faces: Vec::new(),
            planes,
        }
    }
}

fn plane_ids<'a>(tags: impl Iterator<Item = &'a Boundary>) -> Vec<usize> {
    tags.filter_map(|t| t.plane_id())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

#[derive(Clone, Debug)]
struct Face {
    loop_: Vec<usize>,
    tag: Boundary,
}

#[derive(Clone, Debug)]
pub(crate) struct Polyhedron {
    verts: Vec<Point>,
    faces: Vec<Face>,
}

impl Polyhedron {
    pub fn from_box(world: &WorldBox) -> Self {
        let (lo, hi) = (world.min, world.max);
        let corner = |i: usize| {
            Point::new(
                if i & 1 == 0 { lo.x } else { hi.x },
                if i & 2 == 0 { lo.y } else { hi.y },
                if i & 4 == 0 { lo.z } else { hi.z },
            )
        };
        let verts = (0..8).map(corner).collect();
        let face = |loop_: [usize; 4], axis, upper| Face {
            loop_: loop_.to_vec(),
            tag: Boundary::World { axis, upper },
        };
        // loops are counter-clockwise seen from outside
        let faces = vec![
            face([0, 4, 6, 2], 0, false),
            face([1, 3, 7, 5], 0, true),
            face([0, 1, 5, 4], 1, false),
            face([2, 6, 7, 3], 1, true),
            face([0, 2, 3, 1], 2, false),
            face([4, 5, 7, 6], 2, true),
        ];
        Polyhedron { verts, faces }
    }

    pub fn clip(&mut self, h: &Halfspace, tag: Boundary) -> Option<()> {
        let d: Vec<f64> = self.verts.iter().map(|v| h.signed_distance(v)).collect();
        let used: Vec<usize> = self.faces.iter().flat_map(|f| f.loop_.iter().copied()).collect();
        if used.iter().all(|&i| d[i] <= GEOM_EPS) {
            return Some(());
        }
        if used.iter().all(|&i| d[i] > -GEOM_EPS) {
            return None;
        }

        let mut crossings: HashMap<(usize, usize), usize> = HashMap::new();
        let mut cap: BTreeSet<usize> = BTreeSet::new();
        let mut faces = Vec::with_capacity(self.faces.len() + 1);

        for face in &self.faces {
            let n = face.loop_.len();
            let mut out = Vec::with_capacity(n + 1);
            for k in 0..n {
                let (a, b) = (face.loop_[k], face.loop_[(k + 1) % n]);
                let (da, db) = (d[a], d[b]);
                if da <= GEOM_EPS {
                    out.push(a);
                    if da >= -GEOM_EPS {
                        cap.insert(a);
                    }
                }
                if (da < -GEOM_EPS && db > GEOM_EPS) || (da > GEOM_EPS && db < -GEOM_EPS) {
                    let key = (a.min(b), a.max(b));
                    let id = *crossings.entry(key).or_insert_with(|| {
                        let t = da / (da - db);
                        let p = self.verts[a] + (self.verts[b] - self.verts[a]) * t;
                        self.verts.push(p - h.normal * h.signed_distance(&p));
                        self.verts.len() - 1
                    });
                    cap.insert(id);
                    out.push(id);
                }
            }
            if out.len() >= 3 {
                faces.push(Face {
                    loop_: out,
                    tag: face.tag,
                });
            }
        }

        if cap.len() >= 3 {
            let ids: Vec<usize> = cap.into_iter().collect();
            faces.push(Face {
                loop_: order_around(&self.verts, &ids, &h.normal),
                tag,
            });
        }
        if faces.len() < 4 {
            return None;
        }
        self.faces = faces;
        self.compact();
        Some(())
    }

    fn compact(&mut self) {
        let mut remap = vec![usize::MAX; self.verts.len()];
        let mut verts = Vec::new();
        for f in &mut self.faces {
            for v in &mut f.loop_ {
                if remap[*v] == usize::MAX {
                    remap[*v] = verts.len();
                    verts.push(self.verts[*v]);
                }
                *v = remap[*v];
            }
        }
        self.verts = verts;
    }

    pub fn into_cell(self, cluster_id: usize) -> PolytopeCell {
        let mut edge_tags: HashMap<(usize, usize), Vec<Boundary>> = HashMap::new();
        for f in &self.faces {
            let n = f.loop_.len();
            for k in 0..n {
                let (a, b) = (f.loop_[k], f.loop_[(k + 1) % n]);
                edge_tags.entry((a.min(b), a.max(b))).or_default().push(f.tag);
            }
        }
        let mut edges: Vec<CellEdge> = edge_tags
            .into_iter()
            .map(|((a, b), mut boundaries)| {
                boundaries.sort();
                boundaries.dedup();
                CellEdge { a, b, boundaries }
            })
            .collect();
        edges.sort_by_key(|e| (e.a, e.b));
        let planes = plane_ids(self.faces.iter().map(|f| &f.tag));
        PolytopeCell {
            cluster_id,
            dim: Dim::Three,
            vertices: self.verts,
            edges,
            faces: self
                .faces
                .into_iter()
                .map(|f| CellFace {
                    vertices: f.loop_,
                    boundary: f.tag,
                })
                .collect(),
            planes,
        }
    }
}

/// Orders coplanar points counter-clockwise about `normal`.
fn order_around(verts: &[Point], ids: &[usize], normal: &Vector3<f64>) -> Vec<usize> {
    let c = ids.iter().map(|&i| verts[i]).sum::<Point>() / ids.len() as f64;
    let helper = if normal.x.abs() < 0.9 {
        Vector3::x()
    } else {
        Vector3::y()
    };
    let u = normal.cross(&helper).normalize();
    let w = normal.cross(&u);
    let mut keyed: Vec<(f64, usize)> = ids
        .iter()
        .map(|&i| {
            let r = verts[i] - c;
            (r.dot(&w).atan2(r.dot(&u)), i)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    keyed.into_iter().map(|(_, i)| i).collect()
}
