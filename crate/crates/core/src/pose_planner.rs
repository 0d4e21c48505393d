//! Orientation assignment along a roadmap path.
//!
//! A waypoint orientation is the travel frame: in the plane the heading angle,
//! in space the rotation `[r1, r2, r3]` with `r1` along travel and `r3` along the
//! supporting face normal. [`body_pose`] maps it onto a robot so that the
//! robot's longest axis follows `r1` and its shortest axis follows `r3`.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::geometry::{Dim, Point, RigidPose, Superquadric};
use crate::roadmap::{EdgeKind, RoadmapGraph};
use crate::so3;
use crate::voronoi::{Boundary, Diagram};

/// Segments shorter than this are dropped.
pub const MIN_SEGMENT: f64 = 1e-9;
/// Largest `|r1 x n|` treated as parallel by [`frame_3d`].
pub const PARALLEL_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct PoseWaypoint {
    /// Position and travel frame.
    pub pose: RigidPose,
    /// Index of the segment the orientation comes from.
    pub segment: usize,
}

pub fn heading_2d(v_i: &Point, v_next: &Point) -> Result<f64> {
    let d = v_next - v_i;
    if d.norm() < MIN_SEGMENT {
        return Err(Error::DegenerateSegment(format!(
            "zero-length segment at {:?}",
            v_i.as_slice()
        )));
    }
    Ok(d.y.atan2(d.x))
}

/// Travel frame with `r1` along the segment and `r3` along the normal projected
/// orthogonal to `r1`.
pub fn frame_3d(v_i: &Point, v_next: &Point, normal: &Vector3<f64>) -> Result<Matrix3<f64>> {
    let d = v_next - v_i;
    if d.norm() < MIN_SEGMENT {
        return Err(Error::DegenerateSegment(format!(
            "zero-length segment at {:?}",
            v_i.as_slice()
        )));
    }
    let r1 = d.normalize();
    let n = normal.normalize();
    if r1.cross(&n).norm() < PARALLEL_TOL {
        return Err(Error::DegenerateSegment(
            "travel direction parallel to face normal".into(),
        ));
    }
    let r3 = (n - r1 * r1.dot(&n)).normalize();
    let r2 = r3.cross(&r1);
    Ok(Matrix3::from_columns(&[r1, r2, r3]))
}

/// Rotation taking the robot's local longest axis to `e1`, shortest to `e3`.
fn axis_alignment(robot: &Superquadric) -> Matrix3<f64> {
    let (s, l) = (robot.shortest_axis_index(), robot.longest_axis_index());
    let (s, l) = if s == l { (0, 2) } else { (s, l) };
    let m = 3 - s - l;
    let mut q = Matrix3::zeros();
    q[(0, l)] = 1.0;
    q[(1, m)] = 1.0;
    q[(2, s)] = 1.0;
    if q.determinant() < 0.0 {
        q.row_mut(1).neg_mut();
    }
    q
}

/// Robot placed at a waypoint: longest axis along travel, shortest along `r3`.
pub fn body_pose(robot: &Superquadric, frame: &RigidPose) -> RigidPose {
    match robot.dim() {
        Dim::Two => {
            let long = robot.longest_axis_index() as f64;
            RigidPose::planar(
                frame.translation.x,
                frame.translation.y,
                frame.angle() - long * std::f64::consts::FRAC_PI_2,
            )
        }
        Dim::Three => {
            let r = frame.rotation_matrix() * axis_alignment(robot);
            RigidPose::spatial(frame.translation, so3::log_unchecked(&r))
        }
    }
}

/// The robot superquadric at a waypoint.
pub fn robot_at(robot: &Superquadric, frame: &RigidPose) -> Superquadric {
    robot.with_pose(body_pose(robot, frame))
}

/// Normal of the widest-gap hyperplane containing an edge (ties: lowest id),
/// else of a world face it lies on.
fn edge_normal(kind: &EdgeKind, diagram: &Diagram) -> Option<Vector3<f64>> {
    let EdgeKind::Cell { boundaries, .. } = kind else {
        return None;
    };
    let plane = boundaries
        .iter()
        .filter_map(|b| b.plane_id())
        .map(|id| diagram.plane(id))
        .min_by(|a, b| b.distance.total_cmp(&a.distance).then(a.id.cmp(&b.id)));
    if let Some(h) = plane {
        return Some(h.normal);
    }
    boundaries.iter().find_map(|b| match *b {
        Boundary::World { axis, .. } => {
            let mut n = Vector3::zeros();
            n[axis] = 1.0;
            Some(n)
        }
        Boundary::Plane { .. } => None,
    })
}

/// Any unit vector orthogonal to `d`.
fn orthogonal_to(d: &Vector3<f64>) -> Vector3<f64> {
    let k = d.iamin();
    let mut e = Vector3::zeros();
    e[k] = 1.0;
    (e - d * d.dot(&e)).normalize()
}

/// One waypoint per path node, orientations from outgoing segments.
pub fn plan_poses(path: &[usize], graph: &RoadmapGraph, diagram: &Diagram) -> Result<Vec<PoseWaypoint>> {
    // drop repeated positions
    let mut nodes: Vec<usize> = Vec::with_capacity(path.len());
    for &n in path {
        if nodes
            .last()
            .is_none_or(|&m| (graph.nodes[m].position - graph.nodes[n].position).norm() >= MIN_SEGMENT)
        {
            nodes.push(n);
        }
    }
    if nodes.len() < 2 {
        return Err(Error::InvalidTrajectory("path needs two distinct positions".into()));
    }
    let pos: Vec<Point> = nodes.iter().map(|&n| graph.nodes[n].position).collect();
    let segs = pos.len() - 1;

    let rotations: Vec<Vector3<f64>> = match diagram.world.dim {
        Dim::Two => (0..segs)
            .map(|k| heading_2d(&pos[k], &pos[k + 1]).map(|t| Vector3::new(0.0, 0.0, t)))
            .collect::<Result<_>>()?,
        Dim::Three => {
            let own: Vec<Option<Vector3<f64>>> = (0..segs)
                .map(|k| {
                    // consecutive distinct positions may be joined by a merged duplicate
                    graph
                        .edge_between(nodes[k], nodes[k + 1])
                        .and_then(|e| edge_normal(&e.kind, diagram))
                })
                .collect();
            let mut frames = Vec::with_capacity(segs);
            let mut prev_r3: Option<Vector3<f64>> = None;
            for k in 0..segs {
                let inherited = own[..=k]
                    .iter()
                    .rev()
                    .flatten()
                    .next()
                    .or_else(|| own[k..].iter().flatten().next())
                    .copied();
                let dir = (pos[k + 1] - pos[k]).normalize();
                let mut n = match inherited {
                    Some(n) if dir.cross(&n).norm() >= PARALLEL_TOL => n,
                    _ => prev_r3.unwrap_or_else(|| orthogonal_to(&dir)),
                };
                if dir.cross(&n).norm() < PARALLEL_TOL {
                    n = orthogonal_to(&dir);
                }
                if let Some(p) = prev_r3 {
                    if n.dot(&p) < 0.0 {
                        n = -n;
                    }
                }
                let r = frame_3d(&pos[k], &pos[k + 1], &n)?;
                prev_r3 = Some(r.column(2).into());
                frames.push(so3::log_unchecked(&r));
            }
            frames
        }
    };

    // Segments shorter than the robot's half-width keep the neighbouring
    // orientation: turning for them would sweep the whole body for nothing.
    let mut rotations = rotations;
    let long: Vec<bool> = (0..segs)
        .map(|k| (pos[k + 1] - pos[k]).norm() >= diagram.margin)
        .collect();
    if let Some(first) = long.iter().position(|&l| l) {
        for k in 0..segs {
            if !long[k] {
                rotations[k] = if k < first { rotations[first] } else { rotations[k - 1] };
            }
        }
    }

    Ok(pos
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let seg = k.min(segs - 1);
            PoseWaypoint {
                pose: match diagram.world.dim {
                    Dim::Two => RigidPose::planar(p.x, p.y, rotations[seg].z),
                    Dim::Three => RigidPose::spatial(*p, rotations[seg]),
                },
                segment: seg,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::WorldBox;
    use crate::proximity::ProximityOptions;
    use crate::roadmap::graph_from_parts;
    use crate::voronoi::build_diagram;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn p(x: f64, y: f64, z: f64) -> Point {
        Point::new(x, y, z)
    }

    #[test]
    fn headings() {
        let o = Point::zeros();
        assert_eq!(heading_2d(&o, &p(1.0, 0.0, 0.0)).unwrap(), 0.0);
        assert_relative_eq!(heading_2d(&o, &p(0.0, 1.0, 0.0)).unwrap(), FRAC_PI_2);
        assert_relative_eq!(heading_2d(&o, &p(-1.0, 0.0, 0.0)).unwrap(), PI);
        assert!(heading_2d(&o, &o).is_err());
    }

    #[test]
    fn frames() {
        let o = Point::zeros();
        let r = frame_3d(&o, &p(2.0, 0.0, 0.0), &Vector3::z()).unwrap();
        assert_relative_eq!(r, Matrix3::identity(), epsilon = 1e-15);
        let r = frame_3d(&o, &p(0.0, 1.0, 0.0), &Vector3::z()).unwrap();
        assert_relative_eq!(
            r,
            Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0),
            epsilon = 1e-15
        );
        assert!(frame_3d(&o, &p(0.0, 0.0, 1.0), &Vector3::z()).is_err());
    }

    #[test]
    fn body_axes_follow_frame() {
        let robot = Superquadric::new_3d([0.5, 0.8], [0.2, 0.5, 0.9], [0.0; 3], [0.0; 3]).unwrap();
        let frame = RigidPose::spatial(p(1.0, 2.0, 3.0), Vector3::new(0.3, -1.1, 0.7));
        let r = frame.rotation_matrix();
        let body = body_pose(&robot, &frame).rotation_matrix();
        let (s, l) = (robot.shortest_axis_index(), robot.longest_axis_index());
        assert_relative_eq!(body.column(l), r.column(0), epsilon = 1e-9);
        assert_relative_eq!(body.column(s), r.column(2), epsilon = 1e-9);
        assert!((body.determinant() - 1.0).abs() < 1e-9);

        let robot = Superquadric::new_2d(1.0, [0.02, 0.06], [0.0, 0.0], 0.0).unwrap();
        let placed = robot_at(&robot, &RigidPose::planar(0.0, 0.0, 0.4));
        // longest axis along the heading
        let tip = placed.to_world(&p(0.0, 0.06, 0.0));
        assert_relative_eq!(tip.y.atan2(tip.x), 0.4, epsilon = 1e-12);
    }

    fn planar_diagram() -> Diagram {
        let world = WorldBox::new_2d([0.0, 0.0], [10.0, 10.0]).unwrap();
        let robot = Superquadric::new_2d(1.0, [0.1, 0.1], [0.0, 0.0], 0.0).unwrap();
        build_diagram(&robot, &[], &world, &ProximityOptions::default()).unwrap()
    }

    #[test]
    fn planar_paths() {
        let d = planar_diagram();
        let g = graph_from_parts(&[p(0.0, 0.0, 0.0), p(1.0, 0.0, 0.0)], &[(0, 1)]);
        let w = plan_poses(&[0, 1], &g, &d).unwrap();
        assert!(w.iter().all(|w| w.pose.angle() == 0.0));

        let g = graph_from_parts(
            &[p(0.0, 0.0, 0.0), p(1.0, 0.0, 0.0), p(1.0, 1.0, 0.0)],
            &[(0, 1), (1, 2)],
        );
        let w = plan_poses(&[0, 1, 2], &g, &d).unwrap();
        let a: Vec<f64> = w.iter().map(|w| w.pose.angle()).collect();
        assert_relative_eq!(a[0], 0.0);
        assert_relative_eq!(a[1], FRAC_PI_2);
        assert_relative_eq!(a[2], FRAC_PI_2);
    }

    #[test]
    fn duplicate_nodes_are_dropped() {
        let d = planar_diagram();
        let g = graph_from_parts(
            &[p(0.0, 0.0, 0.0), p(0.0, 0.0, 0.0), p(1.0, 0.0, 0.0)],
            &[(0, 1), (1, 2)],
        );
        let w = plan_poses(&[0, 1, 2], &g, &d).unwrap();
        assert_eq!(w.len(), 2);
    }

    #[test]
    fn vertical_gap_rolls_robot() {
        // two slabs left and right of x = 0 leave a gap whose bisector has normal +-x
        let world = WorldBox::new_3d([-5.0; 3], [5.0; 3]).unwrap();
        let slab = |x: f64| Superquadric::new_3d([0.1, 0.1], [1.0, 4.0, 4.0], [x, 0.0, 0.0], [0.0; 3]).unwrap();
        let robot = Superquadric::new_3d([1.0, 1.0], [0.05, 0.1, 0.3], [0.0; 3], [0.0; 3]).unwrap();
        let d = build_diagram(&robot, &[slab(-1.5), slab(1.5)], &world, &ProximityOptions::default()).unwrap();
        let g = crate::roadmap::build_graph(&d, 0.0);
        // an edge of the bisector plane running along y
        let e = g
            .edges
            .iter()
            .find(|e| {
                let (a, b) = (g.nodes[e.a].position, g.nodes[e.b].position);
                !e.kind.plane_ids().is_empty() && (b - a).normalize().y.abs() > 1.0 - 1e-9
            })
            .expect("bisector edge along y");
        let w = plan_poses(&[e.a, e.b], &g, &d).unwrap();
        let r = w[0].pose.rotation_matrix();
        assert!(r.column(2).x.abs() > 1.0 - 1e-9);
        let body = body_pose(&robot, &w[0].pose).rotation_matrix();
        assert!(body.column(robot.shortest_axis_index()).x.abs() > 1.0 - 1e-9);
    }
}
