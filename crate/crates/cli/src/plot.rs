//! Static renderings of a plan: layered SVG in the plane; OBJ plus a top-down
//! SVG in space. Layers follow the pipeline stages.

use std::f64::consts::PI;
use std::fmt::Write;

use sqvd_core::pipeline::{Plan, Precomputed};
use sqvd_core::smoother::PoseTrajectory;
use sqvd_core::{Dim, Point, Superquadric};

const CANVAS: f64 = 900.0;
const PAD: f64 = 20.0;
const OUTLINE_SAMPLES: usize = 96;
const MESH_RINGS: usize = 16;
const MESH_SEGMENTS: usize = 32;
const FOOTPRINTS: usize = 12;

/// World-to-pixel map for the x/y plane (y up in the world, down on screen).
struct View {
    min: [f64; 2],
    max_y: f64,
    scale: f64,
    width: f64,
    height: f64,
}

impl View {
    fn new(min: &Point, max: &Point) -> Self {
        let (w, h) = (max.x - min.x, max.y - min.y);
        let scale = (CANVAS - 2.0 * PAD) / w.max(h);
        View {
            min: [min.x, min.y],
            max_y: max.y,
            scale,
            width: w * scale + 2.0 * PAD,
            height: h * scale + 2.0 * PAD,
        }
    }

    fn px(&self, p: &Point) -> (f64, f64) {
        (
            PAD + (p.x - self.min[0]) * self.scale,
            PAD + (self.max_y - p.y) * self.scale,
        )
    }

    fn points(&self, pts: &[Point]) -> String {
        let mut s = String::new();
        for p in pts {
            let (x, y) = self.px(p);
            let _ = write!(s, "{x:.2},{y:.2} ");
        }
        s.trim_end().to_string()
    }
}

/// Closed outline of a superellipse, or of a superquadric's x/y shadow.
fn outline(shape: &Superquadric) -> Vec<Point> {
    match shape.dim() {
        Dim::Two => (0..OUTLINE_SAMPLES)
            .map(|k| shape.radial_point(&[2.0 * PI * k as f64 / OUTLINE_SAMPLES as f64]))
            .collect(),
        Dim::Three => {
            let mut pts = Vec::new();
            for i in 0..=MESH_RINGS {
                let el = -PI / 2.0 + PI * i as f64 / MESH_RINGS as f64;
                for j in 0..MESH_SEGMENTS {
                    let az = 2.0 * PI * j as f64 / MESH_SEGMENTS as f64;
                    let p = shape.radial_point(&[el, az]);
                    pts.push(Point::new(p.x, p.y, 0.0));
                }
            }
            // admissible exponents keep superquadrics convex, so the shadow is the hull
            convex_hull(pts)
        }
    }
}

fn convex_hull(mut pts: Vec<Point>) -> Vec<Point> {
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup_by(|a, b| (a.x - b.x).abs() < 1e-12 && (a.y - b.y).abs() < 1e-12);
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: &Point, a: &Point, b: &Point| (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    let mut lower: Vec<Point> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<Point> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn positions(traj: &PoseTrajectory) -> Vec<Point> {
    (0..traj.len()).map(|k| traj.position(k)).collect()
}

fn polygon_layer(svg: &mut String, view: &View, id: &str, style: &str, shapes: &[Superquadric]) {
    let _ = writeln!(svg, r#"  <g id="{id}" {style}>"#);
    for s in shapes {
        let _ = writeln!(svg, r#"    <polygon points="{}"/>"#, view.points(&outline(s)));
    }
    let _ = writeln!(svg, "  </g>");
}

fn segment_layer<'a>(
    svg: &mut String,
    view: &View,
    id: &str,
    style: &str,
    segments: impl Iterator<Item = (&'a Point, &'a Point)>,
) {
    let _ = writeln!(svg, r#"  <g id="{id}" {style}>"#);
    for (a, b) in segments {
        let ((x1, y1), (x2, y2)) = (view.px(a), view.px(b));
        let _ = writeln!(
            svg,
            r#"    <line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}"/>"#
        );
    }
    let _ = writeln!(svg, "  </g>");
}

fn polyline_layer(svg: &mut String, view: &View, id: &str, style: &str, pts: &[Point]) {
    let _ = writeln!(
        svg,
        r#"  <g id="{id}" {style}><polyline points="{}"/></g>"#,
        view.points(pts)
    );
}

/// SVG with one group per stage: obstacles, expanded obstacles, cells, graph,
/// raw path, smoothed path, robot footprints and terminals. 3D scenes are
/// projected onto the x/y plane.
pub fn svg(scenario_obstacles: &[Superquadric], robot: &Superquadric, pre: &Precomputed, plan: &Plan) -> String {
    let d = &pre.diagram;
    let view = View::new(&d.world.min, &d.world.max);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" viewBox="0 0 {:.0} {:.0}">"#,
        view.width, view.height, view.width, view.height
    );
    let corners = [
        Point::new(d.world.min.x, d.world.min.y, 0.0),
        Point::new(d.world.max.x, d.world.max.y, 0.0),
    ];
    let (x0, y1) = view.px(&corners[0]);
    let (x1, y0) = view.px(&corners[1]);
    let _ = writeln!(
        svg,
        r##"  <rect id="world" x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="#ffffff" stroke="#000000"/>"##,
        x1 - x0,
        y1 - y0
    );
    polygon_layer(
        &mut svg,
        &view,
        "expanded",
        r##"fill="#f4c7a1" fill-opacity="0.6" stroke="#d08040" stroke-width="1""##,
        &d.expanded,
    );
    polygon_layer(
        &mut svg,
        &view,
        "obstacles",
        r##"fill="#555555" stroke="#222222" stroke-width="1""##,
        scenario_obstacles,
    );
    segment_layer(
        &mut svg,
        &view,
        "cells",
        r##"stroke="#3070c0" stroke-width="1" stroke-dasharray="4 3""##,
        d.cells
            .iter()
            .flat_map(|c| c.edges.iter().map(move |e| (&c.vertices[e.a], &c.vertices[e.b]))),
    );
    segment_layer(
        &mut svg,
        &view,
        "graph",
        r##"stroke="#60a060" stroke-width="1.5""##,
        plan.graph
            .edges
            .iter()
            .map(|e| (&plan.graph.nodes[e.a].position, &plan.graph.nodes[e.b].position)),
    );
    let path: Vec<Point> = plan.path.nodes.iter().map(|&n| plan.graph.nodes[n].position).collect();
    polyline_layer(
        &mut svg,
        &view,
        "graph-path",
        r##"fill="none" stroke="#20a020" stroke-width="3""##,
        &path,
    );
    polyline_layer(
        &mut svg,
        &view,
        "raw",
        r##"fill="none" stroke="#c03030" stroke-width="1.5" stroke-dasharray="6 3""##,
        &positions(&plan.raw),
    );
    polyline_layer(
        &mut svg,
        &view,
        "smoothed",
        r##"fill="none" stroke="#8020c0" stroke-width="2""##,
        &positions(&plan.trajectory),
    );
    let footprints: Vec<Superquadric> = plan
        .trajectory
        .sample_indices(FOOTPRINTS)
        .into_iter()
        .map(|k| sqvd_core::pose_planner::robot_at(robot, &plan.trajectory.pose(k)))
        .collect();
    polygon_layer(
        &mut svg,
        &view,
        "robot",
        r##"fill="none" stroke="#8020c0" stroke-width="1""##,
        &footprints,
    );
    let _ = writeln!(svg, r#"  <g id="terminals">"#);
    for (p, color) in [
        (plan.trajectory.position(0), "#00a000"),
        (plan.trajectory.position(plan.trajectory.len() - 1), "#c00000"),
    ] {
        let (x, y) = view.px(&p);
        let _ = writeln!(svg, r#"    <circle cx="{x:.2}" cy="{y:.2}" r="5" fill="{color}"/>"#);
    }
    let _ = writeln!(svg, "  </g>");
    svg.push_str("</svg>\n");
    svg
}

struct Obj {
    text: String,
    vertices: usize,
}

impl Obj {
    fn vertex(&mut self, p: &Point) -> usize {
        let _ = writeln!(self.text, "v {:.6} {:.6} {:.6}", p.x, p.y, p.z);
        self.vertices += 1;
        self.vertices
    }

    fn mesh(&mut self, name: &str, shape: &Superquadric) {
        let _ = writeln!(self.text, "o {name}");
        let mut ring_ids = Vec::with_capacity(MESH_RINGS + 1);
        for i in 0..=MESH_RINGS {
            let el = -PI / 2.0 + PI * i as f64 / MESH_RINGS as f64;
            let ids: Vec<usize> = (0..MESH_SEGMENTS)
                .map(|j| self.vertex(&shape.radial_point(&[el, 2.0 * PI * j as f64 / MESH_SEGMENTS as f64])))
                .collect();
            ring_ids.push(ids);
        }
        for i in 0..MESH_RINGS {
            for j in 0..MESH_SEGMENTS {
                let jn = (j + 1) % MESH_SEGMENTS;
                let (a, b, c, d) = (ring_ids[i][j], ring_ids[i][jn], ring_ids[i + 1][jn], ring_ids[i + 1][j]);
                let _ = writeln!(self.text, "f {a} {b} {c} {d}");
            }
        }
    }

    fn lines<'a>(&mut self, name: &str, segments: impl Iterator<Item = (&'a Point, &'a Point)>) {
        let _ = writeln!(self.text, "o {name}");
        for (a, b) in segments {
            let (i, j) = (self.vertex(a), self.vertex(b));
            let _ = writeln!(self.text, "l {i} {j}");
        }
    }

    fn polyline(&mut self, name: &str, pts: &[Point]) {
        let _ = writeln!(self.text, "o {name}");
        let ids: Vec<String> = pts.iter().map(|p| self.vertex(p).to_string()).collect();
        if ids.len() >= 2 {
            let _ = writeln!(self.text, "l {}", ids.join(" "));
        }
    }
}

/// Wavefront OBJ with obstacle and expanded-obstacle meshes, cell edges, the
/// roadmap, and the raw and smoothed paths as named objects.
pub fn obj(scenario_obstacles: &[Superquadric], pre: &Precomputed, plan: &Plan) -> String {
    let mut o = Obj {
        text: String::from("# obstacles, expanded obstacles, cells, graph, raw path, smoothed path\n"),
        vertices: 0,
    };
    for (k, s) in scenario_obstacles.iter().enumerate() {
        o.mesh(&format!("obstacle_{k}"), s);
    }
    for (k, s) in pre.diagram.expanded.iter().enumerate() {
        o.mesh(&format!("expanded_{k}"), s);
    }
    for c in &pre.diagram.cells {
        o.lines(
            &format!("cell_{}", c.cluster_id),
            c.edges.iter().map(|e| (&c.vertices[e.a], &c.vertices[e.b])),
        );
    }
    o.lines(
        "graph",
        plan.graph
            .edges
            .iter()
            .map(|e| (&plan.graph.nodes[e.a].position, &plan.graph.nodes[e.b].position)),
    );
    o.polyline("raw", &positions(&plan.raw));
    o.polyline("smoothed", &positions(&plan.trajectory));
    o.text
}
