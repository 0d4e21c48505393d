//! Weighted roadmap over Voronoi cell skeletons, hole bridging, terminal
//! projection and shortest paths.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Point, Superquadric};
use crate::voronoi::{Boundary, Diagram};

/// Nodes closer than this are merged.
pub const MERGE_TOL: f64 = 1e-7;
/// Samples per bridging segment when checking it against obstacles.
pub const BRIDGE_SAMPLES: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    CellVertex,
    /// Foot of a terminal on an existing edge.
    Projection,
    /// Start or goal position.
    Terminal,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub position: Point,
    pub kind: NodeKind,
}

#[derive(Clone, Debug, PartialEq)]
pub enum EdgeKind {
    /// Skeleton edge of one or more cells, with the boundaries containing it.
    Cell {
        boundaries: Vec<Boundary>,
        cells: Vec<usize>,
    },
    Bridge,
    /// Connects a terminal to its projection.
    Stub,
}

impl EdgeKind {
    pub fn plane_ids(&self) -> Vec<usize> {
        match self {
            EdgeKind::Cell { boundaries, .. } => boundaries.iter().filter_map(|b| b.plane_id()).collect(),
            _ => Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
    pub kind: EdgeKind,
}

impl Edge {
    pub fn other(&self, n: usize) -> usize {
        if n == self.a {
            self.b
        } else {
            self.a
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct RoadmapGraph {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    adjacency: Vec<Vec<usize>>,
    /// Expanded obstacles used to validate bridges and stubs.
    pub obstacles: Vec<Superquadric>,
}

/// Segment-vs-obstacle check on `samples + 1` evenly spaced points (endpoints included).
pub fn segment_clear(a: &Point, b: &Point, obstacles: &[Superquadric], samples: usize) -> bool {
    let samples = samples.max(1);
    obstacles.iter().all(|o| {
        if point_segment(&o.center(), a, b).1 > o.bounding_radius() {
            return true;
        }
        (0..=samples).all(|k| {
            let t = k as f64 / samples as f64;
            o.inside_outside(&(a + (b - a) * t)) > 0.0
        })
    })
}

/// Sample count that keeps spacing below a quarter of the thinnest obstacle.
fn edge_samples(a: &Point, b: &Point, obstacles: &[Superquadric]) -> usize {
    let thin = obstacles.iter().map(|o| o.min_axis()).fold(f64::INFINITY, f64::min);
    if !thin.is_finite() {
        return 1;
    }
    (((b - a).norm() / (0.25 * thin)).ceil() as usize).clamp(BRIDGE_SAMPLES, 4096)
}

/// Closest point on segment `[a, b]` to `p`, its distance, and the segment parameter.
pub fn point_segment(p: &Point, a: &Point, b: &Point) -> (Point, f64, f64) {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 == 0.0 {
        0.0
    } else {
        ((p - a).dot(&ab) / len2).clamp(0.0, 1.0)
    };
    let foot = a + ab * t;
    (foot, (p - foot).norm(), t)
}

/// Hash grid for merging nearby points.
struct PointIndex {
    cell: f64,
    buckets: HashMap<[i64; 3], Vec<usize>>,
}

impl PointIndex {
    fn new(cell: f64) -> Self {
        PointIndex {
            cell,
            buckets: HashMap::new(),
        }
    }

    fn key(&self, p: &Point) -> [i64; 3] {
        [
            (p.x / self.cell).floor() as i64,
            (p.y / self.cell).floor() as i64,
            (p.z / self.cell).floor() as i64,
        ]
    }

    fn insert(&mut self, p: &Point, id: usize) {
        let k = self.key(p);
        self.buckets.entry(k).or_default().push(id);
    }

    /// Ids in the 27 buckets around `p`.
    fn around(&self, p: &Point) -> impl Iterator<Item = usize> + '_ {
        let k = self.key(p);
        (-1..=1).flat_map(move |dx| {
            (-1..=1).flat_map(move |dy| {
                (-1..=1).flat_map(move |dz| {
                    self.buckets
                        .get(&[k[0] + dx, k[1] + dy, k[2] + dz])
                        .into_iter()
                        .flatten()
                        .copied()
                })
            })
        })
    }
}

impl RoadmapGraph {
    pub fn adjacent_edges(&self, n: usize) -> &[usize] {
        &self.adjacency[n]
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<&Edge> {
        self.adjacency[a]
            .iter()
            .map(|&e| &self.edges[e])
            .find(|e| e.other(a) == b)
    }

    pub fn node(&self, id: usize) -> &Node {
        &self.nodes[id]
    }

    fn add_node(&mut self, position: Point, kind: NodeKind) -> usize {
        self.nodes.push(Node { position, kind });
        self.adjacency.push(Vec::new());
        self.nodes.len() - 1
    }

    fn add_edge(&mut self, a: usize, b: usize, kind: EdgeKind) -> usize {
        debug_assert_ne!(a, b);
        let weight = (self.nodes[a].position - self.nodes[b].position).norm();
        self.edges.push(Edge { a, b, weight, kind });
        let id = self.edges.len() - 1;
        self.adjacency[a].push(id);
        self.adjacency[b].push(id);
        id
    }

    /// Replaces edge `e = (a, b)` by `(a, mid)` and `(mid, b)`.
    fn split_edge(&mut self, e: usize, mid: usize) {
        let Edge { a, b, kind, .. } = self.edges[e].clone();
        self.adjacency[b].retain(|&x| x != e);
        self.edges[e].b = mid;
        self.edges[e].weight = (self.nodes[a].position - self.nodes[mid].position).norm();
        self.adjacency[mid].push(e);
        self.add_edge(mid, b, kind);
    }

    /// Node ids along edges that are actually connected (degree > 0).
    pub fn connected_nodes(&self) -> usize {
        self.adjacency.iter().filter(|a| !a.is_empty()).count()
    }
}

/// Builds the roadmap: deduplicated cell vertices, cell edges that stay clear of
/// expanded obstacles, and validated bridges of length at most `h`.
pub fn build_graph(diagram: &Diagram, h: f64) -> RoadmapGraph {
    let mut g = RoadmapGraph {
        obstacles: diagram.expanded.clone(),
        ..Default::default()
    };
    let mut index = PointIndex::new(MERGE_TOL * 10.0);
    let mut node_of = |g: &mut RoadmapGraph, p: &Point| -> usize {
        if let Some(id) = index
            .around(p)
            .find(|&id| (g.nodes[id].position - p).norm() <= MERGE_TOL)
        {
            return id;
        }
        let id = g.add_node(*p, NodeKind::CellVertex);
        index.insert(p, id);
        id
    };

    // collect skeleton edges keyed by merged endpoints
    let mut skeleton: HashMap<(usize, usize), (BTreeSet<Boundary>, BTreeSet<usize>)> = HashMap::new();
    for cell in &diagram.cells {
        let ids: Vec<usize> = cell.vertices.iter().map(|v| node_of(&mut g, v)).collect();
        for e in &cell.edges {
            let (a, b) = (ids[e.a], ids[e.b]);
            if a == b {
                continue;
            }
            let entry = skeleton.entry((a.min(b), a.max(b))).or_default();
            entry.0.extend(e.boundaries.iter().copied());
            entry.1.insert(cell.cluster_id);
        }
    }
    let mut keys: Vec<(usize, usize)> = skeleton.keys().copied().collect();
    keys.sort();
    let obstacles = diagram.expanded.clone();
    for (a, b) in keys {
        let (pa, pb) = (g.nodes[a].position, g.nodes[b].position);
        if !segment_clear(&pa, &pb, &obstacles, edge_samples(&pa, &pb, &obstacles)) {
            continue;
        }
        let (boundaries, cells) = skeleton.remove(&(a, b)).unwrap();
        g.add_edge(
            a,
            b,
            EdgeKind::Cell {
                boundaries: boundaries.into_iter().collect(),
                cells: cells.into_iter().collect(),
            },
        );
    }

    join_t_junctions(&mut g);
    if h > 0.0 {
        add_bridges(&mut g, h);
    }
    log::debug!("roadmap: {} nodes, {} edges", g.nodes.len(), g.edges.len());
    g
}

/// Splits edges at nodes lying in their interior, so collinear edges of
/// neighbouring cells share vertices.
fn join_t_junctions(g: &mut RoadmapGraph) {
    let mut e = 0;
    while e < g.edges.len() {
        let (a, b) = (g.edges[e].a, g.edges[e].b);
        let (pa, pb) = (g.nodes[a].position, g.nodes[b].position);
        let hit = (0..g.nodes.len())
            .filter(|&n| n != a && n != b && !g.adjacency[n].is_empty())
            .filter_map(|n| {
                let (_, d, t) = point_segment(&g.nodes[n].position, &pa, &pb);
                (d <= MERGE_TOL && t > 0.0 && t < 1.0).then_some((t, n))
            })
            .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        match hit {
            // a split edge is revisited, so several junctions on it are all joined
            Some((_, n)) if g.edge_between(a, n).is_none() => g.split_edge(e, n),
            _ => e += 1,
        }
    }
}

fn add_bridges(g: &mut RoadmapGraph, h: f64) {
    let mut index = PointIndex::new(h);
    let live: Vec<usize> = (0..g.nodes.len()).filter(|&n| !g.adjacency[n].is_empty()).collect();
    for &n in &live {
        index.insert(&g.nodes[n].position, n);
    }
    let obstacles = std::mem::take(&mut g.obstacles);
    let mut bridges = Vec::new();
    for &i in &live {
        let pi = g.nodes[i].position;
        let mut near: Vec<usize> = index.around(&pi).filter(|&j| j > i).collect();
        near.sort_unstable();
        for j in near {
            let pj = g.nodes[j].position;
            if (pi - pj).norm() <= h
                && g.edge_between(i, j).is_none()
                && segment_clear(&pi, &pj, &obstacles, BRIDGE_SAMPLES)
            {
                bridges.push((i, j));
            }
        }
    }
    for (i, j) in bridges {
        g.add_edge(i, j, EdgeKind::Bridge);
    }
    g.obstacles = obstacles;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Projection {
    /// Node at the terminal position itself.
    pub terminal: usize,
    /// Node where the terminal meets the graph.
    pub foot: usize,
}

/// Attaches `point` to the graph at the closest point of the closest edge whose
/// connecting stub stays clear of obstacles.
pub fn project_terminal(point: &Point, graph: &mut RoadmapGraph) -> Result<Projection> {
    if graph.edges.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let mut ranked: Vec<(f64, usize, Point, f64)> = graph
        .edges
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let (foot, d, t) = point_segment(point, &graph.nodes[e.a].position, &graph.nodes[e.b].position);
            (d, k, foot, t)
        })
        .collect();
    ranked.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    let obstacles = &graph.obstacles;
    let pick = ranked
        .iter()
        .find(|(d, _, foot, _)| {
            *d <= MERGE_TOL || segment_clear(point, foot, obstacles, edge_samples(point, foot, obstacles))
        })
        .copied()
        .ok_or(Error::NoPath)?;
    let (d, e, foot, _) = pick;

    let (a, b) = (graph.edges[e].a, graph.edges[e].b);
    let foot_id = if (graph.nodes[a].position - foot).norm() <= MERGE_TOL {
        a
    } else if (graph.nodes[b].position - foot).norm() <= MERGE_TOL {
        b
    } else {
        let id = graph.add_node(foot, NodeKind::Projection);
        graph.split_edge(e, id);
        id
    };
    if d <= MERGE_TOL {
        return Ok(Projection {
            terminal: foot_id,
            foot: foot_id,
        });
    }
    let terminal = graph.add_node(*point, NodeKind::Terminal);
    graph.add_edge(terminal, foot_id, EdgeKind::Stub);
    Ok(Projection {
        terminal,
        foot: foot_id,
    })
}

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    cost: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (cost, node)
        other.cost.total_cmp(&self.cost).then(other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphPath {
    pub nodes: Vec<usize>,
    pub length: f64,
}

/// Dijkstra; among equal-cost predecessors the lowest node id wins.
pub fn shortest_path(graph: &RoadmapGraph, start: usize, goal: usize) -> Result<GraphPath> {
    let n = graph.nodes.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[start] = 0.0;
    heap.push(Entry { cost: 0.0, node: start });
    while let Some(Entry { cost, node }) = heap.pop() {
        if done[node] {
            continue;
        }
        done[node] = true;
        if node == goal {
            break;
        }
        for &e in &graph.adjacency[node] {
            let edge = &graph.edges[e];
            let next = edge.other(node);
            let c = cost + edge.weight;
            if !done[next] && (c < dist[next] || (c == dist[next] && node < prev[next])) {
                dist[next] = c;
                prev[next] = node;
                heap.push(Entry { cost: c, node: next });
            }
        }
    }
    if !dist[goal].is_finite() {
        return Err(Error::NoPath);
    }
    let mut nodes = vec![goal];
    while *nodes.last().unwrap() != start {
        nodes.push(prev[*nodes.last().unwrap()]);
    }
    nodes.reverse();
    Ok(GraphPath {
        nodes,
        length: dist[goal],
    })
}

/// Builder for hand-made graphs (tests and tools).
pub fn graph_from_parts(points: &[Point], edges: &[(usize, usize)]) -> RoadmapGraph {
    let mut g = RoadmapGraph::default();
    for p in points {
        g.add_node(*p, NodeKind::CellVertex);
    }
    for &(a, b) in edges {
        g.add_edge(
            a,
            b,
            EdgeKind::Cell {
                boundaries: Vec::new(),
                cells: Vec::new(),
            },
        );
    }
    g
}
