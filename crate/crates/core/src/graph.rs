//! Junction-split road graph built from resolved polylines.
//!
//! A node is a junction when it is shared between ways, repeated within a
//! way, or terminates a way. Each polyline is cut at its interior junction
//! occurrences; the pieces become undirected edges that keep the intermediate
//! shape points as geometry. Parallel edges and self-loops are real road
//! topology and are kept; only zero-length degenerate pieces (same node twice
//! with nothing in between, e.g. the two-ref loop `[7,7]`) are dropped, with
//! a count.
//!
//! Edge lengths are haversine sums over the geometry, in geographic space, so
//! they do not depend on any projection zone.

use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};

use thiserror::Error;

use crate::geodesy::haversine_m;
use crate::model::{GeoPoint, HighwayClass, NodeId, RoadPolyline, WayId};

/// One undirected edge: a junction-to-junction piece of a way.
#[derive(Debug, Clone, PartialEq)]
pub struct RoadEdge {
    /// Sequential id in (polyline order, split order) over kept edges.
    pub id: u64,
    pub a: NodeId,
    pub b: NodeId,
    /// The piece's points including both endpoints, ≥ 2, starting at `a`'s
    /// coordinates and ending at `b`'s.
    pub geometry: Vec<GeoPoint>,
    pub length_m: f64,
    pub class: HighwayClass,
    pub source_way: WayId,
}

/// The junction graph. Immutable once built; queries are read-only.
#[derive(Debug, Clone, Default)]
pub struct RoadNetwork {
    /// Vertex id → coordinates, ordered for reproducible iteration.
    vertices: std::collections::BTreeMap<NodeId, GeoPoint>,
    edges: Vec<RoadEdge>,
    degenerate_dropped: u64,
}

impl RoadNetwork {
    pub fn vertices(&self) -> impl Iterator<Item = (NodeId, GeoPoint)> + '_ {
        self.vertices.iter().map(|(id, p)| (*id, *p))
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn contains_vertex(&self, id: NodeId) -> bool {
        self.vertices.contains_key(&id)
    }

    pub fn vertex_point(&self, id: NodeId) -> Option<GeoPoint> {
        self.vertices.get(&id).copied()
    }

    pub fn edges(&self) -> &[RoadEdge] {
        &self.edges
    }

    /// Zero-length degenerate pieces dropped during construction.
    pub fn degenerate_dropped(&self) -> u64 {
        self.degenerate_dropped
    }

    fn adjacency(&self) -> HashMap<NodeId, Vec<(NodeId, f64)>> {
        let mut adj: HashMap<NodeId, Vec<(NodeId, f64)>> = HashMap::new();
        for e in &self.edges {
            if e.a == e.b {
                // a self-loop never shortens a path
                continue;
            }
            adj.entry(e.a).or_default().push((e.b, e.length_m));
            adj.entry(e.b).or_default().push((e.a, e.length_m));
        }
        adj
    }
}

/// Node ids that act as graph vertices: shared between polylines, repeated
/// within one, or terminating one.
pub fn find_junctions(polylines: &[RoadPolyline]) -> HashSet<NodeId> {
    struct Seen {
        last_polyline: usize,
        junction: bool,
    }
    let mut seen: HashMap<NodeId, Seen> = HashMap::new();

    for (pi, polyline) in polylines.iter().enumerate() {
        let last = polyline.points.len() - 1;
        for (i, (id, _)) in polyline.points.iter().enumerate() {
            let endpoint = i == 0 || i == last;
            match seen.get_mut(id) {
                Some(s) => {
                    // previously seen anywhere: either another polyline or a
                    // repeat within this one — a junction either way
                    s.junction = true;
                    s.last_polyline = pi;
                }
                None => {
                    seen.insert(
                        *id,
                        Seen {
                            last_polyline: pi,
                            junction: endpoint,
                        },
                    );
                }
            }
            if endpoint {
                seen.get_mut(id).unwrap().junction = true;
            }
        }
    }

    seen.into_iter()
        .filter(|(_, s)| s.junction)
        .map(|(id, _)| id)
        .collect()
}

/// Splits polylines at interior junctions into an undirected edge list.
/// Vertices are the endpoints of kept edges.
pub fn build_graph(polylines: &[RoadPolyline]) -> RoadNetwork {
    let junctions = find_junctions(polylines);
    let mut network = RoadNetwork::default();

    for polyline in polylines {
        let points = &polyline.points;
        let mut start = 0;
        for i in 1..points.len() {
            if !junctions.contains(&points[i].0) {
                continue;
            }
            let piece = &points[start..=i];
            start = i;

            let (a, pa) = piece[0];
            let (b, pb) = piece[piece.len() - 1];
            if a == b && piece.len() == 2 {
                network.degenerate_dropped += 1;
                continue;
            }
            let geometry: Vec<GeoPoint> = piece.iter().map(|(_, p)| *p).collect();
            let length_m = geometry.windows(2).map(|w| haversine_m(w[0], w[1])).sum();
            network.edges.push(RoadEdge {
                id: network.edges.len() as u64,
                a,
                b,
                geometry,
                length_m,
                class: polyline.class.clone(),
                source_way: polyline.way_id,
            });
            network.vertices.insert(a, pa);
            network.vertices.insert(b, pb);
        }
    }

    network
}

/// A route through the network: the vertex sequence and its total length.
#[derive(Debug, Clone, PartialEq)]
pub struct PathResult {
    pub vertices: Vec<NodeId>,
    pub total_length_m: f64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RouteError {
    #[error("vertex {0} is not in the network")]
    VertexNotFound(NodeId),
    #[error("no path between {from} and {to}")]
    NoPath { from: NodeId, to: NodeId },
}

/// Heap entry ordered as a min-heap on (distance, vertex id), so equal
/// distances settle the smaller id first.
#[derive(PartialEq)]
struct QueueEntry {
    dist: f64,
    vertex: NodeId,
}

impl Eq for QueueEntry {}

impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other
            .dist
            .partial_cmp(&self.dist)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Minimum-total-length path under nonnegative edge lengths (Dijkstra).
///
/// Deterministic among equal-length routes: vertices settle in
/// (distance, id) order and an equal-distance relaxation only replaces a
/// predecessor with a smaller-id one.
pub fn shortest_path(
    network: &RoadNetwork,
    from: NodeId,
    to: NodeId,
) -> Result<PathResult, RouteError> {
    if !network.contains_vertex(from) {
        return Err(RouteError::VertexNotFound(from));
    }
    if !network.contains_vertex(to) {
        return Err(RouteError::VertexNotFound(to));
    }
    if from == to {
        return Ok(PathResult {
            vertices: vec![from],
            total_length_m: 0.0,
        });
    }

    let adj = network.adjacency();
    let mut dist: HashMap<NodeId, f64> = HashMap::new();
    let mut prev: HashMap<NodeId, NodeId> = HashMap::new();
    let mut settled: HashSet<NodeId> = HashSet::new();
    let mut heap = BinaryHeap::new();

    dist.insert(from, 0.0);
    heap.push(QueueEntry {
        dist: 0.0,
        vertex: from,
    });

    while let Some(QueueEntry { dist: d, vertex: u }) = heap.pop() {
        if !settled.insert(u) {
            continue;
        }
        if u == to {
            break;
        }
        let Some(neighbors) = adj.get(&u) else {
            continue;
        };
        for &(v, w) in neighbors {
            if settled.contains(&v) {
                continue;
            }
            let candidate = d + w;
            match dist.get(&v) {
                Some(&best) if candidate > best => {}
                Some(&best) if candidate == best => {
                    if prev.get(&v).is_some_and(|p| u < *p) {
                        prev.insert(v, u);
                    }
                }
                _ => {
                    dist.insert(v, candidate);
                    prev.insert(v, u);
                    heap.push(QueueEntry {
                        dist: candidate,
                        vertex: v,
                    });
                }
            }
        }
    }

    if !settled.contains(&to) {
        return Err(RouteError::NoPath { from, to });
    }

    let mut vertices = vec![to];
    let mut cur = to;
    while cur != from {
        cur = prev[&cur];
        vertices.push(cur);
    }
    vertices.reverse();

    Ok(PathResult {
        vertices,
        total_length_m: dist[&to],
    })
}

/// Aggregate counts for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkStats {
    pub vertex_count: usize,
    pub edge_count: usize,
    /// Total edge length per class, ordered for reproducible output.
    pub length_by_class: std::collections::BTreeMap<HighwayClass, f64>,
    pub component_count: usize,
    pub total_length_m: f64,
}

/// Exact sums over the network plus undirected component count.
pub fn network_stats(network: &RoadNetwork) -> NetworkStats {
    let mut length_by_class: std::collections::BTreeMap<HighwayClass, f64> = Default::default();
    let mut total = 0.0;
    for e in network.edges() {
        *length_by_class.entry(e.class.clone()).or_insert(0.0) += e.length_m;
        total += e.length_m;
    }

    // undirected components over vertices; self-loops keep their vertex
    let mut neighbors: HashMap<NodeId, Vec<NodeId>> = HashMap::new();
    for e in network.edges() {
        neighbors.entry(e.a).or_default().push(e.b);
        neighbors.entry(e.b).or_default().push(e.a);
    }
    let mut visited: HashSet<NodeId> = HashSet::new();
    let mut components = 0;
    for (v, _) in network.vertices() {
        if !visited.insert(v) {
            continue;
        }
        components += 1;
        let mut queue = VecDeque::from([v]);
        while let Some(u) = queue.pop_front() {
            if let Some(ns) = neighbors.get(&u) {
                for &n in ns {
                    if visited.insert(n) {
                        queue.push_back(n);
                    }
                }
            }
        }
    }

    NetworkStats {
        vertex_count: network.vertex_count(),
        edge_count: network.edges().len(),
        length_by_class,
        component_count: components,
        total_length_m: total,
    }
}
