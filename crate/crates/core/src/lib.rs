//! Road-network extraction from OpenStreetMap XML.
//!
//! The pipeline mirrors the usual OSM-to-roads workflow:
//!
//! 1. [`ingest`] — stream an `.osm` XML extract into raw node/way records,
//! 2. [`table`] — build the node and highway-way tables and join them into
//!    resolved road polylines,
//! 3. [`geodesy`] — project WGS84 coordinates to UTM for display and compute
//!    great-circle lengths,
//! 4. [`graph`] — split polylines at junctions into a routable graph,
//! 5. [`render`] — export SVG maps, GeoJSON features, and CSV edge lists.
//!
//! All types are immutable after construction and safe to share across
//! threads; the parser is single-threaded per invocation.

pub mod geodesy;
pub mod graph;
pub mod ingest;
pub mod model;
pub mod render;
pub mod table;

mod util;

pub use geodesy::{
    haversine_m, project_polylines, project_to_utm, utm_zone_for, Hemisphere, ProjectedPoint,
    ProjectedPolyline, UtmZone,
};
pub use graph::{build_graph, find_junctions, network_stats, shortest_path, RoadNetwork};
pub use ingest::{parse_osm, parse_osm_file, ParseSummary};
pub use model::{classify_highway, BoundingBox, GeoPoint, HighwayClass, RawNode, RawWay, RoadPolyline, Tag};
pub use table::{
    bounding_box, extract_nodes, extract_ways, filter_by_class, resolve_ways, MergeReport,
    NodeTable, WayTable,
};
