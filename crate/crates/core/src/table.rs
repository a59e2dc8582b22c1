//! The tabular stage of the pipeline: node table, highway way table, and the
//! join that turns way node-references into resolved road polylines.
//!
//! Ways are filtered down to the 26 named highway classes here; everything
//! else (buildings, waterways, `highway` values outside the named set) is
//! dropped before the join.

use std::collections::{HashMap, HashSet};
use std::io::{self, Write};

use thiserror::Error;

use crate::model::{
    classify_highway, BoundingBox, GeoPoint, HighwayClass, NodeId, RawNode, RawWay, RoadPolyline,
    WayId,
};
use crate::util::{csv_field, fmt_degrees};

/// Id-keyed coordinate lookup built from node records.
///
/// Duplicate ids resolve last-wins: lookup returns the coordinates of the
/// last record inserted under that id.
#[derive(Debug, Default, Clone)]
pub struct NodeTable {
    map: HashMap<NodeId, GeoPoint>,
    insertions: u64,
}

impl NodeTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records one node, overwriting any earlier record with the same id.
    pub fn add(&mut self, node: &RawNode) {
        self.insert(node.id, node.point());
    }

    pub fn insert(&mut self, id: NodeId, point: GeoPoint) {
        self.map.insert(id, point);
        self.insertions += 1;
    }

    pub fn get(&self, id: NodeId) -> Option<GeoPoint> {
        self.map.get(&id).copied()
    }

    /// Number of distinct ids stored.
    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Total records inserted, counting overwrites.
    pub fn insertions(&self) -> u64 {
        self.insertions
    }
}

/// Builds the node table from a node stream, duplicates last-wins.
pub fn extract_nodes(nodes: impl IntoIterator<Item = RawNode>) -> NodeTable {
    let mut table = NodeTable::new();
    for node in nodes {
        table.add(&node);
    }
    table
}

/// One retained way: id, named highway class, and its node references in
/// document order.
#[derive(Debug, Clone, PartialEq)]
pub struct WayEntry {
    pub way_id: WayId,
    pub class: HighwayClass,
    pub node_refs: Vec<NodeId>,
}

/// The highway-way table: input order preserved, only ways whose `highway`
/// tag classifies to one of the 26 named classes. Never contains
/// [`HighwayClass::Other`].
#[derive(Debug, Default, Clone)]
pub struct WayTable {
    entries: Vec<WayEntry>,
}

impl WayTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Classifies and retains `way` when it carries a named highway class.
    /// The key match is exact and case-sensitive (`"highway"`); the first
    /// such tag with a named value decides. Returns whether the way was kept.
    pub fn add(&mut self, way: RawWay) -> bool {
        let class = way
            .tags
            .iter()
            .filter(|t| t.key == "highway")
            .map(|t| classify_highway(&t.value))
            .find(|c| c.is_named());
        match class {
            Some(class) => {
                self.entries.push(WayEntry {
                    way_id: way.id,
                    class,
                    node_refs: way.node_refs,
                });
                true
            }
            None => false,
        }
    }

    pub fn entries(&self) -> &[WayEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Builds the way table, retaining exactly the highway-tagged ways with a
/// named class.
pub fn extract_ways(ways: impl IntoIterator<Item = RawWay>) -> WayTable {
    let mut table = WayTable::new();
    for way in ways {
        table.add(way);
    }
    table
}

/// Audit counters for the node/way join.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct MergeReport {
    pub ways_resolved: u64,
    /// Ways dropped whole because at least one reference had no node record.
    pub ways_dropped_missing_nodes: u64,
    /// Distinct (way, ref) pairs that could not be resolved.
    pub refs_missing: u64,
}

/// Joins the way table against the node table: each way becomes one polyline
/// with its references resolved to coordinates, in order. A way with any
/// unresolvable reference is dropped whole and counted — never emitted
/// partially.
pub fn resolve_ways(ways: &WayTable, nodes: &NodeTable) -> (Vec<RoadPolyline>, MergeReport) {
    let mut polylines = Vec::new();
    let mut report = MergeReport::default();

    for entry in ways.entries() {
        let mut points = Vec::with_capacity(entry.node_refs.len());
        let mut missing: HashSet<NodeId> = HashSet::new();
        for &r in &entry.node_refs {
            match nodes.get(r) {
                Some(p) => points.push((r, p)),
                None => {
                    missing.insert(r);
                }
            }
        }
        if missing.is_empty() {
            polylines.push(RoadPolyline::new(entry.way_id, entry.class.clone(), points));
            report.ways_resolved += 1;
        } else {
            report.ways_dropped_missing_nodes += 1;
            report.refs_missing += missing.len() as u64;
        }
    }

    (polylines, report)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TableError {
    #[error("the class filter set is empty")]
    EmptyClassSet,
    #[error("no polylines to process")]
    EmptyInput,
}

/// Keeps exactly the polylines whose class is in `keep`, order preserved.
pub fn filter_by_class(
    polylines: Vec<RoadPolyline>,
    keep: &HashSet<HighwayClass>,
) -> Result<Vec<RoadPolyline>, TableError> {
    if keep.is_empty() {
        return Err(TableError::EmptyClassSet);
    }
    Ok(polylines
        .into_iter()
        .filter(|p| keep.contains(&p.class))
        .collect())
}

/// Tight geographic bounds over every point of every polyline.
pub fn bounding_box(polylines: &[RoadPolyline]) -> Result<BoundingBox, TableError> {
    let mut points = polylines.iter().flat_map(|p| p.points.iter().map(|(_, g)| *g));
    let first = points.next().ok_or(TableError::EmptyInput)?;
    let mut bbox = BoundingBox::from_point(first);
    for p in points {
        bbox.include(p);
    }
    Ok(bbox)
}

/// Writes the node table as CSV (`id,lat,lon`), rows sorted by id so the
/// output is reproducible. Returns the data row count.
pub fn write_nodes_csv(table: &NodeTable, out: &mut impl Write) -> io::Result<u64> {
    out.write_all(b"id,lat,lon\n")?;
    let mut ids: Vec<NodeId> = table.map.keys().copied().collect();
    ids.sort_unstable();
    for id in &ids {
        let p = table.map[id];
        writeln!(out, "{},{},{}", id, fmt_degrees(p.lat), fmt_degrees(p.lon))?;
    }
    Ok(ids.len() as u64)
}

/// Writes the way table as CSV (`way_id,highway,node_refs`), refs joined with
/// semicolons, in table order. Returns the data row count.
pub fn write_ways_csv(table: &WayTable, out: &mut impl Write) -> io::Result<u64> {
    out.write_all(b"way_id,highway,node_refs\n")?;
    for entry in table.entries() {
        let refs = entry
            .node_refs
            .iter()
            .map(|r| r.to_string())
            .collect::<Vec<_>>()
            .join(";");
        writeln!(
            out,
            "{},{},{}",
            entry.way_id,
            csv_field(entry.class.name()),
            csv_field(&refs)
        )?;
    }
    Ok(table.len() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Tag;

    fn node(id: NodeId, lat: f64, lon: f64) -> RawNode {
        RawNode {
            id,
            lat,
            lon,
            tags: vec![],
        }
    }

    fn way(id: WayId, refs: &[NodeId], tags: &[(&str, &str)]) -> RawWay {
        RawWay {
            id,
            node_refs: refs.to_vec(),
            tags: tags.iter().map(|(k, v)| Tag::new(*k, *v)).collect(),
        }
    }

    #[test]
    fn extract_nodes_empty() {
        let t = extract_nodes(vec![]);
        assert!(t.is_empty());
        assert_eq!(t.insertions(), 0);
    }

    #[test]
    fn extract_nodes_lookup() {
        let t = extract_nodes(vec![node(10, 35.0, -90.0), node(11, 36.0, -91.0)]);
        assert_eq!(t.len(), 2);
        assert_eq!(t.get(10), Some(GeoPoint::new(35.0, -90.0)));
        assert_eq!(t.get(11), Some(GeoPoint::new(36.0, -91.0)));
        assert_eq!(t.get(12), None);
    }

    #[test]
    fn extract_nodes_duplicate_last_wins() {
        let t = extract_nodes(vec![node(10, 1.0, 1.0), node(10, 2.0, 2.0)]);
        assert_eq!(t.len(), 1);
        assert_eq!(t.insertions(), 2);
        assert_eq!(t.get(10), Some(GeoPoint::new(2.0, 2.0)));
    }

    #[test]
    fn extract_ways_keeps_named_highways_only() {
        let t = extract_ways(vec![
            way(1, &[1, 2], &[("highway", "motorway")]),
            way(2, &[1, 2], &[("building", "yes")]),
            way(3, &[1, 2], &[("highway", "busway")]),
            way(4, &[1, 2], &[("Highway", "motorway")]),
            way(5, &[1, 2], &[("name", "x"), ("highway", "tertiary link")]),
        ]);
        let classes: Vec<_> = t.entries().iter().map(|e| (e.way_id, e.class.clone())).collect();
        assert_eq!(
            classes,
            vec![
                (1, HighwayClass::Motorway),
                (5, HighwayClass::TertiaryLink)
            ]
        );
    }

    #[test]
    fn extract_ways_never_contains_other() {
        let t = extract_ways(vec![
            way(1, &[1, 2], &[("highway", "motorway")]),
            way(2, &[1, 2], &[("highway", "weird_value")]),
        ]);
        assert!(t.entries().iter().all(|e| e.class.is_named()));
    }

    #[test]
    fn resolve_complete_way() {
        let nodes = extract_nodes(vec![node(1, 0.0, 0.0), node(2, 0.0, 1.0), node(3, 1.0, 1.0)]);
        let ways = extract_ways(vec![way(10, &[1, 2, 3], &[("highway", "primary")])]);
        let (polylines, report) = resolve_ways(&ways, &nodes);
        assert_eq!(report.ways_resolved, 1);
        assert_eq!(report.ways_dropped_missing_nodes, 0);
        assert_eq!(report.refs_missing, 0);
        assert_eq!(polylines.len(), 1);
        assert_eq!(polylines[0].points.len(), 3);
        assert_eq!(polylines[0].points[1], (2, GeoPoint::new(0.0, 1.0)));
        assert!(!polylines[0].closed);
    }

    #[test]
    fn resolve_drops_way_with_missing_ref_whole() {
        let nodes = extract_nodes(vec![node(1, 0.0, 0.0), node(2, 0.0, 1.0)]);
        let ways = extract_ways(vec![way(10, &[1, 2, 9], &[("highway", "primary")])]);
        let (polylines, report) = resolve_ways(&ways, &nodes);
        assert!(polylines.is_empty());
        assert_eq!(report.ways_dropped_missing_nodes, 1);
        assert_eq!(report.refs_missing, 1);
        assert_eq!(report.ways_resolved, 0);
    }

    #[test]
    fn resolve_counts_distinct_missing_refs() {
        let nodes = extract_nodes(vec![node(6, 0.0, 0.0)]);
        // 9 missing twice (counted once), 8 missing once
        let ways = extract_ways(vec![way(10, &[9, 6, 9, 8], &[("highway", "service")])]);
        let (_, report) = resolve_ways(&ways, &nodes);
        assert_eq!(report.refs_missing, 2);
        assert_eq!(report.ways_dropped_missing_nodes, 1);
    }

    #[test]
    fn resolve_marks_closed_way() {
        let nodes = extract_nodes(vec![
            node(5, 0.0, 0.0),
            node(6, 0.0, 1.0),
            node(7, 1.0, 1.0),
        ]);
        let ways = extract_ways(vec![way(10, &[5, 6, 7, 5], &[("highway", "residential")])]);
        let (polylines, report) = resolve_ways(&ways, &nodes);
        assert_eq!(report.ways_resolved, 1);
        assert!(polylines[0].closed);
    }

    #[test]
    fn report_partitions_input() {
        let nodes = extract_nodes(vec![node(1, 0.0, 0.0), node(2, 0.0, 1.0)]);
        let ways = extract_ways(vec![
            way(10, &[1, 2], &[("highway", "primary")]),
            way(11, &[1, 9], &[("highway", "primary")]),
            way(12, &[2, 1], &[("highway", "track")]),
        ]);
        let (_, report) = resolve_ways(&ways, &nodes);
        assert_eq!(
            report.ways_resolved + report.ways_dropped_missing_nodes,
            ways.len() as u64
        );
    }

    fn sample_polylines() -> Vec<RoadPolyline> {
        let p = GeoPoint::new(0.0, 0.0);
        let q = GeoPoint::new(1.0, 2.0);
        vec![
            RoadPolyline::new(1, HighwayClass::Motorway, vec![(1, p), (2, q)]),
            RoadPolyline::new(2, HighwayClass::Trunk, vec![(3, p), (4, q)]),
            RoadPolyline::new(3, HighwayClass::Footway, vec![(5, p), (6, q)]),
            RoadPolyline::new(4, HighwayClass::Motorway, vec![(7, p), (8, q)]),
        ]
    }

    #[test]
    fn filter_selects_and_preserves_order() {
        let keep: HashSet<_> = [HighwayClass::Motorway].into();
        let out = filter_by_class(sample_polylines(), &keep).unwrap();
        let ids: Vec<_> = out.iter().map(|p| p.way_id).collect();
        assert_eq!(ids, vec![1, 4]);
    }

    #[test]
    fn filter_with_all_classes_is_identity() {
        let keep: HashSet<_> = HighwayClass::NAMED.into_iter().collect();
        let input = sample_polylines();
        let out = filter_by_class(input.clone(), &keep).unwrap();
        assert_eq!(out, input);
    }

    #[test]
    fn filter_rejects_empty_set() {
        let err = filter_by_class(sample_polylines(), &HashSet::new()).unwrap_err();
        assert_eq!(err, TableError::EmptyClassSet);
    }

    #[test]
    fn filter_monotone_in_keep_set() {
        let smaller: HashSet<_> = [HighwayClass::Motorway].into();
        let larger: HashSet<_> = [
            HighwayClass::Motorway,
            HighwayClass::Trunk,
            HighwayClass::Primary,
            HighwayClass::Secondary,
        ]
        .into();
        let a = filter_by_class(sample_polylines(), &smaller).unwrap();
        let b = filter_by_class(sample_polylines(), &larger).unwrap();
        assert!(a.len() <= b.len());
        for p in &a {
            assert!(b.contains(p));
        }
    }

    proptest::proptest! {
        /// keep₁ ⊆ keep₂ ⇒ filter(P, keep₁) ⊆ filter(P, keep₂) as multisets —
        /// the testable form of the figure progression motorway ⊂ major ⊂ all.
        #[test]
        fn filter_monotone_under_subset(
            class_picks in proptest::collection::vec(0usize..26, 1..30),
            keep1_picks in proptest::collection::vec(0usize..26, 1..8),
            extra_picks in proptest::collection::vec(0usize..26, 0..8),
        ) {
            let p = GeoPoint::new(0.0, 0.0);
            let q = GeoPoint::new(0.5, 0.5);
            let polylines: Vec<RoadPolyline> = class_picks
                .iter()
                .enumerate()
                .map(|(i, &c)| {
                    RoadPolyline::new(
                        i as u64 + 1,
                        HighwayClass::NAMED[c].clone(),
                        vec![(2 * i as u64 + 1, p), (2 * i as u64 + 2, q)],
                    )
                })
                .collect();
            let keep1: HashSet<HighwayClass> =
                keep1_picks.iter().map(|&c| HighwayClass::NAMED[c].clone()).collect();
            let mut keep2 = keep1.clone();
            keep2.extend(extra_picks.iter().map(|&c| HighwayClass::NAMED[c].clone()));

            let small = filter_by_class(polylines.clone(), &keep1).unwrap();
            let large = filter_by_class(polylines, &keep2).unwrap();
            proptest::prop_assert!(small.len() <= large.len());
            // every way id selected by the smaller set survives the larger one
            let large_ids: HashSet<u64> = large.iter().map(|x| x.way_id).collect();
            for x in &small {
                proptest::prop_assert!(large_ids.contains(&x.way_id));
            }
        }
    }

    #[test]
    fn bounding_box_single_point_pair() {
        let p = RoadPolyline::new(
            1,
            HighwayClass::Motorway,
            vec![
                (1, GeoPoint::new(35.0, -90.0)),
                (2, GeoPoint::new(35.0, -90.0)),
            ],
        );
        let b = bounding_box(&[p]).unwrap();
        assert_eq!((b.min_lat, b.min_lon, b.max_lat, b.max_lon), (35.0, -90.0, 35.0, -90.0));
    }

    #[test]
    fn bounding_box_tight_and_order_independent() {
        let mut polylines = sample_polylines();
        let a = bounding_box(&polylines).unwrap();
        polylines.reverse();
        let b = bounding_box(&polylines).unwrap();
        assert_eq!(a, b);
        assert_eq!((a.min_lat, a.min_lon, a.max_lat, a.max_lon), (0.0, 0.0, 1.0, 2.0));
    }

    #[test]
    fn bounding_box_empty_input_errors() {
        assert_eq!(bounding_box(&[]).unwrap_err(), TableError::EmptyInput);
    }

    #[test]
    fn nodes_csv_sorted_rows() {
        let t = extract_nodes(vec![node(11, 35.2, -90.15), node(10, 35.1, -90.0)]);
        let mut buf = Vec::new();
        let rows = write_nodes_csv(&t, &mut buf).unwrap();
        assert_eq!(rows, 2);
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "id,lat,lon\n10,35.1,-90\n11,35.2,-90.15\n"
        );
    }

    #[test]
    fn ways_csv_semicolon_refs() {
        let t = extract_ways(vec![way(100, &[10, 11, 10], &[("highway", "residential")])]);
        let mut buf = Vec::new();
        let rows = write_ways_csv(&t, &mut buf).unwrap();
        assert_eq!(rows, 1);
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "way_id,highway,node_refs\n100,residential,10;11;10\n"
        );
    }
}
