//! End-to-end pipeline over an in-memory extract: parse → tables → join →
//! filter → project → render/export, with the cross-module invariants that
//! only show up when the stages are chained.

use std::collections::HashSet;
use std::io::BufReader;

use roadnet::geodesy::{haversine_m, project_polylines, utm_zone_for};
use roadnet::graph::{build_graph, find_junctions, network_stats, shortest_path};
use roadnet::ingest::parse_osm;
use roadnet::model::{GeoPoint, HighwayClass, RoadPolyline};
use roadnet::render::{export_geojson, render_svg, RenderStyle};
use roadnet::table::{bounding_box, filter_by_class, resolve_ways, NodeTable, WayTable};

const EXTRACT: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<osm version="0.6" generator="test">
  <bounds minlat="35.13" minlon="-90.06" maxlat="35.15" maxlon="-90.04"/>
  <node id="1" lat="35.140" lon="-90.052"/>
  <node id="2" lat="35.141" lon="-90.051"/>
  <node id="3" lat="35.142" lon="-90.050"/>
  <node id="4" lat="35.140" lon="-90.050"/>
  <node id="5" lat="35.142" lon="-90.052"/>
  <node id="6" lat="35.144" lon="-90.054"/>
  <node id="7" lat="35.145" lon="-90.053"/>
  <node id="8" lat="35.144" lon="-90.052"/>
  <node id="9" lat="35.137" lon="-90.056"/>
  <node id="10" lat="35.138" lon="-90.048"/>
  <way id="101">
    <nd ref="1"/><nd ref="2"/><nd ref="3"/>
    <tag k="highway" v="motorway"/>
  </way>
  <way id="102">
    <nd ref="4"/><nd ref="2"/><nd ref="5"/>
    <tag k="highway" v="residential"/>
    <tag k="name" v="Crossing St"/>
  </way>
  <way id="103">
    <nd ref="6"/><nd ref="7"/><nd ref="8"/><nd ref="6"/>
    <tag k="highway" v="service"/>
  </way>
  <way id="104">
    <nd ref="9"/><nd ref="10"/>
    <tag k="highway" v="secondary"/>
  </way>
  <way id="105">
    <nd ref="1"/><nd ref="4"/>
    <tag k="building" v="yes"/>
  </way>
  <relation id="900">
    <member type="way" ref="101" role="outer"/>
  </relation>
</osm>
"#;

fn load() -> (NodeTable, WayTable, Vec<RoadPolyline>) {
    let mut nodes = NodeTable::new();
    let mut ways = WayTable::new();
    let summary = parse_osm(
        EXTRACT.as_bytes(),
        |n| nodes.add(&n),
        |w| {
            ways.add(w);
        },
    )
    .unwrap();
    assert_eq!(summary.nodes_read, 10);
    assert_eq!(summary.ways_read, 5);
    assert_eq!(summary.relations_skipped, 1);
    assert_eq!(summary.unknown_elements_skipped, 1); // <bounds/>
    let (polylines, report) = resolve_ways(&ways, &nodes);
    assert_eq!(report.ways_resolved, 4);
    (nodes, ways, polylines)
}

#[test]
fn tables_join_and_filter() {
    let (nodes, ways, polylines) = load();
    assert_eq!(nodes.len(), 10);
    assert_eq!(ways.len(), 4); // building way dropped at extraction

    let keep: HashSet<_> = [HighwayClass::Motorway].into();
    let motorways = filter_by_class(polylines.clone(), &keep).unwrap();
    assert_eq!(motorways.len(), 1);
    assert_eq!(motorways[0].way_id, 101);

    let all: HashSet<_> = HighwayClass::NAMED.into_iter().collect();
    let everything = filter_by_class(polylines, &all).unwrap();
    assert_eq!(everything.len(), 4);
    assert!(everything.len() >= motorways.len());
}

#[test]
fn auto_zone_is_memphis_zone_15() {
    let (_, _, polylines) = load();
    let bbox = bounding_box(&polylines).unwrap();
    let center = bbox.center();
    let zone = utm_zone_for(center.lon, center.lat).unwrap();
    assert_eq!(zone.zone(), 15);
}

#[test]
fn projected_render_is_deterministic_and_counts_match() {
    let (_, _, polylines) = load();
    let zone = utm_zone_for(-90.05, 35.14).unwrap();
    let projected = project_polylines(&polylines, zone).unwrap();
    assert_eq!(projected.len(), polylines.len());

    let style = RenderStyle::default();
    let mut first = Vec::new();
    let mut second = Vec::new();
    let report = render_svg(&projected, &style, &mut first).unwrap();
    render_svg(&projected, &style, &mut second).unwrap();
    assert_eq!(first, second);
    assert_eq!(report.element_count, 4);
    assert_eq!(
        String::from_utf8(first).unwrap().matches("<polyline").count(),
        4
    );
}

#[test]
fn geojson_roundtrips_through_independent_parser() {
    let (_, _, polylines) = load();
    let mut buf = Vec::new();
    let count = export_geojson(&polylines, &mut buf).unwrap();
    assert_eq!(count, 4);

    let parsed: serde_json::Value = serde_json::from_slice(&buf).unwrap();
    let features = parsed["features"].as_array().unwrap();
    assert_eq!(features.len(), 4);
    for (feature, polyline) in features.iter().zip(&polylines) {
        assert_eq!(feature["geometry"]["type"], "LineString");
        assert_eq!(
            feature["properties"]["way_id"].as_u64().unwrap(),
            polyline.way_id
        );
        assert_eq!(
            feature["properties"]["highway"].as_str().unwrap(),
            polyline.class.name()
        );
        let coords = feature["geometry"]["coordinates"].as_array().unwrap();
        assert_eq!(coords.len(), polyline.points.len());
        for (c,
            (_, g)) in coords.iter().zip(&polyline.points) {
            let lon = c[0].as_f64().unwrap();
            let lat = c[1].as_f64().unwrap();
            assert!((lon - g.lon).abs() < 1e-7);
            assert!((lat - g.lat).abs() < 1e-7);
        }
    }
}

#[test]
fn graph_conserves_length_and_segments() {
    let (_, _, polylines) = load();
    let network = build_graph(&polylines);
    assert_eq!(network.degenerate_dropped(), 0);

    let polyline_total: f64 = polylines
        .iter()
        .flat_map(|p| p.points.windows(2))
        .map(|w| haversine_m(w[0].1, w[1].1))
        .sum();
    let edge_total: f64 = network.edges().iter().map(|e| e.length_m).sum();
    assert!((edge_total - polyline_total).abs() <= 1e-6 * polyline_total);

    // every consecutive point pair survives the split, nothing added
    let key = |a: GeoPoint, b: GeoPoint| {
        (
            a.lat.to_bits(),
            a.lon.to_bits(),
            b.lat.to_bits(),
            b.lon.to_bits(),
        )
    };
    let mut want: Vec<_> = polylines
        .iter()
        .flat_map(|p| p.points.windows(2).map(|w| key(w[0].1, w[1].1)))
        .collect();
    let mut got: Vec<_> = network
        .edges()
        .iter()
        .flat_map(|e| e.geometry.windows(2).map(|w| key(w[0], w[1])))
        .collect();
    want.sort_unstable();
    got.sort_unstable();
    assert_eq!(want, got);

    // edge endpoints are junctions, and junctions all appear as vertices
    let junctions = find_junctions(&polylines);
    for e in network.edges() {
        assert!(junctions.contains(&e.a));
        assert!(junctions.contains(&e.b));
    }
    let vertices: HashSet<_> = network.vertices().map(|(id, _)| id).collect();
    assert_eq!(vertices, junctions);
}

#[test]
fn routing_works_on_the_extract() {
    let (_, _, polylines) = load();
    let network = build_graph(&polylines);
    let stats = network_stats(&network);
    assert_eq!(stats.vertex_count, 8);
    assert_eq!(stats.edge_count, 6);
    assert_eq!(stats.component_count, 3);

    let path = shortest_path(&network, 1, 5).unwrap();
    assert_eq!(path.vertices, vec![1, 2, 5]);
    assert!(path.total_length_m > 0.0);

    assert!(shortest_path(&network, 1, 9).is_err()); // disconnected
}

#[test]
fn buffer_size_does_not_change_anything() {
    let mut outputs = Vec::new();
    for cap in [1usize, 7, 4096] {
        let mut nodes = Vec::new();
        let mut ways = Vec::new();
        let summary = parse_osm(
            BufReader::with_capacity(cap, EXTRACT.as_bytes()),
            |n| nodes.push(n),
            |w| ways.push(w),
        )
        .unwrap();
        outputs.push((summary, nodes, ways));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[1], outputs[2]);
}
