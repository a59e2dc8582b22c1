//! Domain vocabulary shared by the whole pipeline: raw OSM element records,
//! tags, highway classification, and geographic primitives.

use std::fmt;

/// OSM node identifier. Ids are opaque positive integers; no density or
/// ordering is assumed.
pub type NodeId = u64;

/// OSM way identifier.
pub type WayId = u64;

/// A key/value attribute attached to an OSM element.
///
/// Keys are non-empty; values may be empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tag {
    pub key: String,
    pub value: String,
}

impl Tag {
    pub fn new(key: impl Into<String>, value: impl Into<String>) -> Self {
        let key = key.into();
        debug_assert!(!key.is_empty(), "tag keys must be non-empty");
        Self {
            key,
            value: value.into(),
        }
    }
}

/// A raw OSM node: id, WGS84 coordinates in degrees, and its tags.
///
/// Ingest guarantees `id > 0`, `-90 <= lat <= 90` and `-180 <= lon <= 180`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawNode {
    pub id: NodeId,
    pub lat: f64,
    pub lon: f64,
    pub tags: Vec<Tag>,
}

impl RawNode {
    pub fn point(&self) -> GeoPoint {
        GeoPoint {
            lat: self.lat,
            lon: self.lon,
        }
    }
}

/// A raw OSM way: an ordered list of node references plus tags.
///
/// Ingest rejects ways with fewer than two references, so a stored way always
/// defines a polyline. References may repeat (self-touching ways); a closed
/// way repeats first = last.
#[derive(Debug, Clone, PartialEq)]
pub struct RawWay {
    pub id: WayId,
    pub node_refs: Vec<NodeId>,
    pub tags: Vec<Tag>,
}

impl RawWay {
    /// True iff the first node reference equals the last.
    ///
    /// The degenerate two-ref loop `[7,7]` counts as closed.
    pub fn is_closed(&self) -> bool {
        self.node_refs.first() == self.node_refs.last() && !self.node_refs.is_empty()
    }
}

/// A WGS84 position in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Self {
        Self { lat, lon }
    }
}

macro_rules! highway_classes {
    ($(($variant:ident, $name:literal)),+ $(,)?) => {
        /// Road classification from the `highway` tag.
        ///
        /// The 26 named classes are the ones retained by the way-table filter;
        /// every other value falls into [`HighwayClass::Other`] and is dropped
        /// there. Parsing is case-insensitive and treats spaces and
        /// underscores as the same separator, so `"tertiary link"` and
        /// `"Tertiary_Link"` both classify as [`HighwayClass::TertiaryLink`].
        #[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum HighwayClass {
            $($variant,)+
            /// Any highway value outside the named set, in normalized
            /// (lowercase, underscore) spelling.
            Other(String),
        }

        impl HighwayClass {
            /// All named classes, in declaration order.
            pub const NAMED: [HighwayClass; 26] = [$(HighwayClass::$variant,)+];

            /// The class name in underscore spelling (`"tertiary_link"`).
            pub fn name(&self) -> &str {
                match self {
                    $(HighwayClass::$variant => $name,)+
                    HighwayClass::Other(v) => v,
                }
            }

            fn from_normalized(value: &str) -> Option<HighwayClass> {
                match value {
                    $($name => Some(HighwayClass::$variant),)+
                    _ => None,
                }
            }
        }
    };
}

highway_classes![
    (Residential, "residential"),
    (Service, "service"),
    (Tertiary, "tertiary"),
    (Track, "track"),
    (Secondary, "secondary"),
    (Primary, "primary"),
    (TertiaryLink, "tertiary_link"),
    (SecondaryLink, "secondary_link"),
    (MotorwayLink, "motorway_link"),
    (PrimaryLink, "primary_link"),
    (Motorway, "motorway"),
    (TrunkLink, "trunk_link"),
    (Trunk, "trunk"),
    (Footway, "footway"),
    (Construction, "construction"),
    (Pedestrian, "pedestrian"),
    (Proposed, "proposed"),
    (Path, "path"),
    (Raceway, "raceway"),
    (Cycleway, "cycleway"),
    (LivingStreet, "living_street"),
    (Steps, "steps"),
    (Abandoned, "abandoned"),
    (RestArea, "rest_area"),
    (Corridor, "corridor"),
    (Platform, "platform"),
];

impl HighwayClass {
    /// True for the 26 named classes, false for `Other`.
    pub fn is_named(&self) -> bool {
        !matches!(self, HighwayClass::Other(_))
    }
}

impl fmt::Display for HighwayClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Normalization applied before class matching: trim, lowercase, spaces to
/// underscores.
pub fn normalize_class_name(value: &str) -> String {
    value.trim().to_lowercase().replace(' ', "_")
}

/// Classifies a `highway` tag value. Total: unmatched values become
/// [`HighwayClass::Other`] carrying the normalized spelling, so
/// `classify_highway(normalize_class_name(v)) == classify_highway(v)` for
/// every input.
pub fn classify_highway(value: &str) -> HighwayClass {
    let normalized = normalize_class_name(value);
    HighwayClass::from_normalized(&normalized).unwrap_or(HighwayClass::Other(normalized))
}

/// A way whose node references have been resolved to coordinates and whose
/// highway class is known — one row of the joined node/way table.
#[derive(Debug, Clone, PartialEq)]
pub struct RoadPolyline {
    pub way_id: WayId,
    pub class: HighwayClass,
    /// The way's nodes in document order, always at least two.
    pub points: Vec<(NodeId, GeoPoint)>,
    /// True iff the first node id equals the last.
    pub closed: bool,
}

impl RoadPolyline {
    /// Builds a polyline, deriving `closed` from the endpoints.
    pub fn new(way_id: WayId, class: HighwayClass, points: Vec<(NodeId, GeoPoint)>) -> Self {
        debug_assert!(points.len() >= 2, "a polyline needs at least two points");
        let closed = points.first().map(|p| p.0) == points.last().map(|p| p.0);
        Self {
            way_id,
            class,
            points,
            closed,
        }
    }
}

/// Tight latitude/longitude bounds over a set of points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub min_lat: f64,
    pub min_lon: f64,
    pub max_lat: f64,
    pub max_lon: f64,
}

impl BoundingBox {
    /// Starts a box from a single point.
    pub fn from_point(p: GeoPoint) -> Self {
        Self {
            min_lat: p.lat,
            min_lon: p.lon,
            max_lat: p.lat,
            max_lon: p.lon,
        }
    }

    /// Grows the box to include `p`.
    pub fn include(&mut self, p: GeoPoint) {
        self.min_lat = self.min_lat.min(p.lat);
        self.min_lon = self.min_lon.min(p.lon);
        self.max_lat = self.max_lat.max(p.lat);
        self.max_lon = self.max_lon.max(p.lon);
    }

    /// Midpoint of the box.
    pub fn center(&self) -> GeoPoint {
        GeoPoint {
            lat: (self.min_lat + self.max_lat) / 2.0,
            lon: (self.min_lon + self.max_lon) / 2.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classify_named_values() {
        assert_eq!(classify_highway("motorway"), HighwayClass::Motorway);
        assert_eq!(classify_highway("tertiary_link"), HighwayClass::TertiaryLink);
        assert_eq!(classify_highway("tertiary link"), HighwayClass::TertiaryLink);
        assert_eq!(classify_highway("Living Street"), HighwayClass::LivingStreet);
        assert_eq!(classify_highway("  trunk "), HighwayClass::Trunk);
    }

    #[test]
    fn classify_unknown_is_other() {
        assert_eq!(
            classify_highway("busway"),
            HighwayClass::Other("busway".into())
        );
        assert_eq!(classify_highway(""), HighwayClass::Other("".into()));
    }

    #[test]
    fn all_26_spellings_classify_named() {
        for class in HighwayClass::NAMED {
            let underscore = class.name().to_string();
            let spaced = underscore.replace('_', " ");
            assert_eq!(classify_highway(&underscore), class);
            assert_eq!(classify_highway(&spaced), class);
            assert_eq!(classify_highway(&underscore.to_uppercase()), class);
        }
        assert_eq!(HighwayClass::NAMED.len(), 26);
    }

    #[test]
    fn is_closed_examples() {
        let way = |refs: Vec<NodeId>| RawWay {
            id: 1,
            node_refs: refs,
            tags: vec![],
        };
        assert!(way(vec![1, 2, 3, 1]).is_closed());
        assert!(!way(vec![1, 2, 3]).is_closed());
        assert!(way(vec![7, 7]).is_closed());
    }

    #[test]
    fn polyline_closed_flag() {
        let p = GeoPoint::new(0.0, 0.0);
        let open = RoadPolyline::new(1, HighwayClass::Motorway, vec![(1, p), (2, p)]);
        assert!(!open.closed);
        let closed = RoadPolyline::new(
            2,
            HighwayClass::Motorway,
            vec![(5, p), (6, p), (5, p)],
        );
        assert!(closed.closed);
    }

    proptest::proptest! {
        #[test]
        fn classify_total_and_idempotent(value in ".{0,40}") {
            let class = classify_highway(&value);
            // idempotent under its own normalization
            proptest::prop_assert_eq!(
                classify_highway(&normalize_class_name(&value)),
                class.clone()
            );
            // the printed name classifies back to the same class
            proptest::prop_assert_eq!(classify_highway(class.name()), class);
        }
    }

    #[test]
    fn bounding_box_grows() {
        let mut b = BoundingBox::from_point(GeoPoint::new(35.0, -90.0));
        assert_eq!(b.min_lat, 35.0);
        assert_eq!(b.max_lon, -90.0);
        b.include(GeoPoint::new(36.0, -91.0));
        assert_eq!(b.max_lat, 36.0);
        assert_eq!(b.min_lon, -91.0);
        let c = b.center();
        assert!((c.lat - 35.5).abs() < 1e-12);
        assert!((c.lon - -90.5).abs() < 1e-12);
    }
}
