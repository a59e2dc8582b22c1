//! Output formats: SVG street maps, GeoJSON features, and CSV edge lists.
//!
//! All three writers are byte-deterministic for identical inputs: element
//! order follows input order, numbers use fixed formatting (≤ 7 decimals for
//! degrees, 3 for meters, 4 for SVG user units), and no timestamps or
//! environment state leak into the output.

use std::collections::BTreeMap;
use std::io::{self, Write};
use std::path::Path;

use thiserror::Error;

use crate::geodesy::ProjectedPolyline;
use crate::graph::RoadNetwork;
use crate::model::{HighwayClass, RoadPolyline, WayId};
use crate::util::{csv_field, fmt_degrees, fmt_meters, fmt_trimmed};

/// Per-class stroke styling plus canvas parameters.
///
/// Defaults follow the usual road-map hierarchy — heavy warm strokes for
/// motorway/trunk/primary/secondary, thin gray for everything else — and can
/// be overridden from a config file (see [`RenderStyle::from_config_str`]).
#[derive(Debug, Clone, PartialEq)]
pub struct RenderStyle {
    pub background: String,
    pub canvas_width: u32,
    /// Viewport padding as a fraction of the content span, in [0, 0.5).
    pub margin: f64,
    class_styles: BTreeMap<String, (f64, String)>,
    pub default_width: f64,
    pub default_color: String,
}

const DEFAULT_CLASS_STYLES: &[(&str, f64, &str)] = &[
    ("motorway", 3.0, "#c0392b"),
    ("motorway_link", 1.6, "#c0392b"),
    ("trunk", 2.6, "#d35400"),
    ("trunk_link", 1.4, "#d35400"),
    ("primary", 2.2, "#e67e22"),
    ("primary_link", 1.2, "#e67e22"),
    ("secondary", 1.8, "#d4a017"),
    ("secondary_link", 1.0, "#d4a017"),
    ("tertiary", 1.4, "#999999"),
    ("tertiary_link", 0.9, "#999999"),
    ("residential", 1.0, "#aaaaaa"),
    ("living_street", 0.9, "#aaaaaa"),
    ("service", 0.7, "#bbbbbb"),
    ("track", 0.6, "#b8a888"),
    ("footway", 0.5, "#cccccc"),
    ("pedestrian", 0.6, "#cccccc"),
    ("path", 0.5, "#cccccc"),
    ("cycleway", 0.6, "#88aacc"),
    ("steps", 0.5, "#cccccc"),
    ("corridor", 0.5, "#cccccc"),
    ("platform", 0.6, "#c8c8c8"),
    ("raceway", 0.8, "#cc88cc"),
    ("construction", 0.6, "#dddddd"),
    ("proposed", 0.5, "#dddddd"),
    ("abandoned", 0.5, "#dddddd"),
    ("rest_area", 0.6, "#c8c8c8"),
];

impl Default for RenderStyle {
    fn default() -> Self {
        let class_styles = DEFAULT_CLASS_STYLES
            .iter()
            .map(|(name, width, color)| (name.to_string(), (*width, color.to_string())))
            .collect();
        Self {
            background: "#ffffff".to_string(),
            canvas_width: 1600,
            margin: 0.05,
            class_styles,
            default_width: 0.5,
            default_color: "#cccccc".to_string(),
        }
    }
}

#[derive(Debug, Error)]
pub enum StyleError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("style config line {line}: {message}")]
    Parse { line: usize, message: String },
}

fn is_hex_color(s: &str) -> bool {
    s.len() == 7
        && s.starts_with('#')
        && s[1..].bytes().all(|b| b.is_ascii_hexdigit())
}

impl RenderStyle {
    /// Stroke width for a class, falling back to the default for classes
    /// without an explicit entry.
    pub fn width_for(&self, class: &HighwayClass) -> f64 {
        self.class_styles
            .get(class.name())
            .map(|(w, _)| *w)
            .unwrap_or(self.default_width)
    }

    pub fn color_for(&self, class: &HighwayClass) -> &str {
        self.class_styles
            .get(class.name())
            .map(|(_, c)| c.as_str())
            .unwrap_or(&self.default_color)
    }

    /// Parses the key-value style format, starting from the defaults:
    ///
    /// ```text
    /// # comment
    /// background = #f8f8f8
    /// canvas_width = 1600
    /// margin = 0.05
    /// default.width = 0.5
    /// default.color = #cccccc
    /// motorway.width = 3
    /// motorway.color = #c0392b
    /// ```
    ///
    /// Class names use underscore spelling. Unknown keys, unparsable values,
    /// and out-of-range settings are errors.
    pub fn from_config_str(text: &str) -> Result<Self, StyleError> {
        let mut style = RenderStyle::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| StyleError::Parse {
                line: line_no,
                message: "expected `key = value`".to_string(),
            })?;
            let key = key.trim();
            let value = value.trim();
            let parse_err = |message: String| StyleError::Parse {
                line: line_no,
                message,
            };

            match key {
                "background" => {
                    if !is_hex_color(value) {
                        return Err(parse_err(format!("`{value}` is not a #rrggbb color")));
                    }
                    style.background = value.to_string();
                }
                "canvas_width" => {
                    style.canvas_width = value
                        .parse()
                        .map_err(|_| parse_err(format!("`{value}` is not a pixel count")))?;
                }
                "margin" => {
                    style.margin = value
                        .parse()
                        .map_err(|_| parse_err(format!("`{value}` is not a number")))?;
                }
                _ => {
                    let (class_part, attr) =
                        key.rsplit_once('.').ok_or_else(|| {
                            parse_err(format!("unknown key `{key}`"))
                        })?;
                    let class_name = if class_part == "default" {
                        None
                    } else {
                        let class = crate::model::classify_highway(class_part);
                        if !class.is_named() {
                            return Err(parse_err(format!(
                                "`{class_part}` is not a highway class"
                            )));
                        }
                        Some(class.name().to_string())
                    };
                    match attr {
                        "width" => {
                            let width: f64 = value.parse().map_err(|_| {
                                parse_err(format!("`{value}` is not a number"))
                            })?;
                            match class_name {
                                Some(name) => {
                                    let color = style.color_for(&crate::model::classify_highway(&name)).to_string();
                                    style.class_styles.insert(name, (width, color));
                                }
                                None => style.default_width = width,
                            }
                        }
                        "color" => {
                            if !is_hex_color(value) {
                                return Err(parse_err(format!(
                                    "`{value}` is not a #rrggbb color"
                                )));
                            }
                            match class_name {
                                Some(name) => {
                                    let width = style.width_for(&crate::model::classify_highway(&name));
                                    style.class_styles.insert(name, (width, value.to_string()));
                                }
                                None => style.default_color = value.to_string(),
                            }
                        }
                        _ => return Err(parse_err(format!("unknown attribute `{attr}`"))),
                    }
                }
            }
        }
        style.validate()?;
        Ok(style)
    }

    pub fn from_config_file(path: impl AsRef<Path>) -> Result<Self, StyleError> {
        Self::from_config_str(&std::fs::read_to_string(path)?)
    }

    fn validate(&self) -> Result<(), StyleError> {
        let bad = |message: String| StyleError::Parse { line: 0, message };
        if self.canvas_width < 64 {
            return Err(bad(format!(
                "canvas_width must be at least 64, got {}",
                self.canvas_width
            )));
        }
        if !(0.0..0.5).contains(&self.margin) {
            return Err(bad(format!(
                "margin must be in [0, 0.5), got {}",
                self.margin
            )));
        }
        if self.default_width <= 0.0 {
            return Err(bad("default.width must be positive".to_string()));
        }
        for (name, (width, color)) in &self.class_styles {
            if *width <= 0.0 {
                return Err(bad(format!("{name}.width must be positive")));
            }
            if !is_hex_color(color) {
                return Err(bad(format!("{name}.color is not a #rrggbb color")));
            }
        }
        if !is_hex_color(&self.background) || !is_hex_color(&self.default_color) {
            return Err(bad("colors must be #rrggbb".to_string()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("nothing to render")]
    EmptyInput,
    #[error("way {way_id} has a non-finite projected coordinate")]
    NonFiniteCoordinate { way_id: WayId },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// What a render produced: element count and the world-space viewport
/// (projected bounding box expanded by the margin).
#[derive(Debug, Clone, PartialEq)]
pub struct RenderReport {
    pub element_count: usize,
    pub viewport_min_easting: f64,
    pub viewport_min_northing: f64,
    pub viewport_max_easting: f64,
    pub viewport_max_northing: f64,
    pub width_px: u32,
    pub height_px: f64,
}

/// Renders projected polylines as a standalone SVG document.
///
/// One `<polyline>` element per input polyline, class-derived styling, equal
/// scale on both axes, northing up. Output bytes depend only on the inputs.
pub fn render_svg(
    polylines: &[ProjectedPolyline],
    style: &RenderStyle,
    out: &mut impl Write,
) -> Result<RenderReport, RenderError> {
    if polylines.is_empty() {
        return Err(RenderError::EmptyInput);
    }

    let mut min_e = f64::INFINITY;
    let mut min_n = f64::INFINITY;
    let mut max_e = f64::NEG_INFINITY;
    let mut max_n = f64::NEG_INFINITY;
    for p in polylines {
        for (_, pt) in &p.points {
            if !pt.easting.is_finite() || !pt.northing.is_finite() {
                return Err(RenderError::NonFiniteCoordinate { way_id: p.way_id });
            }
            min_e = min_e.min(pt.easting);
            min_n = min_n.min(pt.northing);
            max_e = max_e.max(pt.easting);
            max_n = max_n.max(pt.northing);
        }
    }

    // Uniform world-space padding derived from the larger span, so degenerate
    // extents still produce a usable window.
    let span = (max_e - min_e).max(max_n - min_n);
    let pad = if span > 0.0 {
        style.margin * span
    } else {
        0.5
    };
    let pad = if pad > 0.0 { pad } else { 0.5 };
    let e0 = min_e - pad;
    let e1 = max_e + pad;
    let n0 = min_n - pad;
    let n1 = max_n + pad;

    let scale = f64::from(style.canvas_width) / (e1 - e0);
    let height = scale * (n1 - n0);

    // One global affine map: x = (e - e0)·s, y = (n1 - n)·s (northing up).
    let x = |e: f64| fmt_trimmed((e - e0) * scale, 4);
    let y = |n: f64| fmt_trimmed((n1 - n) * scale, 4);

    let height_attr = fmt_trimmed(height, 4);
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        style.canvas_width, height_attr, style.canvas_width, height_attr
    )?;
    writeln!(
        out,
        r#"<rect width="100%" height="100%" fill="{}"/>"#,
        style.background
    )?;

    for p in polylines {
        let mut points = String::new();
        for (i, (_, pt)) in p.points.iter().enumerate() {
            if i > 0 {
                points.push(' ');
            }
            points.push_str(&x(pt.easting));
            points.push(',');
            points.push_str(&y(pt.northing));
        }
        writeln!(
            out,
            r#"<polyline fill="none" stroke="{}" stroke-width="{}" stroke-linecap="round" stroke-linejoin="round" points="{}"/>"#,
            style.color_for(&p.class),
            fmt_trimmed(style.width_for(&p.class), 3),
            points
        )?;
    }
    writeln!(out, "</svg>")?;

    Ok(RenderReport {
        element_count: polylines.len(),
        viewport_min_easting: e0,
        viewport_min_northing: n0,
        viewport_max_easting: e1,
        viewport_max_northing: n1,
        width_px: style.canvas_width,
        height_px: height,
    })
}

fn write_json_string(out: &mut impl Write, s: &str) -> io::Result<()> {
    out.write_all(b"\"")?;
    for c in s.chars() {
        match c {
            '"' => out.write_all(b"\\\"")?,
            '\\' => out.write_all(b"\\\\")?,
            '\n' => out.write_all(b"\\n")?,
            '\r' => out.write_all(b"\\r")?,
            '\t' => out.write_all(b"\\t")?,
            c if (c as u32) < 0x20 => write!(out, "\\u{:04x}", c as u32)?,
            c => write!(out, "{}", c)?,
        }
    }
    out.write_all(b"\"")
}

/// Writes a GeoJSON FeatureCollection: one LineString feature per polyline
/// with `way_id` and `highway` properties. Coordinates are (lon, lat) per the
/// GeoJSON axis order, at most 7 decimal places. Returns the feature count.
pub fn export_geojson(polylines: &[RoadPolyline], out: &mut impl Write) -> io::Result<usize> {
    out.write_all(br#"{"type":"FeatureCollection","features":["#)?;
    for (i, p) in polylines.iter().enumerate() {
        if i > 0 {
            out.write_all(b",")?;
        }
        out.write_all(br#"{"type":"Feature","geometry":{"type":"LineString","coordinates":["#)?;
        for (j, (_, g)) in p.points.iter().enumerate() {
            if j > 0 {
                out.write_all(b",")?;
            }
            write!(out, "[{},{}]", fmt_degrees(g.lon), fmt_degrees(g.lat))?;
        }
        write!(out, r#"]}},"properties":{{"way_id":{},"highway":"#, p.way_id)?;
        write_json_string(out, p.class.name())?;
        out.write_all(b"}}")?;
    }
    out.write_all(b"]}")?;
    Ok(polylines.len())
}

/// Writes the edge list as CSV in edge-id order:
/// `edge_id,from_node,to_node,length_m,highway,way_id`, lengths with 3
/// decimal places, LF line endings. Returns the row count.
pub fn export_edges_csv(network: &RoadNetwork, out: &mut impl Write) -> io::Result<usize> {
    out.write_all(b"edge_id,from_node,to_node,length_m,highway,way_id\n")?;
    for e in network.edges() {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            e.id,
            e.a,
            e.b,
            fmt_meters(e.length_m),
            csv_field(e.class.name()),
            e.source_way
        )?;
    }
    Ok(network.edges().len())
}
