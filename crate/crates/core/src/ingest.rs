//! Single-pass streaming parser for the OSM XML subset.
//!
//! Accepted grammar: root `<osm>`; children `<node id lat lon>` with optional
//! `<tag k v/>` children; `<way id>` with `<nd ref/>` and `<tag k v/>`
//! children; `<relation>` subtrees skipped wholesale. Anything else is
//! skipped with a count. Memory use is bounded by the largest single element,
//! not by document size.
//!
//! Individually invalid records (bad id, out-of-range coordinates, broken
//! `nd` refs) are skipped and counted so a city-scale extract survives its
//! oddities; structural XML errors abort, because element boundaries become
//! untrustworthy after one.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use quick_xml::events::{BytesStart, Event};
use quick_xml::reader::Reader;
use thiserror::Error;

use crate::model::{NodeId, RawNode, RawWay, Tag, WayId};

/// Counters for one extraction pass.
///
/// `nodes_read` / `ways_read` count only records actually delivered to the
/// sinks.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct ParseSummary {
    pub nodes_read: u64,
    pub ways_read: u64,
    /// Ways with fewer than two `nd` refs; a way must define a polyline.
    pub ways_rejected_short: u64,
    pub relations_skipped: u64,
    pub unknown_elements_skipped: u64,
    /// Nodes or ways skipped for invalid attributes (missing or non-numeric
    /// id, coordinates out of the WGS84 range, broken `nd` refs).
    pub malformed_records: u64,
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("malformed XML at byte {position}: {message}")]
    MalformedXml { position: u64, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn malformed(position: u64, message: impl Into<String>) -> ParseError {
    ParseError::MalformedXml {
        position,
        message: message.into(),
    }
}

fn convert(err: quick_xml::Error, position: u64) -> ParseError {
    match err {
        quick_xml::Error::Io(io) => {
            ParseError::Io(std::io::Error::new(io.kind(), io.to_string()))
        }
        other => malformed(position, other.to_string()),
    }
}

/// A way being assembled; `None` marks a record already known to be invalid
/// whose remaining children are consumed without effect.
struct WayDraft {
    id: WayId,
    refs: Vec<NodeId>,
    tags: Vec<Tag>,
}

enum State {
    /// Before the root element.
    Prolog,
    /// Directly inside `<osm>`.
    Doc,
    Node(Option<RawNode>),
    Way(Option<WayDraft>),
    /// Root closed; only whitespace and comments may follow.
    AfterRoot,
}

/// Parses OSM XML from `source`, delivering each valid node and way exactly
/// once, in document order, to the corresponding sink.
///
/// Relations are counted and skipped. Sinks are invoked serially from the
/// calling thread. Returns the pass counters, or [`ParseError::MalformedXml`]
/// on structural errors (unbalanced markup, undecodable entities, a non-UTF-8
/// encoding declaration, a root other than `<osm>`).
pub fn parse_osm<R, N, W>(
    source: R,
    mut node_sink: N,
    mut way_sink: W,
) -> Result<ParseSummary, ParseError>
where
    R: BufRead,
    N: FnMut(RawNode),
    W: FnMut(RawWay),
{
    let mut reader = Reader::from_reader(source);
    reader.config_mut().check_end_names = true;

    let mut summary = ParseSummary::default();
    let mut state = State::Prolog;
    // Depth inside a subtree being skipped (unknown element or relation).
    let mut skip_depth: u32 = 0;
    let mut buf = Vec::new();

    loop {
        buf.clear();
        let event = {
            let pos = reader.buffer_position();
            reader
                .read_event_into(&mut buf)
                .map_err(|e| convert(e, pos))?
        };
        let pos = reader.buffer_position();

        match event {
            Event::Decl(decl) => {
                if let Some(enc) = decl.encoding() {
                    let enc = enc.map_err(|e| malformed(pos, e.to_string()))?;
                    if !enc.eq_ignore_ascii_case(b"utf-8") && !enc.eq_ignore_ascii_case(b"utf8") {
                        return Err(malformed(
                            pos,
                            format!(
                                "unsupported encoding {:?}; only UTF-8 input is accepted",
                                String::from_utf8_lossy(&enc)
                            ),
                        ));
                    }
                }
            }
            Event::Start(e) => {
                if skip_depth > 0 {
                    skip_depth += 1;
                    continue;
                }
                if let Some(depth) = open_element(
                    &e,
                    false,
                    pos,
                    &mut state,
                    &mut summary,
                    &mut node_sink,
                    &mut way_sink,
                )? {
                    skip_depth = depth;
                }
            }
            Event::Empty(e) => {
                if skip_depth > 0 {
                    continue;
                }
                open_element(
                    &e,
                    true,
                    pos,
                    &mut state,
                    &mut summary,
                    &mut node_sink,
                    &mut way_sink,
                )?;
            }
            Event::End(_) => {
                if skip_depth > 0 {
                    skip_depth -= 1;
                    continue;
                }
                state = match state {
                    State::Node(node) => {
                        finish_node(node, &mut summary, &mut node_sink);
                        State::Doc
                    }
                    State::Way(way) => {
                        finish_way(way, &mut summary, &mut way_sink);
                        State::Doc
                    }
                    State::Doc => State::AfterRoot,
                    // check_end_names makes these unreachable; keep the parse
                    // honest anyway.
                    State::Prolog | State::AfterRoot => {
                        return Err(malformed(pos, "unexpected closing tag"))
                    }
                };
            }
            Event::Text(_)
            | Event::CData(_)
            | Event::Comment(_)
            | Event::PI(_)
            | Event::DocType(_) => {}
            Event::Eof => match state {
                State::AfterRoot => break,
                State::Prolog => return Err(malformed(pos, "no <osm> root element")),
                _ => return Err(malformed(pos, "unexpected end of document")),
            },
        }
    }

    Ok(summary)
}

/// Opens `path` and parses it with [`parse_osm`].
pub fn parse_osm_file<N, W>(
    path: impl AsRef<Path>,
    node_sink: N,
    way_sink: W,
) -> Result<ParseSummary, ParseError>
where
    N: FnMut(RawNode),
    W: FnMut(RawWay),
{
    let file = File::open(path)?;
    parse_osm(BufReader::new(file), node_sink, way_sink)
}

/// Handles a Start or Empty element outside any skipped subtree. Returns
/// `Some(1)` when a new subtree skip must begin (never for empty elements).
fn open_element<N, W>(
    e: &BytesStart<'_>,
    empty: bool,
    pos: u64,
    state: &mut State,
    summary: &mut ParseSummary,
    node_sink: &mut N,
    way_sink: &mut W,
) -> Result<Option<u32>, ParseError>
where
    N: FnMut(RawNode),
    W: FnMut(RawWay),
{
    let skip = |empty: bool| if empty { None } else { Some(1) };

    match state {
        State::Prolog => {
            if e.name().as_ref() == b"osm" {
                *state = if empty { State::AfterRoot } else { State::Doc };
                Ok(None)
            } else {
                Err(malformed(pos, "document root is not <osm>"))
            }
        }
        State::Doc => match e.name().as_ref() {
            b"node" => {
                let node = node_from_attrs(e, pos)?;
                if empty {
                    finish_node(node, summary, node_sink);
                } else {
                    *state = State::Node(node);
                }
                Ok(None)
            }
            b"way" => {
                let way = way_from_attrs(e, pos)?;
                if empty {
                    finish_way(way, summary, way_sink);
                } else {
                    *state = State::Way(way);
                }
                Ok(None)
            }
            b"relation" => {
                summary.relations_skipped += 1;
                Ok(skip(empty))
            }
            _ => {
                summary.unknown_elements_skipped += 1;
                Ok(skip(empty))
            }
        },
        State::Node(node) => match e.name().as_ref() {
            b"tag" => {
                if let Some(tag) = tag_from_attrs(e, pos)? {
                    if let Some(n) = node {
                        n.tags.push(tag);
                    }
                }
                Ok(skip(empty))
            }
            _ => {
                summary.unknown_elements_skipped += 1;
                Ok(skip(empty))
            }
        },
        State::Way(way) => match e.name().as_ref() {
            b"nd" => {
                match nd_ref_from_attrs(e, pos)? {
                    Some(r) => {
                        if let Some(w) = way {
                            w.refs.push(r);
                        }
                    }
                    // A way with a broken ref is dropped whole; emitting a
                    // polyline with a silent gap would change topology.
                    None => *way = None,
                }
                Ok(skip(empty))
            }
            b"tag" => {
                if let Some(tag) = tag_from_attrs(e, pos)? {
                    if let Some(w) = way {
                        w.tags.push(tag);
                    }
                }
                Ok(skip(empty))
            }
            _ => {
                summary.unknown_elements_skipped += 1;
                Ok(skip(empty))
            }
        },
        State::AfterRoot => Err(malformed(pos, "content after document root")),
    }
}

fn finish_node<N: FnMut(RawNode)>(node: Option<RawNode>, summary: &mut ParseSummary, sink: &mut N) {
    match node {
        Some(n) => {
            summary.nodes_read += 1;
            sink(n);
        }
        None => summary.malformed_records += 1,
    }
}

fn finish_way<W: FnMut(RawWay)>(way: Option<WayDraft>, summary: &mut ParseSummary, sink: &mut W) {
    match way {
        Some(d) if d.refs.len() >= 2 => {
            summary.ways_read += 1;
            sink(RawWay {
                id: d.id,
                node_refs: d.refs,
                tags: d.tags,
            });
        }
        Some(_) => summary.ways_rejected_short += 1,
        None => summary.malformed_records += 1,
    }
}

/// Extracts id/lat/lon. `Ok(None)` marks a record-level problem (the record
/// is skipped and counted); `Err` marks a structural one (the parse aborts).
fn node_from_attrs(e: &BytesStart<'_>, pos: u64) -> Result<Option<RawNode>, ParseError> {
    let mut id: Option<NodeId> = None;
    let mut lat: Option<f64> = None;
    let mut lon: Option<f64> = None;
    for attr in e.attributes() {
        let attr = attr.map_err(|err| malformed(pos, err.to_string()))?;
        let value = attr
            .unescape_value()
            .map_err(|err| malformed(pos, err.to_string()))?;
        match attr.key.as_ref() {
            b"id" => id = parse_id(&value),
            b"lat" => lat = parse_coord(&value, 90.0),
            b"lon" => lon = parse_coord(&value, 180.0),
            _ => {}
        }
    }
    Ok(match (id, lat, lon) {
        (Some(id), Some(lat), Some(lon)) => Some(RawNode {
            id,
            lat,
            lon,
            tags: Vec::new(),
        }),
        _ => None,
    })
}

fn way_from_attrs(e: &BytesStart<'_>, pos: u64) -> Result<Option<WayDraft>, ParseError> {
    let mut id: Option<WayId> = None;
    for attr in e.attributes() {
        let attr = attr.map_err(|err| malformed(pos, err.to_string()))?;
        if attr.key.as_ref() == b"id" {
            let value = attr
                .unescape_value()
                .map_err(|err| malformed(pos, err.to_string()))?;
            id = parse_id(&value);
        }
    }
    Ok(id.map(|id| WayDraft {
        id,
        refs: Vec::new(),
        tags: Vec::new(),
    }))
}

fn nd_ref_from_attrs(e: &BytesStart<'_>, pos: u64) -> Result<Option<NodeId>, ParseError> {
    for attr in e.attributes() {
        let attr = attr.map_err(|err| malformed(pos, err.to_string()))?;
        if attr.key.as_ref() == b"ref" {
            let value = attr
                .unescape_value()
                .map_err(|err| malformed(pos, err.to_string()))?;
            return Ok(parse_id(&value));
        }
    }
    Ok(None)
}

/// Returns `None` when the element carries no usable key; a tag with an empty
/// key is attribute noise, not a record, so it is dropped silently. A missing
/// `v` attribute reads as the empty value.
fn tag_from_attrs(e: &BytesStart<'_>, pos: u64) -> Result<Option<Tag>, ParseError> {
    let mut key: Option<String> = None;
    let mut value = String::new();
    for attr in e.attributes() {
        let attr = attr.map_err(|err| malformed(pos, err.to_string()))?;
        let v = attr
            .unescape_value()
            .map_err(|err| malformed(pos, err.to_string()))?;
        match attr.key.as_ref() {
            b"k" => key = Some(v.into_owned()),
            b"v" => value = v.into_owned(),
            _ => {}
        }
    }
    Ok(match key {
        Some(k) if !k.is_empty() => Some(Tag { key: k, value }),
        _ => None,
    })
}

fn parse_id(value: &str) -> Option<u64> {
    match value.parse::<u64>() {
        Ok(id) if id > 0 => Some(id),
        _ => None,
    }
}

fn parse_coord(value: &str, bound: f64) -> Option<f64> {
    match value.parse::<f64>() {
        Ok(v) if v.is_finite() && v.abs() <= bound => Some(v),
        _ => None,
    }
}
