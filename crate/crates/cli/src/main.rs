//! `roadnet` — convert OSM XML extracts into road networks, maps, and edge
//! lists.
//!
//! Subcommands follow the pipeline: `extract` persists the node and highway
//! way tables, `render` draws the street map as SVG, `graph` builds the
//! junction graph and exports its edge list, `route` answers a shortest-path
//! query. Exit codes: 0 success, 1 input or pipeline error, 2 the class
//! filter matched zero ways, 3 no path between the queried vertices.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use roadnet::geodesy::{project_polylines, utm_zone_for, Hemisphere, UtmZone};
use roadnet::graph::{build_graph, network_stats, shortest_path, RouteError};
use roadnet::ingest::{parse_osm_file, ParseSummary};
use roadnet::model::{classify_highway, HighwayClass, RoadPolyline};
use roadnet::render::{export_edges_csv, export_geojson, render_svg, RenderStyle};
use roadnet::table::{
    bounding_box, filter_by_class, resolve_ways, write_nodes_csv, write_ways_csv, MergeReport,
    NodeTable, WayTable,
};

/// Style config fallback when `--style` is not given.
const STYLE_ENV: &str = "ROADNET_STYLE";

#[derive(Parser)]
#[command(
    name = "roadnet",
    version,
    about = "Convert OSM XML extracts into road networks, maps, and edge lists"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct IoArgs {
    /// OSM XML extract to read
    #[arg(long)]
    input: PathBuf,
    /// Directory for output files
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct ClassArgs {
    /// Comma-separated highway classes (underscore or space spelling), or `all`
    #[arg(long, default_value = "all")]
    classes: String,
}

#[derive(Subcommand)]
enum Command {
    /// Parse the extract and write nodes.csv and ways.csv
    Extract {
        #[command(flatten)]
        io: IoArgs,
    },
    /// Run the full pipeline and render the street map as map.svg
    Render {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        class: ClassArgs,
        /// UTM zone override (1-60); default: zone of the extract centroid
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=60))]
        zone: Option<u8>,
        /// Style config file (fallback: ROADNET_STYLE, then built-in defaults)
        #[arg(long)]
        style: Option<PathBuf>,
        /// Also export the filtered ways as roads.geojson
        #[arg(long)]
        geojson: bool,
        /// Also export the junction-graph edge list as edges.csv
        #[arg(long)]
        csv: bool,
    },
    /// Build the junction graph and write edges.csv
    Graph {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        class: ClassArgs,
        /// Also export the filtered ways as roads.geojson
        #[arg(long)]
        geojson: bool,
    },
    /// Shortest path between two junction node ids
    Route {
        /// OSM XML extract to read
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        class: ClassArgs,
        /// Start node id
        #[arg(long)]
        from: u64,
        /// Destination node id
        #[arg(long)]
        to: u64,
    },
}

/// An error plus the process exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(err: E) -> Self {
        Failure {
            code: 1,
            message: format!("{:#}", err.into()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Extract { io } => cmd_extract(&io),
        Command::Render {
            io,
            class,
            zone,
            style,
            geojson,
            csv,
        } => cmd_render(&io, &class, zone, style.as_deref(), geojson, csv),
        Command::Graph { io, class, geojson } => cmd_graph(&io, &class, geojson),
        Command::Route {
            input,
            class,
            from,
            to,
        } => cmd_route(&input, &class, from, to),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

struct Extract {
    nodes: NodeTable,
    ways: WayTable,
    summary: ParseSummary,
}

/// One streaming pass: nodes go straight into the node table, ways are
/// classified and buffered in the way table (the grammar does not guarantee
/// nodes come first, so the join runs only after the pass completes).
fn load_extract(input: &Path) -> Result<Extract> {
    let mut nodes = NodeTable::new();
    let mut ways = WayTable::new();
    let summary = parse_osm_file(
        input,
        |n| nodes.add(&n),
        |w| {
            ways.add(w);
        },
    )
    .with_context(|| format!("reading {}", input.display()))?;
    Ok(Extract {
        nodes,
        ways,
        summary,
    })
}

fn parse_class_filter(spec: &str) -> Result<HashSet<HighwayClass>> {
    let spec = spec.trim();
    if spec.eq_ignore_ascii_case("all") {
        return Ok(HighwayClass::NAMED.into_iter().collect());
    }
    let mut keep = HashSet::new();
    for item in spec.split(',') {
        let item = item.trim();
        if item.is_empty() {
            continue;
        }
        let class = classify_highway(item);
        if !class.is_named() {
            bail!("unknown highway class `{item}` (expected one of the 26 named classes or `all`)");
        }
        keep.insert(class);
    }
    if keep.is_empty() {
        bail!("the class filter is empty");
    }
    Ok(keep)
}

fn print_summary(s: &ParseSummary) {
    println!("nodes_read={}", s.nodes_read);
    println!("ways_read={}", s.ways_read);
    println!("ways_rejected_short={}", s.ways_rejected_short);
    println!("relations_skipped={}", s.relations_skipped);
    println!("unknown_elements_skipped={}", s.unknown_elements_skipped);
    println!("malformed_records={}", s.malformed_records);
}

fn print_merge(r: &MergeReport) {
    println!("ways_resolved={}", r.ways_resolved);
    println!("ways_dropped_missing_nodes={}", r.ways_dropped_missing_nodes);
    println!("refs_missing={}", r.refs_missing);
}

fn create_output(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok((path, BufWriter::new(file)))
}

fn cmd_extract(io: &IoArgs) -> Result<(), Failure> {
    let extract = load_extract(&io.input)?;

    let (nodes_path, mut nodes_out) = create_output(&io.out, "nodes.csv")?;
    write_nodes_csv(&extract.nodes, &mut nodes_out).context("writing nodes.csv")?;
    nodes_out.flush().context("writing nodes.csv")?;

    let (ways_path, mut ways_out) = create_output(&io.out, "ways.csv")?;
    write_ways_csv(&extract.ways, &mut ways_out).context("writing ways.csv")?;
    ways_out.flush().context("writing ways.csv")?;

    print_summary(&extract.summary);
    println!("node_table_size={}", extract.nodes.len());
    println!("way_table_size={}", extract.ways.len());
    println!("nodes_csv={}", nodes_path.display());
    println!("ways_csv={}", ways_path.display());
    Ok(())
}

/// Resolves and filters the extract. Returns both the full resolved set (the
/// projection zone comes from the whole extract, matching a city projected in
/// one zone) and the filtered subset.
fn resolved_and_filtered(
    extract: &Extract,
    class: &ClassArgs,
) -> Result<(Vec<RoadPolyline>, Vec<RoadPolyline>, MergeReport), Failure> {
    let keep = parse_class_filter(&class.classes)?;
    let (polylines, merge) = resolve_ways(&extract.ways, &extract.nodes);
    let filtered = filter_by_class(polylines.clone(), &keep).map_err(anyhow::Error::from)?;
    Ok((polylines, filtered, merge))
}

fn auto_zone(all: &[RoadPolyline], override_zone: Option<u8>) -> Result<UtmZone> {
    let center = bounding_box(all)?.center();
    match override_zone {
        Some(z) => {
            let hemisphere = if center.lat >= 0.0 {
                Hemisphere::North
            } else {
                Hemisphere::South
            };
            Ok(UtmZone::new(z, hemisphere)?)
        }
        None => Ok(utm_zone_for(center.lon, center.lat)?),
    }
}

fn load_style(flag: Option<&Path>) -> Result<RenderStyle> {
    if let Some(path) = flag {
        return RenderStyle::from_config_file(path)
            .with_context(|| format!("loading style {}", path.display()));
    }
    match std::env::var(STYLE_ENV) {
        Ok(path) if !path.is_empty() => RenderStyle::from_config_file(&path)
            .with_context(|| format!("loading style {path} (from {STYLE_ENV})")),
        _ => Ok(RenderStyle::default()),
    }
}

fn cmd_render(
    io: &IoArgs,
    class: &ClassArgs,
    zone: Option<u8>,
    style: Option<&Path>,
    geojson: bool,
    csv: bool,
) -> Result<(), Failure> {
    let extract = load_extract(&io.input)?;
    let (all, filtered, merge) = resolved_and_filtered(&extract, class)?;
    if filtered.is_empty() {
        return Err(Failure {
            code: 2,
            message: "the class filter matched zero ways".to_string(),
        });
    }

    let zone = auto_zone(&all, zone)?;
    let style = load_style(style)?;
    let projected = project_polylines(&filtered, zone).map_err(anyhow::Error::from)?;

    let (svg_path, mut svg_out) = create_output(&io.out, "map.svg")?;
    let report = render_svg(&projected, &style, &mut svg_out).map_err(anyhow::Error::from)?;
    svg_out.flush().context("writing map.svg")?;

    print_merge(&merge);
    println!("zone={}", zone);
    println!("elements={}", report.element_count);
    println!("viewport_min_easting={:.3}", report.viewport_min_easting);
    println!("viewport_min_northing={:.3}", report.viewport_min_northing);
    println!("viewport_max_easting={:.3}", report.viewport_max_easting);
    println!("viewport_max_northing={:.3}", report.viewport_max_northing);
    println!("canvas_width={}", report.width_px);
    println!("canvas_height={:.4}", report.height_px);
    println!("svg={}", svg_path.display());

    if geojson {
        let (path, mut out) = create_output(&io.out, "roads.geojson")?;
        let features = export_geojson(&filtered, &mut out).context("writing roads.geojson")?;
        out.flush().context("writing roads.geojson")?;
        println!("geojson_features={features}");
        println!("geojson={}", path.display());
    }
    if csv {
        let network = build_graph(&filtered);
        let (path, mut out) = create_output(&io.out, "edges.csv")?;
        let rows = export_edges_csv(&network, &mut out).context("writing edges.csv")?;
        out.flush().context("writing edges.csv")?;
        println!("edge_rows={rows}");
        println!("edges_csv={}", path.display());
    }
    Ok(())
}

fn cmd_graph(io: &IoArgs, class: &ClassArgs, geojson: bool) -> Result<(), Failure> {
    let extract = load_extract(&io.input)?;
    let (_, filtered, merge) = resolved_and_filtered(&extract, class)?;
    let network = build_graph(&filtered);

    let (edges_path, mut out) = create_output(&io.out, "edges.csv")?;
    export_edges_csv(&network, &mut out).context("writing edges.csv")?;
    out.flush().context("writing edges.csv")?;

    print_merge(&merge);
    let stats = network_stats(&network);
    println!("vertices={}", stats.vertex_count);
    println!("edges={}", stats.edge_count);
    println!("components={}", stats.component_count);
    println!("degenerate_edges_dropped={}", network.degenerate_dropped());
    println!("total_length_m={:.3}", stats.total_length_m);
    let mut by_name: Vec<(&str, f64)> = stats
        .length_by_class
        .iter()
        .map(|(class, len)| (class.name(), *len))
        .collect();
    by_name.sort_unstable_by(|a, b| a.0.cmp(b.0));
    for (name, len) in by_name {
        println!("length_m.{name}={len:.3}");
    }
    println!("edges_csv={}", edges_path.display());

    if geojson {
        let (path, mut out) = create_output(&io.out, "roads.geojson")?;
        let features = export_geojson(&filtered, &mut out).context("writing roads.geojson")?;
        out.flush().context("writing roads.geojson")?;
        println!("geojson_features={features}");
        println!("geojson={}", path.display());
    }
    Ok(())
}

fn cmd_route(input: &Path, class: &ClassArgs, from: u64, to: u64) -> Result<(), Failure> {
    let extract = load_extract(input)?;
    let keep = parse_class_filter(&class.classes)?;
    let (polylines, _) = resolve_ways(&extract.ways, &extract.nodes);
    let filtered = filter_by_class(polylines, &keep).map_err(anyhow::Error::from)?;
    let network = build_graph(&filtered);

    match shortest_path(&network, from, to) {
        Ok(path) => {
            let mut text = String::new();
            for v in &path.vertices {
                writeln!(text, "{v}").unwrap();
            }
            write!(text, "length_m={:.3}", path.total_length_m).unwrap();
            println!("{text}");
            Ok(())
        }
        Err(RouteError::NoPath { from, to }) => Err(Failure {
            code: 3,
            message: format!("no path between {from} and {to}"),
        }),
        Err(err @ RouteError::VertexNotFound(_)) => Err(Failure {
            code: 1,
            message: err.to_string(),
        }),
    }
}
