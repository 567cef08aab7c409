//! Command-line front end: file formats, verbs and plots.
//!
//! Every verb reads its inputs, runs one library pipeline and writes JSON,
//! DOT or SVG. Failures are reported as a JSON object on stderr together
//! with the offending file and, for parse errors, the line.

// Errors are built once per process, so their size does not matter.
#![allow(clippy::result_large_err)]

pub mod svg;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use multinerve::complex::{extended_persistence_with, ComplexFile};
use multinerve::covers::{build_staircase, cover_from_pairs, uniform_cover, CoverError};
use multinerve::diagram::prune_signature;
use multinerve::distance::{approximate_signature, complex_signature, mapper_distance_report, PointType};
use multinerve::mapper::{inclusion_check, mapper_continuous, mapper_discrete, pi1_project, rips_graph};
use multinerve::reeb::{leveled_isomorphic, quotient_diagram, reeb_graph};
use multinerve::telescope::{canonicalize, multinerve_of_telescope, telescope_to_graph, TelescopeFile};
use multinerve::{
    CombinatorialTelescope, Connectivity, ExtendedDiagram, GomicCover, LeveledMultigraph, PointCloud,
    SimplicialComplex2, StairKind, TieBreak, Variant, VertexFunction,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "multinerve", version, about = "MultiNerve Mapper, Reeb graphs and their signatures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a cover (with its decomposition and staircases) or build a uniform one.
    Cover(CoverArgs),
    /// Extended persistence diagram of a complex or a telescope.
    Persistence(PersistenceArgs),
    /// Reeb graph of a PL function on a complex.
    Reeb(ReebArgs),
    /// Mapper or MultiNerve Mapper of a cloud, complex or telescope.
    Mapper(MapperArgs),
    /// Signature: the diagram pruned by the cover's staircases.
    Signature(SignatureArgs),
    /// Signature distance between two diagrams.
    Distance(DistanceArgs),
    /// Read, canonicalize and export a telescope.
    Telescope(TelescopeArgs),
    /// Run the structural checks on an input or on random samples.
    Check(CheckArgs),
}

#[derive(Debug, Clone, Default, Args)]
#[group(multiple = false)]
pub struct Input {
    /// Point cloud: CSV rows `x1,...,xd,f` or JSON `{"points": ..., "values": ...}`.
    #[arg(long)]
    pub cloud: Option<PathBuf>,
    /// Complex JSON: `{"vertices": [{"id", "value"}], "edges", "triangles"}`.
    #[arg(long)]
    pub complex: Option<PathBuf>,
    /// Telescope JSON: `{"crit", "slices", "cylinders"}`.
    #[arg(long, visible_alias = "in")]
    pub telescope: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Mapper,
    Multinerve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConnectivityArg {
    Vertex,
    Edge,
}

#[derive(Debug, Clone, Args)]
pub struct VariantOpts {
    #[arg(long, value_enum, default_value = "multinerve")]
    pub variant: VariantArg,
    /// Shorthand for `--variant multinerve`.
    #[arg(long)]
    pub multinerve: bool,
}

impl VariantOpts {
    fn get(&self) -> Variant {
        if self.multinerve || self.variant == VariantArg::Multinerve {
            Variant::MultiNerve
        } else {
            Variant::Mapper
        }
    }
}

#[derive(Debug, Args)]
pub struct CoverArgs {
    /// Cover JSON, a list of `[lo, hi]` pairs.
    #[arg(long)]
    pub cover: Option<PathBuf>,
    /// Range of a uniform cover.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_hyphen_values = true, conflicts_with = "cover")]
    pub range: Option<Vec<f64>>,
    /// Number of elements of a uniform cover.
    #[arg(long, requires = "range")]
    pub n: Option<usize>,
    /// Overlap fraction of a uniform cover.
    #[arg(long, default_value_t = 0.3)]
    pub overlap: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// SVG with the cover's staircases.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PersistenceArgs {
    #[command(flatten)]
    pub input: Input,
    /// Break ties between equal values by vertex index instead of rejecting them.
    #[arg(long)]
    pub symbolic: bool,
    /// Cover whose staircases are drawn in the plot.
    #[arg(long)]
    pub cover: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReebArgs {
    #[command(flatten)]
    pub input: Input,
    /// DOT output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON output.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MapperArgs {
    #[command(flatten)]
    pub input: Input,
    #[arg(long)]
    pub cover: PathBuf,
    /// Rips scale for point clouds.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, value_enum, default_value = "vertex")]
    pub connectivity: ConnectivityArg,
    #[command(flatten)]
    pub variant: VariantOpts,
    /// DOT output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON output.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SignatureArgs {
    #[command(flatten)]
    pub input: Input,
    #[arg(long)]
    pub cover: PathBuf,
    /// Rips scale for point clouds.
    #[arg(long)]
    pub delta: Option<f64>,
    #[command(flatten)]
    pub variant: VariantOpts,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DistanceArgs {
    /// Diagram JSON; give exactly two.
    #[arg(long = "sig", required = true)]
    pub sigs: Vec<PathBuf>,
    #[arg(long)]
    pub cover: PathBuf,
    #[command(flatten)]
    pub variant: VariantOpts,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TelescopeArgs {
    #[command(flatten)]
    pub input: Input,
    #[arg(long, requires = "cover")]
    pub canonicalize: bool,
    #[arg(long)]
    pub cover: Option<PathBuf>,
    /// Emit the telescope's graph as DOT instead of the telescope JSON.
    #[arg(long)]
    pub emit_graph: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Graph JSON output, with `--emit-graph`.
    #[arg(long, requires = "emit_graph")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub input: Input,
    #[arg(long)]
    pub cover: Option<PathBuf>,
    /// Rips scale for point clouds.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Also run the inclusion checks on this many random planar samples.
    #[arg(long, default_value_t = 0)]
    pub random: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

// ---------------------------------------------------------------------------
// Errors.

/// Machine-readable failure, printed as `{"error": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliError {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<u64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<String>,
}

impl CliError {
    fn new(kind: &str, message: impl Into<String>) -> Self {
        CliError {
            kind: kind.into(),
            variant: None,
            message: message.into(),
            file: None,
            line: None,
            column: None,
            violations: Vec::new(),
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        CliError::new("UsageError", message)
    }

    fn parse(file: &Path, message: impl Into<String>, line: Option<u64>, column: Option<u64>) -> Self {
        CliError { file: Some(file.display().to_string()), line, column, ..CliError::new("ParseError", message) }
    }

    fn io(file: &Path, e: std::io::Error) -> Self {
        CliError { file: Some(file.display().to_string()), ..CliError::new("IoError", e.to_string()) }
    }

    /// A library error, tagged with its enum and variant names.
    fn module<E: fmt::Display + fmt::Debug>(kind: &str, e: E, file: Option<&Path>) -> Self {
        let debug = format!("{e:?}");
        let variant: String = debug.chars().take_while(|c| c.is_alphanumeric() || *c == '_').collect();
        CliError {
            variant: Some(variant),
            file: file.map(|f| f.display().to_string()),
            ..CliError::new(kind, e.to_string())
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self }).to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl std::error::Error for CliError {}

// ---------------------------------------------------------------------------
// Readers.

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = read_text(path)?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::parse(path, e.to_string(), Some(e.line() as u64), Some(e.column() as u64)))
}

pub fn read_cover(path: &Path) -> Result<GomicCover, CliError> {
    let pairs: Vec<[f64; 2]> = read_json(path)?;
    let pairs: Vec<(f64, f64)> = pairs.into_iter().map(|[a, b]| (a, b)).collect();
    cover_from_pairs(&pairs).map_err(|e| cover_error(e, Some(path)))
}

fn cover_error(e: CoverError, file: Option<&Path>) -> CliError {
    let violations = e.violations().iter().map(|v| v.name().to_string()).collect();
    CliError { violations, ..CliError::module("CoverError", e, file) }
}

/// CSV rows `x1,...,xd,f`; a leading non-numeric row is taken as a header
/// and `#` starts a comment line.
pub fn read_csv_cloud(path: &Path) -> Result<PointCloud, CliError> {
    let text = read_text(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut coords = Vec::new();
    let mut values = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line());
            CliError::parse(path, e.to_string(), line, None)
        })?;
        let line = record.position().map(|p| p.line());
        let parsed: Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        let row = match parsed {
            Ok(row) => row,
            Err(_) if i == 0 => continue,
            Err(e) => return Err(CliError::parse(path, format!("not a number: {e}"), line, None)),
        };
        if row.len() < 2 {
            return Err(CliError::parse(path, "a row needs at least one coordinate and a value", line, None));
        }
        let (x, f) = row.split_at(row.len() - 1);
        coords.push(x.to_vec());
        values.push(f[0]);
    }
    PointCloud::from_coords(coords, values).map_err(|e| CliError::module("MapperError", e, Some(path)))
}

pub fn read_cloud(path: &Path) -> Result<PointCloud, CliError> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        read_json(path)
    } else {
        read_csv_cloud(path)
    }
}

pub fn read_complex(path: &Path) -> Result<(SimplicialComplex2, VertexFunction), CliError> {
    let file: ComplexFile = read_json(path)?;
    file.into_complex().map_err(|e| CliError::module("ComplexError", e, Some(path)))
}

pub fn read_telescope(path: &Path) -> Result<CombinatorialTelescope, CliError> {
    let file: TelescopeFile = read_json(path)?;
    file.into_telescope().map_err(|e| CliError::module("TelescopeError", e, Some(path)))
}

// ---------------------------------------------------------------------------
// Writers.

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("values serialize");
    s.push('\n');
    s
}

fn emit(text: &str, out: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => stdout.write_all(text.as_bytes()).map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn emit_graph(
    g: &LeveledMultigraph,
    out: Option<&Path>,
    json: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    if let Some(j) = json {
        write_file(j, &to_json(g))?;
    }
    emit(&g.to_dot(), out, stdout)
}

// ---------------------------------------------------------------------------
// Verbs.

enum Source {
    Cloud(PathBuf, PointCloud),
    Complex(PathBuf, SimplicialComplex2, VertexFunction),
    Telescope(PathBuf, CombinatorialTelescope),
}

fn load(input: &Input, verb: &str, allowed: &[&str]) -> Result<Source, CliError> {
    let (flag, src) = if let Some(p) = &input.cloud {
        ("cloud", Source::Cloud(p.clone(), read_cloud(p)?))
    } else if let Some(p) = &input.complex {
        let (k, f) = read_complex(p)?;
        ("complex", Source::Complex(p.clone(), k, f))
    } else if let Some(p) = &input.telescope {
        ("telescope", Source::Telescope(p.clone(), read_telescope(p)?))
    } else {
        let flags: Vec<String> = allowed.iter().map(|a| format!("--{a}")).collect();
        return Err(CliError::usage(format!("{verb} needs one of {}", flags.join(", "))));
    };
    if !allowed.contains(&flag) {
        return Err(CliError::usage(format!("{verb} does not accept --{flag}")));
    }
    Ok(src)
}

fn need_delta(delta: Option<f64>) -> Result<f64, CliError> {
    match delta {
        Some(d) if d.is_finite() && d >= 0.0 => Ok(d),
        Some(d) => Err(CliError::usage(format!("--delta must be a finite non-negative number, got {d}"))),
        None => Err(CliError::usage("point clouds need --delta")),
    }
}

fn write_plot(path: Option<&Path>, d: &ExtendedDiagram, cover: Option<&GomicCover>) -> Result<(), CliError> {
    match path {
        Some(p) => write_file(p, &svg::render_diagram_svg(d, cover)),
        None => Ok(()),
    }
}

fn telescope_diagram(t: &CombinatorialTelescope) -> ExtendedDiagram {
    quotient_diagram(&telescope_to_graph(t))
}

#[derive(Serialize)]
struct CoverReport<'a> {
    intervals: &'a GomicCover,
    range: multinerve::Interval,
    granularity: f64,
    proper_parts: Vec<multinerve::Interval>,
    staircases: BTreeMap<&'static str, serde_json::Value>,
}

fn cover_cmd(a: &CoverArgs, stdout: &mut dyn Write) -> Result<bool, CliError> {
    let (cover, text) = match (&a.cover, &a.range, a.n) {
        (Some(p), _, _) => {
            let cover = read_cover(p)?;
            let staircases = StairKind::ALL
                .iter()
                .map(|&k| (svg::stair_style(k).0, build_staircase(&cover, k).to_json_value()))
                .collect();
            let report = CoverReport {
                intervals: &cover,
                range: cover.range(),
                granularity: cover.granularity(),
                proper_parts: cover.proper_parts(),
                staircases,
            };
            let text = to_json(&report);
            (cover, text)
        }
        (None, Some(r), Some(n)) => {
            let cover = uniform_cover(r[0], r[1], n, a.overlap).map_err(|e| cover_error(e, None))?;
            let text = to_json(&cover);
            (cover, text)
        }
        _ => return Err(CliError::usage("cover needs --cover, or --range LO HI with --n")),
    };
    write_plot(a.plot.as_deref(), &ExtendedDiagram::empty(), Some(&cover))?;
    emit(&text, a.out.as_deref(), stdout)?;
    Ok(true)
}

fn persistence_cmd(a: &PersistenceArgs, stdout: &mut dyn Write) -> Result<bool, CliError> {
    let tie = if a.symbolic { TieBreak::Symbolic } else { TieBreak::Reject };
    let d = match load(&a.input, "persistence", &["complex", "telescope"])? {
        Source::Complex(p, k, f) => {
            extended_persistence_with(&k, &f, tie).map_err(|e| CliError::module("ComplexError", e, Some(&p)))?
        }
        Source::Telescope(_, t) => telescope_diagram(&t),
        Source::Cloud(..) => unreachable!("rejected by load"),
    };
    let cover = a.cover.as_deref().map(read_cover).transpose()?;
    write_plot(a.plot.as_deref(), &d, cover.as_ref())?;
    emit(&to_json(&d), a.out.as_deref(), stdout)?;
    Ok(true)
}

fn reeb_cmd(a: &ReebArgs, stdout: &mut dyn Write) -> Result<bool, CliError> {
    let g = match load(&a.input, "reeb", &["complex", "telescope"])? {
        Source::Complex(p, k, f) => reeb_graph(&k, &f).map_err(|e| CliError::module("ReebError", e, Some(&p)))?,
        Source::Telescope(_, t) => telescope_to_graph(&t),
        Source::Cloud(..) => unreachable!("rejected by load"),
    };
    emit_graph(&g, a.out.as_deref(), a.json.as_deref(), stdout)?;
    Ok(true)
}

fn mapper_cmd(a: &MapperArgs, stdout: &mut dyn Write) -> Result<bool, CliError> {
    let cover = read_cover(&a.cover)?;
    let variant = a.variant.get();
    let g = match load(&a.input, "mapper", &["cloud", "complex", "telescope"])? {
        Source::Cloud(p, cloud) => {
            let rips = rips_graph(&cloud, need_delta(a.delta)?);
            let conn = match a.connectivity {
                ConnectivityArg::Vertex => Connectivity::Vertex,
                ConnectivityArg::Edge => Connectivity::Edge,
            };
            mapper_discrete(&rips, cloud.values(), &cover, conn, variant)
                .map_err(|e| CliError::module("MapperError", e, Some(&p)))?
        }
        Source::Complex(p, k, f) => {
            mapper_continuous(&k, &f, &cover, variant).map_err(|e| CliError::module("MapperError", e, Some(&p)))?
        }
        Source::Telescope(p, t) => {
            multinerve_of_telescope(&t, &cover, variant).map_err(|e| CliError::module("TelescopeError", e, Some(&p)))?
        }
    };
    emit_graph(&g, a.out.as_deref(), a.json.as_deref(), stdout)?;
    Ok(true)
}

fn signature_cmd(a: &SignatureArgs, stdout: &mut dyn Write) -> Result<bool, CliError> {
    let cover = read_cover(&a.cover)?;
    let variant = a.variant.get();
    let sig = match load(&a.input, "signature", &["cloud", "complex", "telescope"])? {
        Source::Cloud(p, cloud) => approximate_signature(&cloud, need_delta(a.delta)?, &cover, variant)
            .map_err(|e| CliError::module("SignatureError", e, Some(&p)))?,
        Source::Complex(p, k, f) => {
            complex_signature(&k, &f, &cover, variant).map_err(|e| CliError::module("SignatureError", e, Some(&p)))?
        }
        Source::Telescope(p, t) => prune_signature(&telescope_diagram(&t), &cover, variant)
            .map_err(|e| CliError::module("DiagramError", e, Some(&p)))?,
    };
    write_plot(a.plot.as_deref(), &sig, Some(&cover))?;
    emit(&to_json(&sig), a.out.as_deref(), stdout)?;
    Ok(true)
}

fn distance_cmd(a: &DistanceArgs, stdout: &mut dyn Write) -> Result<bool, CliError> {
    let [p, q] = a.sigs.as_slice() else {
        return Err(CliError::usage(format!("distance needs exactly two --sig files, got {}", a.sigs.len())));
    };
    let d: ExtendedDiagram = read_json(p)?;
    let d2: ExtendedDiagram = read_json(q)?;
    let cover = read_cover(&a.cover)?;
    let report = mapper_distance_report(&d, &d2, &cover, a.variant.get());
    emit(&to_json(&report), a.out.as_deref(), stdout)?;
    Ok(true)
}

fn telescope_cmd(a: &TelescopeArgs, stdout: &mut dyn Write) -> Result<bool, CliError> {
    let Source::Telescope(p, mut t) = load(&a.input, "telescope", &["telescope"])? else {
        unreachable!("rejected by load")
    };
    if a.canonicalize {
        let path = a.cover.as_deref().expect("clap requires --cover");
        let cover = read_cover(path)?;
        t = canonicalize(&t, &cover).map_err(|e| CliError::module("TelescopeError", e, Some(&p)))?;
    }
    if a.emit_graph {
        emit_graph(&telescope_to_graph(&t), a.out.as_deref(), a.json.as_deref(), stdout)?;
    } else {
        emit(&to_json(&TelescopeFile::from_telescope(&t)), a.out.as_deref(), stdout)?;
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub pass: bool,
    pub seed: u64,
    pub checks: Vec<CheckOutcome>,
}

fn outcome(name: &str, pass: bool, detail: impl Into<String>) -> CheckOutcome {
    CheckOutcome { name: name.into(), pass, detail: detail.into() }
}

fn inclusion_outcome(name: &str, cloud: &PointCloud, delta: f64, cover: &GomicCover) -> Result<CheckOutcome, CliError> {
    let g = rips_graph(cloud, delta);
    let report = inclusion_check(&g, cloud.values(), cover).map_err(|e| CliError::module("MapperError", e, None))?;
    let detail = if report.holds() {
        format!(
            "{} interval-crossing and {} intersection-crossing edges",
            report.crossing.interval_crossing.len(),
            report.crossing.intersection_crossing.len()
        )
    } else {
        report.violations.join("; ")
    };
    Ok(outcome(name, report.holds(), detail))
}

/// Points per `(type, dim)` class; equal counts witness a kind-preserving bijection.
fn class_counts(d: &ExtendedDiagram) -> BTreeMap<(PointType, usize), usize> {
    let mut m = BTreeMap::new();
    for p in d.points() {
        *m.entry((PointType::of(p.kind), p.dim)).or_insert(0) += 1;
    }
    m
}

fn telescope_checks(t: &CombinatorialTelescope, cover: &GomicCover, p: &Path) -> Result<Vec<CheckOutcome>, CliError> {
    let err = |e| CliError::module("TelescopeError", e, Some(p));
    let mn = multinerve_of_telescope(t, cover, Variant::MultiNerve).map_err(err)?;
    let mapper = multinerve_of_telescope(t, cover, Variant::Mapper).map_err(err)?;
    let canon = telescope_to_graph(&canonicalize(t, cover).map_err(err)?);
    let sig = prune_signature(&telescope_diagram(t), cover, Variant::MultiNerve)
        .map_err(|e| CliError::module("DiagramError", e, Some(p)))?;
    let mn_diagram = quotient_diagram(&mn);
    let structure = leveled_isomorphic(&mn, &canon);
    let projection = mapper == pi1_project(&mn);
    let bijection = class_counts(&sig) == class_counts(&mn_diagram);
    Ok(vec![
        outcome(
            "multinerve_is_canonical_telescope",
            structure,
            format!("{} nodes, {} edges", mn.node_count(), mn.edge_count()),
        ),
        outcome("mapper_is_projection", projection, format!("{} edges after collapsing", mapper.edge_count())),
        outcome(
            "signature_matches_multinerve_diagram",
            bijection,
            format!("{} signature points, {} diagram points", sig.len(), mn_diagram.len()),
        ),
    ])
}

fn reeb_check(k: &SimplicialComplex2, f: &VertexFunction, p: &Path) -> Result<CheckOutcome, CliError> {
    let full =
        extended_persistence_with(k, f, TieBreak::Reject).map_err(|e| CliError::module("ComplexError", e, Some(p)))?;
    let g = reeb_graph(k, f).map_err(|e| CliError::module("ReebError", e, Some(p)))?;
    let q = quotient_diagram(&g);
    let expected = full.quotient_part();
    Ok(outcome(
        "reeb_diagram_is_quotient_part",
        q == expected,
        format!("{} points in the Reeb graph diagram, {} expected", q.len(), expected.len()),
    ))
}

fn random_inclusions(trials: usize, seed: u64) -> Result<CheckOutcome, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for trial in 0..trials {
        let n = rng.gen_range(3..25);
        let coords: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen_range(0.0..4.0), rng.gen_range(0.0..2.0)]).collect();
        let values = coords.iter().map(|c| c[0]).collect();
        let cloud = PointCloud::from_coords(coords, values).map_err(|e| CliError::module("MapperError", e, None))?;
        let delta = rng.gen_range(0.2..1.5);
        let len = rng.gen_range(1..7);
        let cover = uniform_cover(-0.1, 4.1, len, rng.gen_range(0.1..0.45)).map_err(|e| cover_error(e, None))?;
        if cloud.values().iter().any(|&v| cover.is_endpoint(v)) {
            continue;
        }
        let o = inclusion_outcome("sample", &cloud, delta, &cover)?;
        if !o.pass {
            failures.push(format!("trial {trial}: {}", o.detail));
        }
    }
    let detail = if failures.is_empty() { format!("{trials} samples") } else { failures.join("; ") };
    Ok(outcome("random_inclusions", failures.is_empty(), detail))
}

fn check_cmd(a: &CheckArgs, stdout: &mut dyn Write) -> Result<bool, CliError> {
    let has_input = a.input.cloud.is_some() || a.input.complex.is_some() || a.input.telescope.is_some();
    if !has_input && a.random == 0 {
        return Err(CliError::usage("check needs --cloud, --complex, --telescope or --random N"));
    }
    let cover = a.cover.as_deref().map(read_cover).transpose()?;
    let need_cover =
        |what: &str| cover.as_ref().ok_or_else(|| CliError::usage(format!("checking a {what} needs --cover")));
    let mut checks = Vec::new();
    if has_input {
        match load(&a.input, "check", &["cloud", "complex", "telescope"])? {
            Source::Cloud(_, cloud) => {
                checks.push(inclusion_outcome("inclusions", &cloud, need_delta(a.delta)?, need_cover("cloud")?)?)
            }
            Source::Complex(p, k, f) => checks.push(reeb_check(&k, &f, &p)?),
            Source::Telescope(p, t) => checks.extend(telescope_checks(&t, need_cover("telescope")?, &p)?),
        }
    }
    if a.random > 0 {
        checks.push(random_inclusions(a.random, a.seed)?);
    }
    let report = CheckReport { pass: checks.iter().all(|c| c.pass), seed: a.seed, checks };
    emit(&to_json(&report), a.out.as_deref(), stdout)?;
    Ok(report.pass)
}

/// Runs one command. `Ok(false)` means the command ran but a check failed.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<bool, CliError> {
    match &cli.command {
        Command::Cover(a) => cover_cmd(a, stdout),
        Command::Persistence(a) => persistence_cmd(a, stdout),
        Command::Reeb(a) => reeb_cmd(a, stdout),
        Command::Mapper(a) => mapper_cmd(a, stdout),
        Command::Signature(a) => signature_cmd(a, stdout),
        Command::Distance(a) => distance_cmd(a, stdout),
        Command::Telescope(a) => telescope_cmd(a, stdout),
        Command::Check(a) => check_cmd(a, stdout),
    }
}
