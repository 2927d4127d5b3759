use std::ops::Range;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hspmap_core::experiments::{DEFAULT_SIZES, ELLIPSE_AXES};
use hspmap_core::io::Format;
use hspmap_core::{CostSpec, DirectionSchedule, Experiment, Method, DEFAULT_ATOL, DEFAULT_ORACLE_CAP};

#[derive(Parser, Debug)]
#[command(name = "hspmap", version, about = "No-collision transport maps between point clouds")]
pub struct Cli {
    /// Directory that relative output paths are resolved against.
    #[arg(long, global = true, env = "HSPMAP_OUT_DIR", value_name = "DIR")]
    pub out_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a map between two point-cloud files and report its costs.
    Map(MapArgs),
    /// Reproduce a cost-ratio table for one experiment.
    Table(TableArgs),
    /// Write displacement-interpolation frames of a map.
    Interp(InterpArgs),
    /// Time HV construction over a list of sizes.
    Bench(BenchArgs),
    /// Certify that a map file has no collisions.
    Verify(VerifyArgs),
    /// Write a generated point cloud.
    Gen(GenArgs),
}

#[derive(Args, Debug)]
pub struct InputArgs {
    /// Source point cloud (.csv or .json).
    #[arg(long, value_name = "FILE")]
    pub source: PathBuf,
    /// Target point cloud (.csv or .json).
    #[arg(long, value_name = "FILE")]
    pub target: PathBuf,
    /// CSV inputs start with a header row.
    #[arg(long)]
    pub header: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Hv,
    Lex,
    Oracle,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Hv => Method::Hv,
            MethodArg::Lex => Method::Lex,
            MethodArg::Oracle => Method::Oracle,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Args, Debug)]
pub struct MapArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::Hv)]
    pub method: MethodArg,
    /// Split directions: `hv`, `axes:i,j,...` or `dirs:x,y;x,y;...`.
    #[arg(long, default_value = "hv", value_parser = parse_schedule)]
    pub schedule: DirectionSchedule,
    /// Cost `p:q` to report (repeatable); the oracle minimises the first.
    /// Defaults to all six.
    #[arg(long = "cost", value_name = "P:Q", value_parser = parse_cost)]
    pub costs: Vec<CostSpec>,
    #[arg(long, default_value_t = DEFAULT_ORACLE_CAP)]
    pub oracle_cap: usize,
    /// Map file to write; the map goes to stdout when omitted.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Output format; defaults to the extension of `--out`, else CSV.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Args, Debug)]
pub struct TableArgs {
    #[arg(long, value_parser = parse_experiment)]
    pub experiment: Experiment,
    /// Sizes, comma separated or repeated.
    #[arg(long = "n", value_delimiter = ',', default_values_t = DEFAULT_SIZES)]
    pub sizes: Vec<usize>,
    /// Seeds as a list `0,1,2` or a range `0..10`.
    #[arg(long, default_value = "0..10", value_parser = parse_seeds)]
    pub seeds: SeedList,
    /// Cost families (repeatable); defaults to the four table families.
    #[arg(long = "cost", value_name = "P:Q", value_parser = parse_cost)]
    pub costs: Vec<CostSpec>,
    #[arg(long, default_value = "hv", value_parser = parse_schedule)]
    pub schedule: DirectionSchedule,
    #[arg(long, default_value_t = DEFAULT_ORACLE_CAP)]
    pub oracle_cap: usize,
    /// Table file to write; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Args, Debug)]
pub struct InterpArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Map file to interpolate along; built with `--method` when omitted.
    #[arg(long, value_name = "FILE")]
    pub map: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = MethodArg::Hv)]
    pub method: MethodArg,
    #[arg(long, default_value = "hv", value_parser = parse_schedule)]
    pub schedule: DirectionSchedule,
    /// Cost minimised by the oracle method.
    #[arg(long, value_name = "P:Q", default_value = "2:2", value_parser = parse_cost)]
    pub cost: CostSpec,
    #[arg(long, default_value_t = DEFAULT_ORACLE_CAP)]
    pub oracle_cap: usize,
    /// Number of frames, at λ = j/(frames-1).
    #[arg(long, default_value_t = 11)]
    pub frames: usize,
    /// Directory for the frame files.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// `csv` writes one file per frame, `json` a single animation file.
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Sizes, comma separated or repeated.
    #[arg(long = "n", value_delimiter = ',', default_values_t = [1usize << 12, 1 << 14, 1 << 16, 1 << 18])]
    pub sizes: Vec<usize>,
    #[arg(long, default_value = "hv", value_parser = parse_schedule)]
    pub schedule: DirectionSchedule,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report file; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// `csv` prints a table, `json` the full report.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, value_name = "FILE")]
    pub source: PathBuf,
    /// Map file (.csv pairs or .json).
    #[arg(long, value_name = "FILE")]
    pub map: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub target: PathBuf,
    #[arg(long)]
    pub header: bool,
    /// Schedule the map was built with; its split directions are tried
    /// first by the half-space check.
    #[arg(long, value_parser = parse_schedule)]
    pub schedule: Option<DirectionSchedule>,
    /// Relative tolerance of the collision test.
    #[arg(long, default_value_t = DEFAULT_ATOL)]
    pub atol: f64,
    /// Report file; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Generator {
    Grid,
    Ellipse,
    Gaussian,
    Uniform,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub generator: Generator,
    /// Number of points (a perfect square for `grid`).
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Dimension of random generators.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Semi-axes `a,b` of the ellipse.
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [ELLIPSE_AXES.0, ELLIPSE_AXES.1])]
    pub axes: Vec<f64>,
    /// Counter-clockwise rotation about the origin, in degrees (2-D only).
    #[arg(long, default_value_t = 0.0)]
    pub rotate: f64,
    /// Cloud file to write; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeedList(pub Vec<u64>);

impl FromStr for SeedList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if let Some((a, b)) = s.split_once("..") {
            let range: Range<u64> = parse_u64(a)?..parse_u64(b)?;
            if range.is_empty() {
                return Err(format!("empty seed range {s:?}"));
            }
            return Ok(SeedList(range.collect()));
        }
        let seeds = s.split(',').map(parse_u64).collect::<Result<Vec<_>, _>>()?;
        Ok(SeedList(seeds))
    }
}

fn parse_u64(s: &str) -> Result<u64, String> {
    s.trim().parse().map_err(|e| format!("bad seed {s:?}: {e}"))
}

fn parse_seeds(s: &str) -> Result<SeedList, String> {
    s.parse()
}

fn parse_schedule(s: &str) -> Result<DirectionSchedule, String> {
    s.parse().map_err(|e: hspmap_core::Error| e.to_string())
}

fn parse_cost(s: &str) -> Result<CostSpec, String> {
    s.parse().map_err(|e: hspmap_core::Error| e.to_string())
}

fn parse_experiment(s: &str) -> Result<Experiment, String> {
    s.parse().map_err(|e: hspmap_core::Error| e.to_string())
}
