use std::fmt;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use hspmap_core::experiments::{write_table_csv, ScalingReport};
use hspmap_core::interp::frames_to_json;
use hspmap_core::io::{self as hio, Format};
use hspmap_core::{
    build_map, check_half_space, check_no_collision, gen_ellipse, gen_gaussian, gen_grid, gen_uniform,
    interpolation_frames, map_cost, no_collision_along_path, run_scaling, run_table, CostSpec, HalfSpaceOptions,
    Method, Point, PointCloud, RigidTransform, TableConfig, TransportMap,
};
use serde_json::json;

use crate::args::{BenchArgs, GenArgs, Generator, InputArgs, InterpArgs, MapArgs, TableArgs, VerifyArgs};

/// Exit status 1: invalid input, or a check that did not pass.
pub const EXIT_INVALID: u8 = 1;
/// Exit status 2: a file could not be read or written.
pub const EXIT_IO: u8 = 2;

/// Frames sampled when checking an interpolation path for coincidences.
const PATH_SAMPLES: usize = 32;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn invalid(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INVALID,
            message: message.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<hspmap_core::Error> for Failure {
    fn from(e: hspmap_core::Error) -> Self {
        Failure {
            code: if e.is_io() { EXIT_IO } else { EXIT_INVALID },
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: EXIT_IO,
            message: e.to_string(),
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        if e.is_io() {
            io::Error::from(e).into()
        } else {
            Failure::invalid(e.to_string())
        }
    }
}

pub type Outcome = Result<(), Failure>;

/// Where command output goes: resolves relative paths against the output
/// directory and falls back to stdout.
pub struct Sink {
    out_dir: Option<PathBuf>,
}

impl Sink {
    pub fn new(out_dir: Option<PathBuf>) -> Self {
        Sink { out_dir }
    }

    fn resolve(&self, path: &Path) -> PathBuf {
        match &self.out_dir {
            Some(dir) if path.is_relative() => dir.join(path),
            _ => path.to_path_buf(),
        }
    }

    /// Opens `path` for writing, creating parent directories, or stdout.
    fn open(&self, path: Option<&Path>) -> Result<(Box<dyn Write>, Option<PathBuf>), Failure> {
        match path {
            Some(p) => {
                let p = self.resolve(p);
                if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                    fs::create_dir_all(parent)?;
                }
                Ok((Box::new(BufWriter::new(File::create(&p)?)), Some(p)))
            }
            None => Ok((Box::new(BufWriter::new(io::stdout().lock())), None)),
        }
    }

    /// Directory for multi-file output; the output directory itself when
    /// `dir` is omitted, else the working directory.
    fn directory(&self, dir: Option<&Path>) -> Result<PathBuf, Failure> {
        let d = match dir {
            Some(d) => self.resolve(d),
            None => self.out_dir.clone().unwrap_or_else(|| PathBuf::from(".")),
        };
        fs::create_dir_all(&d)?;
        Ok(d)
    }
}

fn format_for(explicit: Option<Format>, path: Option<&Path>) -> Format {
    explicit.unwrap_or_else(|| path.map(Format::from_path).unwrap_or_default())
}

/// Prefixes a read failure with the offending path.
fn reading<T>(path: &Path, result: hspmap_core::Result<T>) -> Result<T, Failure> {
    result.map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    })
}

fn read_cloud(path: &Path, header: bool) -> Result<PointCloud, Failure> {
    reading(path, hio::read_cloud(path, header))
}

fn read_map(path: &Path) -> Result<TransportMap, Failure> {
    reading(path, hio::read_map(path))
}

fn read_pair(input: &InputArgs) -> Result<(PointCloud, PointCloud), Failure> {
    Ok((
        read_cloud(&input.source, input.header)?,
        read_cloud(&input.target, input.header)?,
    ))
}

pub fn map(args: &MapArgs, sink: &Sink) -> Outcome {
    let (source, target) = read_pair(&args.input)?;
    let costs: Vec<CostSpec> = if args.costs.is_empty() {
        CostSpec::all().to_vec()
    } else {
        args.costs.clone()
    };
    let method: Method = args.method.into();
    let start = Instant::now();
    let map = build_map(method, &source, &target, costs[0], &args.schedule, args.oracle_cap)?;
    let elapsed = start.elapsed();

    let format = format_for(args.format.map(Into::into), args.out.as_deref());
    let (mut w, written) = sink.open(args.out.as_deref())?;
    match format {
        Format::Csv => hio::write_map_csv(&mut w, &map)?,
        Format::Json => {
            hio::write_map_json(&mut w, &map)?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    drop(w);

    // The summary shares stdout only when the map went to a file.
    let mut summary: Box<dyn Write> = if written.is_some() {
        Box::new(io::stdout().lock())
    } else {
        Box::new(io::stderr().lock())
    };
    writeln!(summary, "n: {}", map.len())?;
    writeln!(summary, "method: {}", map.method())?;
    writeln!(summary, "seconds: {:.6}", elapsed.as_secs_f64())?;
    for spec in costs {
        writeln!(
            summary,
            "mean cost {}: {}",
            spec.family(),
            map_cost(&source, &map, &target, spec)?
        )?;
    }
    if let Some(p) = written {
        writeln!(summary, "wrote {}", p.display())?;
    }
    Ok(())
}

pub fn table(args: &TableArgs, sink: &Sink) -> Outcome {
    let mut config = TableConfig {
        sizes: args.sizes.clone(),
        seeds: args.seeds.0.clone(),
        schedule: args.schedule.clone(),
        oracle_cap: args.oracle_cap,
        ..TableConfig::default()
    };
    if !args.costs.is_empty() {
        config.specs = args.costs.clone();
    }
    let out = run_table(args.experiment, &config)?;
    for warning in &out.warnings {
        eprintln!("warning: {warning}");
    }
    let (mut w, _) = sink.open(args.out.as_deref())?;
    match format_for(args.format.map(Into::into), args.out.as_deref()) {
        Format::Csv => write_table_csv(&mut w, &out.rows)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, &json!({ "rows": out.rows, "warnings": out.warnings }))?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn interp(args: &InterpArgs, sink: &Sink) -> Outcome {
    let (source, target) = read_pair(&args.input)?;
    let map = match &args.map {
        Some(path) => read_map(path)?,
        None => build_map(
            args.method.into(),
            &source,
            &target,
            args.cost,
            &args.schedule,
            args.oracle_cap,
        )?,
    };
    let frames = interpolation_frames(&source, &map, &target, args.frames)?;
    let dir = sink.directory(args.out.as_deref())?;
    match Format::from(args.format) {
        Format::Csv => {
            let width = (frames.len() - 1).to_string().len().max(3);
            for (j, frame) in frames.iter().enumerate() {
                let path = dir.join(format!("frame_{j:0width$}.csv"));
                hio::write_cloud(&path, &frame.points, Format::Csv)?;
            }
        }
        Format::Json => {
            let mut w = BufWriter::new(File::create(dir.join("frames.json"))?);
            serde_json::to_writer(&mut w, &frames_to_json(&frames))?;
            w.flush()?;
        }
    }
    println!("wrote {} frames to {}", frames.len(), dir.display());
    match no_collision_along_path(&source, &map, &target, PATH_SAMPLES)? {
        hspmap_core::PathCheck::Pass { min_distance } => {
            println!("path check: pass, min pairwise distance {min_distance}");
        }
        other => println!("path check: {other:?}"),
    }
    Ok(())
}

fn print_scaling(w: &mut dyn Write, report: &ScalingReport) -> io::Result<()> {
    writeln!(w, "n,seconds,repetitions,ratio_to_quarter")?;
    for p in &report.points {
        let ratio = p.ratio_to_quarter.map(|r| format!("{r:.3}")).unwrap_or_default();
        writeln!(w, "{},{:.6},{},{ratio}", p.n, p.seconds, p.repetitions)?;
    }
    Ok(())
}

pub fn bench(args: &BenchArgs, sink: &Sink) -> Outcome {
    if args.sizes.is_empty() {
        return Err(Failure::invalid("bench needs at least one size"));
    }
    let report = run_scaling(&args.sizes, &args.schedule, args.seed)?;
    let (mut w, _) = sink.open(args.out.as_deref())?;
    match format_for(args.format.map(Into::into), args.out.as_deref()) {
        Format::Csv => print_scaling(&mut w, &report)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, &report)?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    if let Some(worst) = report.worst_ratio() {
        eprintln!("worst time(4n)/time(n): {worst:.3}");
    }
    Ok(())
}

pub fn verify(args: &VerifyArgs, sink: &Sink) -> Outcome {
    let source = read_cloud(&args.source, args.header)?;
    let target = read_cloud(&args.target, args.header)?;
    let map = read_map(&args.map)?;
    let collision = check_no_collision(&source, &map, &target, args.atol)?;
    // Untagged maps (CSV files) cannot be matched against a schedule; the
    // half-space search is complete without one.
    let schedule = match (&args.schedule, map.schedule_fingerprint()) {
        (Some(_), None) => {
            eprintln!("note: map file carries no schedule fingerprint, --schedule ignored");
            None
        }
        (schedule, _) => schedule.as_ref(),
    };
    let opts = HalfSpaceOptions { stol: 0.0, schedule };
    let half_space = check_half_space(&source, &map, &target, &opts)?;
    let passed = collision.passed() && half_space.passed();
    let report = json!({
        "status": if passed { "pass" } else { "fail" },
        "n": map.len(),
        "method": map.method(),
        "collision": collision,
        "half_space": half_space,
    });
    let (mut w, _) = sink.open(args.out.as_deref())?;
    serde_json::to_writer_pretty(&mut w, &report)?;
    writeln!(w)?;
    w.flush()?;
    if passed {
        Ok(())
    } else {
        let detail = match collision.first_witness() {
            Some(c) => format!(
                "points {} and {} collide at lambda {} (kappa {})",
                c.i, c.j, c.lambda, c.kappa
            ),
            None => format!("{} pairs lack a separating half-space", half_space.failures.len()),
        };
        Err(Failure::invalid(format!("verification failed: {detail}")))
    }
}

pub fn generate(args: &GenArgs, sink: &Sink) -> Outcome {
    let cloud = match args.generator {
        Generator::Grid => {
            let side = (args.n as f64).sqrt().round() as usize;
            if side * side != args.n {
                return Err(Failure::invalid(format!(
                    "grid needs a perfect square, got n = {}",
                    args.n
                )));
            }
            gen_grid(side)?
        }
        Generator::Ellipse => gen_ellipse(args.n, args.axes[0], args.axes[1])?,
        Generator::Gaussian => gen_gaussian(args.n, args.seed, args.dim)?,
        Generator::Uniform => gen_uniform(args.n, args.seed, args.dim)?,
    };
    let cloud = if args.rotate != 0.0 {
        let origin = Point::new(vec![0.0; cloud.dim()])?;
        RigidTransform::rotation(args.rotate.to_radians(), origin)?.apply(&cloud)?
    } else {
        cloud
    };
    let (mut w, _) = sink.open(args.out.as_deref())?;
    match format_for(args.format.map(Into::into), args.out.as_deref()) {
        Format::Csv => hio::write_cloud_csv(&mut w, &cloud)?,
        Format::Json => {
            hio::write_cloud_json(&mut w, &cloud)?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}
