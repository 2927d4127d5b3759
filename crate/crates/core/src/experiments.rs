//! The cost-table experiments and the construction-time scaling run.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::cost::{build_map, map_cost, ratio, CostSpec};
use crate::error::{Error, Result};
use crate::measures::{gen_ellipse, gen_gaussian, gen_grid, Point, PointCloud, RigidTransform};
use crate::schedule::DirectionSchedule;
use crate::transport::{hv_map, Method};

/// Semi-axes of the ellipse experiment.
pub const ELLIPSE_AXES: (f64, f64) = (2.0, 1.0);

/// Default sizes `n = 2^(2N)`, `N = 2..=6`.
pub const DEFAULT_SIZES: [usize; 5] = [16, 64, 256, 1024, 4096];

/// Offset separating the two independent Gaussian samples of an instance.
const SECOND_SAMPLE: u64 = 0x5DEE_CE66;

/// Rotations and scalings act about the coordinate origin: the centre of the
/// ellipse and of the Gaussian law, and the lower-left corner of the unit-square
/// grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Experiment {
    /// Quasi-uniform ellipse to itself rotated 45°.
    EllipseRot,
    /// Cell-centred grid to itself rotated 45°.
    GridRot,
    /// Gaussian sample to itself rotated 45°.
    GaussRot,
    /// Grid to an independent Gaussian sample.
    GridGauss,
    /// Gaussian sample to a new sample scaled 3:1 and rotated 90°.
    GaussAniso,
}

impl Experiment {
    pub fn all() -> [Experiment; 5] {
        [
            Experiment::EllipseRot,
            Experiment::GridRot,
            Experiment::GaussRot,
            Experiment::GridGauss,
            Experiment::GaussAniso,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::EllipseRot => "ellipse-rot",
            Experiment::GridRot => "grid-rot",
            Experiment::GaussRot => "gauss-rot",
            Experiment::GridGauss => "grid-gauss",
            Experiment::GaussAniso => "gauss-aniso",
        }
    }

    /// Whether the instance depends on the seed.
    pub fn is_random(&self) -> bool {
        matches!(
            self,
            Experiment::GaussRot | Experiment::GridGauss | Experiment::GaussAniso
        )
    }

    fn uses_grid(&self) -> bool {
        matches!(self, Experiment::GridRot | Experiment::GridGauss)
    }

    /// Checks that `n` is usable (grids need perfect squares).
    pub fn validate_size(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if self.uses_grid() && grid_side(n).is_none() {
            return Err(Error::InvalidParameter(format!(
                "{} needs a perfect square n, got {n}",
                self.name()
            )));
        }
        Ok(())
    }

    /// Source and target clouds of size `n`.
    pub fn instance(&self, n: usize, seed: u64) -> Result<(PointCloud, PointCloud)> {
        self.validate_size(n)?;
        let origin = Point::new(vec![0.0; 2])?;
        let rotate = |c: &PointCloud, angle: f64| RigidTransform::rotation(angle, origin.clone())?.apply(c);
        match self {
            Experiment::EllipseRot => {
                let s = gen_ellipse(n, ELLIPSE_AXES.0, ELLIPSE_AXES.1)?;
                let t = rotate(&s, FRAC_PI_4)?;
                Ok((s, t))
            }
            Experiment::GridRot => {
                let s = gen_grid(grid_side(n).unwrap())?;
                let t = rotate(&s, FRAC_PI_4)?;
                Ok((s, t))
            }
            Experiment::GaussRot => {
                let s = gen_gaussian(n, seed, 2)?;
                let t = rotate(&s, FRAC_PI_4)?;
                Ok((s, t))
            }
            Experiment::GridGauss => {
                let s = gen_grid(grid_side(n).unwrap())?;
                let t = gen_gaussian(n, seed, 2)?;
                Ok((s, t))
            }
            Experiment::GaussAniso => {
                let s = gen_gaussian(n, seed, 2)?;
                let fresh = gen_gaussian(n, seed ^ SECOND_SAMPLE, 2)?;
                let t = RigidTransform::new(FRAC_PI_2, origin.clone(), vec![3.0, 1.0])?.apply(&fresh)?;
                Ok((s, t))
            }
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::all()
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown experiment {s:?}")))
    }
}

fn grid_side(n: usize) -> Option<usize> {
    let side = (n as f64).sqrt().round() as usize;
    (side * side == n).then_some(side)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableRow {
    pub experiment: String,
    pub cost_family: String,
    pub method: Method,
    pub n: usize,
    /// Mean over seeds of the per-point mean cost.
    pub mean_cost: f64,
    /// `mean_cost / mean oracle cost`; absent above the oracle cap.
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct TableConfig {
    pub sizes: Vec<usize>,
    pub seeds: Vec<u64>,
    pub specs: Vec<CostSpec>,
    pub schedule: DirectionSchedule,
    pub oracle_cap: usize,
}

impl Default for TableConfig {
    fn default() -> Self {
        TableConfig {
            sizes: DEFAULT_SIZES.to_vec(),
            seeds: (0..10).collect(),
            specs: CostSpec::table_families().to_vec(),
            schedule: DirectionSchedule::hv(),
            oracle_cap: crate::cost::DEFAULT_ORACLE_CAP,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct TableOutput {
    pub rows: Vec<TableRow>,
    pub warnings: Vec<String>,
}

/// Runs one experiment over every size, seed and cost. Deterministic
/// experiments use only the first seed.
pub fn run_table(experiment: Experiment, config: &TableConfig) -> Result<TableOutput> {
    if config.seeds.is_empty() || config.specs.is_empty() || config.sizes.is_empty() {
        return Err(Error::InvalidParameter("table needs sizes, seeds and costs".into()));
    }
    for &n in &config.sizes {
        experiment.validate_size(n)?;
    }
    let seeds: &[u64] = if experiment.is_random() {
        &config.seeds
    } else {
        &config.seeds[..1]
    };
    let mut out = TableOutput::default();
    for &n in &config.sizes {
        let with_oracle = n <= config.oracle_cap;
        if !with_oracle {
            out.warnings.push(format!(
                "{experiment}: n = {n} exceeds oracle cap {}, ratio column omitted",
                config.oracle_cap
            ));
        }
        let methods: &[Method] = if with_oracle {
            &[Method::Oracle, Method::Hv, Method::Lex]
        } else {
            &[Method::Hv, Method::Lex]
        };
        // sums[spec][method]
        let mut sums = vec![vec![0.0; methods.len()]; config.specs.len()];
        for &seed in seeds {
            let (source, target) = experiment.instance(n, seed)?;
            for (s, &spec) in config.specs.iter().enumerate() {
                for (m, &method) in methods.iter().enumerate() {
                    let map = build_map(method, &source, &target, spec, &config.schedule, config.oracle_cap)?;
                    sums[s][m] += map_cost(&source, &map, &target, spec)?;
                }
            }
        }
        for (s, spec) in config.specs.iter().enumerate() {
            let means: Vec<f64> = sums[s].iter().map(|x| x / seeds.len() as f64).collect();
            for (m, &method) in methods.iter().enumerate() {
                out.rows.push(TableRow {
                    experiment: experiment.name().to_string(),
                    cost_family: spec.family(),
                    method,
                    n,
                    mean_cost: means[m],
                    ratio: with_oracle.then(|| ratio(means[m], means[0])),
                });
            }
        }
    }
    Ok(out)
}

/// CSV with header `experiment,cost_family,method,n,mean_cost,ratio`.
pub fn write_table_csv<W: Write>(writer: W, rows: &[TableRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["experiment", "cost_family", "method", "n", "mean_cost", "ratio"])?;
    for r in rows {
        w.write_record([
            r.experiment.clone(),
            r.cost_family.clone(),
            r.method.to_string(),
            r.n.to_string(),
            r.mean_cost.to_string(),
            r.ratio.map(|x| x.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub n: usize,
    /// Median over rounds of the wall time of `hv_map`, in seconds.
    pub seconds: f64,
    pub repetitions: usize,
    /// Median over rounds of `time(n) / time(n/4)`, when `n/4` was also measured.
    pub ratio_to_quarter: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingReport {
    pub schedule: String,
    pub seed: u64,
    pub points: Vec<ScalingPoint>,
}

impl ScalingReport {
    /// Largest `time(4n)/time(n)` in the report.
    pub fn worst_ratio(&self) -> Option<f64> {
        self.points
            .iter()
            .filter_map(|p| p.ratio_to_quarter)
            .fold(None, |acc, r| Some(acc.map_or(r, |a: f64| a.max(r))))
    }
}

/// Timed rounds; every size is measured once per round.
const ROUNDS: usize = 9;
/// Sizes faster than this are repeated within a round and the fastest run kept.
const MIN_SAMPLE: Duration = Duration::from_millis(20);
const MAX_INNER: usize = 20;

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}

/// Times `hv_map` between two independent Gaussian samples of each size.
///
/// Sampling happens outside the timed region. After one untimed warm-up
/// round, every size is timed once per round, so a slow spell on a shared
/// machine hits all sizes of that round alike. A size's reported time is its
/// median over rounds, and `time(n)/time(n/4)` is the median of the per-round
/// ratios.
pub fn run_scaling(sizes: &[usize], schedule: &DirectionSchedule, seed: u64) -> Result<ScalingReport> {
    let instances = sizes
        .iter()
        .map(|&n| Ok((gen_gaussian(n, seed, 2)?, gen_gaussian(n, seed ^ SECOND_SAMPLE, 2)?)))
        .collect::<Result<Vec<_>>>()?;
    let time_once = |source: &PointCloud, target: &PointCloud| -> Result<Duration> {
        let start = Instant::now();
        let map = hv_map(source, target, schedule)?;
        let elapsed = start.elapsed();
        std::hint::black_box(map);
        Ok(elapsed)
    };
    let mut samples = vec![Vec::with_capacity(ROUNDS); sizes.len()];
    let mut repetitions = vec![0usize; sizes.len()];
    for round in 0..=ROUNDS {
        for (k, (source, target)) in instances.iter().enumerate() {
            let mut best = time_once(source, target)?;
            let mut total = best;
            let mut inner = 1;
            while total < MIN_SAMPLE && inner < MAX_INNER {
                let t = time_once(source, target)?;
                best = best.min(t);
                total += t;
                inner += 1;
            }
            if round > 0 {
                samples[k].push(best.as_secs_f64());
                repetitions[k] += inner;
            }
        }
    }
    let mut points: Vec<ScalingPoint> = Vec::with_capacity(sizes.len());
    for (k, &n) in sizes.iter().enumerate() {
        let quarter = (n % 4 == 0).then(|| sizes.iter().position(|&m| m == n / 4)).flatten();
        let ratio_to_quarter =
            quarter.map(|q| median(samples[k].iter().zip(&samples[q]).map(|(a, b)| a / b).collect()));
        points.push(ScalingPoint {
            n,
            seconds: median(samples[k].clone()),
            repetitions: repetitions[k],
            ratio_to_quarter,
        });
    }
    Ok(ScalingReport {
        schedule: schedule.to_string(),
        seed,
        points,
    })
}
