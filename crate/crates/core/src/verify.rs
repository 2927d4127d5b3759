//! Pairwise certification of the no-collision and half-space-preserving
//! properties of a map between point clouds.
//!
//! Two particles `x_i -> T(x_i)` and `x_j -> T(x_j)` moving on straight lines
//! meet at some `λ ∈ (0,1)` exactly when `ΔT = T(x_i) - T(x_j)` is a strictly
//! negative multiple `κ·Δx` of `Δx = x_i - x_j`; they then meet at
//! `λ = 1/(1-κ)`. A pair is half-space preserved when some unit `v` has
//! `(x_j - x_i)·v >= 0` and `(T(x_j) - T(x_i))·v >= 0` with one of the two
//! strict. The two checks are implemented independently and agree pair by
//! pair.
//!
//! Both checks are O(n²).

use serde::Serialize;

use crate::bsp::{build_tree, BinaryCode, MaxDepth};
use crate::error::{Error, Result};
use crate::measures::PointCloud;
use crate::schedule::DirectionSchedule;
use crate::transport::TransportMap;

pub const DEFAULT_ATOL: f64 = 1e-9;

/// Bisector candidates shorter than this are rounding noise of an exactly
/// antiparallel pair.
const BISECTOR_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CollisionWitness {
    pub i: usize,
    pub j: usize,
    /// `ΔT = κ Δx`, `κ < 0`.
    pub kappa: f64,
    /// Collision time, `1/(1-κ)`.
    pub lambda: f64,
    /// `|(1-λ)Δx + λΔT|`.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CollisionReport {
    pub status: Status,
    pub pairs_checked: usize,
    pub tolerance: f64,
    pub witnesses: Vec<CollisionWitness>,
    /// Pairs of coincident source points, for which the property is ill-posed.
    pub duplicate_pairs: Vec<(usize, usize)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

impl CollisionReport {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn first_witness(&self) -> Option<&CollisionWitness> {
        self.witnesses.first()
    }
}

struct Pairs<'a> {
    source: &'a PointCloud,
    target: &'a PointCloud,
    map: &'a TransportMap,
    dx: Vec<f64>,
    dt: Vec<f64>,
}

impl<'a> Pairs<'a> {
    fn new(source: &'a PointCloud, map: &'a TransportMap, target: &'a PointCloud) -> Result<Self> {
        map.check_against(source, target)?;
        let d = source.dim();
        Ok(Pairs {
            source,
            target,
            map,
            dx: vec![0.0; d],
            dt: vec![0.0; d],
        })
    }

    /// Fills `dx = x_i - x_j` and `dt = T(x_i) - T(x_j)`.
    fn load(&mut self, i: usize, j: usize) {
        let (xi, xj) = (self.source.point(i), self.source.point(j));
        let (ti, tj) = (
            self.target.point(self.map.target_of(i)),
            self.target.point(self.map.target_of(j)),
        );
        for k in 0..self.dx.len() {
            self.dx[k] = xi[k] - xj[k];
            self.dt[k] = ti[k] - tj[k];
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Antiparallel test for one pair: collinear up to `atol · max(|Δx|,|ΔT|)²` on
/// every 2×2 minor, and `Δx·ΔT < 0`.
fn collision_of(dx: &[f64], dt: &[f64], atol: f64) -> Option<(f64, f64, f64)> {
    let inner = dot(dx, dt);
    if inner >= 0.0 {
        return None;
    }
    let (nx2, nt2) = (dot(dx, dx), dot(dt, dt));
    let bound = atol * nx2.max(nt2);
    let d = dx.len();
    for a in 0..d {
        for b in a + 1..d {
            if (dx[a] * dt[b] - dx[b] * dt[a]).abs() > bound {
                return None;
            }
        }
    }
    let kappa = inner / nx2;
    let lambda = 1.0 / (1.0 - kappa);
    let residual = dx
        .iter()
        .zip(dt)
        .map(|(x, t)| ((1.0 - lambda) * x + lambda * t).powi(2))
        .sum::<f64>()
        .sqrt();
    Some((kappa, lambda, residual))
}

/// Checks every pair for a collision along the displacement interpolation.
pub fn check_no_collision(
    source: &PointCloud,
    map: &TransportMap,
    target: &PointCloud,
    atol: f64,
) -> Result<CollisionReport> {
    if !(atol.is_finite() && atol >= 0.0) {
        return Err(Error::InvalidParameter("atol must be a nonnegative number".into()));
    }
    let mut pairs = Pairs::new(source, map, target)?;
    let n = source.len();
    let mut witnesses = Vec::new();
    let mut duplicate_pairs = Vec::new();
    let mut checked = 0;
    for i in 0..n {
        for j in i + 1..n {
            pairs.load(i, j);
            if pairs.dx.iter().all(|&x| x == 0.0) {
                duplicate_pairs.push((i, j));
                continue;
            }
            checked += 1;
            if let Some((kappa, lambda, residual)) = collision_of(&pairs.dx, &pairs.dt, atol) {
                witnesses.push(CollisionWitness {
                    i,
                    j,
                    kappa,
                    lambda,
                    residual,
                });
            }
        }
    }
    Ok(CollisionReport {
        status: if witnesses.is_empty() {
            Status::Pass
        } else {
            Status::Fail
        },
        pairs_checked: checked,
        tolerance: atol,
        witnesses,
        duplicate_pairs,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HalfSpaceWitness {
    pub i: usize,
    pub j: usize,
    pub direction: Vec<f64>,
    /// `(x_j - x_i)·v`
    pub source_gap: f64,
    /// `(T(x_j) - T(x_i))·v`
    pub target_gap: f64,
}

#[derive(Clone, Debug, Default)]
pub struct HalfSpaceOptions<'a> {
    /// A side counts as strict when its gap exceeds `stol · max(|Δx|, |ΔT|)`.
    pub stol: f64,
    /// Schedule the map was built with; adds the separating split direction
    /// as a candidate. Must match the map's fingerprint.
    pub schedule: Option<&'a DirectionSchedule>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HalfSpaceReport {
    pub status: Status,
    pub pairs_checked: usize,
    pub tolerance: f64,
    /// Pairs with no half-space witness.
    pub failures: Vec<(usize, usize)>,
    pub duplicate_pairs: Vec<(usize, usize)>,
}

impl HalfSpaceReport {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

struct HalfSpaceSearch<'a> {
    stol: f64,
    codes: Option<Vec<BinaryCode>>,
    schedule: Option<&'a DirectionSchedule>,
    dim: usize,
}

impl HalfSpaceSearch<'_> {
    /// Tries `v` and `-v` on the pair whose differences are `dx = x_i - x_j`,
    /// `dt = T(x_i) - T(x_j)`.
    fn try_direction(&self, v: &[f64], dx: &[f64], dt: &[f64], scale: f64) -> Option<(f64, f64, bool)> {
        // Gaps are measured from i to j, hence the sign flip.
        let a = -dot(dx, v);
        let b = -dot(dt, v);
        let strict = self.stol * scale;
        for (sa, sb, flipped) in [(a, b, false), (-a, -b, true)] {
            if sa >= 0.0 && sb >= 0.0 && (sa > strict || sb > strict) {
                return Some((sa, sb, flipped));
            }
        }
        None
    }

    fn witness(&self, i: usize, j: usize, dx: &[f64], dt: &[f64]) -> Option<HalfSpaceWitness> {
        let (nx, nt) = (norm(dx), norm(dt));
        let scale = nx.max(nt);
        let mut candidates: Vec<Vec<f64>> = Vec::with_capacity(4);
        if let (Some(codes), Some(schedule)) = (&self.codes, self.schedule) {
            let level = codes[i].common_prefix_len(&codes[j]);
            if level < codes[i].len().min(codes[j].len()) {
                candidates.push(schedule.direction(level, self.dim).to_vec(self.dim));
            }
        }
        if nx > 0.0 {
            candidates.push(dx.iter().map(|x| x / nx).collect());
        }
        if nt > 0.0 {
            candidates.push(dt.iter().map(|t| t / nt).collect());
        }
        if nx > 0.0 && nt > 0.0 {
            let bis: Vec<f64> = dx.iter().zip(dt).map(|(x, t)| x / nx + t / nt).collect();
            let nb = norm(&bis);
            if nb > BISECTOR_FLOOR {
                candidates.push(bis.iter().map(|b| b / nb).collect());
            }
        }
        candidates.into_iter().find_map(|v| {
            self.try_direction(&v, dx, dt, scale)
                .map(|(sa, sb, flipped)| HalfSpaceWitness {
                    i,
                    j,
                    direction: if flipped { v.iter().map(|x| -x).collect() } else { v },
                    source_gap: sa,
                    target_gap: sb,
                })
        })
    }
}

fn half_space_search<'a>(
    source: &PointCloud,
    map: &TransportMap,
    opts: &HalfSpaceOptions<'a>,
) -> Result<HalfSpaceSearch<'a>> {
    if !(opts.stol.is_finite() && opts.stol >= 0.0) {
        return Err(Error::InvalidParameter("stol must be a nonnegative number".into()));
    }
    let codes = match opts.schedule {
        Some(schedule) => {
            if map.schedule_fingerprint() != Some(schedule.fingerprint().as_str()) {
                return Err(Error::InvalidParameter(
                    "schedule does not match the map's fingerprint".into(),
                ));
            }
            Some(build_tree(source, schedule, MaxDepth::Full)?.codes().to_vec())
        }
        None => None,
    };
    Ok(HalfSpaceSearch {
        stol: opts.stol,
        codes,
        schedule: opts.schedule,
        dim: source.dim(),
    })
}

/// Searches a half-space witness for the single pair `(i, j)`.
pub fn half_space_witness(
    source: &PointCloud,
    map: &TransportMap,
    target: &PointCloud,
    i: usize,
    j: usize,
    opts: &HalfSpaceOptions<'_>,
) -> Result<Option<HalfSpaceWitness>> {
    let mut pairs = Pairs::new(source, map, target)?;
    for index in [i, j] {
        if index >= source.len() {
            return Err(Error::InvalidIndex {
                index,
                len: source.len(),
            });
        }
    }
    let search = half_space_search(source, map, opts)?;
    pairs.load(i, j);
    Ok(search.witness(i, j, &pairs.dx, &pairs.dt))
}

/// Checks that every pair of distinct source points has a half-space witness.
///
/// Candidate directions, in order: the split direction that first separated
/// the pair (when a schedule is given), `Δx/|Δx|`, `ΔT/|ΔT|`, and the bisector
/// `Δx/|Δx| + ΔT/|ΔT|`, each with both signs. The bisector succeeds whenever
/// the pair is not antiparallel, so the search is complete.
pub fn check_half_space(
    source: &PointCloud,
    map: &TransportMap,
    target: &PointCloud,
    opts: &HalfSpaceOptions<'_>,
) -> Result<HalfSpaceReport> {
    let mut pairs = Pairs::new(source, map, target)?;
    let search = half_space_search(source, map, opts)?;
    let n = source.len();
    let mut failures = Vec::new();
    let mut duplicate_pairs = Vec::new();
    let mut checked = 0;
    for i in 0..n {
        for j in i + 1..n {
            pairs.load(i, j);
            if pairs.dx.iter().all(|&x| x == 0.0) {
                duplicate_pairs.push((i, j));
                continue;
            }
            checked += 1;
            if search.witness(i, j, &pairs.dx, &pairs.dt).is_none() {
                failures.push((i, j));
            }
        }
    }
    Ok(HalfSpaceReport {
        status: if failures.is_empty() {
            Status::Pass
        } else {
            Status::Fail
        },
        pairs_checked: checked,
        tolerance: opts.stol,
        failures,
        duplicate_pairs,
    })
}
