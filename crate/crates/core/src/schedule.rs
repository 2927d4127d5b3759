use std::fmt;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

const UNIT_TOLERANCE: f64 = 1e-12;

/// Rule giving the split direction for each tree level.
///
/// Every variant cycles, so each direction it lists recurs infinitely often.
/// Level `k` (root = 0) splits along entry `k mod len`.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum DirectionSchedule {
    /// Horizontal/vertical partitioning: `e_1, e_2, ..., e_d, e_1, ...`.
    #[default]
    StandardAxes,
    /// Cycle over the listed standard axes (0-based).
    Axes(Vec<usize>),
    /// Cycle over explicit unit vectors.
    Vectors(Vec<Vec<f64>>),
}

/// A resolved split direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Direction<'a> {
    Axis(usize),
    Vector(&'a [f64]),
}

impl Direction<'_> {
    #[inline]
    pub fn project(&self, x: &[f64]) -> f64 {
        match *self {
            Direction::Axis(a) => x[a],
            Direction::Vector(v) => v.iter().zip(x).map(|(a, b)| a * b).sum(),
        }
    }

    pub fn to_vec(&self, dim: usize) -> Vec<f64> {
        match *self {
            Direction::Axis(a) => {
                let mut v = vec![0.0; dim];
                v[a] = 1.0;
                v
            }
            Direction::Vector(v) => v.to_vec(),
        }
    }
}

impl DirectionSchedule {
    pub fn hv() -> Self {
        DirectionSchedule::StandardAxes
    }

    pub fn axes(axes: Vec<usize>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidParameter("axis schedule is empty".into()));
        }
        Ok(DirectionSchedule::Axes(axes))
    }

    /// Normalises each vector; rejects zero or non-finite ones and mixed dimensions.
    pub fn vectors(vectors: Vec<Vec<f64>>) -> Result<Self> {
        let dim = vectors
            .first()
            .ok_or_else(|| Error::InvalidParameter("direction list is empty".into()))?
            .len();
        let mut out = Vec::with_capacity(vectors.len());
        for v in vectors {
            if v.len() != dim || dim == 0 {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !(norm.is_finite() && norm > 0.0) {
                return Err(Error::InvalidParameter(format!("direction {v:?} cannot be normalised")));
            }
            out.push(v.iter().map(|x| x / norm).collect());
        }
        Ok(DirectionSchedule::Vectors(out))
    }

    /// Checks the schedule can produce directions in dimension `dim`.
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            DirectionSchedule::StandardAxes => Ok(()),
            DirectionSchedule::Axes(axes) => match axes.iter().find(|&&a| a >= dim) {
                Some(&a) => Err(Error::InvalidParameter(format!(
                    "axis {a} does not exist in dimension {dim}"
                ))),
                None if axes.is_empty() => Err(Error::InvalidParameter("axis schedule is empty".into())),
                None => Ok(()),
            },
            DirectionSchedule::Vectors(vs) => {
                if vs.is_empty() {
                    return Err(Error::InvalidParameter("direction list is empty".into()));
                }
                for v in vs {
                    if v.len() != dim {
                        return Err(Error::DimensionMismatch {
                            expected: dim,
                            found: v.len(),
                        });
                    }
                    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if (norm - 1.0).abs() > UNIT_TOLERANCE {
                        return Err(Error::InvalidParameter(format!("direction {v:?} is not a unit vector")));
                    }
                }
                Ok(())
            }
        }
    }

    /// Number of levels after which the directions repeat.
    pub fn period(&self, dim: usize) -> usize {
        match self {
            DirectionSchedule::StandardAxes => dim,
            DirectionSchedule::Axes(axes) => axes.len(),
            DirectionSchedule::Vectors(vs) => vs.len(),
        }
    }

    /// Direction used to split nodes at `level` (root = 0) in dimension `dim`.
    #[inline]
    pub fn direction(&self, level: usize, dim: usize) -> Direction<'_> {
        match self {
            DirectionSchedule::StandardAxes => Direction::Axis(level % dim),
            DirectionSchedule::Axes(axes) => Direction::Axis(axes[level % axes.len()]),
            DirectionSchedule::Vectors(vs) => Direction::Vector(&vs[level % vs.len()]),
        }
    }

    /// Stable identifier of the schedule: first 16 hex digits of the SHA-256
    /// of its canonical text form.
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    fn canonical(&self) -> String {
        match self {
            DirectionSchedule::Vectors(vs) => {
                let parts: Vec<String> = vs
                    .iter()
                    .map(|v| {
                        v.iter()
                            .map(|x| format!("{:016x}", x.to_bits()))
                            .collect::<Vec<_>>()
                            .join(",")
                    })
                    .collect();
                format!("dirs-bits:{}", parts.join(";"))
            }
            other => other.to_string(),
        }
    }
}

impl fmt::Display for DirectionSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DirectionSchedule::StandardAxes => write!(f, "hv"),
            DirectionSchedule::Axes(axes) => {
                let parts: Vec<String> = axes.iter().map(usize::to_string).collect();
                write!(f, "axes:{}", parts.join(","))
            }
            DirectionSchedule::Vectors(vs) => {
                let parts: Vec<String> = vs
                    .iter()
                    .map(|v| v.iter().map(f64::to_string).collect::<Vec<_>>().join(","))
                    .collect();
                write!(f, "dirs:{}", parts.join(";"))
            }
        }
    }
}

/// Parses `hv`, `axes:0,1,...` or `dirs:x,y;x,y;...`.
impl FromStr for DirectionSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("hv") {
            return Ok(DirectionSchedule::StandardAxes);
        }
        if let Some(rest) = s.strip_prefix("axes:") {
            let axes = rest
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<usize>()
                        .map_err(|e| Error::Parse(format!("bad axis {t:?}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            return DirectionSchedule::axes(axes);
        }
        if let Some(rest) = s.strip_prefix("dirs:") {
            let vectors = rest
                .split(';')
                .map(|v| {
                    v.split(',')
                        .map(|t| {
                            t.trim()
                                .parse::<f64>()
                                .map_err(|e| Error::Parse(format!("bad component {t:?}: {e}")))
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            return DirectionSchedule::vectors(vectors);
        }
        Err(Error::Parse(format!(
            "unknown schedule {s:?}, expected hv, axes:i,j,... or dirs:x,y;..."
        )))
    }
}
