//! Displacement interpolation `((1-λ)Id + λT)♯μ` and barycenters of several
//! shapes built from HV maps out of a reference shape.

use serde::Serialize;

use crate::error::{ensure_same_dim, ensure_same_len, Error, Result};
use crate::measures::PointCloud;
use crate::schedule::DirectionSchedule;
use crate::transport::{hv_map, TransportMap};
use crate::verify::{check_no_collision, CollisionWitness, DEFAULT_ATOL};

const WEIGHT_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct InterpolationFrame {
    pub lambda: f64,
    pub points: PointCloud,
}

/// Point `i` moves to `(1-λ) x_i + λ y_σ(i)`.
pub fn interpolate(
    source: &PointCloud,
    map: &TransportMap,
    target: &PointCloud,
    lambda: f64,
) -> Result<InterpolationFrame> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!("lambda {lambda} outside [0, 1]")));
    }
    map.check_against(source, target)?;
    let points = if lambda == 0.0 {
        source.clone()
    } else if lambda == 1.0 {
        map.pushforward(target)?
    } else {
        let mut coords = Vec::with_capacity(source.as_flat().len());
        for i in 0..source.len() {
            let (x, y) = (source.point(i), target.point(map.target_of(i)));
            coords.extend(x.iter().zip(y).map(|(a, b)| (1.0 - lambda) * a + lambda * b));
        }
        PointCloud::from_flat(source.dim(), coords)?
    };
    Ok(InterpolationFrame { lambda, points })
}

/// Frames at `λ = j/(frames-1)`, `j = 0..frames`.
pub fn interpolation_frames(
    source: &PointCloud,
    map: &TransportMap,
    target: &PointCloud,
    frames: usize,
) -> Result<Vec<InterpolationFrame>> {
    if frames < 2 {
        return Err(Error::InvalidParameter("need at least two frames".into()));
    }
    (0..frames)
        .map(|j| interpolate(source, map, target, j as f64 / (frames - 1) as f64))
        .collect()
}

/// `{"frames": [{"lambda": .., "points": [[..], ..]}, ..]}`
pub fn frames_to_json(frames: &[InterpolationFrame]) -> serde_json::Value {
    #[derive(Serialize)]
    struct Frame {
        lambda: f64,
        points: Vec<Vec<f64>>,
    }
    #[derive(Serialize)]
    struct Animation {
        frames: Vec<Frame>,
    }
    let anim = Animation {
        frames: frames
            .iter()
            .map(|f| Frame {
                lambda: f.lambda,
                points: f.points.to_rows(),
            })
            .collect(),
    };
    serde_json::to_value(anim).expect("frames serialise")
}

#[derive(Clone, Debug)]
pub struct BarycenterSpec {
    shapes: Vec<PointCloud>,
    weights: Vec<f64>,
    reference: usize,
}

impl BarycenterSpec {
    pub fn new(shapes: Vec<PointCloud>, weights: Vec<f64>, reference: usize) -> Result<Self> {
        let first = shapes.first().ok_or(Error::Empty("barycenter needs shapes"))?;
        for s in &shapes[1..] {
            ensure_same_len(first.len(), s.len())?;
            ensure_same_dim(first.dim(), s.dim())?;
        }
        if weights.len() != shapes.len() {
            return Err(Error::InvalidParameter(format!(
                "{} weights for {} shapes",
                weights.len(),
                shapes.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidParameter("weights must be nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(Error::InvalidParameter(format!("weights sum to {total}, not 1")));
        }
        if reference >= shapes.len() {
            return Err(Error::InvalidIndex {
                index: reference,
                len: shapes.len(),
            });
        }
        Ok(BarycenterSpec {
            shapes,
            weights,
            reference,
        })
    }

    pub fn shapes(&self) -> &[PointCloud] {
        &self.shapes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn reference(&self) -> usize {
        self.reference
    }

    /// Same shapes and reference, new weights.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        BarycenterSpec::new(self.shapes.clone(), weights, self.reference)
    }
}

/// Maps from the reference shape to every shape (identity for the reference).
pub fn barycenter_maps(spec: &BarycenterSpec, schedule: &DirectionSchedule) -> Result<Vec<TransportMap>> {
    let r = &spec.shapes[spec.reference];
    spec.shapes
        .iter()
        .enumerate()
        .map(|(k, s)| {
            if k == spec.reference {
                Ok(TransportMap::identity(r.len()))
            } else {
                hv_map(r, s, schedule)
            }
        })
        .collect()
}

/// Point `i` of the result is `Σ_j w_j T_j(x_i)`, with `x_i` the reference
/// shape and `T_j` its HV map onto shape `j`.
pub fn barycenter(spec: &BarycenterSpec, schedule: &DirectionSchedule) -> Result<PointCloud> {
    let maps = barycenter_maps(spec, schedule)?;
    barycenter_with_maps(spec, &maps)
}

pub fn barycenter_with_maps(spec: &BarycenterSpec, maps: &[TransportMap]) -> Result<PointCloud> {
    ensure_same_len(spec.shapes.len(), maps.len())?;
    let r = &spec.shapes[spec.reference];
    let (n, d) = (r.len(), r.dim());
    let mut coords = vec![0.0; n * d];
    for ((shape, map), &w) in spec.shapes.iter().zip(maps).zip(&spec.weights) {
        ensure_same_len(n, map.len())?;
        if w == 0.0 {
            continue;
        }
        // A one-hot weight must return that shape exactly.
        let exact = w == 1.0;
        for i in 0..n {
            let y = shape.point(map.target_of(i));
            for (slot, v) in coords[i * d..(i + 1) * d].iter_mut().zip(y) {
                *slot = if exact { *v } else { *slot + w * v };
            }
        }
    }
    PointCloud::from_flat(d, coords)
}

#[derive(Clone, Debug, PartialEq)]
pub enum PathCheck {
    /// No collision; `min_distance` is the smallest pairwise distance over all sampled frames.
    Pass { min_distance: f64 },
    /// The exact checker found colliding particles.
    Collision(CollisionWitness),
    /// Two points coincide in a sampled frame although the exact check passed
    /// (only possible with duplicated points).
    Coincidence { lambda: f64, i: usize, j: usize },
}

impl PathCheck {
    pub fn passed(&self) -> bool {
        matches!(self, PathCheck::Pass { .. })
    }
}

fn min_pairwise(cloud: &PointCloud) -> (f64, usize, usize) {
    let mut best = (f64::INFINITY, 0, 0);
    for i in 0..cloud.len() {
        for j in i + 1..cloud.len() {
            let d2: f64 = cloud
                .point(i)
                .iter()
                .zip(cloud.point(j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            if d2 < best.0 {
                best = (d2, i, j);
            }
        }
    }
    (best.0.sqrt(), best.1, best.2)
}

/// Runs the exact collision check, then confirms that frames at
/// `λ = j/samples` keep all points apart.
pub fn no_collision_along_path(
    source: &PointCloud,
    map: &TransportMap,
    target: &PointCloud,
    samples: usize,
) -> Result<PathCheck> {
    if samples < 2 {
        return Err(Error::InvalidParameter("need at least two samples".into()));
    }
    let report = check_no_collision(source, map, target, DEFAULT_ATOL)?;
    if let Some(w) = report.witnesses.into_iter().next() {
        return Ok(PathCheck::Collision(w));
    }
    let mut overall = f64::INFINITY;
    for j in 0..=samples {
        let lambda = j as f64 / samples as f64;
        let frame = interpolate(source, map, target, lambda)?;
        let (d, a, b) = min_pairwise(&frame.points);
        if d <= 0.0 {
            return Ok(PathCheck::Coincidence { lambda, i: a, j: b });
        }
        overall = overall.min(d);
    }
    Ok(PathCheck::Pass { min_distance: overall })
}
