//! Point clouds (uniform empirical measures) and the generators used by the
//! experiments: cell-centred grids, quasi-uniform ellipses, seeded Gaussian
//! samples and rigid transforms.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{ensure_same_dim, Error, Result};

/// A single point of `R^d` with finite coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Empty("point has no coordinates"));
        }
        if let Some(axis) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { point: 0, axis });
        }
        Ok(Point(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for Point {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// An ordered list of `n >= 1` points of common dimension `d`. Every point
/// carries mass `1/n`, so the cloud is the empirical measure of its points.
///
/// Coordinates are stored row-major in one buffer.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    /// Builds a cloud from a flat row-major coordinate buffer.
    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        if coords.is_empty() {
            return Err(Error::Empty("point cloud has no points"));
        }
        if coords.len() % dim != 0 {
            return Err(Error::InvalidParameter(format!(
                "{} coordinates do not split into points of dimension {dim}",
                coords.len()
            )));
        }
        if let Some(k) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite {
                point: k / dim,
                axis: k % dim,
            });
        }
        Ok(PointCloud { dim, coords })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let first = rows.first().ok_or(Error::Empty("point cloud has no points"))?;
        let dim = first.as_ref().len();
        let mut coords = Vec::with_capacity(dim * rows.len());
        for row in rows {
            ensure_same_dim(dim, row.as_ref().len())?;
            coords.extend_from_slice(row.as_ref());
        }
        PointCloud::from_flat(dim, coords)
    }

    pub fn from_points(points: &[Point]) -> Result<Self> {
        PointCloud::from_rows(points)
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.coords
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.iter().map(<[f64]>::to_vec).collect()
    }

    pub fn centroid(&self) -> Point {
        let mut c = vec![0.0; self.dim];
        for p in self.iter() {
            for (acc, x) in c.iter_mut().zip(p) {
                *acc += x;
            }
        }
        let n = self.len() as f64;
        c.iter_mut().for_each(|x| *x /= n);
        Point(c)
    }

    /// Adds `offset` to every point.
    pub fn translated(&self, offset: &[f64]) -> Result<Self> {
        ensure_same_dim(self.dim, offset.len())?;
        let mut coords = self.coords.clone();
        for p in coords.chunks_exact_mut(self.dim) {
            for (x, o) in p.iter_mut().zip(offset) {
                *x += o;
            }
        }
        PointCloud::from_flat(self.dim, coords)
    }

    /// Reorders points so that point `k` of the result is point `order[k]` of `self`.
    pub fn reordered(&self, order: &[usize]) -> Result<Self> {
        let mut coords = Vec::with_capacity(self.coords.len());
        for &i in order {
            if i >= self.len() {
                return Err(Error::InvalidIndex {
                    index: i,
                    len: self.len(),
                });
            }
            coords.extend_from_slice(self.point(i));
        }
        PointCloud::from_flat(self.dim, coords)
    }

    /// Sub-cloud made of the listed points, in the listed order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        self.reordered(indices)
    }
}

/// Translate to `center`, scale per axis, rotate by `angle` (planar only),
/// translate back.
#[derive(Clone, Debug, PartialEq)]
pub struct RigidTransform {
    angle: f64,
    center: Point,
    scale: Vec<f64>,
}

impl RigidTransform {
    pub fn new(angle: f64, center: Point, scale: Vec<f64>) -> Result<Self> {
        if !angle.is_finite() {
            return Err(Error::InvalidParameter("rotation angle must be finite".into()));
        }
        ensure_same_dim(center.dim(), scale.len())?;
        if scale.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::InvalidParameter(
                "scale factors must be strictly positive".into(),
            ));
        }
        Ok(RigidTransform { angle, center, scale })
    }

    /// Counter-clockwise planar rotation about `center`.
    pub fn rotation(angle: f64, center: Point) -> Result<Self> {
        let d = center.dim();
        RigidTransform::new(angle, center, vec![1.0; d])
    }

    pub fn scaling(scale: Vec<f64>, center: Point) -> Result<Self> {
        RigidTransform::new(0.0, center, scale)
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn scale(&self) -> &[f64] {
        &self.scale
    }

    pub fn apply(&self, cloud: &PointCloud) -> Result<PointCloud> {
        let d = cloud.dim();
        ensure_same_dim(self.center.dim(), d)?;
        let rotate = self.angle != 0.0;
        if !rotate && self.scale.iter().all(|&s| s == 1.0) {
            return Ok(cloud.clone());
        }
        if rotate && d != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: d });
        }
        let (sin, cos) = self.angle.sin_cos();
        let c = self.center.coords();
        let mut coords = Vec::with_capacity(cloud.as_flat().len());
        let mut buf = vec![0.0; d];
        for p in cloud.iter() {
            for k in 0..d {
                buf[k] = (p[k] - c[k]) * self.scale[k];
            }
            if rotate {
                let (x, y) = (buf[0], buf[1]);
                buf[0] = cos * x - sin * y;
                buf[1] = sin * x + cos * y;
            }
            coords.extend(buf.iter().zip(c).map(|(b, c)| b + c));
        }
        PointCloud::from_flat(d, coords)
    }
}

/// `side^2` cell centres of the unit square, `((i + 0.5)/side, (j + 0.5)/side)`,
/// with `i` (the x index) varying slowest.
pub fn gen_grid(side: usize) -> Result<PointCloud> {
    if side == 0 {
        return Err(Error::InvalidParameter("grid side must be at least 1".into()));
    }
    let s = side as f64;
    let mut coords = Vec::with_capacity(2 * side * side);
    for i in 0..side {
        for j in 0..side {
            coords.push((i as f64 + 0.5) / s);
            coords.push((j as f64 + 0.5) / s);
        }
    }
    PointCloud::from_flat(2, coords)
}

/// Quasi-uniform filling of the ellipse `x²/a² + y²/b² <= 1` by exactly `n`
/// points of a square lattice centred at the origin.
///
/// A lattice site `(i, j)` lies inside the ellipse at pitch `h` iff
/// `h <= 1 / sqrt(i²/a² + j²/b²)`. Sites are ranked by that critical pitch
/// (ties broken by `(i, j)`), the first `n` are kept, and the pitch is set
/// strictly between the `n`-th critical value and the next smaller one so every
/// kept site is strictly interior.
pub fn gen_ellipse(n: usize, a: f64, b: f64) -> Result<PointCloud> {
    if n == 0 {
        return Err(Error::InvalidParameter("ellipse point count must be at least 1".into()));
    }
    if !(a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0) {
        return Err(Error::InvalidParameter("ellipse semi-axes must be positive".into()));
    }
    let area = PI * a * b;
    let mut h_min = 0.5 * (area / n as f64).sqrt();
    loop {
        let ni = (a / h_min).ceil() as i64 + 1;
        let nj = (b / h_min).ceil() as i64 + 1;
        // (critical pitch, i, j)
        let mut sites: Vec<(f64, i64, i64)> = Vec::new();
        for i in -ni..=ni {
            for j in -nj..=nj {
                let q = (i as f64 / a).powi(2) + (j as f64 / b).powi(2);
                let r = if q == 0.0 { f64::INFINITY } else { q.sqrt().recip() };
                sites.push((r, i, j));
            }
        }
        sites.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap().then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
        // The enumeration box only covers sites with critical pitch >= h_min.
        let reliable = sites.iter().take_while(|s| s.0 >= h_min).count();
        if reliable < n + 1 {
            h_min *= 0.5;
            continue;
        }
        let r_n = sites[n - 1].0;
        let next = sites[n..].iter().map(|s| s.0).find(|&r| r < r_n).unwrap_or(0.0);
        let h = if r_n.is_infinite() {
            // n == 1: only the origin is kept, any pitch works.
            next.min(1.0)
        } else {
            0.5 * (r_n + next)
        };
        let mut coords = Vec::with_capacity(2 * n);
        for &(_, i, j) in &sites[..n] {
            coords.push(i as f64 * h);
            coords.push(j as f64 * h);
        }
        return PointCloud::from_flat(2, coords);
    }
}

/// `n` i.i.d. standard normal samples in `R^d`.
///
/// Samples come from the Box–Muller transform driven by `ChaCha8Rng`
/// seeded with `seed_from_u64(seed)`; coordinates are filled row-major, two
/// normals per pair of uniforms. Output is bit-reproducible for fixed
/// `(n, seed, d)`.
pub fn gen_gaussian(n: usize, seed: u64, d: usize) -> Result<PointCloud> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidParameter(
            "gaussian sample needs n >= 1 and d >= 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = n * d;
    let mut coords = Vec::with_capacity(total + 1);
    while coords.len() < total {
        // u1 in (0, 1] keeps the logarithm finite.
        let u1: f64 = 1.0 - rng.random::<f64>();
        let u2: f64 = rng.random::<f64>();
        let radius = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * PI * u2).sin_cos();
        coords.push(radius * c);
        coords.push(radius * s);
    }
    coords.truncate(total);
    PointCloud::from_flat(d, coords)
}

/// Uniform samples from `[0, 1)^d` drawn on a dyadic lattice of `2^-20`, so
/// sums with small integers stay exact.
pub fn gen_uniform(n: usize, seed: u64, d: usize) -> Result<PointCloud> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidParameter("uniform sample needs n >= 1 and d >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = (1u64 << 20) as f64;
    let coords = (0..n * d)
        .map(|_| rng.random_range(0..1u32 << 20) as f64 / scale)
        .collect();
    PointCloud::from_flat(d, coords)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn nn_distances(cloud: &PointCloud) -> Vec<f64> {
        (0..cloud.len())
            .map(|i| {
                (0..cloud.len())
                    .filter(|&j| j != i)
                    .map(|j| {
                        let (p, q) = (cloud.point(i), cloud.point(j));
                        ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }

    #[test]
    fn grid_small_cases() {
        assert_eq!(gen_grid(1).unwrap().to_rows(), vec![vec![0.5, 0.5]]);
        assert_eq!(
            gen_grid(2).unwrap().to_rows(),
            vec![vec![0.25, 0.25], vec![0.25, 0.75], vec![0.75, 0.25], vec![0.75, 0.75]]
        );
        assert!(gen_grid(0).is_err());
    }

    #[test]
    fn grid_side_8() {
        let g = gen_grid(8).unwrap();
        assert_eq!(g.len(), 64);
        let rows = g.to_rows();
        for i in 0..64 {
            for j in i + 1..64 {
                assert_ne!(rows[i], rows[j]);
            }
        }
        let min = g.as_flat().iter().cloned().fold(f64::INFINITY, f64::min);
        let max = g.as_flat().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!((min, max), (0.0625, 0.9375));
        assert_eq!(g, gen_grid(8).unwrap());
    }

    #[test]
    fn ellipse_single_point_is_centre() {
        assert_eq!(gen_ellipse(1, 1.0, 1.0).unwrap().to_rows(), vec![vec![0.0, 0.0]]);
    }

    #[test]
    fn ellipse_membership_and_spacing() {
        let e = gen_ellipse(64, 2.0, 1.0).unwrap();
        assert!(e.len() >= 64 && e.len() <= 64 + 8);
        for p in e.iter() {
            assert!(p[0] * p[0] / 4.0 + p[1] * p[1] <= 1.0);
        }
        let nn = nn_distances(&e);
        let max = nn.iter().cloned().fold(0.0, f64::max);
        let min = nn.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min > 0.0 && max / min <= 2.5, "ratio {}", max / min);
    }

    #[test]
    fn ellipse_counts_within_band() {
        for n in 1..200 {
            let e = gen_ellipse(n, 2.0, 1.0).unwrap();
            let extra = (n as f64).sqrt().ceil() as usize;
            assert!(e.len() >= n && e.len() <= n + extra, "n = {n}");
            for p in e.iter() {
                assert!(p[0] * p[0] / 4.0 + p[1] * p[1] <= 1.0);
            }
        }
        assert_eq!(gen_ellipse(500, 1.0, 3.0).unwrap(), gen_ellipse(500, 1.0, 3.0).unwrap());
    }

    #[test]
    fn gaussian_reproducible_and_centred() {
        let one = gen_gaussian(1, 7, 2).unwrap();
        assert_eq!(one.len(), 1);
        let a = gen_gaussian(4096, 42, 2).unwrap();
        let b = gen_gaussian(4096, 42, 2).unwrap();
        assert_eq!(a.as_flat(), b.as_flat());
        assert_ne!(a, gen_gaussian(4096, 43, 2).unwrap());
        let mean = a.centroid();
        for m in mean.coords() {
            assert!(m.abs() < 0.1, "mean {m}");
        }
        let odd = gen_gaussian(3, 1, 3).unwrap();
        assert_eq!((odd.len(), odd.dim()), (3, 3));
    }

    #[test]
    fn transform_examples() {
        let g = gen_grid(3).unwrap();
        let id = RigidTransform::rotation(0.0, g.centroid()).unwrap();
        assert_eq!(id.apply(&g).unwrap(), g);

        let quarter = RigidTransform::rotation(PI / 2.0, Point::new(vec![0.0, 0.0]).unwrap()).unwrap();
        let p = PointCloud::from_rows(&[[1.0, 0.0]]).unwrap();
        let q = quarter.apply(&p).unwrap();
        assert!((q.point(0)[0]).abs() < 1e-15 && (q.point(0)[1] - 1.0).abs() < 1e-15);

        let g2 = gen_grid(2).unwrap();
        let c = g2.centroid();
        let rotated = RigidTransform::rotation(FRAC_PI_4, c.clone())
            .unwrap()
            .apply(&g2)
            .unwrap();
        let c2 = rotated.centroid();
        for (x, y) in c.coords().iter().zip(c2.coords()) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn transform_full_turn_is_identity() {
        let g = gen_gaussian(50, 3, 2).unwrap();
        let t = RigidTransform::rotation(2.0 * PI, g.centroid()).unwrap();
        let r = t.apply(&g).unwrap();
        for (x, y) in g.as_flat().iter().zip(r.as_flat()) {
            assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn transform_errors() {
        let g3 = gen_gaussian(5, 1, 3).unwrap();
        let centre = Point::new(vec![0.0; 3]).unwrap();
        assert!(RigidTransform::rotation(1.0, centre.clone())
            .unwrap()
            .apply(&g3)
            .is_err());
        let s = RigidTransform::scaling(vec![2.0, 1.0, 1.0], centre).unwrap();
        let scaled = s.apply(&g3).unwrap();
        assert_eq!(scaled.point(0)[0], 2.0 * g3.point(0)[0]);
        assert!(RigidTransform::scaling(vec![0.0, 1.0], Point::new(vec![0.0, 0.0]).unwrap()).is_err());
        let g2 = gen_grid(2).unwrap();
        assert!(s_dim_mismatch(&g2));
    }

    fn s_dim_mismatch(g2: &PointCloud) -> bool {
        let t = RigidTransform::scaling(vec![1.0; 3], Point::new(vec![0.0; 3]).unwrap()).unwrap();
        matches!(t.apply(g2), Err(Error::DimensionMismatch { .. }))
    }

    #[test]
    fn cloud_validation() {
        assert!(PointCloud::from_flat(2, vec![]).is_err());
        assert!(PointCloud::from_flat(2, vec![1.0, 2.0, 3.0]).is_err());
        assert!(matches!(
            PointCloud::from_flat(2, vec![1.0, 2.0, f64::NAN, 0.0]),
            Err(Error::NonFinite { point: 1, axis: 0 })
        ));
        assert!(PointCloud::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(Point::new(vec![f64::INFINITY]).is_err());
    }
}
