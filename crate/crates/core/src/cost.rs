//! Transport costs `c(x, y) = ‖x − y‖_p^q` and the exact assignment oracle.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{ensure_same_dim, ensure_same_len, Error, Result};
use crate::measures::PointCloud;
use crate::schedule::DirectionSchedule;
use crate::transport::{hv_map, lex_map, Method, TransportMap};

pub const DEFAULT_ORACLE_CAP: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Norm {
    L1,
    L2,
    LInf,
}

/// The pair `(p, q)` selecting `‖x − y‖_p^q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CostSpec {
    pub p: Norm,
    pub q: u8,
}

impl CostSpec {
    pub fn new(p: Norm, q: u8) -> Result<Self> {
        if q != 1 && q != 2 {
            return Err(Error::InvalidParameter(format!(
                "cost exponent q = {q}, expected 1 or 2"
            )));
        }
        Ok(CostSpec { p, q })
    }

    pub const fn squared_euclidean() -> Self {
        CostSpec { p: Norm::L2, q: 2 }
    }

    /// All six combinations, `p ∈ {2, 1, ∞}`, `q ∈ {2, 1}`.
    pub fn all() -> [CostSpec; 6] {
        [
            CostSpec { p: Norm::L2, q: 2 },
            CostSpec { p: Norm::L2, q: 1 },
            CostSpec { p: Norm::L1, q: 2 },
            CostSpec { p: Norm::LInf, q: 2 },
            CostSpec { p: Norm::L1, q: 1 },
            CostSpec { p: Norm::LInf, q: 1 },
        ]
    }

    /// The four families reported in the cost tables.
    pub fn table_families() -> [CostSpec; 4] {
        [
            CostSpec { p: Norm::L2, q: 2 },
            CostSpec { p: Norm::L2, q: 1 },
            CostSpec { p: Norm::L1, q: 2 },
            CostSpec { p: Norm::LInf, q: 2 },
        ]
    }

    /// Label such as `L2^2` or `Linf^1`.
    pub fn family(&self) -> String {
        let p = match self.p {
            Norm::L1 => "L1",
            Norm::L2 => "L2",
            Norm::LInf => "Linf",
        };
        format!("{p}^{}", self.q)
    }

    #[inline]
    fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        let diffs = x.iter().zip(y).map(|(a, b)| (a - b).abs());
        match (self.p, self.q) {
            (Norm::L2, 2) => diffs.map(|t| t * t).sum(),
            (Norm::L2, _) => diffs.map(|t| t * t).sum::<f64>().sqrt(),
            (Norm::L1, q) => pow(diffs.sum(), q),
            (Norm::LInf, q) => pow(diffs.fold(0.0, f64::max), q),
        }
    }
}

#[inline]
fn pow(r: f64, q: u8) -> f64 {
    if q == 2 {
        r * r
    } else {
        r
    }
}

/// `p:q`, with `inf` for the max norm.
impl fmt::Display for CostSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = match self.p {
            Norm::L1 => "1",
            Norm::L2 => "2",
            Norm::LInf => "inf",
        };
        write!(f, "{p}:{}", self.q)
    }
}

impl FromStr for CostSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (p, q) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("cost {s:?} is not of the form p:q")))?;
        let p = match p.trim().to_ascii_lowercase().as_str() {
            "1" => Norm::L1,
            "2" => Norm::L2,
            "inf" | "infinity" | "max" => Norm::LInf,
            other => return Err(Error::Parse(format!("unknown norm {other:?}"))),
        };
        let q = q
            .trim()
            .parse::<u8>()
            .map_err(|e| Error::Parse(format!("bad exponent in {s:?}: {e}")))?;
        CostSpec::new(p, q)
    }
}

impl Serialize for CostSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

pub fn point_cost(x: &[f64], y: &[f64], spec: CostSpec) -> Result<f64> {
    ensure_same_dim(x.len(), y.len())?;
    Ok(spec.eval(x, y))
}

/// Mean cost per point, `(1/n) Σ c(x_i, y_σ(i))`.
pub fn map_cost(source: &PointCloud, map: &TransportMap, target: &PointCloud, spec: CostSpec) -> Result<f64> {
    map.check_against(source, target)?;
    let total: f64 = (0..source.len())
        .map(|i| spec.eval(source.point(i), target.point(map.target_of(i))))
        .sum();
    Ok(total / source.len() as f64)
}

/// Minimum-mean-cost bijection, by shortest augmenting paths with dual
/// potentials (O(n³)). Costs are evaluated on the fly.
pub fn optimal_assignment(
    source: &PointCloud,
    target: &PointCloud,
    spec: CostSpec,
    cap: usize,
) -> Result<TransportMap> {
    ensure_same_len(source.len(), target.len())?;
    ensure_same_dim(source.dim(), target.dim())?;
    let n = source.len();
    if n > cap {
        return Err(Error::OracleCapExceeded { n, cap });
    }
    let cost = |i: usize, j: usize| spec.eval(source.point(i), target.point(j));
    let sigma = solve_assignment(n, cost);
    TransportMap::new(sigma, Method::Oracle, None)
}

/// Rows and columns are 1-based inside; slot 0 is the virtual start column.
fn solve_assignment<F: Fn(usize, usize) -> f64>(n: usize, cost: F) -> Vec<usize> {
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    // row assigned to each column
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![0.0f64; n + 1];
    let mut used = vec![false; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        minv.iter_mut().for_each(|m| *m = f64::INFINITY);
        used.iter_mut().for_each(|b| *b = false);
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut sigma = vec![0; n];
    for j in 1..=n {
        sigma[p[j] - 1] = j - 1;
    }
    sigma
}

/// Builds the map of `method` between two clouds. `External` is rejected.
pub fn build_map(
    method: Method,
    source: &PointCloud,
    target: &PointCloud,
    spec: CostSpec,
    schedule: &DirectionSchedule,
    cap: usize,
) -> Result<TransportMap> {
    match method {
        Method::Hv => hv_map(source, target, schedule),
        Method::Lex => lex_map(source, target),
        Method::Oracle => optimal_assignment(source, target, spec, cap),
        Method::External => Err(Error::InvalidParameter("external maps cannot be constructed".into())),
    }
}

/// `cost(method) / cost(oracle)`. When the optimum is zero the ratio is 1 if
/// the method also reaches zero and infinite otherwise.
pub fn cost_ratio(
    source: &PointCloud,
    target: &PointCloud,
    spec: CostSpec,
    method: Method,
    schedule: &DirectionSchedule,
    cap: usize,
) -> Result<f64> {
    let oracle = optimal_assignment(source, target, spec, cap)?;
    let best = map_cost(source, &oracle, target, spec)?;
    let cost = if method == Method::Oracle {
        best
    } else {
        let m = build_map(method, source, target, spec, schedule, cap)?;
        map_cost(source, &m, target, spec)?
    };
    Ok(ratio(cost, best))
}

pub(crate) fn ratio(cost: f64, best: f64) -> f64 {
    if best == 0.0 {
        if cost == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        cost / best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::gen_gaussian;

    fn spec(s: &str) -> CostSpec {
        s.parse().unwrap()
    }

    #[test]
    fn point_cost_examples() {
        let (o, p) = ([0.0, 0.0], [3.0, 4.0]);
        for s in CostSpec::all() {
            assert_eq!(point_cost(&o, &o, s).unwrap(), 0.0);
        }
        assert_eq!(point_cost(&o, &p, spec("2:2")).unwrap(), 25.0);
        assert_eq!(point_cost(&o, &p, spec("1:2")).unwrap(), 49.0);
        assert_eq!(point_cost(&o, &p, spec("inf:2")).unwrap(), 16.0);
        assert_eq!(point_cost(&o, &p, spec("2:1")).unwrap(), 5.0);
        assert_eq!(point_cost(&[1.0, -2.0], &o, spec("inf:1")).unwrap(), 2.0);
        assert!(point_cost(&o, &[1.0], spec("2:2")).is_err());
    }

    #[test]
    fn spec_parsing() {
        assert_eq!(spec("inf:2").to_string(), "inf:2");
        assert_eq!(spec("2:1").family(), "L2^1");
        assert!("3:2".parse::<CostSpec>().is_err());
        assert!("2:3".parse::<CostSpec>().is_err());
        assert!("22".parse::<CostSpec>().is_err());
        for s in CostSpec::all() {
            assert_eq!(s.to_string().parse::<CostSpec>().unwrap(), s);
        }
    }

    #[test]
    fn map_cost_examples() {
        let s = PointCloud::from_rows(&[[0.0, 0.0], [1.0, 0.0]]).unwrap();
        let id = TransportMap::identity(2);
        let swap = TransportMap::from_sigma(vec![1, 0]).unwrap();
        assert_eq!(map_cost(&s, &id, &s, spec("2:2")).unwrap(), 0.0);
        assert_eq!(map_cost(&s, &swap, &s, spec("2:2")).unwrap(), 1.0);
        let t = PointCloud::from_rows(&[[0.0, 0.0]]).unwrap();
        assert!(map_cost(&s, &id, &t, spec("2:2")).is_err());
    }

    #[test]
    fn oracle_small_cases() {
        let one = PointCloud::from_rows(&[[1.0, 2.0]]).unwrap();
        let m = optimal_assignment(&one, &one, spec("2:2"), DEFAULT_ORACLE_CAP).unwrap();
        assert_eq!(m.sigma(), &[0]);
        assert_eq!(m.method(), Method::Oracle);

        let s = PointCloud::from_rows(&[[0.0, 0.0], [1.0, 0.0]]).unwrap();
        let t = PointCloud::from_rows(&[[2.0, 0.0], [0.1, 0.0]]).unwrap();
        let m = optimal_assignment(&s, &t, spec("2:2"), DEFAULT_ORACLE_CAP).unwrap();
        assert_eq!(m.sigma(), &[1, 0]);
    }

    #[test]
    fn oracle_cap() {
        let g = gen_gaussian(10, 1, 2).unwrap();
        assert!(matches!(
            optimal_assignment(&g, &g, spec("2:2"), 9),
            Err(Error::OracleCapExceeded { n: 10, cap: 9 })
        ));
    }

    #[test]
    fn ratio_of_oracle_is_one() {
        let a = gen_gaussian(30, 1, 2).unwrap();
        let b = gen_gaussian(30, 2, 2).unwrap();
        let hv = DirectionSchedule::hv();
        for s in CostSpec::all() {
            assert_eq!(cost_ratio(&a, &b, s, Method::Oracle, &hv, 100).unwrap(), 1.0);
            assert!(cost_ratio(&a, &b, s, Method::Hv, &hv, 100).unwrap() >= 1.0 - 1e-9);
        }
        assert_eq!(cost_ratio(&a, &a, spec("2:2"), Method::Hv, &hv, 100).unwrap(), 1.0);
        assert!(cost_ratio(&a, &b, spec("2:2"), Method::External, &hv, 100).is_err());
    }
}
