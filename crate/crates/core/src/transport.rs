//! Transport maps between equal-size clouds: the BSP leaf-matching (HV) map,
//! the lexicographic (Knothe–Rosenblatt) baseline, and the structural
//! operations on maps (restriction to dual cells, synthesis, composition).

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bsp::{build_tree, BinaryCode, BspTree, MaxDepth};
use crate::error::{ensure_same_dim, ensure_same_len, Error, Result};
use crate::measures::PointCloud;
use crate::schedule::DirectionSchedule;

/// Which algorithm produced a map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Method {
    Hv,
    Lex,
    Oracle,
    /// Read from a file without a tag, assembled by hand, or a composition
    /// of maps with different provenance.
    External,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Hv => "HV",
            Method::Lex => "LEX",
            Method::Oracle => "ORACLE",
            Method::External => "EXTERNAL",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hv" => Ok(Method::Hv),
            "lex" => Ok(Method::Lex),
            "oracle" | "ot" => Ok(Method::Oracle),
            "external" => Ok(Method::External),
            _ => Err(Error::Parse(format!("unknown method {s:?}"))),
        }
    }
}

/// A bijection `sigma` from source indices to target indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransportMap {
    method: Method,
    schedule_fingerprint: Option<String>,
    sigma: Vec<usize>,
}

fn check_permutation(sigma: &[usize]) -> Result<()> {
    let n = sigma.len();
    if n == 0 {
        return Err(Error::Empty("map has no points"));
    }
    let mut seen = vec![false; n];
    for (i, &t) in sigma.iter().enumerate() {
        if t >= n {
            return Err(Error::NotPermutation(format!("source {i} maps to {t}, outside 0..{n}")));
        }
        if std::mem::replace(&mut seen[t], true) {
            return Err(Error::NotPermutation(format!("target {t} is hit twice")));
        }
    }
    Ok(())
}

impl TransportMap {
    pub fn new(sigma: Vec<usize>, method: Method, schedule_fingerprint: Option<String>) -> Result<Self> {
        check_permutation(&sigma)?;
        Ok(TransportMap {
            method,
            schedule_fingerprint,
            sigma,
        })
    }

    pub fn from_sigma(sigma: Vec<usize>) -> Result<Self> {
        TransportMap::new(sigma, Method::External, None)
    }

    pub fn identity(n: usize) -> Self {
        TransportMap {
            method: Method::External,
            schedule_fingerprint: None,
            sigma: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn schedule_fingerprint(&self) -> Option<&str> {
        self.schedule_fingerprint.as_deref()
    }

    #[inline]
    pub fn target_of(&self, source: usize) -> usize {
        self.sigma[source]
    }

    pub fn is_identity(&self) -> bool {
        self.sigma.iter().enumerate().all(|(i, &t)| i == t)
    }

    pub fn inverse(&self) -> TransportMap {
        let mut inv = vec![0; self.len()];
        for (i, &t) in self.sigma.iter().enumerate() {
            inv[t] = i;
        }
        TransportMap {
            method: self.method,
            schedule_fingerprint: self.schedule_fingerprint.clone(),
            sigma: inv,
        }
    }

    /// Ensures the map fits a `(source, target)` pair of clouds.
    pub fn check_against(&self, source: &PointCloud, target: &PointCloud) -> Result<()> {
        ensure_same_len(source.len(), target.len())?;
        ensure_same_len(self.len(), source.len())?;
        ensure_same_dim(source.dim(), target.dim())
    }

    /// Images `T(x_i)` in source order.
    pub fn pushforward(&self, target: &PointCloud) -> Result<PointCloud> {
        ensure_same_len(self.len(), target.len())?;
        target.reordered(&self.sigma)
    }
}

fn check_pair(source: &PointCloud, target: &PointCloud) -> Result<()> {
    ensure_same_len(source.len(), target.len())?;
    ensure_same_dim(source.dim(), target.dim())
}

/// Full-depth trees of both clouds under one schedule, and the HV map they induce.
#[derive(Clone, Debug)]
pub struct HvConstruction {
    pub source_tree: BspTree,
    pub target_tree: BspTree,
    pub map: TransportMap,
}

/// Cells of the source and target partitions with the same code at the same depth.
#[derive(Clone, Debug, PartialEq)]
pub struct DualPair {
    pub depth: usize,
    pub code: BinaryCode,
    pub source: Vec<usize>,
    pub target: Vec<usize>,
}

impl HvConstruction {
    pub fn build(source: &PointCloud, target: &PointCloud, schedule: &DirectionSchedule) -> Result<Self> {
        check_pair(source, target)?;
        let source_tree = build_tree(source, schedule, MaxDepth::Full)?;
        let target_tree = build_tree(target, schedule, MaxDepth::Full)?;
        let mut sigma = vec![0; source.len()];
        for (&s, &t) in source_tree.leaf_order().iter().zip(target_tree.leaf_order()) {
            sigma[s] = t;
        }
        let map = TransportMap {
            method: Method::Hv,
            schedule_fingerprint: Some(schedule.fingerprint()),
            sigma,
        };
        Ok(HvConstruction {
            source_tree,
            target_tree,
            map,
        })
    }

    pub fn dual_pairs(&self, depth: usize) -> Result<Vec<DualPair>> {
        dual_pairs(&self.source_tree, &self.target_tree, depth)
    }
}

/// Point `j` of the source leaf order goes to point `j` of the target leaf order.
pub fn hv_map(source: &PointCloud, target: &PointCloud, schedule: &DirectionSchedule) -> Result<TransportMap> {
    Ok(HvConstruction::build(source, target, schedule)?.map)
}

/// Pairs the depth-`k` cells of two trees built with one schedule on clouds of equal size.
pub fn dual_pairs(source_tree: &BspTree, target_tree: &BspTree, depth: usize) -> Result<Vec<DualPair>> {
    ensure_same_len(source_tree.len(), target_tree.len())?;
    let a = source_tree.cells_at_depth(depth);
    let b = target_tree.cells_at_depth(depth);
    if a.len() != b.len() {
        return Err(Error::InvalidParameter(format!(
            "trees have {} and {} cells at depth {depth}",
            a.len(),
            b.len()
        )));
    }
    a.into_iter()
        .zip(b)
        .map(|(ca, cb)| {
            if ca.code != cb.code || ca.range.len() != cb.range.len() {
                return Err(Error::InvalidParameter(format!(
                    "cells {} and {} at depth {depth} are not dual",
                    ca.code, cb.code
                )));
            }
            Ok(DualPair {
                depth,
                code: ca.code,
                source: source_tree.leaf_order()[ca.range].to_vec(),
                target: target_tree.leaf_order()[cb.range].to_vec(),
            })
        })
        .collect()
}

/// Lexicographic (axis 1, then 2, ...) rank matching with index tie-break.
pub fn lex_map(source: &PointCloud, target: &PointCloud) -> Result<TransportMap> {
    check_pair(source, target)?;
    let sorted = |c: &PointCloud| {
        let mut idx: Vec<usize> = (0..c.len()).collect();
        idx.sort_by(|&a, &b| {
            c.point(a)
                .iter()
                .zip(c.point(b))
                .map(|(x, y)| x.partial_cmp(y).unwrap_or(Ordering::Equal))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
                .then(a.cmp(&b))
        });
        idx
    };
    let (s, t) = (sorted(source), sorted(target));
    let mut sigma = vec![0; source.len()];
    for (&i, &j) in s.iter().zip(&t) {
        sigma[i] = j;
    }
    Ok(TransportMap {
        method: Method::Lex,
        schedule_fingerprint: None,
        sigma,
    })
}

/// Restricts `map` to the source cell of `pair`. The result maps local
/// positions in `pair.source` to local positions in `pair.target`.
pub fn restrict(map: &TransportMap, pair: &DualPair) -> Result<TransportMap> {
    ensure_same_len(pair.source.len(), pair.target.len())?;
    let position: HashMap<usize, usize> = pair.target.iter().enumerate().map(|(k, &t)| (t, k)).collect();
    let sigma = pair
        .source
        .iter()
        .map(|&s| {
            let t = *map.sigma.get(s).ok_or(Error::InvalidIndex {
                index: s,
                len: map.len(),
            })?;
            position.get(&t).copied().ok_or(Error::PairViolation {
                depth: pair.depth,
                source_index: s,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TransportMap {
        method: map.method,
        schedule_fingerprint: map.schedule_fingerprint.clone(),
        sigma,
    })
}

/// Glues per-cell maps back into a global map on `n` points.
pub fn synthesize(n: usize, pieces: &[(DualPair, TransportMap)]) -> Result<TransportMap> {
    let mut sigma = vec![usize::MAX; n];
    let mut tag = None;
    for (pair, local) in pieces {
        ensure_same_len(pair.source.len(), local.len())?;
        for (a, &s) in pair.source.iter().enumerate() {
            let slot = sigma.get_mut(s).ok_or(Error::InvalidIndex { index: s, len: n })?;
            *slot = pair.target[local.sigma[a]];
        }
        tag.get_or_insert((local.method, local.schedule_fingerprint.clone()));
    }
    let (method, fp) = tag.unwrap_or((Method::External, None));
    if sigma.contains(&usize::MAX) {
        return Err(Error::NotPermutation("cells do not cover every source point".into()));
    }
    TransportMap::new(sigma, method, fp)
}

/// `maps[k-1] ∘ ... ∘ maps[0]`: apply the first map first.
pub fn compose(maps: &[TransportMap]) -> Result<TransportMap> {
    let first = maps.first().ok_or(Error::Empty("nothing to compose"))?;
    let mut sigma = first.sigma.clone();
    for m in &maps[1..] {
        ensure_same_len(sigma.len(), m.len())?;
        for t in sigma.iter_mut() {
            *t = m.sigma[*t];
        }
    }
    let same = maps
        .iter()
        .all(|m| m.method == first.method && m.schedule_fingerprint == first.schedule_fingerprint);
    let (method, fp) = if same {
        (first.method, first.schedule_fingerprint.clone())
    } else {
        (Method::External, None)
    };
    Ok(TransportMap {
        method,
        schedule_fingerprint: fp,
        sigma,
    })
}
