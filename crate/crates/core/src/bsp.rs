//! Equal-count median bisection of a point cloud.
//!
//! Every node holding `m` points sends the `⌈m/2⌉` smallest (by projection on
//! the level's direction) to the left child and the rest to the right. Cells
//! at the same level are split together, so the shape of the tree depends
//! only on `n` and two clouds of equal size always produce matching cells.
//!
//! Ties on the projection are broken by the full coordinate tuple
//! (lexicographic), then by the original index.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Range;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::measures::PointCloud;
use crate::schedule::{Direction, DirectionSchedule};
use crate::select;

/// Sequence of left (0) / right (1) decisions from the root to a point's leaf.
///
/// Bits are packed most-significant first so the derived ordering is
/// lexicographic, with a proper prefix sorting before its extensions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BinaryCode {
    bits: u64,
    len: u8,
}

impl BinaryCode {
    pub const MAX_LEN: usize = 64;

    pub fn empty() -> Self {
        BinaryCode::default()
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        assert!(bits.len() <= Self::MAX_LEN, "binary code longer than 64 bits");
        bits.iter().fold(BinaryCode::empty(), |c, &b| c.pushed(b))
    }

    /// Parses a string of `0` and `1` characters.
    pub fn parse(s: &str) -> Result<Self> {
        if s.len() > Self::MAX_LEN {
            return Err(Error::Parse(format!("code {s:?} longer than 64 bits")));
        }
        s.chars().try_fold(BinaryCode::empty(), |c, ch| match ch {
            '0' => Ok(c.pushed(false)),
            '1' => Ok(c.pushed(true)),
            _ => Err(Error::Parse(format!("bad code digit {ch:?}"))),
        })
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bit(&self, j: usize) -> bool {
        assert!(j < self.len(), "bit {j} out of range for code of length {}", self.len);
        self.bits >> (63 - j) & 1 == 1
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len()).map(|j| self.bit(j))
    }

    pub fn pushed(self, bit: bool) -> Self {
        assert!(self.len() < Self::MAX_LEN, "binary code longer than 64 bits");
        let bits = if bit {
            self.bits | 1 << (63 - self.len)
        } else {
            self.bits
        };
        BinaryCode {
            bits,
            len: self.len + 1,
        }
    }

    pub fn prefix(&self, k: usize) -> Self {
        let k = k.min(self.len());
        let mask = if k == 0 { 0 } else { u64::MAX << (64 - k) };
        BinaryCode {
            bits: self.bits & mask,
            len: k as u8,
        }
    }

    pub fn is_prefix_of(&self, other: &BinaryCode) -> bool {
        self.len <= other.len && other.prefix(self.len()) == *self
    }

    pub fn common_prefix_len(&self, other: &BinaryCode) -> usize {
        let shorter = self.len.min(other.len) as usize;
        ((self.bits ^ other.bits).leading_zeros() as usize).min(shorter)
    }

    pub fn ternary(&self) -> TernaryValue {
        ternary_value(self)
    }
}

impl fmt::Display for BinaryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Exact rational `numer / 3^digits`.
#[derive(Clone, Copy, Debug)]
pub struct TernaryValue {
    numer: u128,
    digits: u32,
}

fn pow3(k: u32) -> u128 {
    3u128.pow(k)
}

impl TernaryValue {
    pub fn zero() -> Self {
        TernaryValue { numer: 0, digits: 0 }
    }

    pub fn numer(&self) -> u128 {
        self.numer
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn to_f64(&self) -> f64 {
        self.numer as f64 / pow3(self.digits) as f64
    }

    fn scaled_to(&self, digits: u32) -> u128 {
        self.numer * pow3(digits - self.digits)
    }

    /// `self <= 1/2`, checked exactly.
    pub fn at_most_half(&self) -> bool {
        2 * self.numer <= pow3(self.digits)
    }

    pub fn abs_diff(&self, other: &TernaryValue) -> TernaryValue {
        let d = self.digits.max(other.digits);
        TernaryValue {
            numer: self.scaled_to(d).abs_diff(other.scaled_to(d)),
            digits: d,
        }
    }
}

impl PartialEq for TernaryValue {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for TernaryValue {}

impl PartialOrd for TernaryValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TernaryValue {
    fn cmp(&self, other: &Self) -> Ordering {
        let d = self.digits.max(other.digits);
        self.scaled_to(d).cmp(&other.scaled_to(d))
    }
}

/// `Σ_j bit_j · 3^-(j+1)`, exactly.
pub fn ternary_value(code: &BinaryCode) -> TernaryValue {
    let numer = code.bits().fold(0u128, |acc, b| acc * 3 + u128::from(b));
    TernaryValue {
        numer,
        digits: code.len() as u32,
    }
}

/// Distance between the ternary values of two codes, with the lower bound
/// `1 / (2 · 3^(l+1))` that holds once the codes are separated at position
/// `l + 1` (`l` = common prefix length).
#[derive(Clone, Copy, Debug)]
pub struct SeparationGap {
    pub gap: TernaryValue,
    pub common_prefix: usize,
    /// False when one code is a prefix of the other, i.e. the points were
    /// never split apart; the bound is then vacuous.
    pub separated: bool,
}

impl SeparationGap {
    /// Lower bound `1 / (2 · 3^(l+1))` as a float.
    pub fn bound(&self) -> f64 {
        0.5 / pow3(self.common_prefix as u32 + 1) as f64
    }

    /// Exact check of `gap >= 1 / (2 · 3^(l+1))` for separated codes.
    pub fn satisfies_bound(&self) -> bool {
        if !self.separated {
            return true;
        }
        let l1 = self.common_prefix as u32 + 1;
        // gap = numer / 3^D with D >= l + 1, so the bound reads 2·numer >= 3^(D-l-1).
        2 * self.gap.numer >= pow3(self.gap.digits - l1)
    }
}

pub fn separation_gap(a: &BinaryCode, b: &BinaryCode) -> SeparationGap {
    let l = a.common_prefix_len(b);
    SeparationGap {
        gap: ternary_value(a).abs_diff(&ternary_value(b)),
        common_prefix: l,
        separated: l < a.len().min(b.len()),
    }
}

/// Result of one median split.
#[derive(Clone, Debug, PartialEq)]
pub struct MedianSplit {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    /// `None` for a single-point input, which is a leaf and must not be split.
    pub threshold: Option<f64>,
}

fn compare_coords(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.partial_cmp(y).unwrap_or(Ordering::Equal))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// The tie-broken comparison used by every split, exposed for tests and
/// external checks: projection, then coordinates, then index.
pub fn split_order(cloud: &PointCloud, direction: Direction<'_>, a: usize, b: usize) -> Ordering {
    let (pa, pb) = (cloud.point(a), cloud.point(b));
    direction
        .project(pa)
        .partial_cmp(&direction.project(pb))
        .unwrap_or(Ordering::Equal)
        .then_with(|| compare_coords(pa, pb))
        .then(a.cmp(&b))
}

/// Ranks `indices` along `direction` under [`split_order`]. Returns the rank
/// of each entry of `indices` and the projections listed by rank.
///
/// Ranking once per direction turns every later median split into a
/// selection on integers, with the tie-break already folded in.
fn rank_along(cloud: &PointCloud, direction: Direction<'_>, indices: &[usize]) -> (Vec<u32>, Vec<f64>) {
    let mut keyed: Vec<(f64, u32)> = indices
        .iter()
        .enumerate()
        .map(|(pos, &i)| (direction.project(cloud.point(i)), pos as u32))
        .collect();
    keyed.sort_unstable_by(|a, b| {
        a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then_with(|| {
            let (i, j) = (indices[a.1 as usize], indices[b.1 as usize]);
            compare_coords(cloud.point(i), cloud.point(j)).then(i.cmp(&j))
        })
    });
    let mut ranks = vec![0u32; indices.len()];
    let mut sorted = Vec::with_capacity(indices.len());
    for (r, &(proj, pos)) in keyed.iter().enumerate() {
        ranks[pos as usize] = r as u32;
        sorted.push(proj);
    }
    (ranks, sorted)
}

/// Reusable buffers for [`split_in_place`].
#[derive(Default)]
struct Scratch {
    keys: Vec<u32>,
    indices: Vec<usize>,
    ranks: Vec<u32>,
}

/// Partitions one cell in place: the first `⌈m/2⌉` points become the left
/// half, in their previous relative order, and so do the right ones.
///
/// `ranks` holds `stride` ranks per point of `indices`, in the same order;
/// column `column` is the one for this split and `sorted` maps its ranks back
/// to projections. Returns the threshold for `m >= 2`.
fn split_in_place(
    indices: &mut [usize],
    ranks: &mut [u32],
    stride: usize,
    column: usize,
    sorted: &[f64],
    scratch: &mut Scratch,
) -> Option<f64> {
    let m = indices.len();
    if m < 2 {
        return None;
    }
    if m == 2 {
        // Half of all splits; no selection needed.
        let (a, b) = (ranks[column], ranks[stride + column]);
        if a > b {
            indices.swap(0, 1);
            let (x, y) = ranks.split_at_mut(stride);
            x.swap_with_slice(y);
        }
        return Some(threshold(sorted[a.min(b) as usize], sorted[a.max(b) as usize]));
    }
    let left_len = m.div_ceil(2);
    let keys = &mut scratch.keys;
    keys.clear();
    keys.extend(ranks.iter().skip(column).step_by(stride));
    if cfg!(feature = "median-of-medians") {
        select::median_of_medians_by(keys, left_len - 1, u32::cmp);
    } else {
        select::quickselect_by(keys, left_len - 1, u32::cmp);
    }
    let pivot = keys[left_len - 1];
    // One stable sequential pass against the selected rank.
    scratch.indices.resize(m, 0);
    scratch.ranks.resize(m * stride, 0);
    let (mut l, mut r) = (0, left_len);
    let mut min_right = u32::MAX;
    for (pos, row) in ranks.chunks_exact(stride).enumerate() {
        let rank = row[column];
        let slot = if rank <= pivot {
            l += 1;
            l - 1
        } else {
            min_right = min_right.min(rank);
            r += 1;
            r - 1
        };
        scratch.indices[slot] = indices[pos];
        scratch.ranks[slot * stride..(slot + 1) * stride].copy_from_slice(row);
    }
    debug_assert_eq!((l, r), (left_len, m));
    indices.copy_from_slice(&scratch.indices);
    ranks.copy_from_slice(&scratch.ranks);
    Some(threshold(sorted[pivot as usize], sorted[min_right as usize]))
}

/// Midpoint of the gap between the halves.
fn threshold(max_left: f64, min_right: f64) -> f64 {
    let mid = max_left + (min_right - max_left) / 2.0;
    // Adjacent floats can round the midpoint onto the right value.
    if mid < min_right {
        mid
    } else {
        max_left
    }
}

/// Splits `indices` into the `⌈m/2⌉` smallest and the `⌊m/2⌋` largest points
/// along `direction`; the threshold is the midpoint between the largest left
/// and smallest right projection.
pub fn split_median(indices: &[usize], cloud: &PointCloud, direction: Direction<'_>) -> Result<MedianSplit> {
    if indices.is_empty() {
        return Err(Error::Empty("cannot split an empty cell"));
    }
    if let Some(&index) = indices.iter().find(|&&i| i >= cloud.len()) {
        return Err(Error::InvalidIndex {
            index,
            len: cloud.len(),
        });
    }
    if let Direction::Vector(v) = direction {
        crate::error::ensure_same_dim(cloud.dim(), v.len())?;
    }
    let mut work = indices.to_vec();
    let (mut ranks, sorted) = rank_along(cloud, direction, indices);
    let threshold = split_in_place(&mut work, &mut ranks, 1, 0, &sorted, &mut Scratch::default());
    let left_len = work.len().div_ceil(2);
    let right = work.split_off(left_len);
    Ok(MedianSplit {
        left: work,
        right,
        threshold,
    })
}

/// How deep to split.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MaxDepth {
    /// Until every leaf is a single point.
    #[default]
    Full,
    Levels(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub enum NodeKind {
    Split { threshold: f64, left: usize, right: usize },
    Leaf,
}

/// A node of the tree. `range` indexes into [`BspTree::leaf_order`]; a split
/// node at `level` divides along the schedule's direction for that level.
#[derive(Clone, Debug, PartialEq)]
pub struct BspNode {
    pub level: usize,
    pub range: Range<usize>,
    pub kind: NodeKind,
}

impl BspNode {
    pub fn len(&self) -> usize {
        self.range.len()
    }

    pub fn is_empty(&self) -> bool {
        self.range.is_empty()
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, NodeKind::Leaf)
    }
}

/// A cell of the partition at some depth: its code and the slice of the
/// leaf order it covers.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub code: BinaryCode,
    pub range: Range<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BspTree {
    schedule: DirectionSchedule,
    dim: usize,
    nodes: Vec<BspNode>,
    order: Vec<usize>,
    codes: Vec<BinaryCode>,
    depth: usize,
}

struct Builder {
    max_levels: usize,
    nodes: Vec<BspNode>,
    order: Vec<usize>,
    codes: Vec<BinaryCode>,
    /// One column per direction the tree visits before the schedule repeats;
    /// row `k` holds the ranks of point `order[k]`.
    ranks: Vec<u32>,
    stride: usize,
    /// Projections by rank, per column.
    sorted: Vec<Vec<f64>>,
    scratch: Scratch,
    depth: usize,
}

impl Builder {
    fn build(&mut self, range: Range<usize>, level: usize, code: BinaryCode) -> usize {
        let id = self.nodes.len();
        self.nodes.push(BspNode {
            level,
            range: range.clone(),
            kind: NodeKind::Leaf,
        });
        let threshold = if range.len() > 1 && level < self.max_levels {
            let column = level % self.stride;
            split_in_place(
                &mut self.order[range.clone()],
                &mut self.ranks[range.start * self.stride..range.end * self.stride],
                self.stride,
                column,
                &self.sorted[column],
                &mut self.scratch,
            )
        } else {
            None
        };
        match threshold {
            None => {
                self.depth = self.depth.max(level);
                for &i in &self.order[range] {
                    self.codes[i] = code;
                }
            }
            Some(threshold) => {
                let mid = range.start + range.len().div_ceil(2);
                let left = self.build(range.start..mid, level + 1, code.pushed(false));
                let right = self.build(mid..range.end, level + 1, code.pushed(true));
                self.nodes[id].kind = NodeKind::Split { threshold, left, right };
            }
        }
        id
    }
}

/// Builds the median-split tree of `cloud`.
///
/// Points are ranked once along each direction the schedule visits (at most
/// one per level), so each split is an integer selection followed by a stable
/// partition; the whole build costs `O(n log n)`.
pub fn build_tree(cloud: &PointCloud, schedule: &DirectionSchedule, max_depth: MaxDepth) -> Result<BspTree> {
    schedule.validate(cloud.dim())?;
    let n = cloud.len();
    if u32::try_from(n).is_err() {
        return Err(Error::InvalidParameter(format!(
            "{n} points exceed the supported cloud size"
        )));
    }
    let max_levels = match max_depth {
        MaxDepth::Full => BinaryCode::MAX_LEN,
        MaxDepth::Levels(k) => k.min(BinaryCode::MAX_LEN),
    };
    // Levels that can split: the full tree has depth ⌈log₂ n⌉.
    let full_depth = (usize::BITS - (n - 1).leading_zeros()) as usize;
    let stride = schedule.period(cloud.dim()).min(full_depth.min(max_levels)).max(1);
    let all: Vec<usize> = (0..n).collect();
    let mut ranks = vec![0u32; n * stride];
    let mut sorted = Vec::with_capacity(stride);
    for column in 0..stride {
        let (r, s) = rank_along(cloud, schedule.direction(column, cloud.dim()), &all);
        for (row, rank) in ranks.chunks_exact_mut(stride).zip(r) {
            row[column] = rank;
        }
        sorted.push(s);
    }
    let mut b = Builder {
        max_levels,
        nodes: Vec::with_capacity(2 * n),
        order: all,
        codes: vec![BinaryCode::empty(); n],
        ranks,
        stride,
        sorted,
        scratch: Scratch::default(),
        depth: 0,
    };
    b.build(0..n, 0, BinaryCode::empty());
    Ok(BspTree {
        schedule: schedule.clone(),
        dim: cloud.dim(),
        nodes: b.nodes,
        order: b.order,
        codes: b.codes,
        depth: b.depth,
    })
}

/// Code of `point_index` in `tree`.
pub fn encode(tree: &BspTree, point_index: usize) -> Result<BinaryCode> {
    tree.codes.get(point_index).copied().ok_or(Error::InvalidIndex {
        index: point_index,
        len: tree.len(),
    })
}

impl BspTree {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Deepest leaf level (root = 0).
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn schedule(&self) -> &DirectionSchedule {
        &self.schedule
    }

    pub fn root(&self) -> &BspNode {
        &self.nodes[0]
    }

    pub fn node(&self, id: usize) -> &BspNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[BspNode] {
        &self.nodes
    }

    /// Point indices in code order; leaves are contiguous runs of it.
    pub fn leaf_order(&self) -> &[usize] {
        &self.order
    }

    /// Leaf payloads in code order.
    pub fn leaves(&self) -> impl Iterator<Item = &[usize]> + '_ {
        self.nodes
            .iter()
            .filter(|n| n.is_leaf())
            .map(|n| &self.order[n.range.clone()])
    }

    /// Codes indexed by point.
    pub fn codes(&self) -> &[BinaryCode] {
        &self.codes
    }

    pub fn direction_at(&self, level: usize) -> Direction<'_> {
        self.schedule.direction(level, self.dim)
    }

    /// Points of a node, in leaf order.
    pub fn payload(&self, node: &BspNode) -> &[usize] {
        &self.order[node.range.clone()]
    }

    /// Partition cells after `k` rounds of splitting, in code order. Leaves
    /// shallower than `k` persist as cells.
    pub fn cells_at_depth(&self, k: usize) -> Vec<Cell> {
        let mut out = Vec::new();
        self.collect_cells(0, k, BinaryCode::empty(), &mut out);
        out
    }

    fn collect_cells(&self, id: usize, k: usize, code: BinaryCode, out: &mut Vec<Cell>) {
        let node = &self.nodes[id];
        match node.kind {
            NodeKind::Split { left, right, .. } if node.level < k => {
                self.collect_cells(left, k, code.pushed(false), out);
                self.collect_cells(right, k, code.pushed(true), out);
            }
            _ => out.push(Cell {
                code,
                range: node.range.clone(),
            }),
        }
    }

    /// Nested `{dir, h, left, right}` objects; leaves are arrays of point indices.
    pub fn to_json(&self) -> Value {
        self.node_json(0)
    }

    fn node_json(&self, id: usize) -> Value {
        let node = &self.nodes[id];
        match node.kind {
            NodeKind::Leaf => json!(self.payload(node)),
            NodeKind::Split { threshold, left, right } => json!({
                "dir": self.direction_at(node.level).to_vec(self.dim),
                "h": threshold,
                "left": self.node_json(left),
                "right": self.node_json(right),
            }),
        }
    }
}
