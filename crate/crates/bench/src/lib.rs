//! Shared inputs for the benchmarks.

use hspmap_core::{gen_gaussian, PointCloud};

/// Seed of the second sample, so source and target are independent.
const TARGET_SEED_OFFSET: u64 = 1;

/// Two independent standard Gaussian samples of `n` points in the plane.
pub fn gaussian_pair(n: usize, seed: u64) -> (PointCloud, PointCloud) {
    let source = gen_gaussian(n, seed, 2).expect("n >= 1");
    let target = gen_gaussian(n, seed + TARGET_SEED_OFFSET, 2).expect("n >= 1");
    (source, target)
}
