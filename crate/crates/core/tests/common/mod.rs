//! Helpers shared by the integration tests: seeded instance generators and a
//! factorial brute-force assignment solver used as an oracle.

#![allow(dead_code)]

use hspmap_core::{
    gen_gaussian, gen_grid, gen_uniform, CostSpec, Experiment, PointCloud, RigidTransform, TransportMap,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A uniformly random permutation of `0..n`.
pub fn random_permutation(n: usize, rng: &mut ChaCha8Rng) -> TransportMap {
    let mut sigma: Vec<usize> = (0..n).collect();
    sigma.shuffle(rng);
    TransportMap::from_sigma(sigma).unwrap()
}

/// Clouds whose coordinates are small integers, so cost ties are common.
pub fn integer_cloud(n: usize, d: usize, range: i32, rng: &mut ChaCha8Rng) -> PointCloud {
    let coords = (0..n * d)
        .map(|_| f64::from(rng.random_range(-range..=range)))
        .collect();
    PointCloud::from_flat(d, coords).unwrap()
}

/// Source/target pairs drawn from a rotating mix of generators. Every size in
/// the mix must be a perfect square.
pub fn mixed_instance(n: usize, k: usize) -> (String, PointCloud, PointCloud) {
    let seed = 1000 + k as u64;
    let kinds = 6;
    match k % kinds {
        0 => named(Experiment::GaussRot, n, seed),
        1 => named(Experiment::GridGauss, n, seed),
        2 => named(Experiment::GaussAniso, n, seed),
        3 => named(Experiment::EllipseRot, n, seed),
        4 => named(Experiment::GridRot, n, seed),
        _ => (
            "uniform".to_string(),
            gen_uniform(n, seed, 2).unwrap(),
            gen_uniform(n, seed + 7777, 2).unwrap(),
        ),
    }
}

fn named(e: Experiment, n: usize, seed: u64) -> (String, PointCloud, PointCloud) {
    let (s, t) = e.instance(n, seed).unwrap();
    (e.name().to_string(), s, t)
}

/// Clouds in general position: independent Gaussian samples, optionally
/// stretched and turned so that the pair is not trivially aligned.
pub fn general_position_pair(n: usize, seed: u64) -> (PointCloud, PointCloud) {
    let s = gen_gaussian(n, seed, 2).unwrap();
    let raw = gen_gaussian(n, seed.wrapping_mul(0x9E37_79B9).wrapping_add(1), 2).unwrap();
    let angle = 0.3 + 0.17 * (seed % 11) as f64;
    let turn = RigidTransform::new(angle, raw.centroid(), vec![1.5, 0.7]).unwrap();
    let t = turn.apply(&raw).unwrap().translated(&[2.0, -1.0]).unwrap();
    (s, t)
}

/// Grid clouds with a power-of-two side have exactly representable
/// differences, so antiparallel displacements are detected without rounding.
pub fn lattice(side: usize) -> PointCloud {
    gen_grid(side).unwrap()
}

/// Largest possible point cost between the clouds, used to scale tolerances.
pub fn cost_scale(source: &PointCloud, target: &PointCloud, spec: CostSpec) -> f64 {
    let mut lo = vec![f64::INFINITY; source.dim()];
    let mut hi = vec![f64::NEG_INFINITY; source.dim()];
    for p in source.iter().chain(target.iter()) {
        for (k, &x) in p.iter().enumerate() {
            lo[k] = lo[k].min(x);
            hi[k] = hi[k].max(x);
        }
    }
    hspmap_core::point_cost(&lo, &hi, spec).unwrap().max(1.0)
}

/// Exhaustive minimum of the mean cost over all `n!` bijections, with one
/// minimising permutation. Uses Heap's algorithm.
pub fn brute_force(source: &PointCloud, target: &PointCloud, spec: CostSpec) -> (f64, Vec<usize>) {
    let n = source.len();
    let cost: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| hspmap_core::point_cost(source.point(i), target.point(j), spec).unwrap())
                .collect()
        })
        .collect();
    let eval = |p: &[usize]| p.iter().enumerate().map(|(i, &j)| cost[i][j]).sum::<f64>();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = (eval(&perm), perm.clone());
    let mut c = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            let v = eval(&perm);
            if v < best.0 {
                best = (v, perm.clone());
            }
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    (best.0 / n as f64, best.1)
}

/// Rows sorted lexicographically, for multiset comparison.
pub fn sorted_rows(cloud: &PointCloud) -> Vec<Vec<f64>> {
    let mut rows = cloud.to_rows();
    rows.sort_by(|a, b| a.partial_cmp(b).unwrap());
    rows
}
