//! Collision-free transport maps between finite point clouds.
//!
//! Both clouds are bisected recursively into equal-count halves along a
//! schedule of directions (horizontal/vertical by default). Matching the
//! `j`-th leaf of the source tree with the `j`-th leaf of the target tree gives
//! a bijection whose straight-line displacement never makes two particles
//! meet. Construction costs `O(n log n)`: each level only needs a median
//! search.
//!
//! ```
//! use hspmap_core::{gen_grid, hv_map, check_no_collision, DirectionSchedule, RigidTransform};
//!
//! let grid = gen_grid(8).unwrap();
//! let turn = RigidTransform::rotation(std::f64::consts::FRAC_PI_4, grid.centroid()).unwrap();
//! let rotated = turn.apply(&grid).unwrap();
//! let map = hv_map(&grid, &rotated, &DirectionSchedule::hv()).unwrap();
//! assert!(check_no_collision(&grid, &map, &rotated, 1e-9).unwrap().passed());
//! ```

pub mod bsp;
pub mod cost;
pub mod error;
pub mod experiments;
pub mod interp;
pub mod io;
pub mod measures;
pub mod schedule;
pub mod select;
pub mod transport;
pub mod verify;

pub use bsp::{
    build_tree, encode, separation_gap, split_median, ternary_value, BinaryCode, BspNode, BspTree, MaxDepth,
    MedianSplit, NodeKind, SeparationGap, TernaryValue,
};
pub use cost::{build_map, cost_ratio, map_cost, optimal_assignment, point_cost, CostSpec, Norm, DEFAULT_ORACLE_CAP};
pub use error::{Error, Result};
pub use experiments::{run_scaling, run_table, Experiment, ScalingReport, TableConfig, TableRow};
pub use interp::{
    barycenter, interpolate, interpolation_frames, no_collision_along_path, BarycenterSpec, InterpolationFrame,
    PathCheck,
};
pub use measures::{gen_ellipse, gen_gaussian, gen_grid, gen_uniform, Point, PointCloud, RigidTransform};
pub use schedule::{Direction, DirectionSchedule};
pub use transport::{
    compose, dual_pairs, hv_map, lex_map, restrict, synthesize, DualPair, HvConstruction, Method, TransportMap,
};
pub use verify::{
    check_half_space, check_no_collision, half_space_witness, CollisionReport, CollisionWitness, HalfSpaceOptions,
    HalfSpaceReport, HalfSpaceWitness, DEFAULT_ATOL,
};
