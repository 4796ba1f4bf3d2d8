//! Cell partitions of `Π(B_i + B_i − B_i)`, lucky-pair enumeration, and the
//! hyperplane-through-grid count with its diagonal cover.

mod grid;
mod lucky;

pub use grid::{
    diagonal_cover, diagonal_cover_grid, hyperplane_bound, hyperplane_cell_count, perturbed_level,
    Diagonal,
};
pub use lucky::{
    build_partition, cells_per_axis, lucky_pairs_for_sum, pair_bound, small_gap_counterexamples,
    AxisPartition, Census, GridPartition, LuckyPair, LuckyPairs, MonotoneAxis, TripleSumset,
};

/// Partition constant used throughout unless overridden.
pub const DEFAULT_PARTITION_CONSTANT: u64 = 4;
