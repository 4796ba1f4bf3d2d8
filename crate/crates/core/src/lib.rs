//! Exact computational toolkit for additive energies and sumsets of convex,
//! higher-convex and near-convex sets.
//!
//! Containers and counting kernels are generic over [`Scalar`]; the concrete
//! element type used by the generators, file format and CLI is [`Rational`].

pub mod bounds;
pub mod cli;
pub mod convexity;
pub mod counts;
pub mod energy;
pub mod error;
pub mod families;
pub mod function;
pub mod garaev;
pub mod rng;
pub mod scalar;
pub mod set;
pub mod setfile;

pub use counts::SparseCounts;
pub use error::{Error, Result};
pub use scalar::Scalar;
pub use set::OrderedSet;

/// Arbitrary-precision rational in lowest terms with positive denominator.
pub type Rational = num_rational::BigRational;
/// The canonical set type: strictly increasing rationals.
pub type Set = OrderedSet<Rational>;
/// Representation counts keyed by rational sums.
pub type Counts = SparseCounts<Rational>;
/// Machine-integer sets for tests and tight loops.
pub type IntSet = OrderedSet<i64>;
pub type IntCounts = SparseCounts<i64>;
