//! Exact-arithmetic dynamics of piecewise-linear self-maps of finite metric
//! trees: arcs, hulls and retractions, map algebra, periodic structure, the
//! pointwise-recurrence decision procedure, and adding machines.
//!
//! Everything is generic over a [`Scalar`]; the aliases below fix the exact
//! rational instantiation used by the analyses and the command-line tool.

pub mod arc;
pub mod dynamics;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod odometer;
pub mod pl_map;
pub mod scalar;
pub mod subtree;
pub mod tree;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Exact rationals with arbitrary-precision numerator and denominator.
pub type Q = num_rational::BigRational;
pub type Tree = tree::MetricTree<Q>;
pub type Point = tree::TreePoint<Q>;
pub type Set = subtree::Subtree<Q>;
pub type Map = pl_map::PlMap<Q>;
