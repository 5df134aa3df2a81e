//! Kinetic theory of active particles.
//!
//! The crate provides the shared activity-grid representation and moments,
//! interaction-domain geometry, the spatially homogeneous and discrete-state
//! gain/loss structures, a discrete-velocity crowd solver, and a Monte Carlo
//! engine for Boltzmann-type pair and environment interaction rules.
//!
//! Subsystem indices are zero-based throughout.

// Negated float comparisons below reject NaN on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index loops in the collision sums mirror the written formulas.
#![allow(clippy::needless_range_loop)]

pub mod discrete;
pub mod domains;
mod error;
pub mod fpb;
pub mod grid;
pub mod homogeneous;
pub mod spatial;

pub use error::{Error, Result};
pub use grid::{
    activation, density, make_uniform_grid, ActivityGrid, FunctionalSubsystem, HomogeneousState,
    MomentSet,
};
