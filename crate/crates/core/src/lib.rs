//! Lower bounds for the topological entropy of the hard-core lattice gas.
//!
//! Every bound here comes from a sequential fill-in measure: the sublattices of a
//! k-partite lattice are populated one after another with Bernoulli (or block
//! Bernoulli) entries, and each later stage only touches sites that no earlier
//! neighbor has forced to 0. The entropy of such a measure is a lower bound for
//! the topological entropy, and optimizing its parameters tightens the bound.
//!
//! The crate is `no_std` and only needs `alloc`. IO, report formats and the
//! command line live in the `hcbound` crate.
//!
//! Modules:
//! - [`lattice`]: the five lattices, their sublattice splits and finite tori.
//! - [`bounds`]: closed-form single-site and three-hex bounds.
//! - [`blocks`]: n×n blocks on the even square sublattice and their symmetry /
//!   weak-site reduction.
//! - [`block_bound`]: the n×n block bound, density profiles and monotonicity checks.
//! - [`optimize`]: maximization over products of boxes and weighted simplices.
//! - [`optima`]: each closed-form scheme posed as an optimization problem.
//! - [`oracles`]: transfer matrices, the fill-in sampler and exact enumerations.

#![no_std]
// `!(x >= 0.0)` style guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod block_bound;
pub mod blocks;
pub mod bounds;
mod error;
pub mod lattice;
pub mod math;
pub mod optima;
pub mod optimize;
pub mod oracles;

pub use error::Error;

pub type Result<T> = core::result::Result<T, Error>;
