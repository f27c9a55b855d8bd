//! Capacity computations and bounds for semiconstrained systems.
//!
//! A semiconstrained system (SCS) is a set `Γ` of probability distributions
//! over `S`-shaped patterns. A `d`-dimensional word is admissible when the
//! frequencies of the patterns it contains (windows wrap cyclically) fall
//! inside `Γ`. This crate provides:
//!
//! * [`lattice`]: alphabets, shapes, words, pattern indexing, cyclic
//!   empirical distributions, marginals, averaged marginals of product
//!   measures, total variation and entropy;
//! * [`scs`]: constraint polytopes, `(0,k,p)`-RLL and fully constrained
//!   systems, axial products, admissibility tests;
//! * [`count`]: exact admissible-block counting (cyclic and non-cyclic);
//! * [`capacity`]: the one-dimensional capacity optimization, the
//!   transfer-matrix oracle and internal-capacity sequences;
//! * [`indentropy`]: independence-entropy lower bounds;
//! * [`validation`]: Monte Carlo concentration checks and inequality-chain
//!   reports.
//!
//! The crate is `no_std` and only needs `alloc`. Parallel drivers, file
//! formats and the command line live in the `semicap` crate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

pub mod capacity;
pub mod count;
mod error;
pub mod fw;
pub mod indentropy;
pub mod lattice;
pub mod lp;
pub mod scs;
pub mod validation;

pub use error::{Error, Result};

/// Tolerance used when checking that a distribution sums to one.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Entries above `-NEG_TOLERANCE` are clamped to zero; lower ones are rejected.
pub const NEG_TOLERANCE: f64 = 1e-12;

/// Feasibility tolerance shared by the LP solver and membership tests.
pub const FEAS_TOLERANCE: f64 = 1e-9;

/// Binary entropy `H₂(x)` in bits.
pub fn binary_entropy(x: f64) -> f64 {
    -xlog2x(x) - xlog2x(1.0 - x)
}

/// `x·log₂ x` with the convention `0·log 0 = 0`.
#[inline]
pub(crate) fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * libm::log2(x)
    }
}
