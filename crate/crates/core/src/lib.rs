//! Numerics for an ideal Fermi gas in a chaotic two-dimensional cavity.
//!
//! The crate computes the thermal parameters that a many-body eigenstate
//! picks out, relaxed correlation functions, entanglement entropies of
//! lattice subsystems and their Toeplitz asymptotics, typical random
//! partitions, a Pauli-blocked kinetic equation and quantum recurrence-time
//! bounds.  Units carry explicit `hbar` and `mass`; both default to 1.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Reference constants keep every digit of their source.
#![allow(clippy::excessive_precision)]
// Index loops mirror the matrix formulas they implement.
#![allow(clippy::needless_range_loop)]

pub mod correlations;
pub mod entanglement;
pub mod error;
pub mod kinetics;
pub mod mathcore;
pub mod partitions;
pub mod recurrence;
pub mod thermo;

pub use error::{Error, Result};
