//! Measurement-free topological protection (MFTP) of the surface/toric code.
//!
//! Errors on the code are tracked as a Pauli frame. Each cycle the syndrome is
//! copied onto a classical spin layer whose Hamiltonian is a random-plaquette
//! gauge model, the layer is cooled, and the equilibrium spin configuration is
//! fed back as a correction. This crate holds everything that is pure
//! computation:
//!
//! * [`lattice`]: L x L toric or planar geometry and incidence tables.
//! * [`frame`]: packed X/Z error frames, syndromes, logical classes.
//! * [`decoder`]: exact branch-and-bound minimum-weight matching used for readout.
//! * [`cooler`]: Metropolis annealing of the RPGM Hamiltonian.
//! * [`digital`]: Trotterised plaquette/field pumping channels and the
//!   stabilizer-pumping operator identities.
//! * [`analytics`]: chain-counting bounds, analytic threshold, decay-rate fit and
//!   the resource-budget estimator.
//! * [`harness`]: one MFTP cycle and one seeded trial.
//!
//! The crate is `no_std` (it needs `alloc`); enable the `std` feature to get
//! `std::error::Error`-compatible builds on older toolchains.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` is used on purpose: it rejects NaN along with the bad range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analytics;
pub mod bits;
pub mod cooler;
pub mod decoder;
pub mod digital;
pub mod error;
pub mod frame;
pub mod harness;
pub mod lattice;
mod math;

pub use error::{Error, Result};
pub use lattice::{Boundary, CheckKind, LatticeGeometry};
