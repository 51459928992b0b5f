//! Exact-diagonalization toolkit for spin chains with waveguide-mediated
//! interactions: coupling constants from a dimerized photonic bath, sector
//! Hamiltonians of the generalized XXZ model, phase diagrams, observables,
//! closed-form reference models, many-body Berry phases and adiabatic
//! state preparation with losses.

// Parameter checks written as `!(x >= 0.0)` reject NaN on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adiabatic;
pub mod basis;
pub mod berry;
pub mod cli;
pub mod couplings;
pub mod eigen;
pub mod error;
pub mod exact;
pub mod hamiltonian;
pub mod observables;
pub mod spectra;

pub use error::{Error, Result};
