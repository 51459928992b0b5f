//! Closed-form and quasi-closed-form reference models.

pub mod dicke;
pub mod free_fermion;
pub mod nn;
pub mod ubg;

pub use dicke::{dicke_energy, dicke_ground_lbg, lbg_infinite_correlations, DickeGround, LbgCorrelations};
pub use free_fermion::{dimerized_xx_finite, dimerized_xx_thermo, FiniteFreeFermion, FreeFermionSolution};
pub use nn::{magnon_gap_nn, spinon_gap_nn, SpinonGap};
pub use ubg::{ubg_infinite_ground, UbgCorrelations, UbgGround};
