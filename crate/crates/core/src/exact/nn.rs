//! Gaps of the nearest-neighbour XXZ chain (`J_ij = -J~` on neighbours).

use std::f64::consts::PI;

/// Single-magnon gap over the fully polarized state, in units of `J~`:
/// `-|sin theta| - cos theta + mu`.
pub fn magnon_gap_nn(theta: f64, mu: f64) -> f64 {
    -theta.sin().abs() - theta.cos() + mu
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinonGap {
    pub value: f64,
    /// The two-spinon estimate is perturbative in the exchange term and is
    /// only trusted for `|theta| < pi/8`.
    pub valid: bool,
}

/// Two-spinon gap over the Néel state, `cos theta - 2|sin theta| - mu`.
pub fn spinon_gap_nn(theta: f64, mu: f64) -> SpinonGap {
    SpinonGap {
        value: theta.cos() - 2.0 * theta.sin().abs() - mu,
        valid: theta.abs() < PI / 8.0,
    }
}
