//! Infinite-range lower-gap model, `J_ij = -J~` for all pairs.
//!
//! Up to a constant the Hamiltonian is
//! `(J~/2)[sin theta (S^2 - S_z^2) + cos theta S_z^2] - mu S_z` in the
//! collective spin, so Dicke states `|s, m>` diagonalize it. Energies are in
//! units of `J~`; `N` is even, hence `s` and `m` are integers.

use std::f64::consts::PI;

use crate::error::{Error, Result};

fn check(n: usize, s: i64, m: i64) -> Result<()> {
    if n % 2 == 1 {
        return Err(Error::OddSize(n));
    }
    let half = n as i64 / 2;
    if s < 0 || s > half || m.abs() > s {
        return Err(Error::InvalidQuantumNumbers(format!(
            "need |m| <= s <= N/2, got N = {n}, s = {s}, m = {m}"
        )));
    }
    Ok(())
}

/// `E(s, m) = (1/2){sin theta [s(s+1) - m^2] + cos theta m^2} - mu m`.
pub fn dicke_energy(n: usize, s: i64, m: i64, theta: f64, mu: f64) -> Result<f64> {
    check(n, s, m)?;
    let (s, m) = (s as f64, m as f64);
    Ok(0.5 * (theta.sin() * (s * (s + 1.0) - m * m) + theta.cos() * m * m) - mu * m)
}

/// Constant separating `E(s, m)` from the pairwise Hamiltonian
/// `-sum_{i<j} J_ij [...]`: `E_pairwise = E(s, m) + lbg_pairwise_offset`.
pub fn lbg_pairwise_offset(n: usize, theta: f64) -> f64 {
    let n = n as f64;
    -(n / 4.0 * theta.sin() + n / 8.0 * theta.cos())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DickeGround {
    pub s: i64,
    pub m: i64,
    pub energy: f64,
}

/// Lowest `E(s, m)` at fixed `m`; ties in `s` resolve to the larger `s`.
pub fn dicke_sector_ground(n: usize, m: i64, theta: f64, mu: f64) -> Result<DickeGround> {
    check(n, m.abs(), m)?;
    let half = n as i64 / 2;
    let mut best: Option<DickeGround> = None;
    for s in m.abs()..=half {
        let e = dicke_energy(n, s, m, theta, mu)?;
        if best.is_none_or(|b| e <= b.energy + 1e-12 * b.energy.abs().max(1.0)) {
            best = Some(DickeGround { s, m, energy: e });
        }
    }
    Ok(best.expect("at least one s"))
}

/// Minimum of `E(s, m)` over all admissible `(s, m)`; ties resolve toward
/// larger `m`.
pub fn dicke_ground_lbg(n: usize, theta: f64, mu: f64) -> Result<DickeGround> {
    if n % 2 == 1 {
        return Err(Error::OddSize(n));
    }
    let half = n as i64 / 2;
    let mut best: Option<DickeGround> = None;
    for m in -half..=half {
        let g = dicke_sector_ground(n, m, theta, mu)?;
        if best.is_none_or(|b| g.energy <= b.energy + 1e-12 * b.energy.abs().max(1.0)) {
            best = Some(g);
        }
    }
    Ok(best.expect("nonempty"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbgCorrelations {
    /// `<S^z_i S^z_j>` for any `i != j`.
    pub zz: f64,
    /// `<S^x_i S^x_j> = <S^y_i S^y_j>`.
    pub xx: f64,
}

/// Pair correlations of the ground manifold in sector `m`.
///
/// For `sin theta < 0` the ground state is the unique `s = N/2` Dicke
/// state. For `sin theta > 0` the ground level `s = |m|` is degenerate and
/// the values are those of the equal-weight mixture. At `sin theta = 0`
/// every state of the sector is degenerate and the transverse correlation
/// of the full-sector mixture vanishes.
pub fn lbg_infinite_correlations(n: usize, m: i64, theta: f64) -> Result<LbgCorrelations> {
    check(n, n as i64 / 2, m)?;
    let nf = n as f64;
    let mf = m as f64;
    let denom = nf * (nf - 1.0);
    let zz = (4.0 * mf * mf - nf) / (4.0 * denom);
    let wrapped = (theta + PI).rem_euclid(2.0 * PI) - PI;
    let xx = if wrapped < 0.0 && wrapped > -PI {
        (nf * nf - 4.0 * mf * mf) / (8.0 * denom)
    } else if wrapped > 0.0 && wrapped < PI {
        (2.0 * mf.abs() - nf) / (4.0 * denom)
    } else {
        0.0
    };
    Ok(LbgCorrelations { zz, xx })
}
