//! Sector ground states, magnetization phase diagrams and magnetization
//! curves.
//!
//! The field term `-mu m` is constant inside a sector, so every sector is
//! diagonalized once at `mu = 0` and `E(mu, m) = E_0(m) - mu m` is used for
//! the whole `mu` grid.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::basis::enumerate_sector;
use crate::couplings::CouplingMatrix;
use crate::eigen::{lowest_eigenpairs, EigenOptions};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_sector_hamiltonian, Anisotropy, Scalar, SectorHamiltonian};

/// Relative tolerance for two levels to count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-8;
/// Splittings between `DEGENERACY_TOL` and this are reported as near-degenerate.
pub const NEAR_DEGENERACY_TOL: f64 = 1e-5;
/// Relative tolerance for ties in `E_0(m) - mu m`.
pub const TIE_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct GroundStateResult<T> {
    pub n_sites: usize,
    pub n_up: usize,
    /// Lowest eigenvalues in units of `J~`, ascending.
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<T>>,
    /// Number of levels within `DEGENERACY_TOL` of the minimum.
    pub degeneracy: usize,
    /// Some level splits from the ground level by more than the degeneracy
    /// tolerance but less than `NEAR_DEGENERACY_TOL`.
    pub near_degenerate: bool,
}

impl<T> GroundStateResult<T> {
    pub fn energy(&self) -> f64 {
        self.values[0]
    }

    pub fn magnetization(&self) -> i64 {
        self.n_up as i64 - self.n_sites as i64 / 2
    }
}

fn energy_scale(e0: f64) -> f64 {
    e0.abs().max(1.0)
}

/// `(degeneracy, near_degenerate)` of an ascending spectrum.
pub fn degeneracy_of(values: &[f64]) -> (usize, bool) {
    let e0 = values[0];
    let scale = energy_scale(e0);
    let d = values.iter().take_while(|&&e| e - e0 <= DEGENERACY_TOL * scale).count();
    let near = values[d..].iter().any(|&e| e - e0 <= NEAR_DEGENERACY_TOL * scale);
    (d, near)
}

pub fn ground_states<T: Scalar>(
    h: &SectorHamiltonian,
    opts: &EigenOptions,
) -> Result<GroundStateResult<T>> {
    if !T::IS_COMPLEX && !h.is_real() {
        return Err(Error::ComplexHamiltonian);
    }
    let opts = EigenOptions { k: opts.k.min(h.dim()), ..*opts };
    let pairs = lowest_eigenpairs::<T, _>(&h.as_operator(), &opts)?;
    let (degeneracy, near_degenerate) = degeneracy_of(&pairs.values);
    Ok(GroundStateResult {
        n_sites: h.basis().n_sites(),
        n_up: h.basis().n_up(),
        values: pairs.values,
        vectors: pairs.vectors,
        degeneracy,
        near_degenerate,
    })
}

/// `E_1 - E_0` inside a sector, measured to the first level outside the
/// ground-level degeneracy. `None` when the sector has a single level or
/// every level is degenerate with the ground level.
pub fn excitation_gap(h: &SectorHamiltonian, opts: &EigenOptions) -> Result<Option<f64>> {
    let dim = h.dim();
    if dim < 2 {
        return Ok(None);
    }
    let mut k = opts.k.clamp(2, dim).max(6.min(dim));
    loop {
        let o = EigenOptions { k, want_vectors: false, ..*opts };
        let values = if h.is_real() {
            lowest_eigenpairs::<f64, _>(&h.as_operator(), &o)?.values
        } else {
            lowest_eigenpairs::<crate::hamiltonian::C64, _>(&h.as_operator(), &o)?.values
        };
        let (d, _) = degeneracy_of(&values);
        if d < values.len() {
            return Ok(Some(values[d] - values[0]));
        }
        if k == dim {
            return Ok(None);
        }
        k = (2 * k).min(dim);
    }
}

/// Lowest energies `E_0(m)` of every magnetization sector at one angle.
#[derive(Debug, Clone, Serialize)]
pub struct SectorEnergies {
    pub n_sites: usize,
    pub theta: f64,
    /// Index `k` holds sector `m = k - N/2` (that is, `n_up = k`).
    pub energies: Vec<f64>,
}

impl SectorEnergies {
    pub fn magnetizations(&self) -> impl Iterator<Item = i64> + '_ {
        let half = self.n_sites as i64 / 2;
        (0..self.energies.len()).map(move |k| k as i64 - half)
    }

    pub fn energy(&self, m: i64) -> f64 {
        self.energies[(m + self.n_sites as i64 / 2) as usize]
    }

    /// Ground magnetization at field `mu`; ties go to the larger `m` and set the flag.
    pub fn ground_magnetization(&self, mu: f64) -> (i64, bool) {
        let mut best_m = i64::MIN;
        let mut best_e = f64::INFINITY;
        let mut tie = false;
        for m in self.magnetizations() {
            let e = self.energy(m) - mu * m as f64;
            let tol = TIE_TOL * energy_scale(best_e.min(e));
            if e < best_e - tol {
                best_e = e;
                best_m = m;
                tie = false;
            } else if (e - best_e).abs() <= tol {
                tie = true;
                best_m = m;
                best_e = best_e.min(e);
            }
        }
        (best_m, tie)
    }

    /// Gap from the ground sector to the lowest other sector at field `mu`.
    pub fn cross_sector_gap(&self, mu: f64) -> f64 {
        let (m_star, _) = self.ground_magnetization(mu);
        let e_star = self.energy(m_star) - mu * m_star as f64;
        self.magnetizations()
            .filter(|&m| m != m_star)
            .map(|m| self.energy(m) - mu * m as f64 - e_star)
            .fold(f64::INFINITY, f64::min)
    }

    /// Smallest field at which the fully polarized sector becomes the ground state.
    pub fn saturation_field(&self) -> f64 {
        let top = self.n_sites as i64 / 2;
        self.magnetizations()
            .filter(|&m| m < top)
            .map(|m| (self.energy(top) - self.energy(m)) / (top - m) as f64)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Sector Hamiltonian of a coupling matrix at `n_up` up spins.
pub fn sector_hamiltonian(cm: &CouplingMatrix, n_up: usize, anisotropy: Anisotropy) -> Result<SectorHamiltonian> {
    let basis = Arc::new(enumerate_sector(cm.size(), n_up)?);
    build_sector_hamiltonian(cm, basis, anisotropy, None)
}

fn sector_energy(cm: &CouplingMatrix, n_up: usize, theta: f64, opts: &EigenOptions) -> Result<f64> {
    let h = sector_hamiltonian(cm, n_up, Anisotropy::Angle(theta))?;
    let o = EigenOptions { k: 1, want_vectors: false, ..*opts };
    Ok(lowest_eigenpairs::<f64, _>(&h.as_operator(), &o)?.values[0])
}

/// Energies of all sectors at each angle. Sectors with `m < 0` are filled
/// in from the spin-flip symmetry `E_0(-m) = E_0(m)`.
///
/// The `(theta, sector)` tasks run on the current rayon pool and are
/// collected in grid order, so results do not depend on the worker count.
pub fn sector_energy_tables(
    cm: &CouplingMatrix,
    thetas: &[f64],
    opts: &EigenOptions,
) -> Result<Vec<SectorEnergies>> {
    let n = cm.size();
    let half = n / 2;
    let tasks: Vec<(usize, usize)> = (0..thetas.len())
        .flat_map(|t| (half..=n).map(move |k| (t, k)))
        .collect();
    let results: Vec<Result<f64>> = tasks
        .par_iter()
        .map(|&(t, k)| sector_energy(cm, k, thetas[t], opts))
        .collect();
    let mut tables = Vec::with_capacity(thetas.len());
    let mut it = results.into_iter();
    for &theta in thetas {
        let mut energies = vec![0.0; n + 1];
        for k in half..=n {
            let e = it.next().expect("one result per task")?;
            energies[k] = e;
            energies[n - k] = e;
        }
        tables.push(SectorEnergies { n_sites: n, theta, energies });
    }
    Ok(tables)
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseDiagramGrid {
    pub thetas: Vec<f64>,
    pub mus: Vec<f64>,
    /// `m_star[t][u]` at `(thetas[t], mus[u])`.
    pub m_star: Vec<Vec<i64>>,
    pub ties: Vec<Vec<bool>>,
    pub sector_energies: Vec<SectorEnergies>,
}

pub fn magnetization_phase_diagram(
    cm: &CouplingMatrix,
    thetas: &[f64],
    mus: &[f64],
    opts: &EigenOptions,
) -> Result<PhaseDiagramGrid> {
    check_grids(thetas, mus)?;
    phase_diagram_from_tables(sector_energy_tables(cm, thetas, opts)?, mus)
}

fn check_grids(thetas: &[f64], mus: &[f64]) -> Result<()> {
    if thetas.is_empty() || mus.is_empty() {
        return Err(Error::InvalidParameter {
            name: "grid",
            reason: "theta and mu grids must be nonempty".into(),
        });
    }
    Ok(())
}

/// Phase diagram from precomputed sector energies (one table per angle).
pub fn phase_diagram_from_tables(tables: Vec<SectorEnergies>, mus: &[f64]) -> Result<PhaseDiagramGrid> {
    let thetas: Vec<f64> = tables.iter().map(|t| t.theta).collect();
    check_grids(&thetas, mus)?;
    let mut m_star = Vec::with_capacity(thetas.len());
    let mut ties = Vec::with_capacity(thetas.len());
    for table in &tables {
        let (ms, ts): (Vec<i64>, Vec<bool>) = mus.iter().map(|&mu| table.ground_magnetization(mu)).unzip();
        m_star.push(ms);
        ties.push(ts);
    }
    Ok(PhaseDiagramGrid { thetas, mus: mus.to_vec(), m_star, ties, sector_energies: tables })
}

#[derive(Debug, Clone, Serialize)]
pub struct MagnetizationCurve {
    pub theta: f64,
    pub mus: Vec<f64>,
    pub m: Vec<i64>,
    pub ties: Vec<bool>,
    /// Smallest grid field with `m = N/2`, if the grid reaches it.
    pub saturation_on_grid: Option<f64>,
    /// Exact saturation field from the sector energies.
    pub saturation_field: f64,
    pub sector_energies: SectorEnergies,
}

pub fn magnetization_curve(
    cm: &CouplingMatrix,
    theta: f64,
    mus: &[f64],
    opts: &EigenOptions,
) -> Result<MagnetizationCurve> {
    check_grids(&[theta], mus)?;
    let table = sector_energy_tables(cm, &[theta], opts)?.pop().expect("one angle");
    curve_from_table(table, mus)
}

pub fn curve_from_table(table: SectorEnergies, mus: &[f64]) -> Result<MagnetizationCurve> {
    let theta = table.theta;
    let top = table.n_sites as i64 / 2;
    let grid = phase_diagram_from_tables(vec![table], mus)?;
    let m = grid.m_star.into_iter().next().expect("one angle");
    let ties = grid.ties.into_iter().next().expect("one angle");
    let table = grid.sector_energies.into_iter().next().expect("one angle");
    let saturation_on_grid = mus.iter().zip(&m).find(|(_, &mm)| mm == top).map(|(&mu, _)| mu);
    Ok(MagnetizationCurve {
        theta,
        mus: mus.to_vec(),
        m,
        ties,
        saturation_on_grid,
        saturation_field: table.saturation_field(),
        sector_energies: table,
    })
}
