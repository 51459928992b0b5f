//! Jordan–Wigner solution of the dimerized nearest-neighbour XX chain
//! `H = (1/2) sum_j [1 + (-1)^j d] (S+_j S-_{j+1} + h.c.) - mu sum_j S^z_j`
//! (the `theta = pi/2`, `xi -> 0` model), in units of `J~`.
//!
//! Sites are `2x + s` with cell `x` and sublattice `s` (0 = a, 1 = b), so
//! bond `(2x, 2x+1)` carries `1 + d` and bond `(2x+1, 2x+2)` carries `1 - d`.
//! Correlations go through the Majorana pairs `A_i = c+_i + c_i`,
//! `B_i = c+_i - c_i`, with `S^z_i = B_i A_i / 2`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::couplings::Boundary;
use crate::error::{Error, Result};

/// Absolute tolerance requested from the quadrature of `F_r`.
pub const QUADRATURE_TOL: f64 = 1e-12;

/// Single-particle levels closer than this to the Fermi level count as
/// degenerate with it.
const FERMI_DEGENERACY_TOL: f64 = 1e-10;

fn check_dimerization(d: f64) -> Result<()> {
    if !(d.abs() <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "dimerization",
            reason: format!("must lie in [-1, 1], got {d}"),
        });
    }
    Ok(())
}

fn det(m: DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    m.lu().determinant()
}

/// Thermodynamic-limit ground state at fixed field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeFermionSolution {
    pub dimerization: f64,
    pub mu: f64,
    /// Fermi point in cell quasimomentum, in `[0, pi]`.
    pub k0: f64,
    /// Magnetization per spin, `(pi - k0) / (2 pi)`.
    pub magnetization_per_spin: f64,
}

pub fn dimerized_xx_thermo(dimerization: f64, mu: f64) -> Result<FreeFermionSolution> {
    check_dimerization(dimerization)?;
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(Error::InvalidParameter { name: "mu", reason: format!("must be >= 0, got {mu}") });
    }
    let d = dimerization;
    let k0 = if (1.0 - d * d).abs() < 1e-15 {
        if mu < 1.0 {
            PI
        } else {
            0.0
        }
    } else if mu <= d.abs() {
        PI
    } else if mu >= 1.0 {
        0.0
    } else {
        ((2.0 * mu * mu - 1.0 - d * d) / (1.0 - d * d)).clamp(-1.0, 1.0).acos()
    };
    Ok(FreeFermionSolution {
        dimerization,
        mu,
        k0,
        magnetization_per_spin: (PI - k0) / (2.0 * PI),
    })
}

impl FreeFermionSolution {
    /// Upper and lower band energies `+-|h_k| - mu` at cell momentum `k`.
    pub fn dispersion(&self, k: f64) -> (f64, f64) {
        let d = self.dimerization;
        let w = 0.5 * (2.0 * (1.0 + d * d) + 2.0 * (1.0 - d * d) * k.cos()).max(0.0).sqrt();
        (w - self.mu, -w - self.mu)
    }

    /// `phi_k = arg[(1 + d) + (1 - d) e^{-ik}]`.
    pub fn phase(&self, k: f64) -> f64 {
        let d = self.dimerization;
        let re = (1.0 + d) + (1.0 - d) * k.cos();
        let im = -(1.0 - d) * k.sin();
        im.atan2(re)
    }

    /// Same-sublattice contraction `G_r = -sin(k0 r) / (pi r)`, `G_0 = 1 - k0/pi`.
    pub fn g(&self, r: i64) -> f64 {
        if r == 0 {
            1.0 - self.k0 / PI
        } else {
            let r = r as f64;
            -(self.k0 * r).sin() / (PI * r)
        }
    }

    fn f_with_segments(&self, r: i64, segments: usize) -> Result<f64> {
        if self.k0 == 0.0 {
            return Ok(0.0);
        }
        let rf = r as f64;
        let h = self.k0 / segments as f64;
        let tol = QUADRATURE_TOL / segments as f64;
        let mut total = 0.0;
        for s in 0..segments {
            let (a, b) = (s as f64 * h, (s + 1) as f64 * h);
            let out = quadrature::double_exponential::integrate(
                |k| (k * rf + self.phase(k)).cos(),
                a,
                b,
                tol,
            );
            if !(out.error_estimate <= QUADRATURE_TOL) || !out.integral.is_finite() {
                return Err(Error::QuadratureFailure { tol: QUADRATURE_TOL, estimate: out.error_estimate });
            }
            total += out.integral;
        }
        Ok(-total / PI)
    }

    fn segments(&self, r: i64) -> usize {
        // About one segment per half oscillation of the integrand.
        1 + ((r.unsigned_abs() as f64 + 1.0) * self.k0 / PI).ceil() as usize
    }

    /// Cross-sublattice contraction `F_r = -(1/pi) int_0^{k0} cos(k r + phi_k) dk`.
    pub fn f(&self, r: i64) -> Result<f64> {
        self.f_with_segments(r, self.segments(r))
    }

    /// `F_r` recomputed on twice as many panels, for self-checks.
    pub fn f_refined(&self, r: i64) -> Result<f64> {
        self.f_with_segments(r, 2 * self.segments(r))
    }

    /// `<B_i A_j>` between sites of the infinite chain.
    pub fn contraction(&self, i: i64, j: i64) -> Result<f64> {
        let (x, s) = (i.div_euclid(2), i.rem_euclid(2));
        let (y, t) = (j.div_euclid(2), j.rem_euclid(2));
        match (s, t) {
            (0, 0) | (1, 1) => Ok(self.g(x - y)),
            (0, 1) => self.f(x - y),
            _ => self.f(y - x),
        }
    }

    /// `<S^z_i S^z_j>`.
    pub fn zz(&self, i: i64, j: i64) -> Result<f64> {
        if i == j {
            return Ok(0.25);
        }
        let cij = self.contraction(i, j)?;
        let cji = self.contraction(j, i)?;
        Ok(0.25 * (self.contraction(i, i)? * self.contraction(j, j)? - cij * cji))
    }

    /// `<S^x_i S^x_j>` from the Toeplitz determinant of `<B A>` contractions.
    pub fn xx(&self, i: i64, j: i64) -> Result<f64> {
        let (lo, hi) = (i.min(j), i.max(j));
        if lo == hi {
            return Ok(0.25);
        }
        let r = (hi - lo) as usize;
        let mut m = DMatrix::zeros(r, r);
        for a in 0..r {
            for b in 0..r {
                m[(a, b)] = self.contraction(lo + a as i64, lo + 1 + b as i64)?;
            }
        }
        Ok(0.25 * det(m))
    }

    /// Dimer order `[F_0^2 - F_1^2 + 2(F_1 - F_0)] / 8`, i.e. half the
    /// difference between the inter-cell and intra-cell bond energies
    /// `<S_i . S_{i+1}>`.
    pub fn o2(&self) -> Result<f64> {
        let f0 = self.f(0)?;
        let f1 = self.f(1)?;
        Ok((f0 * f0 - f1 * f1 + 2.0 * (f1 - f0)) / 8.0)
    }
}

/// Finite open chain in a fixed particle-number (magnetization) sector.
#[derive(Debug, Clone)]
pub struct FiniteFreeFermion {
    pub n_sites: usize,
    pub n_up: usize,
    pub dimerization: f64,
    /// Single-particle levels in ascending order.
    pub levels: Vec<f64>,
    /// Sector ground energy at zero field, the sum of the `n_up` lowest levels.
    pub energy: f64,
    /// The last occupied and first empty level coincide, so the many-body
    /// ground state of the sector is degenerate and the correlations below
    /// belong to one particular choice.
    pub fermi_degenerate: bool,
    /// `<c+_i c_j>`.
    pub density_matrix: DMatrix<f64>,
}

/// Single-particle hopping matrix of the open chain.
fn hopping_matrix(n: usize, d: f64) -> DMatrix<f64> {
    let mut t = DMatrix::zeros(n, n);
    for j in 0..n.saturating_sub(1) {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let v = 0.5 * (1.0 + sign * d);
        t[(j, j + 1)] = v;
        t[(j + 1, j)] = v;
    }
    t
}

pub fn dimerized_xx_finite(
    n: usize,
    dimerization: f64,
    boundary: Boundary,
    n_up: usize,
) -> Result<FiniteFreeFermion> {
    check_dimerization(dimerization)?;
    if boundary == Boundary::Pbc {
        return Err(Error::BoundaryUnsupported(
            "the free-fermion solver handles open chains only".into(),
        ));
    }
    if !(2..=512).contains(&n) {
        return Err(Error::InvalidParameter { name: "n", reason: format!("need 2 <= N <= 512, got {n}") });
    }
    if n_up > n {
        return Err(Error::InvalidQuantumNumbers(format!("n_up = {n_up} exceeds N = {n}")));
    }
    let eig = SymmetricEigen::new(hopping_matrix(n, dimerization));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let levels: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let energy = levels[..n_up].iter().sum();
    let fermi_degenerate =
        n_up > 0 && n_up < n && (levels[n_up] - levels[n_up - 1]).abs() < FERMI_DEGENERACY_TOL;
    let occupied = DMatrix::from_fn(n, n_up, |i, k| eig.eigenvectors[(i, order[k])]);
    let density_matrix = &occupied * occupied.transpose();
    Ok(FiniteFreeFermion { n_sites: n, n_up, dimerization, levels, energy, fermi_degenerate, density_matrix })
}

impl FiniteFreeFermion {
    pub fn magnetization(&self) -> f64 {
        self.n_up as f64 - self.n_sites as f64 / 2.0
    }

    /// Zero-field ground energy of every sector, indexed by `n_up`.
    pub fn sector_energies(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_sites + 1);
        let mut acc = 0.0;
        out.push(0.0);
        for &e in &self.levels {
            acc += e;
            out.push(acc);
        }
        out
    }

    /// Particle number of the ground state at field `mu`: the number of
    /// levels below `mu`. Levels exactly at `mu` are filled.
    pub fn ground_n_up(&self, mu: f64) -> usize {
        self.levels.iter().filter(|&&e| e <= mu).count()
    }

    /// `<B_i A_j> = 2 <c+_i c_j> - delta_ij`.
    pub fn contraction(&self, i: usize, j: usize) -> f64 {
        2.0 * self.density_matrix[(i, j)] - if i == j { 1.0 } else { 0.0 }
    }

    pub fn local_sz(&self, i: usize) -> f64 {
        0.5 * self.contraction(i, i)
    }

    pub fn zz(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.25;
        }
        let cij = self.contraction(i, j);
        let cji = self.contraction(j, i);
        0.25 * (self.contraction(i, i) * self.contraction(j, j) - cij * cji)
    }

    pub fn xx(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = (i.min(j), i.max(j));
        if lo == hi {
            return 0.25;
        }
        let r = hi - lo;
        det(DMatrix::from_fn(r, r, |a, b| self.contraction(lo + a, lo + 1 + b)))
            * 0.25
    }
}
