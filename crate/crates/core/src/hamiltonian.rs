//! Sector-restricted generalized XXZ Hamiltonian
//!
//! `H = -sum_{i<j} J_ij [ b/2 (S+_i S-_j + h.c.) + a S^z_i S^z_j ]`
//!
//! in units of `J~`, with `(a, b) = (cos theta, sin theta)` for the
//! anisotropy-angle form. The magnetic-field term `-mu m` is a constant in
//! each sector and is applied by callers.

use std::sync::Arc;

use nalgebra::{Complex, ComplexField, DMatrix};

use crate::basis::SectorBasis;
use crate::couplings::CouplingMatrix;
use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Field over which states and operators are stored: `f64` or `Complex<f64>`.
pub trait Scalar: ComplexField<RealField = f64> + Copy + Send + Sync + 'static {
    const IS_COMPLEX: bool;

    /// Conversion from a complex number; the imaginary part is discarded for
    /// real scalars, so callers must check realness first.
    fn from_c64(z: C64) -> Self;

    fn to_c64(self) -> C64;
}

impl Scalar for f64 {
    const IS_COMPLEX: bool = false;

    #[inline]
    fn from_c64(z: C64) -> Self {
        z.re
    }

    #[inline]
    fn to_c64(self) -> C64 {
        C64::new(self, 0.0)
    }
}

impl Scalar for C64 {
    const IS_COMPLEX: bool = true;

    #[inline]
    fn from_c64(z: C64) -> Self {
        z
    }

    #[inline]
    fn to_c64(self) -> C64 {
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Anisotropy {
    Angle(f64),
    Weights { a: f64, b: f64 },
}

impl Anisotropy {
    pub fn weights(self) -> (f64, f64) {
        match self {
            Anisotropy::Angle(theta) => (theta.cos(), theta.sin()),
            Anisotropy::Weights { a, b } => (a, b),
        }
    }
}

/// Phase `e^{-i phi}` on the `S+_p S-_q` exchange term of one spin pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Twist {
    pub p: usize,
    pub q: usize,
    pub phi: f64,
}

/// Anything that can act on sector vectors.
pub trait LinearOperator<T: Scalar>: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[T], y: &mut [T]);
    fn to_dense(&self) -> DMatrix<T> {
        let n = self.dim();
        let mut m = DMatrix::<T>::zeros(n, n);
        let mut e = vec![T::zero(); n];
        let mut col = vec![T::zero(); n];
        for j in 0..n {
            e[j] = T::one();
            self.apply(&e, &mut col);
            e[j] = T::zero();
            for i in 0..n {
                m[(i, j)] = col[i];
            }
        }
        m
    }
}

#[derive(Debug, Clone)]
pub struct SectorHamiltonian {
    basis: Arc<SectorBasis>,
    /// `-sum J_ij s_i s_j` per configuration (weight `a = 1`).
    diag: Vec<f64>,
    /// Real exchange part in CSR form (weight `b = 1`).
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
    /// Complex entries of a twisted pair, `(row, col, value)`, weight `b = 1`.
    twisted: Vec<(u32, u32, C64)>,
    a: f64,
    b: f64,
    twist: Option<Twist>,
}

/// Phases closer than this to 0 or pi are treated as real twists.
const REAL_PHASE_TOL: f64 = 1e-15;

pub fn build_sector_hamiltonian(
    cm: &CouplingMatrix,
    basis: Arc<SectorBasis>,
    anisotropy: Anisotropy,
    twist: Option<Twist>,
) -> Result<SectorHamiltonian> {
    let n = basis.n_sites();
    if cm.size() != n {
        return Err(Error::SizeMismatch { expected: n, got: cm.size() });
    }
    if let Some(t) = twist {
        if t.p >= n || t.q >= n || t.p == t.q {
            return Err(Error::InvalidParameter {
                name: "twist",
                reason: format!("pair ({}, {}) invalid for {n} sites", t.p, t.q),
            });
        }
    }
    let (a, b) = anisotropy.weights();
    let pairs = cm.nonzero_pairs();

    // A twist by 0 or pi keeps the operator real: fold it into the coupling.
    let phase = twist.map(|t| {
        let phi = t.phi.rem_euclid(std::f64::consts::TAU);
        (t, C64::new(phi.cos(), -phi.sin()))
    });
    let real_fold = phase.and_then(|(t, z)| {
        if z.im.abs() < REAL_PHASE_TOL {
            Some((t.p.min(t.q), t.p.max(t.q), z.re.signum()))
        } else {
            None
        }
    });
    let complex_twist = phase.filter(|(_, z)| z.im.abs() >= REAL_PHASE_TOL);

    let dim = basis.dim();
    let mut diag = vec![0.0; dim];
    let mut row_ptr = Vec::with_capacity(dim + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    let mut twisted = Vec::new();
    row_ptr.push(0);
    for (row, &s) in basis.states().iter().enumerate() {
        let mut d = 0.0;
        let mut entries: Vec<(u32, f64)> = Vec::new();
        for &(i, j, jij) in &pairs {
            let bi = (s >> i) & 1;
            let bj = (s >> j) & 1;
            if bi == bj {
                d -= 0.25 * jij;
                continue;
            }
            d += 0.25 * jij;
            let target = s ^ ((1u32 << i) | (1u32 << j));
            let col = basis.index_of(target).expect("swap stays in sector") as u32;
            if let Some((t, z)) = complex_twist {
                if (i, j) == (t.p.min(t.q), t.p.max(t.q)) {
                    // <s|S+_p S-_q|target> is nonzero when p is up in s.
                    let p_up = (s >> t.p) & 1 == 1;
                    let factor = if p_up { z } else { z.conj() };
                    twisted.push((row as u32, col, factor * (-0.5 * jij)));
                    continue;
                }
            }
            let sign = match real_fold {
                Some((p, q, sgn)) if (i, j) == (p, q) => sgn,
                _ => 1.0,
            };
            entries.push((col, -0.5 * jij * sign));
        }
        entries.sort_unstable_by_key(|e| e.0);
        for (c, v) in entries {
            cols.push(c);
            vals.push(v);
        }
        row_ptr.push(cols.len());
        diag[row] = d;
    }
    Ok(SectorHamiltonian { basis, diag, row_ptr, cols, vals, twisted, a, b, twist })
}

impl SectorHamiltonian {
    pub fn basis(&self) -> &SectorBasis {
        &self.basis
    }

    pub fn shared_basis(&self) -> Arc<SectorBasis> {
        Arc::clone(&self.basis)
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn weights(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn twist(&self) -> Option<Twist> {
        self.twist
    }

    /// Same operator with different `(a, b)` weights.
    pub fn with_weights(&self, a: f64, b: f64) -> SectorHamiltonian {
        SectorHamiltonian { a, b, ..self.clone() }
    }

    pub fn is_real(&self) -> bool {
        self.twisted.is_empty()
    }

    /// Ising part `-sum J_ij s_i s_j` of each basis configuration.
    pub fn ising_diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// `<sigma|H|sigma>` for basis index `i` at the stored weights.
    pub fn diagonal_element(&self, i: usize) -> f64 {
        self.a * self.diag[i]
    }

    /// `y = (a H_z + b H_xy) x` for arbitrary weights.
    pub fn matvec_with<T: Scalar>(&self, a: f64, b: f64, x: &[T], y: &mut [T]) -> Result<()> {
        let dim = self.dim();
        if x.len() != dim {
            return Err(Error::SizeMismatch { expected: dim, got: x.len() });
        }
        if y.len() != dim {
            return Err(Error::SizeMismatch { expected: dim, got: y.len() });
        }
        if !T::IS_COMPLEX && !self.is_real() {
            return Err(Error::ComplexHamiltonian);
        }
        self.apply_unchecked(a, b, x, y);
        Ok(())
    }

    /// Squared Frobenius norms `(||H_z||^2, ||H_xy||^2)` inside the sector.
    pub fn frobenius_sq(&self) -> (f64, f64) {
        let z = self.diag.iter().map(|d| d * d).sum();
        let xy = self.vals.iter().map(|v| v * v).sum::<f64>()
            + self.twisted.iter().map(|e| e.2.norm_sqr()).sum::<f64>();
        (z, xy)
    }

    pub fn matvec<T: Scalar>(&self, x: &[T], y: &mut [T]) -> Result<()> {
        self.matvec_with(self.a, self.b, x, y)
    }

    fn apply_unchecked<T: Scalar>(&self, a: f64, b: f64, x: &[T], y: &mut [T]) {
        for row in 0..x.len() {
            let mut acc = x[row].scale(a * self.diag[row]);
            let mut off = T::zero();
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                off += x[self.cols[k] as usize].scale(self.vals[k]);
            }
            acc += off.scale(b);
            y[row] = acc;
        }
        for &(r, c, z) in &self.twisted {
            y[r as usize] += T::from_c64(z * b) * x[c as usize];
        }
    }

    pub fn to_dense_with<T: Scalar>(&self, a: f64, b: f64) -> Result<DMatrix<T>> {
        if !T::IS_COMPLEX && !self.is_real() {
            return Err(Error::ComplexHamiltonian);
        }
        let dim = self.dim();
        let mut m = DMatrix::<T>::zeros(dim, dim);
        for row in 0..dim {
            m[(row, row)] = T::from_real(a * self.diag[row]);
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                m[(row, self.cols[k] as usize)] += T::from_real(b * self.vals[k]);
            }
        }
        for &(r, c, z) in &self.twisted {
            m[(r as usize, c as usize)] += T::from_c64(z * b);
        }
        Ok(m)
    }

    pub fn to_dense<T: Scalar>(&self) -> Result<DMatrix<T>> {
        self.to_dense_with(self.a, self.b)
    }

    /// Operator view at fixed weights for the eigensolvers.
    pub fn at(&self, a: f64, b: f64) -> WeightedHamiltonian<'_> {
        WeightedHamiltonian { h: self, a, b }
    }

    pub fn as_operator(&self) -> WeightedHamiltonian<'_> {
        self.at(self.a, self.b)
    }
}

/// `a H_z + b H_xy` borrowed from a [`SectorHamiltonian`].
#[derive(Debug, Clone, Copy)]
pub struct WeightedHamiltonian<'a> {
    h: &'a SectorHamiltonian,
    a: f64,
    b: f64,
}

impl WeightedHamiltonian<'_> {
    pub fn hamiltonian(&self) -> &SectorHamiltonian {
        self.h
    }

    pub fn is_real(&self) -> bool {
        self.h.is_real() || self.b == 0.0
    }
}

impl<T: Scalar> LinearOperator<T> for WeightedHamiltonian<'_> {
    fn dim(&self) -> usize {
        self.h.dim()
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        assert!(
            T::IS_COMPLEX || self.h.is_real(),
            "complex Hamiltonian applied to real vectors"
        );
        self.h.apply_unchecked(self.a, self.b, x, y);
    }

    fn to_dense(&self) -> DMatrix<T> {
        self.h.to_dense_with(self.a, self.b).expect("realness checked by caller")
    }
}
