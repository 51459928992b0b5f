//! Expectation values on sector states and equal-weight mixtures of them.
//!
//! Everything is built on one engine that applies a product of single-site
//! operators to basis configurations and looks the result up in the basis.
//! Operators leaving the sector contribute zero.

use serde::Serialize;

use crate::basis::SectorBasis;
use crate::couplings::Boundary;
use crate::error::{Error, Result};
use crate::hamiltonian::{Scalar, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            other => Err(Error::InvalidParameter {
                name: "axis",
                reason: format!("unknown axis `{other}`"),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SiteOp {
    Z,
    Plus,
    Minus,
    X,
    Y,
}

impl From<Axis> for SiteOp {
    fn from(a: Axis) -> Self {
        match a {
            Axis::X => SiteOp::X,
            Axis::Y => SiteOp::Y,
            Axis::Z => SiteOp::Z,
        }
    }
}

/// Normalized states of one sector, averaged with equal weights.
#[derive(Debug, Clone)]
pub struct Ensemble<'a, T> {
    basis: &'a SectorBasis,
    states: Vec<&'a [T]>,
}

const NORM_TOL: f64 = 1e-8;

impl<'a, T: Scalar> Ensemble<'a, T> {
    pub fn pure(basis: &'a SectorBasis, state: &'a [T]) -> Result<Self> {
        Self::mixture(basis, [state])
    }

    pub fn mixture<I: IntoIterator<Item = &'a [T]>>(basis: &'a SectorBasis, states: I) -> Result<Self> {
        let states: Vec<&'a [T]> = states.into_iter().collect();
        if states.is_empty() {
            return Err(Error::InvalidParameter { name: "states", reason: "empty ensemble".into() });
        }
        for s in &states {
            if s.len() != basis.dim() {
                return Err(Error::SectorMismatch(format!(
                    "state has {} amplitudes, sector dimension is {}",
                    s.len(),
                    basis.dim()
                )));
            }
            let n = crate::eigen::norm(s);
            if (n - 1.0).abs() > NORM_TOL {
                return Err(Error::InvalidParameter {
                    name: "state",
                    reason: format!("state norm {n} differs from 1"),
                });
            }
        }
        Ok(Ensemble { basis, states })
    }

    pub fn from_vectors(basis: &'a SectorBasis, states: &'a [Vec<T>]) -> Result<Self> {
        Self::mixture(basis, states.iter().map(|v| v.as_slice()))
    }

    pub fn basis(&self) -> &SectorBasis {
        self.basis
    }

    pub fn n_sites(&self) -> usize {
        self.basis.n_sites()
    }

    /// `<O_1 O_2 ... O_k>` for `ops = [(site_1, O_1), ...]`, applied right to left.
    pub fn expectation(&self, ops: &[(usize, SiteOp)]) -> Result<C64> {
        let n = self.n_sites();
        if let Some(&(site, _)) = ops.iter().find(|(s, _)| *s >= n) {
            return Err(Error::WindowOutOfRange(format!("site {site} outside chain of {n}")));
        }
        let mut total = C64::new(0.0, 0.0);
        let mut images: Vec<(u32, C64)> = Vec::new();
        for psi in &self.states {
            let mut acc = C64::new(0.0, 0.0);
            for (i, &amp) in psi.iter().enumerate() {
                if amp.modulus_squared() == 0.0 {
                    continue;
                }
                images.clear();
                apply_product(ops, self.basis.state(i), &mut images);
                for &(cfg, coeff) in &images {
                    if let Some(j) = self.basis.index_of(cfg) {
                        acc += psi[j].to_c64().conj() * coeff * amp.to_c64();
                    }
                }
            }
            total += acc;
        }
        Ok(total / self.states.len() as f64)
    }

    fn real_expectation(&self, ops: &[(usize, SiteOp)]) -> Result<f64> {
        Ok(self.expectation(ops)?.re)
    }
}

/// Images of `config` under a product of site operators.
fn apply_product(ops: &[(usize, SiteOp)], config: u32, out: &mut Vec<(u32, C64)>) {
    out.push((config, C64::new(1.0, 0.0)));
    let mut next = Vec::new();
    for &(site, op) in ops.iter().rev() {
        next.clear();
        let bit = 1u32 << site;
        for &(cfg, c) in out.iter() {
            let up = cfg & bit != 0;
            match op {
                SiteOp::Z => next.push((cfg, c * if up { 0.5 } else { -0.5 })),
                SiteOp::Plus => {
                    if !up {
                        next.push((cfg | bit, c));
                    }
                }
                SiteOp::Minus => {
                    if up {
                        next.push((cfg & !bit, c));
                    }
                }
                // S^x = (S+ + S-)/2, S^y = (S+ - S-)/(2i); either flips the spin.
                SiteOp::X => next.push((cfg ^ bit, c * 0.5)),
                SiteOp::Y => {
                    let factor = if up { C64::new(0.0, 0.5) } else { C64::new(0.0, -0.5) };
                    next.push((cfg ^ bit, c * factor));
                }
            }
        }
        std::mem::swap(out, &mut next);
        if out.is_empty() {
            return;
        }
    }
}

pub fn local_magnetization<T: Scalar>(ens: &Ensemble<'_, T>) -> Vec<f64> {
    let n = ens.n_sites();
    let mut out = vec![0.0; n];
    for psi in &ens.states {
        for (i, amp) in psi.iter().enumerate() {
            let w = amp.modulus_squared();
            let cfg = ens.basis.state(i);
            for (site, value) in out.iter_mut().enumerate() {
                *value += w * if cfg >> site & 1 == 1 { 0.5 } else { -0.5 };
            }
        }
    }
    let k = ens.states.len() as f64;
    out.iter().map(|v| v / k).collect()
}

/// `<S^nu_i S^nu_j>` without subtraction.
pub fn pair_correlation<T: Scalar>(ens: &Ensemble<'_, T>, axis: Axis, i: usize, j: usize) -> Result<f64> {
    let op = SiteOp::from(axis);
    ens.real_expectation(&[(i, op), (j, op)])
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrelationProfile {
    pub axis: Axis,
    pub reference: usize,
    /// `values[r - 1]` is `C(r)`.
    pub values: Vec<f64>,
}

/// Connected correlations `C(r) = <S_c S_{c+r}> - <S_c><S_{c+r}>` for
/// `r = 1..=r_max`. In a magnetization sector `<S^x> = <S^y> = 0`.
pub fn two_point_correlations<T: Scalar>(
    ens: &Ensemble<'_, T>,
    axis: Axis,
    reference: usize,
    r_max: usize,
) -> Result<CorrelationProfile> {
    let n = ens.n_sites();
    if reference + r_max >= n {
        return Err(Error::WindowOutOfRange(format!(
            "reference {reference} + r_max {r_max} exceeds the last site {}",
            n - 1
        )));
    }
    let mz = if axis == Axis::Z { local_magnetization(ens) } else { vec![0.0; n] };
    let values = (1..=r_max)
        .map(|r| {
            let j = reference + r;
            Ok(pair_correlation(ens, axis, reference, j)? - mz[reference] * mz[j])
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(CorrelationProfile { axis, reference, values })
}

/// Rows `(r, C_x, C_y, C_z)`.
pub fn correlation_table<T: Scalar>(
    ens: &Ensemble<'_, T>,
    reference: usize,
    r_max: usize,
) -> Result<Vec<(usize, f64, f64, f64)>> {
    let x = two_point_correlations(ens, Axis::X, reference, r_max)?;
    let y = two_point_correlations(ens, Axis::Y, reference, r_max)?;
    let z = two_point_correlations(ens, Axis::Z, reference, r_max)?;
    Ok((1..=r_max).map(|r| (r, x.values[r - 1], y.values[r - 1], z.values[r - 1])).collect())
}

/// `<S_i . S_j>`.
pub fn spin_dot<T: Scalar>(ens: &Ensemble<'_, T>, i: usize, j: usize) -> Result<f64> {
    Ok(pair_correlation(ens, Axis::Z, i, j)? + 2.0 * pair_correlation(ens, Axis::X, i, j)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BondWindow {
    pub start: usize,
    pub len: usize,
}

impl BondWindow {
    /// Central half of an open chain, or the whole ring.
    pub fn default_for(n: usize, boundary: Boundary) -> Self {
        match boundary {
            Boundary::Obc => BondWindow { start: n / 4, len: n / 2 },
            Boundary::Pbc => BondWindow { start: 0, len: n },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BondOrderResult {
    pub period: usize,
    pub value: (f64, f64),
    pub abs: f64,
    pub window: BondWindow,
}

/// `O_p = (1/L) sum_{n=n0}^{n0+L-1} <S_n . S_{n+1}> e^{-2 pi i n / p}`.
pub fn bond_order<T: Scalar>(
    ens: &Ensemble<'_, T>,
    period: usize,
    window: BondWindow,
    boundary: Boundary,
) -> Result<BondOrderResult> {
    let n = ens.n_sites();
    if period == 0 {
        return Err(Error::InvalidParameter { name: "period", reason: "must be >= 1".into() });
    }
    let last_bond = window.start + window.len;
    let fits = match boundary {
        Boundary::Obc => window.len > 0 && last_bond < n,
        Boundary::Pbc => window.len > 0 && window.len <= n,
    };
    if !fits {
        return Err(Error::WindowOutOfRange(format!(
            "bonds {}..{} do not fit a {boundary:?} chain of {n} sites",
            window.start, last_bond
        )));
    }
    let mut acc = C64::new(0.0, 0.0);
    for b in window.start..last_bond {
        let (i, j) = (b % n, (b + 1) % n);
        let e = spin_dot(ens, i, j)?;
        let phase = -std::f64::consts::TAU * b as f64 / period as f64;
        acc += C64::from_polar(e, phase);
    }
    let o = acc / window.len as f64;
    Ok(BondOrderResult { period, value: (o.re, o.im), abs: o.norm(), window })
}

/// `D(r) = <B_n B_{n+r}>` with `B_j = S^nu_j S^nu_{j+1}`.
pub fn bond_bond_correlator<T: Scalar>(ens: &Ensemble<'_, T>, axis: Axis, n0: usize, r: usize) -> Result<f64> {
    let n = ens.n_sites();
    if n0 + r + 1 >= n {
        return Err(Error::WindowOutOfRange(format!(
            "bond {} + {r} leaves the chain of {n} sites",
            n0
        )));
    }
    let op = SiteOp::from(axis);
    Ok(ens
        .expectation(&[(n0, op), (n0 + 1, op), (n0 + r, op), (n0 + r + 1, op)])?
        .re)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Multipolar {
    /// Two-magnon `<S+_{n-1} S+_n S-_{n+r} S-_{n+r+1}>`.
    C2,
    /// Three-magnon `<S+_{n-2} S+_{n-1} S+_n S-_{n+r} S-_{n+r+1} S-_{n+r+2}>`.
    C3,
    /// Chirality `<kappa_n kappa_{n+r}>`, `kappa_n = S^x_n S^y_{n+1} - S^y_n S^x_{n+1}`.
    Kappa,
}

impl std::str::FromStr for Multipolar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "c2" => Ok(Multipolar::C2),
            "c3" => Ok(Multipolar::C3),
            "ckappa" | "kappa" => Ok(Multipolar::Kappa),
            other => Err(Error::InvalidParameter {
                name: "kind",
                reason: format!("unknown correlator `{other}` (expected c2|c3|ckappa)"),
            }),
        }
    }
}

/// `(lowest site, highest site)` of the operator support anchored at `n`.
fn support(kind: Multipolar, n: i64, r: i64) -> (i64, i64) {
    match kind {
        Multipolar::C2 => (n - 1, n + r + 1),
        Multipolar::C3 => (n - 2, n + r + 2),
        Multipolar::Kappa => (n, n + r + 1),
    }
}

fn multipolar_at<T: Scalar>(ens: &Ensemble<'_, T>, kind: Multipolar, n: usize, r: usize) -> Result<C64> {
    use SiteOp::*;
    match kind {
        Multipolar::C2 => ens.expectation(&[(n - 1, Plus), (n, Plus), (n + r, Minus), (n + r + 1, Minus)]),
        Multipolar::C3 => ens.expectation(&[
            (n - 2, Plus),
            (n - 1, Plus),
            (n, Plus),
            (n + r, Minus),
            (n + r + 1, Minus),
            (n + r + 2, Minus),
        ]),
        Multipolar::Kappa => {
            let m = n + r;
            let terms = [
                (1.0, [(n, X), (n + 1, Y), (m, X), (m + 1, Y)]),
                (-1.0, [(n, X), (n + 1, Y), (m, Y), (m + 1, X)]),
                (-1.0, [(n, Y), (n + 1, X), (m, X), (m + 1, Y)]),
                (1.0, [(n, Y), (n + 1, X), (m, Y), (m + 1, X)]),
            ];
            let mut acc = C64::new(0.0, 0.0);
            for (sign, ops) in terms {
                acc += ens.expectation(&ops)? * sign;
            }
            Ok(acc)
        }
    }
}

/// Multipolar correlator at separation `r`, averaged over the anchors `n`
/// whose operator support is centred closest to the middle of the chain.
pub fn multipolar_correlator<T: Scalar>(ens: &Ensemble<'_, T>, kind: Multipolar, r: usize) -> Result<C64> {
    let n_sites = ens.n_sites() as i64;
    let r_i = r as i64;
    let anchors: Vec<i64> = (0..n_sites)
        .filter(|&n| {
            let (lo, hi) = support(kind, n, r_i);
            lo >= 0 && hi < n_sites
        })
        .collect();
    if anchors.is_empty() {
        return Err(Error::WindowOutOfRange(format!("{kind:?} at r = {r} does not fit {n_sites} sites")));
    }
    // Twice the distance between support centre and chain centre, in integers.
    let offset = |n: i64| {
        let (lo, hi) = support(kind, n, r_i);
        ((lo + hi) - (n_sites - 1)).abs()
    };
    let best = anchors.iter().map(|&n| offset(n)).min().expect("nonempty");
    let chosen: Vec<usize> = anchors.into_iter().filter(|&n| offset(n) == best).map(|n| n as usize).collect();
    let mut acc = C64::new(0.0, 0.0);
    for &n in &chosen {
        acc += multipolar_at(ens, kind, n, r)?;
    }
    Ok(acc / chosen.len() as f64)
}
