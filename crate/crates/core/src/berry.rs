//! Many-body Berry phases under a twist `e^{-i phi} S+_p S-_q + h.c.` of a
//! single exchange term, and the SPT classification they induce.
//!
//! The phase is accumulated from overlap determinants between the ground
//! multiplets at consecutive nodes of a uniform `phi` grid, which makes it
//! independent of the basis chosen inside each multiplet.

use std::f64::consts::{PI, TAU};
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::basis::enumerate_sector;
use crate::couplings::{Boundary, CouplingMatrix};
use crate::eigen::{inner, lowest_eigenpairs, EigenOptions};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_sector_hamiltonian, Anisotropy, Twist, C64};

pub const DEFAULT_NODES: usize = 64;
pub const MAX_NODES: usize = 1024;

/// Twisted spin pair relative to the unit cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PairKind {
    /// A and B spins of the same cell.
    Intra,
    /// B spin of one cell and A spin of the next.
    Inter,
}

impl FromStr for PairKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "intra" => Ok(PairKind::Intra),
            "inter" => Ok(PairKind::Inter),
            other => Err(Error::InvalidParameter {
                name: "pair",
                reason: format!("expected intra or inter, got `{other}`"),
            }),
        }
    }
}

/// Representative pair of the given kind, placed at the start of the ring.
pub fn pair_sites(n: usize, kind: PairKind) -> (usize, usize) {
    match kind {
        PairKind::Intra => (0, 1),
        PairKind::Inter => (1, 2 % n),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BerryOptions {
    /// Initial number of `phi` nodes.
    pub nodes: usize,
    /// Double the node count until the phase moves by less than
    /// `refine_tol`, up to `MAX_NODES`.
    pub auto_refine: bool,
    pub refine_tol: f64,
    /// Smallest admissible gap between the multiplet and the next level.
    pub gap_threshold: f64,
    /// Largest admissible ratio of the multiplet width to that gap at
    /// `phi = 0`. The twist itself splits the multiplet, so away from
    /// `phi = 0` only the gap is checked.
    pub max_split_ratio: f64,
    pub eigen: EigenOptions,
}

impl Default for BerryOptions {
    fn default() -> Self {
        BerryOptions {
            nodes: DEFAULT_NODES,
            auto_refine: true,
            refine_tol: 1e-3,
            gap_threshold: 1e-6,
            max_split_ratio: 0.1,
            eigen: EigenOptions::default(),
        }
    }
}

/// Ground multiplets along the closed twist path.
#[derive(Debug, Clone)]
pub struct BerryPath {
    pub pair: (usize, usize),
    pub d: usize,
    pub phis: Vec<f64>,
    /// `multiplets[n][mu]` is the `mu`-th state at `phis[n]`.
    pub multiplets: Vec<Vec<Vec<C64>>>,
    /// Lowest `d + 1` levels at each node.
    pub levels: Vec<Vec<f64>>,
    pub min_gap: f64,
    /// Multiplet width over the gap to the next level at `phi = 0`.
    pub split_ratio: f64,
}

impl BerryPath {
    pub fn nodes(&self) -> usize {
        self.phis.len()
    }

    /// The same loop traversed backwards.
    pub fn reversed(&self) -> BerryPath {
        let mut out = self.clone();
        out.phis.reverse();
        out.multiplets.reverse();
        out.levels.reverse();
        out
    }
}

fn validate_pair(cm: &CouplingMatrix, pair: (usize, usize)) -> Result<()> {
    let n = cm.size();
    let (p, q) = pair;
    if p >= n || q >= n || p == q {
        return Err(Error::InvalidParameter {
            name: "pair",
            reason: format!("({p}, {q}) is not a pair of distinct sites of {n}"),
        });
    }
    if p % 2 == q % 2 {
        return Err(Error::InvalidParameter {
            name: "pair",
            reason: format!("sites {p} and {q} lie on the same sublattice"),
        });
    }
    if cm.boundary() != Boundary::Pbc {
        return Err(Error::BoundaryUnsupported(
            "Berry phases are quantized only on periodic chains".into(),
        ));
    }
    Ok(())
}

/// Lowest `d` states of the twisted Hamiltonian on `nodes` equally spaced
/// angles in `[0, 2 pi)`. Nodes are diagonalized in parallel.
pub fn twisted_ground_multiplet(
    cm: &CouplingMatrix,
    n_up: usize,
    theta: f64,
    pair: (usize, usize),
    nodes: usize,
    d: usize,
    opts: &BerryOptions,
) -> Result<BerryPath> {
    validate_pair(cm, pair)?;
    if nodes < 3 {
        return Err(Error::InvalidParameter { name: "nodes", reason: format!("need at least 3, got {nodes}") });
    }
    let basis = Arc::new(enumerate_sector(cm.size(), n_up)?);
    if d == 0 || d >= basis.dim() {
        return Err(Error::InvalidParameter {
            name: "d",
            reason: format!("need 1 <= d < sector dimension {}, got {d}", basis.dim()),
        });
    }
    let phis: Vec<f64> = (0..nodes).map(|k| TAU * k as f64 / nodes as f64).collect();
    let eig = EigenOptions { k: d + 1, want_vectors: true, ..opts.eigen };
    let solved: Vec<Result<(Vec<f64>, Vec<Vec<C64>>)>> = phis
        .par_iter()
        .map(|&phi| {
            let twist = Twist { p: pair.0, q: pair.1, phi };
            let h = build_sector_hamiltonian(cm, basis.clone(), Anisotropy::Angle(theta), Some(twist))?;
            let pairs = lowest_eigenpairs::<C64, _>(&h.as_operator(), &eig)?;
            Ok((pairs.values, pairs.vectors))
        })
        .collect();

    let mut levels = Vec::with_capacity(nodes);
    let mut multiplets = Vec::with_capacity(nodes);
    let mut min_gap = f64::INFINITY;
    let mut split_ratio = 0.0;
    for (r, &phi) in solved.into_iter().zip(&phis) {
        let (values, mut vectors) = r?;
        let gap = values[d] - values[d - 1];
        if gap < opts.gap_threshold {
            return Err(Error::GapCollapse { gap, phi });
        }
        if phi == 0.0 {
            split_ratio = (values[d - 1] - values[0]) / gap;
            if split_ratio > opts.max_split_ratio {
                return Err(Error::DegeneracyMismatch { d, phi, ratio: split_ratio });
            }
        }
        min_gap = min_gap.min(gap);
        vectors.truncate(d);
        levels.push(values);
        multiplets.push(vectors);
    }
    Ok(BerryPath { pair, d, phis, multiplets, levels, min_gap, split_ratio })
}

fn wrap(angle: f64) -> f64 {
    angle.rem_euclid(TAU)
}

/// `gamma = -sum_n arg det Phi_n` with
/// `(Phi_n)_{mu nu} = <GS_nu(phi_n)|GS_mu(phi_{n+1})>`, closed on the first node.
pub fn non_abelian_berry_phase(path: &BerryPath) -> Result<f64> {
    let k = path.nodes();
    let d = path.d;
    let mut total = 0.0;
    for n in 0..k {
        let here = &path.multiplets[n];
        let next = &path.multiplets[(n + 1) % k];
        let phi = DMatrix::from_fn(d, d, |mu, nu| inner(&here[nu], &next[mu]));
        let det = phi.determinant();
        if det.norm() < 1e-8 {
            return Err(Error::SingularOverlap(det.norm()));
        }
        total -= det.arg();
    }
    Ok(wrap(total))
}

/// Single-state version; fails on overlaps below `1e-6`.
pub fn abelian_berry_phase(path: &BerryPath) -> Result<f64> {
    if path.d != 1 {
        return Err(Error::InvalidParameter {
            name: "d",
            reason: format!("abelian phase needs a nondegenerate path, got d = {}", path.d),
        });
    }
    let k = path.nodes();
    let mut total = 0.0;
    for n in 0..k {
        let ov = inner(&path.multiplets[n][0], &path.multiplets[(n + 1) % k][0]);
        if ov.norm() < 1e-6 {
            return Err(Error::ZeroOverlap(ov.norm()));
        }
        total -= ov.arg();
    }
    Ok(wrap(total))
}

/// Distance between two angles on the circle.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = wrap(a - b);
    d.min(TAU - d)
}

/// `Some(0)` or `Some(pi)` when `gamma` lies within `tol` of either.
pub fn snap(gamma: f64, tol: f64) -> Option<f64> {
    if angle_distance(gamma, 0.0) <= tol {
        Some(0.0)
    } else if angle_distance(gamma, PI) <= tol {
        Some(PI)
    } else {
        None
    }
}

pub const DEFAULT_SNAP_TOL: f64 = 1e-2 * TAU;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SptClass {
    /// `(gamma_intra, gamma_inter) = (pi, 0)`: singlets inside the cells.
    Trivial,
    /// `(0, pi)`: singlets across the cells.
    Nontrivial,
    Unquantized,
    /// Both phases quantized to the same value, matching neither dimer pattern.
    Inconsistent,
}

pub fn classify_spt(gamma_intra: f64, gamma_inter: f64, tol: f64) -> SptClass {
    match (snap(gamma_intra, tol), snap(gamma_inter, tol)) {
        (Some(a), Some(b)) if a != 0.0 && b == 0.0 => SptClass::Trivial,
        (Some(a), Some(b)) if a == 0.0 && b != 0.0 => SptClass::Nontrivial,
        (Some(_), Some(_)) => SptClass::Inconsistent,
        _ => SptClass::Unquantized,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BerryReport {
    pub pair: [usize; 2],
    pub d: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub gamma: f64,
    /// `0` or `pi` when the phase snaps, else `null`.
    pub quantized: Option<f64>,
    /// `strong` (pi, entangled bond), `weak` (0) or `unquantized`.
    pub classification: &'static str,
    pub min_gap_along_path: f64,
}

/// Berry phase of one pair with automatic grid doubling.
pub fn berry_phase(
    cm: &CouplingMatrix,
    n_up: usize,
    theta: f64,
    pair: (usize, usize),
    d: usize,
    opts: &BerryOptions,
) -> Result<BerryReport> {
    let mut nodes = opts.nodes;
    let mut path = twisted_ground_multiplet(cm, n_up, theta, pair, nodes, d, opts)?;
    let mut gamma = non_abelian_berry_phase(&path)?;
    while opts.auto_refine && nodes < MAX_NODES {
        nodes = (2 * nodes).min(MAX_NODES);
        let finer = twisted_ground_multiplet(cm, n_up, theta, pair, nodes, d, opts)?;
        let g = non_abelian_berry_phase(&finer)?;
        let change = angle_distance(g, gamma);
        path = finer;
        gamma = g;
        if change < opts.refine_tol {
            break;
        }
    }
    let quantized = snap(gamma, DEFAULT_SNAP_TOL);
    let classification = match quantized {
        Some(q) if q == 0.0 => "weak",
        Some(_) => "strong",
        None => "unquantized",
    };
    Ok(BerryReport {
        pair: [pair.0, pair.1],
        d,
        k: path.nodes(),
        gamma,
        quantized,
        classification,
        min_gap_along_path: path.min_gap,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SptReport {
    pub intra: BerryReport,
    pub inter: BerryReport,
    pub phase: SptClass,
}

pub fn spt_phases(cm: &CouplingMatrix, n_up: usize, theta: f64, d: usize, opts: &BerryOptions) -> Result<SptReport> {
    let n = cm.size();
    let intra = berry_phase(cm, n_up, theta, pair_sites(n, PairKind::Intra), d, opts)?;
    let inter = berry_phase(cm, n_up, theta, pair_sites(n, PairKind::Inter), d, opts)?;
    let phase = classify_spt(intra.gamma, inter.gamma, DEFAULT_SNAP_TOL);
    Ok(SptReport { intra, inter, phase })
}
