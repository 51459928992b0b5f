//! Adiabatic preparation of ground states along `H(s) = a(s) H_z + b(s) H_xy`
//! with gap-adapted schedules, lossless and lossy evolution.
//!
//! `H_z = -sum_{i<j} J_ij S^z_i S^z_j` and
//! `H_xy = -sum_{i<j} (J_ij / 2)(S+_i S-_j + h.c.)`, both in units of `J~`;
//! times are in units of `1/J~`. Both terms conserve the magnetization, so
//! everything lives in one sector.

mod evolve;
mod lindblad;

pub use evolve::{
    evolve_pure, lossy_fidelity, Evolution, EvolveOptions, InitialState, IntegratorStats, LossMethod, LossyFidelity,
    TrajectoryPoint,
};
pub use lindblad::lindblad_fidelity;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DVector;
use ode_solvers::{Dopri5, OutputType, System};
use rayon::prelude::*;
use serde::Serialize;

use crate::basis::enumerate_sector;
use crate::couplings::CouplingMatrix;
use crate::eigen::{lowest_eigenpairs, EigenOptions};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_sector_hamiltonian, Anisotropy, LinearOperator, Scalar, SectorHamiltonian};

/// Fields are switched off linearly over `s` in `[FIELD_OFF_START, 1]`.
pub const FIELD_OFF_START: f64 = 0.8;
pub const DEFAULT_GRID: usize = 200;
pub const DEFAULT_EXCITED: usize = 10;
/// Smallest admissible instantaneous gap along a gap-adapted schedule.
pub const GAP_FLOOR: f64 = 1e-8;

type Curve = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum PathKind {
    /// `a(s) = 1`, `b(s) = s`.
    SimpleZThenXY,
    Custom { a: Curve, b: Curve },
}

impl fmt::Debug for PathKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathKind::SimpleZThenXY => write!(f, "SimpleZThenXY"),
            PathKind::Custom { .. } => write!(f, "Custom"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Path {
    kind: PathKind,
}

/// Validates that the path stays in `|a|, |b| <= 1` on a fine sample of `s`.
pub fn build_path(kind: PathKind) -> Result<Path> {
    let path = Path { kind };
    for k in 0..=1000 {
        let s = k as f64 / 1000.0;
        let (a, b) = path.eval(s);
        if !(a.abs() <= 1.0 && b.abs() <= 1.0) {
            return Err(Error::PathOutOfRange { s });
        }
    }
    Ok(path)
}

impl Path {
    pub fn simple() -> Path {
        Path { kind: PathKind::SimpleZThenXY }
    }

    pub fn constant(a: f64, b: f64) -> Result<Path> {
        build_path(PathKind::Custom { a: Arc::new(move |_| a), b: Arc::new(move |_| b) })
    }

    pub fn kind(&self) -> &PathKind {
        &self.kind
    }

    pub fn eval(&self, s: f64) -> (f64, f64) {
        match &self.kind {
            PathKind::SimpleZThenXY => (1.0, s),
            PathKind::Custom { a, b } => (a(s), b(s)),
        }
    }

    /// `(a'(s), b'(s))`; custom paths use central differences, one-sided at
    /// the ends of `[0, 1]`.
    pub fn derivative(&self, s: f64) -> (f64, f64) {
        match &self.kind {
            PathKind::SimpleZThenXY => (0.0, 1.0),
            PathKind::Custom { a, b } => {
                let h = 1e-6;
                let lo = (s - h).max(0.0);
                let hi = (s + h).min(1.0);
                ((a(hi) - a(lo)) / (hi - lo), (b(hi) - b(lo)) / (hi - lo))
            }
        }
    }
}

/// Weight of the optional local fields at `s`.
pub fn field_weight(s: f64) -> f64 {
    if s <= FIELD_OFF_START {
        1.0
    } else {
        ((1.0 - s) / (1.0 - FIELD_OFF_START)).max(0.0)
    }
}

fn field_weight_derivative(s: f64) -> f64 {
    if s <= FIELD_OFF_START {
        0.0
    } else {
        -1.0 / (1.0 - FIELD_OFF_START)
    }
}

/// Sector Hamiltonian plus path and optional local fields `sum_j h_j S^z_j`.
#[derive(Debug, Clone)]
pub struct AdiabaticProblem {
    pub hamiltonian: SectorHamiltonian,
    pub path: Path,
    /// `sum_j h_j s_j` per basis state; empty when no fields are applied.
    pub(crate) field_diag: Vec<f64>,
    pub(crate) couplings: CouplingMatrix,
    pub(crate) fields: Option<Vec<f64>>,
}

impl AdiabaticProblem {
    pub fn new(cm: &CouplingMatrix, n_up: usize, path: Path, fields: Option<&[f64]>) -> Result<Self> {
        let basis = Arc::new(enumerate_sector(cm.size(), n_up)?);
        let hamiltonian = build_sector_hamiltonian(cm, basis, Anisotropy::Weights { a: 1.0, b: 1.0 }, None)?;
        let field_diag = match fields {
            None => Vec::new(),
            Some(h) => {
                if h.len() != cm.size() {
                    return Err(Error::SizeMismatch { expected: cm.size(), got: h.len() });
                }
                hamiltonian
                    .basis()
                    .states()
                    .iter()
                    .map(|&st| {
                        h.iter()
                            .enumerate()
                            .map(|(j, hj)| if (st >> j) & 1 == 1 { 0.5 * hj } else { -0.5 * hj })
                            .sum()
                    })
                    .collect()
            }
        };
        Ok(AdiabaticProblem {
            hamiltonian,
            path,
            field_diag,
            couplings: cm.clone(),
            fields: fields.map(|f| f.to_vec()),
        })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn n_up(&self) -> usize {
        self.hamiltonian.basis().n_up()
    }

    pub fn has_fields(&self) -> bool {
        !self.field_diag.is_empty()
    }

    /// `H(s)` as an operator.
    pub fn at(&self, s: f64) -> PathOperator<'_> {
        let (a, b) = self.path.eval(s);
        let g = if self.has_fields() { field_weight(s) } else { 0.0 };
        PathOperator { problem: self, a, b, g }
    }

    /// `dH/ds` as an operator.
    pub fn derivative_at(&self, s: f64) -> PathOperator<'_> {
        let (a, b) = self.path.derivative(s);
        let g = if self.has_fields() { field_weight_derivative(s) } else { 0.0 };
        PathOperator { problem: self, a, b, g }
    }

    /// Diagonal of `H(s)` in the configuration basis.
    pub fn diagonal_at(&self, s: f64) -> Vec<f64> {
        let op = self.at(s);
        (0..self.dim())
            .map(|i| {
                op.a * self.hamiltonian.ising_diagonal()[i]
                    + if self.has_fields() { op.g * self.field_diag[i] } else { 0.0 }
            })
            .collect()
    }

    /// Lowest configuration of `H(0)` restricted to the diagonal; ties go to
    /// the smallest bit pattern and are flagged.
    pub fn lowest_ising_configuration(&self) -> (usize, bool) {
        let diag = self.diagonal_at(0.0);
        let e0 = diag.iter().copied().fold(f64::INFINITY, f64::min);
        let tol = 1e-12 * e0.abs().max(1.0);
        let ties: Vec<usize> = (0..diag.len()).filter(|&i| diag[i] <= e0 + tol).collect();
        let states = self.hamiltonian.basis().states();
        let best = *ties.iter().min_by_key(|&&i| states[i]).expect("nonempty sector");
        (best, ties.len() > 1)
    }
}

/// `a H_z + b H_xy + g sum_j h_j S^z_j` at fixed weights.
#[derive(Debug, Clone, Copy)]
pub struct PathOperator<'a> {
    problem: &'a AdiabaticProblem,
    pub a: f64,
    pub b: f64,
    pub g: f64,
}

impl<T: Scalar> LinearOperator<T> for PathOperator<'_> {
    fn dim(&self) -> usize {
        self.problem.dim()
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        self.problem.hamiltonian.at(self.a, self.b).apply(x, y);
        if self.problem.has_fields() && self.g != 0.0 {
            for (i, f) in self.problem.field_diag.iter().enumerate() {
                y[i] += x[i].scale(self.g * f);
            }
        }
    }
}

impl PathOperator<'_> {
    /// Frobenius norm inside the sector.
    pub fn frobenius(&self) -> f64 {
        let (z, xy) = self.problem.hamiltonian.frobenius_sq();
        if !self.problem.has_fields() {
            return (self.a * self.a * z + self.b * self.b * xy).sqrt();
        }
        let diag: f64 = self
            .problem
            .hamiltonian
            .ising_diagonal()
            .iter()
            .zip(&self.problem.field_diag)
            .map(|(d, f)| (self.a * d + self.g * f).powi(2))
            .sum();
        (diag + self.b * self.b * xy).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    /// `ds/dt` constant.
    Uniform,
    /// `ds/dt ~ Delta^2 / ||dH/ds||_HS`.
    Hs,
    /// `ds/dt ~ min_n Delta_n^2 / |<n|dH/ds|0>|`.
    MinMatrixElement,
}

impl FromStr for ScheduleKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(ScheduleKind::Uniform),
            "hs" => Ok(ScheduleKind::Hs),
            "min-matrix-element" | "mme" | "f" => Ok(ScheduleKind::MinMatrixElement),
            other => Err(Error::InvalidParameter {
                name: "schedule",
                reason: format!("expected uniform, hs or min-matrix-element, got `{other}`"),
            }),
        }
    }
}

/// Sweep-rate profile `ds/dt = c f(s)` on an `s` grid. The constant `c` is
/// fixed by the total time, `c = int_0^1 ds / f(s) / T`, and `1/f` is
/// interpolated linearly between nodes.
#[derive(Debug, Clone, Serialize)]
pub struct Schedule {
    pub kind: ScheduleKind,
    pub grid: Vec<f64>,
    /// `f(s)` at the nodes.
    pub rate: Vec<f64>,
    /// `E_1 - E_0` at the nodes (empty for the uniform schedule).
    pub gap: Vec<f64>,
    /// `int_0^{s_k} ds / f`.
    cumulative: Vec<f64>,
}

impl Schedule {
    pub fn uniform() -> Schedule {
        Self::from_rates(ScheduleKind::Uniform, vec![0.0, 1.0], vec![1.0, 1.0], Vec::new())
    }

    fn from_rates(kind: ScheduleKind, grid: Vec<f64>, rate: Vec<f64>, gap: Vec<f64>) -> Schedule {
        let mut cumulative = vec![0.0; grid.len()];
        for k in 1..grid.len() {
            let h = grid[k] - grid[k - 1];
            cumulative[k] = cumulative[k - 1] + 0.5 * h * (1.0 / rate[k - 1] + 1.0 / rate[k]);
        }
        Schedule { kind, grid, rate, gap, cumulative }
    }

    /// `int_0^1 ds / f(s)`; `T` divided by this is the rate constant.
    pub fn normalization(&self) -> f64 {
        *self.cumulative.last().expect("grid has nodes")
    }

    fn segment(&self, s: f64) -> usize {
        let k = self.grid.partition_point(|&g| g <= s);
        k.clamp(1, self.grid.len() - 1) - 1
    }

    fn inverse_rate(&self, s: f64) -> f64 {
        let k = self.segment(s);
        let (s0, s1) = (self.grid[k], self.grid[k + 1]);
        let u = ((s - s0) / (s1 - s0)).clamp(0.0, 1.0);
        (1.0 - u) / self.rate[k] + u / self.rate[k + 1]
    }

    /// `dt/ds` for total time `T`.
    pub fn dt_ds(&self, s: f64, total_time: f64) -> f64 {
        total_time * self.inverse_rate(s) / self.normalization()
    }

    /// Elapsed time at `s`.
    pub fn t_of_s(&self, s: f64, total_time: f64) -> f64 {
        let s = s.clamp(0.0, 1.0);
        let k = self.segment(s);
        let (s0, w0) = (self.grid[k], 1.0 / self.rate[k]);
        let w = self.inverse_rate(s);
        let partial = self.cumulative[k] + 0.5 * (s - s0) * (w0 + w);
        total_time * partial / self.normalization()
    }

    /// Inverse of `t_of_s` by bisection.
    pub fn s_of_t(&self, t: f64, total_time: f64) -> f64 {
        if total_time <= 0.0 || t <= 0.0 {
            return 0.0;
        }
        if t >= total_time {
            return 1.0;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.t_of_s(mid, total_time) < t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Gap-adapted schedule from exact diagonalization on `grid` equally spaced
/// nodes, using the lowest `n_excited` excitations. Nodes run in parallel.
pub fn schedule_from_gap(
    problem: &AdiabaticProblem,
    kind: ScheduleKind,
    grid: usize,
    n_excited: usize,
    eigen: &EigenOptions,
) -> Result<Schedule> {
    if grid < 2 {
        return Err(Error::InvalidParameter { name: "grid", reason: format!("need at least 2 nodes, got {grid}") });
    }
    let nodes: Vec<f64> = (0..grid).map(|k| k as f64 / (grid - 1) as f64).collect();
    if kind == ScheduleKind::Uniform {
        return Ok(Schedule::from_rates(kind, nodes, vec![1.0; grid], Vec::new()));
    }
    let k = (n_excited + 1).min(problem.dim());
    if k < 2 {
        return Err(Error::InvalidParameter { name: "sector", reason: "a one-state sector has no gap".into() });
    }
    let opts = EigenOptions { k, want_vectors: kind == ScheduleKind::MinMatrixElement, ..*eigen };
    let per_node: Vec<Result<(f64, f64)>> = nodes
        .par_iter()
        .map(|&s| node_rate(problem, kind, s, &opts))
        .collect();
    let mut rate = Vec::with_capacity(grid);
    let mut gap = Vec::with_capacity(grid);
    for r in per_node {
        let (f, g) = r?;
        rate.push(f);
        gap.push(g);
    }
    Ok(Schedule::from_rates(kind, nodes, rate, gap))
}

/// Levels closer than this belong to one degenerate cluster.
const CLUSTER_TOL: f64 = 1e-9;

fn node_rate(problem: &AdiabaticProblem, kind: ScheduleKind, s: f64, opts: &EigenOptions) -> Result<(f64, f64)> {
    let pairs = lowest_eigenpairs::<f64, _>(&problem.at(s), opts)?;
    let e = &pairs.values;
    let gap = e[1] - e[0];
    if gap < GAP_FLOOR {
        return Err(Error::GaplessPath { gap, s });
    }
    let dh = problem.derivative_at(s);
    let f = match kind {
        ScheduleKind::Uniform => 1.0,
        ScheduleKind::Hs => gap * gap / dh.frobenius(),
        ScheduleKind::MinMatrixElement => {
            let ground = &pairs.vectors[0];
            let mut dpsi = vec![0.0; problem.dim()];
            LinearOperator::<f64>::apply(&dh, ground, &mut dpsi);
            // Matrix elements inside a degenerate cluster are combined in
            // quadrature so the result does not depend on the basis chosen.
            let mut best = f64::INFINITY;
            let mut n = 1;
            while n < e.len() {
                let mut m = n;
                let mut weight = 0.0;
                while m < e.len() && e[m] - e[n] < CLUSTER_TOL {
                    let me: f64 = pairs.vectors[m].iter().zip(&dpsi).map(|(u, v)| u * v).sum();
                    weight += me * me;
                    m += 1;
                }
                let element = weight.sqrt();
                if element > 1e-12 {
                    let delta = e[n] - e[0];
                    best = best.min(delta * delta / element);
                }
                n = m;
            }
            if best.is_finite() {
                best
            } else {
                // No excitation couples: fall back to the gap-only rate.
                gap * gap
            }
        }
    };
    Ok((f, gap))
}

/// Chunks per integration span. Each chunk keeps all accepted steps in
/// memory (the stepper's dense output is not used), so long runs are split.
const CHUNKS: usize = 32;

/// Dormand–Prince 5(4) from `s0` to `s1`, returning the end state and stats.
pub(crate) fn dopri_span<S, F>(make: F, y: DVector<f64>, s0: f64, s1: f64, opts: &EvolveOptions) -> Result<(DVector<f64>, IntegratorStats)>
where
    S: System<f64, DVector<f64>>,
    F: Fn() -> S,
{
    let mut y = y;
    let mut stats = IntegratorStats::default();
    let h = (s1 - s0) / CHUNKS as f64;
    for c in 0..CHUNKS {
        let a = s0 + c as f64 * h;
        let b = if c + 1 == CHUNKS { s1 } else { a + h };
        let mut stepper = Dopri5::from_param(
            make(),
            a,
            b,
            b - a,
            y,
            opts.rtol,
            opts.atol,
            0.9,
            0.04,
            0.2,
            10.0,
            b - a,
            0.0,
            opts.max_steps,
            u32::MAX,
            OutputType::Sparse,
        );
        let st = stepper.integrate().map_err(|e| Error::IntegratorFailure(e.to_string()))?;
        stats.accepted_steps += st.accepted_steps as u64;
        stats.rejected_steps += st.rejected_steps as u64;
        stats.evaluations += st.num_eval as u64;
        let (xs, ys) = stepper.results().get();
        y = match (xs.last(), ys.last()) {
            (Some(&x), Some(v)) if (x - b).abs() <= 1e-9 * b.abs().max(1.0) => v.clone(),
            _ => return Err(Error::IntegratorFailure(format!("stepper stopped short of s = {b}"))),
        };
    }
    Ok((y, stats))
}

/// Ground multiplet of `H(1)`.
pub(crate) fn target_multiplet(problem: &AdiabaticProblem, eigen: &EigenOptions) -> Result<(Vec<Vec<f64>>, f64)> {
    let k = 4.min(problem.dim());
    let opts = EigenOptions { k, want_vectors: true, ..*eigen };
    let pairs = lowest_eigenpairs::<f64, _>(&problem.at(1.0), &opts)?;
    let e0 = pairs.values[0];
    let tol = 1e-8 * e0.abs().max(1.0);
    let d = pairs.values.iter().take_while(|&&e| e - e0 <= tol).count();
    Ok((pairs.vectors.into_iter().take(d).collect(), e0))
}
