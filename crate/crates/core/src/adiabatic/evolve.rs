//! Time evolution along a schedule. The state is integrated in the path
//! parameter `s`, with `d/ds = (dt/ds) d/dt`, so no inversion of `s(t)` is
//! needed during the run.

use std::str::FromStr;

use nalgebra::DVector;
use ode_solvers::System;
use serde::Serialize;

use super::{dopri_span, lindblad_fidelity, target_multiplet, AdiabaticProblem, Schedule};
use crate::eigen::EigenOptions;
use crate::error::{Error, Result};
use crate::hamiltonian::{LinearOperator, C64};

#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions {
    /// Relative and absolute local error tolerances of the Dormand–Prince
    /// stepper.
    pub rtol: f64,
    pub atol: f64,
    /// Norm drift grows roughly like `tol * T`, so long runs tighten the
    /// tolerances to `drift_budget / T` (never below `MIN_TOL`).
    pub drift_budget: Option<f64>,
    pub max_steps: u32,
    pub eigen: EigenOptions,
}

const MIN_TOL: f64 = 1e-13;

impl EvolveOptions {
    /// Tolerances actually used for a run of length `total_time`.
    pub fn effective(&self, total_time: f64) -> EvolveOptions {
        let mut o = *self;
        if let Some(b) = self.drift_budget {
            let cap = (b / total_time.max(1.0)).max(MIN_TOL);
            o.rtol = o.rtol.min(cap);
            o.atol = o.atol.min(cap);
        }
        o
    }
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            rtol: 1e-9,
            atol: 1e-9,
            drift_budget: Some(1e-8),
            max_steps: 200_000_000,
            eigen: EigenOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub enum InitialState {
    /// Lowest diagonal configuration of `H(0)`.
    LowestIsing,
    Given(Vec<C64>),
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct IntegratorStats {
    pub accepted_steps: u64,
    pub rejected_steps: u64,
    pub evaluations: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub s: f64,
    pub norm: f64,
    /// Overlap with the target ground multiplet.
    pub fidelity: f64,
    #[serde(skip)]
    pub state: Vec<C64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Evolution {
    pub total_time: f64,
    pub fidelity: f64,
    pub infidelity: f64,
    /// `| ||psi(T)|| - 1 |`, a diagnostic for the step control.
    pub norm_drift: f64,
    /// Basis index of the initial configuration, if it was chosen here.
    pub initial_index: Option<usize>,
    /// Several configurations tied for the lowest `H(0)` energy.
    pub initial_tie: bool,
    /// Dimension of the target ground level; fidelities above 1 state use the
    /// projector onto it.
    pub target_degeneracy: usize,
    pub target_energy: f64,
    pub trajectory: Vec<TrajectoryPoint>,
    pub stats: IntegratorStats,
    #[serde(skip)]
    pub final_state: Vec<C64>,
}

/// `d psi/ds = (dt/ds) (-i H(s) - kappa) psi` on `[Re psi; Im psi]`.
struct Schroedinger<'a> {
    problem: &'a AdiabaticProblem,
    schedule: &'a Schedule,
    total_time: f64,
    /// Diagonal decay rates; empty when lossless.
    kappa: &'a [f64],
}

impl System<f64, DVector<f64>> for Schroedinger<'_> {
    fn system(&self, s: f64, y: &DVector<f64>, dy: &mut DVector<f64>) {
        let n = self.problem.dim();
        let c = self.schedule.dt_ds(s, self.total_time);
        let op = self.problem.at(s);
        let (u, v) = y.as_slice().split_at(n);
        let (du, dv) = dy.as_mut_slice().split_at_mut(n);
        LinearOperator::<f64>::apply(&op, v, du);
        LinearOperator::<f64>::apply(&op, u, dv);
        for i in 0..n {
            let k = self.kappa.get(i).copied().unwrap_or(0.0);
            du[i] = c * (du[i] - k * u[i]);
            dv[i] = c * (-dv[i] - k * v[i]);
        }
    }
}

fn pack(psi: &[C64]) -> DVector<f64> {
    let n = psi.len();
    DVector::from_fn(2 * n, |i, _| if i < n { psi[i].re } else { psi[i - n].im })
}

fn unpack(y: &DVector<f64>) -> Vec<C64> {
    let n = y.len() / 2;
    (0..n).map(|i| C64::new(y[i], y[i + n])).collect()
}

/// Integrates from `s = 0` through the increasing `stops` (ending at 1),
/// returning the state at each stop.
fn integrate(
    problem: &AdiabaticProblem,
    schedule: &Schedule,
    total_time: f64,
    kappa: &[f64],
    psi0: &[C64],
    stops: &[f64],
    opts: &EvolveOptions,
) -> Result<(Vec<Vec<C64>>, IntegratorStats)> {
    let mut y = pack(psi0);
    let mut s = 0.0;
    let mut stats = IntegratorStats::default();
    let mut out = Vec::with_capacity(stops.len());
    for &stop in stops {
        if total_time > 0.0 && stop > s {
            let make = || Schroedinger { problem, schedule, total_time, kappa };
            let (next, st) = dopri_span(make, y, s, stop, opts)?;
            y = next;
            stats.accepted_steps += st.accepted_steps;
            stats.rejected_steps += st.rejected_steps;
            stats.evaluations += st.evaluations;
            s = stop;
        }
        out.push(unpack(&y));
    }
    Ok((out, stats))
}

fn fidelity(targets: &[Vec<f64>], psi: &[C64]) -> f64 {
    targets
        .iter()
        .map(|t| {
            let ov: C64 = t.iter().zip(psi).map(|(a, b)| b * *a).sum();
            ov.norm_sqr()
        })
        .sum()
}

fn norm(psi: &[C64]) -> f64 {
    psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn initial_vector(problem: &AdiabaticProblem, initial: &InitialState) -> Result<(Vec<C64>, Option<usize>, bool)> {
    match initial {
        InitialState::LowestIsing => {
            let (idx, tie) = problem.lowest_ising_configuration();
            let mut psi = vec![C64::new(0.0, 0.0); problem.dim()];
            psi[idx] = C64::new(1.0, 0.0);
            Ok((psi, Some(idx), tie))
        }
        InitialState::Given(v) => {
            if v.len() != problem.dim() {
                return Err(Error::SizeMismatch { expected: problem.dim(), got: v.len() });
            }
            let nv = norm(v);
            if !(nv > 0.0) {
                return Err(Error::InvalidParameter { name: "initial", reason: "zero state".into() });
            }
            Ok((v.iter().map(|z| z / nv).collect(), None, false))
        }
    }
}

fn run(
    problem: &AdiabaticProblem,
    schedule: &Schedule,
    total_time: f64,
    initial: &InitialState,
    output_times: &[f64],
    kappa: &[f64],
    opts: &EvolveOptions,
) -> Result<Evolution> {
    if !(total_time >= 0.0 && total_time.is_finite()) {
        return Err(Error::InvalidParameter { name: "T", reason: format!("must be >= 0, got {total_time}") });
    }
    let (psi0, initial_index, initial_tie) = initial_vector(problem, initial)?;
    let (targets, target_energy) = target_multiplet(problem, &opts.eigen)?;

    let mut times: Vec<f64> = output_times.iter().copied().filter(|&t| t > 0.0 && t < total_time).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let mut stops: Vec<f64> = times.iter().map(|&t| schedule.s_of_t(t, total_time)).collect();
    stops.push(1.0);
    times.push(total_time);

    let (states, stats) = integrate(problem, schedule, total_time, kappa, &psi0, &stops, &opts.effective(total_time))?;
    let trajectory: Vec<TrajectoryPoint> = states
        .iter()
        .zip(times.iter().zip(&stops))
        .map(|(psi, (&t, &s))| TrajectoryPoint { t, s, norm: norm(psi), fidelity: fidelity(&targets, psi), state: psi.clone() })
        .collect();
    let last = trajectory.last().expect("final stop");
    let final_state = last.state.clone();
    let f = last.fidelity;
    let norm_drift = (last.norm - 1.0).abs();
    Ok(Evolution {
        total_time,
        fidelity: f,
        infidelity: 1.0 - f,
        norm_drift,
        initial_index,
        initial_tie,
        target_degeneracy: targets.len(),
        target_energy,
        trajectory,
        stats,
        final_state,
    })
}

/// Lossless evolution over total time `T`; the infidelity is measured against
/// the ground level of `H(1)` (its projector when degenerate).
pub fn evolve_pure(
    problem: &AdiabaticProblem,
    schedule: &Schedule,
    total_time: f64,
    initial: &InitialState,
    output_times: &[f64],
    opts: &EvolveOptions,
) -> Result<Evolution> {
    run(problem, schedule, total_time, initial, output_times, &[], opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossMethod {
    /// `F_gamma = e^{-gamma N_up T} F`.
    Analytic,
    /// Evolution under `H - i (gamma/2) sum_j S+_j S-_j`.
    NoJump,
    /// Master equation on the full Hilbert space (`N <= 6`).
    FullLindblad,
}

impl FromStr for LossMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "analytic" => Ok(LossMethod::Analytic),
            "no-jump" | "nojump" => Ok(LossMethod::NoJump),
            "full-lindblad" | "lindblad" => Ok(LossMethod::FullLindblad),
            other => Err(Error::InvalidParameter {
                name: "loss-method",
                reason: format!("expected analytic, no-jump or full-lindblad, got `{other}`"),
            }),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LossyFidelity {
    pub method: LossMethod,
    pub gamma: f64,
    pub total_time: f64,
    pub n_up: usize,
    /// Lossless fidelity `F` (for `FullLindblad`, from the pure run).
    pub fidelity: f64,
    pub f_gamma: f64,
}

/// Fidelity with the target under excitation loss at rate `gamma` per spin,
/// starting from the lowest configuration of `H(0)`.
pub fn lossy_fidelity(
    problem: &AdiabaticProblem,
    schedule: &Schedule,
    total_time: f64,
    gamma: f64,
    method: LossMethod,
    opts: &EvolveOptions,
) -> Result<LossyFidelity> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter { name: "gamma", reason: format!("must be >= 0, got {gamma}") });
    }
    let n_up = problem.n_up();
    let pure = evolve_pure(problem, schedule, total_time, &InitialState::LowestIsing, &[], opts)?;
    let f_gamma = match method {
        LossMethod::Analytic => (-gamma * n_up as f64 * total_time).exp() * pure.fidelity,
        LossMethod::NoJump => {
            let kappa: Vec<f64> = problem
                .hamiltonian
                .basis()
                .states()
                .iter()
                .map(|st| 0.5 * gamma * st.count_ones() as f64)
                .collect();
            run(problem, schedule, total_time, &InitialState::LowestIsing, &[], &kappa, opts)?.fidelity
        }
        LossMethod::FullLindblad => lindblad_fidelity(problem, schedule, total_time, gamma, &opts.effective(total_time))?,
    };
    Ok(LossyFidelity { method, gamma, total_time, n_up, fidelity: pure.fidelity, f_gamma })
}
