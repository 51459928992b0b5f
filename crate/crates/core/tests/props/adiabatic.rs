use nalgebra::DVector;
use proptest::prelude::*;
use wqed::adiabatic::{
    evolve_pure, lossy_fidelity, schedule_from_gap, AdiabaticProblem, EvolveOptions, InitialState, LossMethod, Path,
    Schedule, ScheduleKind, DEFAULT_EXCITED, DEFAULT_GRID,
};
use wqed::couplings::{build_coupling_matrix, feasibility_threshold, Bandgap, Boundary, CouplingMatrix, EffectiveCouplings, MatrixOptions};
use wqed::eigen::EigenOptions;
use wqed::error::Error;

use super::{check, Prop};
use crate::common::{full_space, rk4_full, C64};

pub const ALL: &[Prop] = &[
    ("adiabatic::sector_conservation", sector_conservation),
    ("adiabatic::eventually_decreasing", eventually_decreasing),
    ("adiabatic::loss_methods_agree", loss_methods_agree),
    ("adiabatic::schedule_ordering", schedule_ordering),
];

fn lbg(n: usize, xi: f64, d: f64) -> CouplingMatrix {
    let c = EffectiveCouplings::outer(Bandgap::Lower, xi, d).unwrap();
    build_coupling_matrix(&c, n, Boundary::Obc, MatrixOptions { n_max: None, allow_truncation: true }).unwrap()
}

fn small_chain() -> impl Strategy<Value = (CouplingMatrix, usize)> {
    (prop::sample::select(vec![4usize, 6]), 0.5f64..3.0, -0.9f64..0.9, 1..6usize)
        .prop_map(|(n, xi, u, n_up)| (lbg(n, xi, u * feasibility_threshold(xi)), n_up.min(n - 1)))
}

/// The library's sector evolution against a Runge–Kutta run on the whole
/// `2^N` space started from the same configuration: the full-space state
/// never leaks out of the sector and both runs agree.
fn sector_conservation() {
    check(8, (small_chain(), 1.0f64..4.0), |((cm, n_up), total)| {
        let n = cm.size();
        let problem = AdiabaticProblem::new(&cm, n_up, Path::simple(), None).unwrap();
        let schedule = Schedule::uniform();
        let opts = EvolveOptions { rtol: 1e-11, atol: 1e-11, ..EvolveOptions::default() };
        let run = evolve_pure(&problem, &schedule, total, &InitialState::LowestIsing, &[], &opts).unwrap();
        let states = problem.hamiltonian.basis().states().to_vec();
        let start = states[run.initial_index.unwrap()] as usize;

        let hz = full_space(&cm, 1.0, 0.0, None);
        let hxy = full_space(&cm, 0.0, 1.0, None);
        let mut psi0 = DVector::<C64>::zeros(1 << n);
        psi0[start] = C64::new(1.0, 0.0);
        let psi = rk4_full(|s| &hz + &hxy * C64::new(s, 0.0), |s| schedule.dt_ds(s, total), &psi0, 20_000);

        let leak: f64 =
            (0..psi.len()).filter(|&i| (i as u32).count_ones() as usize != n_up).map(|i| psi[i].norm_sqr()).sum();
        prop_assert!(leak.sqrt() < 1e-9, "weight outside the sector: {:e}", leak.sqrt());
        let overlap: C64 = states.iter().zip(&run.final_state).map(|(&st, a)| a.conj() * psi[st as usize]).sum();
        prop_assert!((overlap.norm() - 1.0).abs() < 1e-8, "|<lib|rk4>| = {}", overlap.norm());
        Ok(())
    });
}

pub fn preparation_problem(n: usize, n_up: usize) -> AdiabaticProblem {
    AdiabaticProblem::new(&lbg(n, 2.0, -0.2), n_up, Path::simple(), None).unwrap()
}

pub fn infidelity(problem: &AdiabaticProblem, schedule: &Schedule, total: f64) -> f64 {
    evolve_pure(problem, schedule, total, &InitialState::LowestIsing, &[], &EvolveOptions::default())
        .unwrap()
        .infidelity
}

/// Past its first local minimum the infidelity on a log-T grid keeps
/// oscillating (diabatic amplitudes interfere), so the check is on the
/// peaks: each local maximum sits below the previous one.
fn eventually_decreasing() {
    let problem = preparation_problem(8, 6);
    let schedule =
        schedule_from_gap(&problem, ScheduleKind::MinMatrixElement, DEFAULT_GRID, DEFAULT_EXCITED, &EigenOptions::default())
            .unwrap();
    let times: Vec<f64> = (0..=32).map(|k| 10f64.powf(k as f64 / 8.0)).collect();
    let inf: Vec<f64> = times.iter().map(|&t| infidelity(&problem, &schedule, t)).collect();
    let first_min = (1..inf.len() - 1).find(|&k| inf[k] <= inf[k - 1] && inf[k] <= inf[k + 1]).expect("a local minimum");
    let peaks: Vec<usize> = (first_min + 1..inf.len())
        .filter(|&k| inf[k] >= inf[k - 1] && (k + 1 == inf.len() || inf[k] >= inf[k + 1]))
        .collect();
    for w in peaks.windows(2) {
        assert!(inf[w[1]] < inf[w[0]], "peak at T = {} ({:e}) above the one at T = {} ({:e})", times[w[1]], inf[w[1]], times[w[0]], inf[w[0]]);
    }
    assert!(inf.last().unwrap() < &1e-3, "{inf:?}");
}

fn loss_methods_agree() {
    check(6, (small_chain(), 1e-3f64..5e-2, 1.0f64..10.0), |((cm, n_up), gamma, total)| {
        let problem = AdiabaticProblem::new(&cm, n_up, Path::simple(), None).unwrap();
        let schedule = Schedule::uniform();
        let opts = EvolveOptions { rtol: 1e-12, atol: 1e-12, ..EvolveOptions::default() };
        let f = |m| lossy_fidelity(&problem, &schedule, total, gamma, m, &opts).unwrap().f_gamma;
        let (a, nj, fl) = (f(LossMethod::Analytic), f(LossMethod::NoJump), f(LossMethod::FullLindblad));
        prop_assert!((a - nj).abs() <= 1e-8, "analytic {a} vs no-jump {nj}");
        prop_assert!((a - fl).abs() <= 1e-8, "analytic {a} vs master equation {fl}");
        Ok(())
    });
}

/// `[MinMatrixElement, Hs, Uniform]` infidelities of the eight-spin,
/// six-up preparation at each `T`.
pub fn schedule_infidelities(times: &[f64]) -> Result<Vec<[f64; 3]>, Error> {
    let problem = preparation_problem(8, 6);
    let eigen = EigenOptions::default();
    let kinds = [ScheduleKind::MinMatrixElement, ScheduleKind::Hs, ScheduleKind::Uniform];
    let schedules = kinds
        .iter()
        .map(|&k| schedule_from_gap(&problem, k, DEFAULT_GRID, DEFAULT_EXCITED, &eigen))
        .collect::<Result<Vec<_>, _>>()?;
    use rayon::prelude::*;
    let jobs: Vec<(usize, usize)> = (0..times.len()).flat_map(|t| (0..3).map(move |k| (t, k))).collect();
    let values: Vec<f64> = jobs.par_iter().map(|&(t, k)| infidelity(&problem, &schedules[k], times[t])).collect();
    Ok(values.chunks(3).map(|c| [c[0], c[1], c[2]]).collect())
}

fn schedule_ordering() {
    let times = [100.0, 1000.0, 10000.0];
    for (t, [mme, hs, uni]) in times.iter().zip(schedule_infidelities(&times).unwrap()) {
        assert!(mme <= 2.0 * hs && hs <= 2.0 * uni, "T = {t}: mme {mme:e}, hs {hs:e}, uniform {uni:e}");
    }
}
