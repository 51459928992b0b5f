//! Direct integration of the master equation
//! `d rho/dt = -i[H, rho] + gamma sum_j (S-_j rho S+_j - {S+_j S-_j, rho}/2)`
//! on the full Hilbert space. Only meant as an oracle for small chains.

use nalgebra::{DMatrix, DVector};
use ode_solvers::System;

use super::{dopri_span, field_weight, target_multiplet, AdiabaticProblem, EvolveOptions, Schedule};
use crate::basis::enumerate_sector;
use crate::error::{Error, Result};

pub const MAX_LINDBLAD_SITES: usize = 6;

struct FullSpace {
    n: usize,
    hz: DMatrix<f64>,
    hxy: DMatrix<f64>,
    field: Vec<f64>,
}

fn full_space(problem: &AdiabaticProblem) -> Result<FullSpace> {
    let n = problem.couplings.size();
    let dim = 1usize << n;
    let mut hz = DMatrix::zeros(dim, dim);
    let mut hxy = DMatrix::zeros(dim, dim);
    let mut field = vec![0.0; dim];
    for n_up in 0..=n {
        let sector = AdiabaticProblem::new(
            &problem.couplings,
            n_up,
            problem.path.clone(),
            problem.fields.as_deref(),
        )?;
        let z = sector.hamiltonian.to_dense_with::<f64>(1.0, 0.0)?;
        let xy = sector.hamiltonian.to_dense_with::<f64>(0.0, 1.0)?;
        let states = sector.hamiltonian.basis().states();
        for (i, &si) in states.iter().enumerate() {
            if sector.has_fields() {
                field[si as usize] = sector.field_diag[i];
            }
            for (j, &sj) in states.iter().enumerate() {
                hz[(si as usize, sj as usize)] = z[(i, j)];
                hxy[(si as usize, sj as usize)] = xy[(i, j)];
            }
        }
    }
    Ok(FullSpace { n, hz, hxy, field })
}

struct Master<'a> {
    space: &'a FullSpace,
    problem: &'a AdiabaticProblem,
    schedule: &'a Schedule,
    total_time: f64,
    gamma: f64,
}

impl Master<'_> {
    fn hamiltonian(&self, s: f64) -> DMatrix<f64> {
        let (a, b) = self.problem.path.eval(s);
        let mut h = &self.space.hz * a + &self.space.hxy * b;
        if self.problem.has_fields() {
            let g = field_weight(s);
            for (i, f) in self.space.field.iter().enumerate() {
                h[(i, i)] += g * f;
            }
        }
        h
    }
}

impl System<f64, DVector<f64>> for Master<'_> {
    fn system(&self, s: f64, y: &DVector<f64>, dy: &mut DVector<f64>) {
        let d = 1usize << self.space.n;
        let dd = d * d;
        let re = DMatrix::from_column_slice(d, d, &y.as_slice()[..dd]);
        let im = DMatrix::from_column_slice(d, d, &y.as_slice()[dd..]);
        let h = self.hamiltonian(s);
        // rho = R + i I with real H: -i[H, rho] = [H, I] - i [H, R].
        let mut d_re = &h * &im - &im * &h;
        let mut d_im = &re * &h - &h * &re;
        if self.gamma > 0.0 {
            for x in 0..d {
                for yy in 0..d {
                    let nx = x.count_ones() as f64;
                    let ny = yy.count_ones() as f64;
                    let mut jr = -0.5 * (nx + ny) * re[(x, yy)];
                    let mut ji = -0.5 * (nx + ny) * im[(x, yy)];
                    // S-_j rho S+_j feeds (x, y) from (x + e_j, y + e_j).
                    for j in 0..self.space.n {
                        let bit = 1usize << j;
                        if x & bit == 0 && yy & bit == 0 {
                            jr += re[(x | bit, yy | bit)];
                            ji += im[(x | bit, yy | bit)];
                        }
                    }
                    d_re[(x, yy)] += self.gamma * jr;
                    d_im[(x, yy)] += self.gamma * ji;
                }
            }
        }
        let c = self.schedule.dt_ds(s, self.total_time);
        let out = dy.as_mut_slice();
        for (k, v) in d_re.iter().enumerate() {
            out[k] = c * v;
        }
        for (k, v) in d_im.iter().enumerate() {
            out[dd + k] = c * v;
        }
    }
}

/// `<phi_0|rho(T)|phi_0>` (summed over a degenerate target level) for the
/// run starting from the lowest configuration of `H(0)`.
pub fn lindblad_fidelity(
    problem: &AdiabaticProblem,
    schedule: &Schedule,
    total_time: f64,
    gamma: f64,
    opts: &EvolveOptions,
) -> Result<f64> {
    let n = problem.couplings.size();
    if n > MAX_LINDBLAD_SITES {
        let cap = 1u64 << (2 * MAX_LINDBLAD_SITES);
        return Err(Error::DimensionOverflow { dim: 1u64 << (2 * n.min(31)), cap });
    }
    let space = full_space(problem)?;
    let d = 1usize << n;
    let dd = d * d;
    let sector = enumerate_sector(n, problem.n_up())?;
    let (idx, _) = problem.lowest_ising_configuration();
    let start = sector.state(idx) as usize;
    let mut y = DVector::zeros(2 * dd);
    y[start + d * start] = 1.0;

    if total_time > 0.0 {
        let make = || Master { space: &space, problem, schedule, total_time, gamma };
        y = dopri_span(make, y, 0.0, 1.0, opts)?.0;
    }

    let (targets, _) = target_multiplet(problem, &opts.eigen)?;
    let states = sector.states();
    let mut f = 0.0;
    for t in &targets {
        // Real target: <phi|rho|phi> = sum phi_x phi_y R_xy.
        for (i, &si) in states.iter().enumerate() {
            for (j, &sj) in states.iter().enumerate() {
                f += t[i] * t[j] * y[si as usize + d * sj as usize];
            }
        }
    }
    Ok(f)
}
