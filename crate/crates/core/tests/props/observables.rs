use std::f64::consts::PI;

use proptest::prelude::*;
use wqed::basis::SectorBasis;
use wqed::couplings::{build_coupling_matrix, Bandgap, Boundary, CouplingMatrix, EffectiveCouplings, MatrixOptions};
use wqed::eigen::EigenOptions;
use wqed::exact::{lbg_infinite_correlations, ubg_infinite_ground};
use wqed::hamiltonian::Anisotropy;
use wqed::observables::{correlation_table, local_magnetization, pair_correlation, Axis, Ensemble};
use wqed::spectra::{ground_states, sector_hamiltonian, sector_energy_tables};

use super::hamiltonian::system;
use super::{check, Prop};
use crate::common::ubg_infinite;

pub const ALL: &[Prop] = &[
    ("observables::sz_sum_rule", sz_sum_rule),
    ("observables::heisenberg_isotropy", heisenberg_isotropy),
    ("observables::xy_symmetry", xy_symmetry),
    ("observables::infinite_range_permutation_symmetry", infinite_range_permutation_symmetry),
];

/// Every state of the lowest level of a sector (full dense spectrum,
/// relative clustering at `1e-8`).
pub fn ground_multiplet(cm: &CouplingMatrix, n_up: usize, theta: f64) -> (SectorBasis, Vec<Vec<f64>>) {
    let h = sector_hamiltonian(cm, n_up, Anisotropy::Angle(theta)).unwrap();
    let gs = ground_states::<f64>(&h, &EigenOptions::lowest(h.dim())).unwrap();
    let vectors = gs.vectors[..gs.degeneracy].to_vec();
    (h.basis().clone(), vectors)
}

fn sz_sum_rule() {
    check(32, (system(2, 10), -PI..PI, 0..100usize), |((cm, n_up), theta, c)| {
        let n = cm.size();
        let c = c % n;
        let m = n_up as f64 - n as f64 / 2.0;
        let h = sector_hamiltonian(&cm, n_up, Anisotropy::Angle(theta)).unwrap();
        let gs = ground_states::<f64>(&h, &EigenOptions::lowest(3)).unwrap();
        let ens = Ensemble::from_vectors(h.basis(), &gs.vectors).unwrap();
        let total: f64 = (0..n).map(|j| pair_correlation(&ens, Axis::Z, c, j).unwrap()).sum();
        let local = local_magnetization(&ens)[c];
        prop_assert!((total - m * local).abs() <= 1e-12, "sum {total} vs m <S_c> {}", m * local);
        Ok(())
    });
}

/// At `theta = pi/4` every coupling matrix gives an SU(2)-invariant model;
/// a nondegenerate ground state is a singlet and all axes agree.
fn heisenberg_isotropy() {
    let strategy = (prop::sample::select(vec![4usize, 6, 8, 10]), 0.3f64..3.0, -0.6f64..0.6, any::<bool>());
    check(16, strategy, |(n, xi, d, pbc)| {
        let c = EffectiveCouplings::outer(Bandgap::Lower, xi, d);
        prop_assume!(c.is_ok());
        let boundary = if pbc { Boundary::Pbc } else { Boundary::Obc };
        let cm = build_coupling_matrix(&c.unwrap(), n, boundary, MatrixOptions { n_max: None, allow_truncation: true })
            .unwrap();
        let theta = PI / 4.0;
        let table = sector_energy_tables(&cm, &[theta], &EigenOptions::values_only(1)).unwrap().remove(0);
        let e0 = table.energy(0);
        let singlet = table.magnetizations().filter(|&m| m != 0).all(|m| table.energy(m) > e0 + 1e-8);
        let (basis, vectors) = ground_multiplet(&cm, n / 2, theta);
        prop_assume!(singlet && vectors.len() == 1);
        let ens = Ensemble::from_vectors(&basis, &vectors).unwrap();
        for (r, cx, cy, cz) in correlation_table(&ens, 0, n - 1).unwrap() {
            prop_assert!((cx - cz).abs() <= 1e-10 && (cy - cz).abs() <= 1e-10, "r={r}: {cx} {cy} {cz}");
        }
        Ok(())
    });
}

fn xy_symmetry() {
    check(32, (system(2, 10), -PI..PI), |((cm, n_up), theta)| {
        let n = cm.size();
        let h = sector_hamiltonian(&cm, n_up, Anisotropy::Angle(theta)).unwrap();
        let gs = ground_states::<f64>(&h, &EigenOptions::lowest(2)).unwrap();
        let ens = Ensemble::from_vectors(h.basis(), &gs.vectors).unwrap();
        for (r, cx, cy, _) in correlation_table(&ens, 0, n - 1).unwrap() {
            prop_assert!((cx - cy).abs() <= 1e-12, "r={r}: {cx} vs {cy}");
        }
        Ok(())
    });
}

fn pair_values(ens: &Ensemble<'_, f64>, axis: Axis, same_sublattice: bool) -> Vec<f64> {
    let n = ens.n_sites();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if ((i + j) % 2 == 0) == same_sublattice {
                out.push(pair_correlation(ens, axis, i, j).unwrap());
            }
        }
    }
    out
}

fn spread(v: &[f64]) -> f64 {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

/// Ground-multiplet averages of the infinite-range models depend only on
/// whether two sites share a sublattice, and match the collective solutions.
fn infinite_range_permutation_symmetry() {
    let strategy = (prop::sample::select(vec![4usize, 6, 8]), 0..=8usize, -PI..PI, any::<bool>());
    check(24, strategy, |(n, n_up, theta, upper)| {
        let n_up = n_up.min(n);
        let m = n_up as i64 - n as i64 / 2;
        // Away from the classical angles, where whole sectors become degenerate.
        prop_assume!(theta.sin().abs() > 0.05);
        let cm = if upper { ubg_infinite(n) } else { CouplingMatrix::uniform(n, -1.0) };
        let (basis, vectors) = ground_multiplet(&cm, n_up, theta);
        let ens = Ensemble::from_vectors(&basis, &vectors).unwrap();
        let groups: &[bool] = if upper { &[true, false] } else { &[true] };
        let mut zz = Vec::new();
        let mut xx = Vec::new();
        for &same in groups {
            let vz = if upper { pair_values(&ens, Axis::Z, same) } else { [pair_values(&ens, Axis::Z, true), pair_values(&ens, Axis::Z, false)].concat() };
            let vx = if upper { pair_values(&ens, Axis::X, same) } else { [pair_values(&ens, Axis::X, true), pair_values(&ens, Axis::X, false)].concat() };
            prop_assert!(spread(&vz) <= 1e-10 && spread(&vx) <= 1e-10, "same={same}: zz spread {:e}, xx spread {:e}", spread(&vz), spread(&vx));
            zz.push(vz[0]);
            xx.push(vx[0]);
        }
        if upper {
            let g = ubg_infinite_ground(n, m, theta, 0.0).unwrap();
            let c = g.correlations;
            prop_assert!((zz[0] - c.same_zz).abs() <= 1e-10 && (zz[1] - c.cross_zz).abs() <= 1e-10, "{zz:?} vs {c:?}");
            prop_assert!((xx[0] - c.same_xx).abs() <= 1e-10 && (xx[1] - c.cross_xx).abs() <= 1e-10, "{xx:?} vs {c:?}");
        } else {
            let c = lbg_infinite_correlations(n, m, theta).unwrap();
            prop_assert!((zz[0] - c.zz).abs() <= 1e-10 && (xx[0] - c.xx).abs() <= 1e-10, "{zz:?} {xx:?} vs {c:?}");
        }
        Ok(())
    });
}
