use std::f64::consts::PI;

use proptest::prelude::*;
use wqed::couplings::{build_coupling_matrix, Boundary, MatrixOptions};
use wqed::eigen::EigenOptions;
use wqed::hamiltonian::Anisotropy;
use wqed::spectra::{ground_states, magnetization_phase_diagram, sector_energy_tables, sector_hamiltonian};

use super::couplings::effective;
use super::hamiltonian::system;
use super::{check, Prop};

pub const ALL: &[Prop] = &[
    ("spectra::variational_bound", variational_bound),
    ("spectra::argmin_is_exhaustive", argmin_is_exhaustive),
    ("spectra::flip_symmetry", flip_symmetry),
];

fn variational_bound() {
    // A low dense threshold sends the larger sectors through the Krylov path.
    let strategy = (system(4, 12), -PI..PI, any::<bool>(), prop::collection::vec(any::<u32>(), 100));
    check(24, strategy, |((cm, n_up), theta, krylov, picks)| {
        let h = sector_hamiltonian(&cm, n_up, Anisotropy::Angle(theta)).unwrap();
        let opts = EigenOptions { dense_threshold: if krylov { 30 } else { 2000 }, ..EigenOptions::default() };
        let gs = ground_states::<f64>(&h, &opts).unwrap();
        let e0 = gs.energy();
        for pick in picks {
            let i = pick as usize % h.dim();
            let diag = h.diagonal_element(i);
            prop_assert!(e0 <= diag + 1e-10 * diag.abs().max(1.0), "E0 = {e0} > <s|H|s> = {diag}");
        }
        Ok(())
    });
}

fn argmin_is_exhaustive() {
    let strategy = (effective(), prop::sample::select(vec![4usize, 6, 8]), any::<bool>(), -PI..PI, -4.0f64..4.0);
    check(24, strategy, |(c, n, pbc, theta, mu)| {
        let boundary = if pbc { Boundary::Pbc } else { Boundary::Obc };
        let cm = build_coupling_matrix(&c, n, boundary, MatrixOptions { n_max: None, allow_truncation: true }).unwrap();
        let table = sector_energy_tables(&cm, &[theta], &EigenOptions::values_only(1)).unwrap().remove(0);
        let (m_star, _) = table.ground_magnetization(mu);
        let best = table.energy(m_star) - mu * m_star as f64;
        for m in table.magnetizations() {
            let e = table.energy(m) - mu * m as f64;
            prop_assert!(best <= e + 1e-10 * e.abs().max(1.0), "m*={m_star} loses to m={m}");
        }
        Ok(())
    });
}

fn flip_symmetry() {
    let strategy = (effective(), prop::sample::select(vec![4usize, 6, 8]), -PI..PI);
    check(16, strategy, |(c, n, theta)| {
        let cm = build_coupling_matrix(&c, n, Boundary::Obc, MatrixOptions { n_max: None, allow_truncation: true }).unwrap();
        let mus: Vec<f64> = (-40..=40).map(|k| k as f64 * 0.1).collect();
        let grid = magnetization_phase_diagram(&cm, &[theta], &mus, &EigenOptions::values_only(1)).unwrap();
        // The tables fill m < 0 from m > 0, so diagonalize those sectors too.
        let table = &grid.sector_energies[0];
        for n_up in 0..n / 2 {
            let h = sector_hamiltonian(&cm, n_up, Anisotropy::Angle(theta)).unwrap();
            let e = ground_states::<f64>(&h, &EigenOptions::values_only(1)).unwrap().energy();
            let mirrored = table.energies[n_up];
            prop_assert!((e - mirrored).abs() <= 1e-10 * e.abs().max(1.0), "n_up={n_up}: {e} vs {mirrored}");
        }
        let k = mus.len();
        for u in 0..k {
            let v = k - 1 - u;
            if grid.ties[0][u] || grid.ties[0][v] {
                continue;
            }
            prop_assert_eq!(grid.m_star[0][u], -grid.m_star[0][v], "mu = {}", mus[u]);
        }
        Ok(())
    });
}
