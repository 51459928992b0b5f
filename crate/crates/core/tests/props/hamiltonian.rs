use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use wqed::basis::enumerate_sector;
use wqed::couplings::{Boundary, CouplingMatrix};
use wqed::hamiltonian::{build_sector_hamiltonian, Anisotropy, Twist};

use super::{check, Prop};
use crate::common::{full_space, hermitian_eigenvalues, max_abs_diff, real_eigenvalues, sector_block, total_sz, C64};

pub const ALL: &[Prop] = &[
    ("hamiltonian::sector_block_equivalence", sector_block_equivalence),
    ("hamiltonian::mu_linearity", mu_linearity),
    ("hamiltonian::bipartite_sign_symmetry", bipartite_sign_symmetry),
    ("hamiltonian::obc_twist_gauge", obc_twist_gauge),
];

/// Dense symmetric couplings in `[-1, 1]`; roughly a third of the pairs are
/// switched off so sparse patterns are covered too.
pub fn couplings(n: usize, boundary: Boundary) -> impl Strategy<Value = CouplingMatrix> {
    prop::collection::vec((-1.0f64..1.0, 0..3u8), n * (n - 1) / 2).prop_map(move |vals| {
        let mut e = vec![0.0; n * n];
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                let (v, keep) = vals[k];
                k += 1;
                let v = if keep == 0 { 0.0 } else { v };
                e[i * n + j] = v;
                e[j * n + i] = v;
            }
        }
        CouplingMatrix::from_entries(n, boundary, 1.0, e).unwrap()
    })
}

/// `(N, couplings, n_up)` with `2 <= N <= max_n`.
pub fn system(min_n: usize, max_n: usize) -> impl Strategy<Value = (CouplingMatrix, usize)> {
    (min_n..=max_n).prop_flat_map(|n| (couplings(n, Boundary::Obc), 0..=n))
}

fn sector_block_equivalence() {
    let strategy = (system(2, 10), -PI..PI, any::<bool>(), 0..100usize, 0..100usize, 0.0..2.0 * PI);
    check(24, strategy, |((cm, n_up), theta, twisted, p, q, phi)| {
        let n = cm.size();
        let (p, q) = (p % n, q % n);
        let twist = (twisted && p != q).then_some((p, q, phi));
        let (a, b) = (theta.cos(), theta.sin());
        let full = full_space(&cm, a, b, twist);
        let block = sector_block(&full, n, n_up);
        let basis = Arc::new(enumerate_sector(n, n_up).unwrap());
        let h = build_sector_hamiltonian(&cm, basis, Anisotropy::Angle(theta), twist.map(|(p, q, phi)| Twist { p, q, phi }))
            .unwrap();
        let dense = h.to_dense::<C64>().unwrap();
        let diff = (&dense - &block).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(diff <= 1e-14, "N={n} n_up={n_up} twist={twist:?}: max entry difference {diff:e}");
        // The full operator is block diagonal: no entry couples sectors.
        for (r, col) in (0..full.nrows()).flat_map(|r| (0..full.ncols()).map(move |c| (r, c))) {
            if (r as u32).count_ones() != (col as u32).count_ones() {
                prop_assert!(full[(r, col)].norm() == 0.0);
            }
        }
        Ok(())
    });
}

fn mu_linearity() {
    check(24, (system(2, 8), -PI..PI, -3.0f64..3.0), |((cm, n_up), theta, mu)| {
        let n = cm.size();
        let m = n_up as f64 - n as f64 / 2.0;
        let full = full_space(&cm, theta.cos(), theta.sin(), None) - total_sz(n) * C64::new(mu, 0.0);
        let shifted = hermitian_eigenvalues(&sector_block(&full, n, n_up));
        let h = build_sector_hamiltonian(&cm, Arc::new(enumerate_sector(n, n_up).unwrap()), Anisotropy::Angle(theta), None)
            .unwrap();
        let dense = h.to_dense::<f64>().unwrap();
        let eig = SymmetricEigen::new(dense.clone());
        let expected: Vec<f64> = {
            let mut v: Vec<f64> = eig.eigenvalues.iter().map(|e| e - mu * m).collect();
            v.sort_by(f64::total_cmp);
            v
        };
        prop_assert!(max_abs_diff(&shifted, &expected) <= 1e-12);
        // Eigenvectors at mu = 0 stay eigenvectors of the shifted operator.
        let block = sector_block(&full, n, n_up).map(|z| z.re);
        for k in 0..eig.eigenvalues.len() {
            let v = eig.eigenvectors.column(k);
            let r = &block * v - v * (eig.eigenvalues[k] - mu * m);
            prop_assert!(r.norm() <= 1e-12, "residual {:e}", r.norm());
        }
        Ok(())
    });
}

fn bipartite_sign_symmetry() {
    let strategy = (2..=5usize).prop_flat_map(|cells| (couplings(2 * cells, Boundary::Obc), 0..=2 * cells, -PI..PI));
    check(32, strategy, |(cm, n_up, theta)| {
        let n = cm.size();
        let e: Vec<f64> = (0..n * n).map(|k| if (k / n + k % n) % 2 == 1 { cm.entries()[k] } else { 0.0 }).collect();
        let cm = CouplingMatrix::from_entries(n, Boundary::Obc, 1.0, e).unwrap();
        let spectrum = |t: f64| {
            let h = build_sector_hamiltonian(&cm, Arc::new(enumerate_sector(n, n_up).unwrap()), Anisotropy::Angle(t), None)
                .unwrap();
            real_eigenvalues(&h.to_dense::<f64>().unwrap())
        };
        prop_assert!(max_abs_diff(&spectrum(theta), &spectrum(-theta)) <= 1e-12);
        Ok(())
    });
}

fn obc_twist_gauge() {
    let strategy = (2..=10usize).prop_flat_map(|n| {
        (prop::collection::vec(-1.5f64..1.5, n - 1), 0..=n, 0..n - 1, any::<bool>(), 0.0..2.0 * PI, -PI..PI)
    });
    check(40, strategy, |(bonds, n_up, link, flip, phi, theta)| {
        let n = bonds.len() + 1;
        let mut e = vec![0.0; n * n];
        for (j, &v) in bonds.iter().enumerate() {
            e[j * n + j + 1] = v;
            e[(j + 1) * n + j] = v;
        }
        let cm = CouplingMatrix::from_entries(n, Boundary::Obc, 1.0, e).unwrap();
        let (p, q) = if flip { (link + 1, link) } else { (link, link + 1) };
        let basis = Arc::new(enumerate_sector(n, n_up).unwrap());
        let plain = build_sector_hamiltonian(&cm, basis.clone(), Anisotropy::Angle(theta), None).unwrap();
        let twisted =
            build_sector_hamiltonian(&cm, basis, Anisotropy::Angle(theta), Some(Twist { p, q, phi })).unwrap();
        let a = real_eigenvalues(&plain.to_dense::<f64>().unwrap());
        let b: DMatrix<C64> = twisted.to_dense::<C64>().unwrap();
        prop_assert!(max_abs_diff(&a, &hermitian_eigenvalues(&b)) <= 1e-12);
        Ok(())
    });
}
