use std::f64::consts::PI;

use nalgebra::DMatrix;
use proptest::prelude::*;
use wqed::berry::{
    angle_distance, berry_phase, non_abelian_berry_phase, pair_sites, snap, twisted_ground_multiplet, BerryOptions,
    BerryPath, PairKind,
};
use wqed::couplings::{build_coupling_matrix, Bandgap, Boundary, CouplingMatrix, EffectiveCouplings, MatrixOptions};
use wqed::error::Error;

use super::{check, Prop};
use crate::common::C64;

pub const ALL: &[Prop] = &[
    ("berry::gauge_invariance", gauge_invariance),
    ("berry::quantization", quantization),
    ("berry::sublattice_swap", sublattice_swap),
    ("berry::reversed_path_cancels", reversed_path_cancels),
];

pub fn ring(n: usize, xi: f64, d: f64) -> CouplingMatrix {
    let c = EffectiveCouplings::outer(Bandgap::Lower, xi, d).unwrap();
    build_coupling_matrix(&c, n, Boundary::Pbc, MatrixOptions { n_max: None, allow_truncation: true }).unwrap()
}

fn fixed(nodes: usize) -> BerryOptions {
    BerryOptions { nodes, auto_refine: false, ..BerryOptions::default() }
}

/// Unitary from the QR factor of a complex matrix.
fn unitary(d: usize, entries: &[(f64, f64)]) -> DMatrix<C64> {
    let m = DMatrix::from_fn(d, d, |i, j| {
        let (re, im) = entries[(i * d + j) % entries.len()];
        C64::new(re, im)
    });
    m.qr().q()
}

/// Replaces every node's multiplet `|k>` by `sum_l U_lk |l>`.
pub fn regauge(path: &BerryPath, seeds: &[(f64, f64)]) -> BerryPath {
    let mut out = path.clone();
    let d = path.d;
    for (node, multiplet) in out.multiplets.iter_mut().enumerate() {
        let u = unitary(d, &seeds[node % seeds.len()..]);
        let old = multiplet.clone();
        for k in 0..d {
            let mut v = vec![C64::new(0.0, 0.0); old[0].len()];
            for l in 0..d {
                for (x, y) in v.iter_mut().zip(&old[l]) {
                    *x += u[(l, k)] * y;
                }
            }
            multiplet[k] = v;
        }
    }
    out
}

/// `(N, n_up, d, xi, dimerization)` on small rings with a gapped ground
/// multiplet: the singlet sector (`d = 1`) and the quarter-filled sector
/// of eight spins (`d = 2`).
fn setups() -> impl Strategy<Value = (usize, usize, usize, f64, f64)> {
    let small = (prop::sample::select(vec![4usize, 6, 8]), 0.5f64..1.5, 0.1f64..0.35, any::<bool>())
        .prop_map(|(n, xi, ad, neg)| (n, n / 2, 1, xi, if neg { -ad } else { ad }));
    let quarter = (0.8f64..1.2, any::<bool>()).prop_map(|(xi, neg)| (8, 6, 2, xi, if neg { -0.2 } else { 0.2 }));
    prop_oneof![3 => small, 1 => quarter]
}

fn gauge_invariance() {
    let seeds = prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16..64);
    check(12, (setups(), seeds, any::<bool>()), |((n, n_up, d, xi, delta), seeds, intra)| {
        let cm = ring(n, xi, delta);
        let kind = if intra { PairKind::Intra } else { PairKind::Inter };
        let path = twisted_ground_multiplet(&cm, n_up, PI / 4.0, pair_sites(n, kind), 32, d, &fixed(32));
        prop_assume!(path.is_ok());
        let path = path.unwrap();
        let gamma = non_abelian_berry_phase(&path).unwrap();
        let moved = non_abelian_berry_phase(&regauge(&path, &seeds)).unwrap();
        prop_assert!(angle_distance(gamma, moved) <= 1e-10, "{gamma} vs {moved}");
        Ok(())
    });
}

fn quantization() {
    check(10, setups(), |(n, n_up, d, xi, delta)| {
        let cm = ring(n, xi, delta);
        let tol = if d == 1 { 1e-3 } else { 1e-2 } * 2.0 * PI;
        for kind in [PairKind::Intra, PairKind::Inter] {
            match berry_phase(&cm, n_up, PI / 4.0, pair_sites(n, kind), d, &BerryOptions::default()) {
                Ok(r) => prop_assert!(snap(r.gamma, tol).is_some(), "{kind:?}: gamma = {}", r.gamma),
                // Paths through a level crossing carry no quantized phase.
                Err(Error::GapCollapse { .. } | Error::DegeneracyMismatch { .. }) => prop_assume!(false),
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            }
        }
        Ok(())
    });
}

fn sublattice_swap() {
    check(8, setups(), |(n, n_up, d, xi, delta)| {
        let gamma = |dd: f64, kind: PairKind| {
            let cm = ring(n, xi, dd);
            twisted_ground_multiplet(&cm, n_up, PI / 4.0, pair_sites(n, kind), 64, d, &fixed(64))
                .and_then(|p| non_abelian_berry_phase(&p))
        };
        let (a, b) = (gamma(delta, PairKind::Intra), gamma(-delta, PairKind::Inter));
        prop_assume!(a.is_ok() && b.is_ok());
        let (a, b) = (a.unwrap(), b.unwrap());
        prop_assert!(angle_distance(a, b) <= 1e-8, "intra({delta}) = {a}, inter({}) = {b}", -delta);
        Ok(())
    });
}

fn reversed_path_cancels() {
    check(8, setups(), |(n, n_up, d, xi, delta)| {
        let cm = ring(n, xi, delta);
        let path = twisted_ground_multiplet(&cm, n_up, PI / 4.0, pair_sites(n, PairKind::Intra), 48, d, &fixed(48));
        prop_assume!(path.is_ok());
        let path = path.unwrap();
        let total = non_abelian_berry_phase(&path).unwrap() + non_abelian_berry_phase(&path.reversed()).unwrap();
        prop_assert!(angle_distance(total, 0.0) <= 1e-10, "gamma + gamma' = {total}");
        Ok(())
    });
}
