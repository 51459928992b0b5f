//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use wqed::basis::enumerate_sector;
use wqed::couplings::{Boundary, CouplingMatrix, Pair};

pub type C64 = Complex<f64>;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Single-site operator embedded at `site` of `n` spins, with site 0 the
/// least significant bit (bit set = spin up).
pub fn site_op(n: usize, site: usize, op: &DMatrix<C64>) -> DMatrix<C64> {
    let left = DMatrix::<C64>::identity(1 << (n - 1 - site), 1 << (n - 1 - site));
    let right = DMatrix::<C64>::identity(1 << site, 1 << site);
    left.kronecker(op).kronecker(&right)
}

pub fn sz() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[c(-0.5), c(0.0), c(0.0), c(0.5)])
}

/// `S+` in the (down, up) basis.
pub fn sp() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[c(0.0), c(0.0), c(1.0), c(0.0)])
}

pub fn sm() -> DMatrix<C64> {
    sp().adjoint()
}

/// Product of single-site operators (identity elsewhere) as a chain of
/// Kronecker factors, site `n - 1` leftmost.
pub fn product_op(n: usize, ops: &[(usize, DMatrix<C64>)]) -> DMatrix<C64> {
    let mut out = DMatrix::<C64>::identity(1, 1);
    for site in (0..n).rev() {
        let f = ops.iter().find(|(s, _)| *s == site).map(|(_, m)| m.clone()).unwrap_or_else(|| DMatrix::identity(2, 2));
        out = out.kronecker(&f);
    }
    out
}

/// `H = -sum_{i<j} J_ij [b/2 (S+_i S-_j + h.c.) + a S^z_i S^z_j]` on the full
/// `2^N` space by Kronecker products. An optional twist multiplies
/// `S+_p S-_q` by `e^{-i phi}` (and its conjugate term by `e^{i phi}`).
pub fn full_space(cm: &CouplingMatrix, a: f64, b: f64, twist: Option<(usize, usize, f64)>) -> DMatrix<C64> {
    let n = cm.size();
    let dim = 1 << n;
    let mut h = DMatrix::<C64>::zeros(dim, dim);
    for i in 0..n {
        for j in i + 1..n {
            let jij = cm.get(i, j);
            if jij == 0.0 {
                continue;
            }
            let mut z = c(1.0);
            if let Some((p, q, phi)) = twist {
                if (p, q) == (i, j) {
                    z = C64::from_polar(1.0, -phi);
                } else if (p, q) == (j, i) {
                    z = C64::from_polar(1.0, phi);
                }
            }
            let hop = product_op(n, &[(i, sp()), (j, sm())]) * z;
            let exch = &hop + hop.adjoint();
            let zz = product_op(n, &[(i, sz()), (j, sz())]);
            h -= (exch * c(0.5 * b) + zz * c(a)) * c(jij);
        }
    }
    h
}

/// Total `S^z` on the full space.
pub fn total_sz(n: usize) -> DMatrix<C64> {
    let mut m = DMatrix::<C64>::zeros(1 << n, 1 << n);
    for i in 0..n {
        m += site_op(n, i, &sz());
    }
    m
}

/// Restriction of a full-space operator to the sector with `n_up` up spins.
pub fn sector_block(full: &DMatrix<C64>, n: usize, n_up: usize) -> DMatrix<C64> {
    let basis = enumerate_sector(n, n_up).unwrap();
    let s = basis.states();
    DMatrix::from_fn(s.len(), s.len(), |i, j| full[(s[i] as usize, s[j] as usize)])
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn real_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Nearest-neighbour dimerized chain: bond `(j, j+1)` carries
/// `-(1 + d)` when `j` is even and `-(1 - d)` when odd.
pub fn nn_chain(n: usize, d: f64, boundary: Boundary) -> CouplingMatrix {
    let mut e = vec![0.0; n * n];
    let bonds = if boundary == Boundary::Pbc { n } else { n - 1 };
    for b in 0..bonds {
        let (i, j) = (b, (b + 1) % n);
        let v = if b % 2 == 0 { -(1.0 + d) } else { -(1.0 - d) };
        e[i * n + j] = v;
        e[j * n + i] = v;
    }
    CouplingMatrix::from_entries(n, boundary, 1.0, e).unwrap()
}

/// Infinite-range pattern of the upper gap: opposite sublattices `-1`, same
/// sublattice `+1`.
pub fn ubg_infinite(n: usize) -> CouplingMatrix {
    let mut e = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                e[i * n + j] = if (i + j) % 2 == 1 { -1.0 } else { 1.0 };
            }
        }
    }
    CouplingMatrix::from_entries(n, Boundary::Obc, 1.0, e).unwrap()
}

/// Collective self-energy `Sigma^{pair}_n(z)` of the SSH bath at a real `z`
/// inside a gap, from the momentum integral of the Bloch resolvent
/// `(z - h_k)^{-1}` with `h_k = [[0, f], [f*, 0]]`,
/// `f(k) = -J [(1 + delta) + (1 - delta) e^{ik}]`.
/// The periodic trapezoid rule converges geometrically; the node count is
/// doubled until two estimates agree to `1e-15` relative to `g^2 / |z|`.
pub fn bloch_self_energy(j: f64, delta: f64, z: f64, g: f64, n: u32, pair: Pair) -> f64 {
    bloch_self_energies(j, delta, z, g, &[(pair, n)])[0]
}

/// [`bloch_self_energy`] for several entries over one shared momentum grid.
/// Each doubling only adds the new (odd) nodes, and an entry stops
/// accumulating once it has converged.
pub fn bloch_self_energies(j: f64, delta: f64, z: f64, g: f64, entries: &[(Pair, u32)]) -> Vec<f64> {
    let add = |sums: &mut [C64], active: &[usize], m: usize, step: usize| {
        for k in (step - 1..m).step_by(step) {
            let kk = std::f64::consts::TAU * k as f64 / m as f64;
            let f = C64::new(-j * (1.0 - delta) * kk.cos() - j * (1.0 + delta), -j * (1.0 - delta) * kk.sin());
            let det = z * z - f.norm_sqr();
            for &e in active {
                let (pair, n) = entries[e];
                let num = match pair {
                    Pair::AA | Pair::BB => c(z),
                    Pair::AB => f,
                    Pair::BA => f.conj(),
                };
                sums[e] += num / det * C64::from_polar(1.0, kk * n as f64);
            }
        }
    };
    let value = |sum: C64, m: usize| g * g * (sum / m as f64).re;
    let scale = g * g / z.abs();
    let mut m = 256;
    let mut active: Vec<usize> = (0..entries.len()).collect();
    let mut sums = vec![C64::new(0.0, 0.0); entries.len()];
    add(&mut sums, &active, m, 1);
    let mut out: Vec<f64> = sums.iter().map(|&s| value(s, m)).collect();
    while !active.is_empty() {
        m *= 2;
        add(&mut sums, &active, m, 2);
        active.retain(|&e| {
            let next = value(sums[e], m);
            let settled = (next - out[e]).abs() <= 1e-15 * scale || m >= 1 << 22;
            out[e] = next;
            !settled
        });
    }
    out
}

pub fn binomial(n: u64, k: i64) -> u64 {
    if k < 0 || k as u64 > n {
        return 0;
    }
    let k = (k as u64).min(n - k as u64);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Classical fourth-order Runge–Kutta for `dpsi/ds = -i (dt/ds) H(s) psi`
/// on the full space, `steps` equal steps over `s in [0, 1]`.
pub fn rk4_full(
    h_of_s: impl Fn(f64) -> DMatrix<C64>,
    dt_ds: impl Fn(f64) -> f64,
    psi0: &nalgebra::DVector<C64>,
    steps: usize,
) -> nalgebra::DVector<C64> {
    let minus_i = C64::new(0.0, -1.0);
    let f = |s: f64, psi: &nalgebra::DVector<C64>| h_of_s(s) * psi * (minus_i * dt_ds(s));
    let h = 1.0 / steps as f64;
    let mut psi = psi0.clone();
    for k in 0..steps {
        let s = k as f64 * h;
        let k1 = f(s, &psi);
        let k2 = f(s + 0.5 * h, &(&psi + &k1 * c(0.5 * h)));
        let k3 = f(s + 0.5 * h, &(&psi + &k2 * c(0.5 * h)));
        let k4 = f(s + h, &(&psi + &k3 * c(h)));
        psi += (k1 + k2 * c(2.0) + k3 * c(2.0) + k4) * c(h / 6.0);
    }
    psi
}
