//! Lowest eigenpairs of Hermitian operators.
//!
//! Small problems are diagonalized densely. Larger ones use Lanczos with
//! full reorthogonalization, explicit restarts and locking of converged
//! vectors, so that every copy of a degenerate level is found.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hamiltonian::{LinearOperator, Scalar};

pub const DEFAULT_SEED: u64 = 0xC0FFEE;

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    pub k: usize,
    pub want_vectors: bool,
    /// Largest dimension solved densely.
    pub dense_threshold: usize,
    pub max_matvecs: usize,
    /// Bound on `||H v - E v||` for unit `v`.
    pub tol: f64,
    pub seed: u64,
    pub krylov_dim: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            k: 1,
            want_vectors: true,
            dense_threshold: 2000,
            max_matvecs: 5000,
            tol: 1e-9,
            seed: DEFAULT_SEED,
            krylov_dim: 120,
        }
    }
}

impl EigenOptions {
    pub fn lowest(k: usize) -> Self {
        EigenOptions { k, ..Self::default() }
    }

    pub fn values_only(k: usize) -> Self {
        EigenOptions { k, want_vectors: false, ..Self::default() }
    }
}

#[derive(Debug, Clone)]
pub struct Eigenpairs<T> {
    /// Ascending.
    pub values: Vec<f64>,
    /// Unit eigenvectors matching `values`; empty when not requested.
    pub vectors: Vec<Vec<T>>,
    pub matvecs: usize,
}

#[inline]
pub fn inner<T: Scalar>(u: &[T], v: &[T]) -> T {
    let mut acc = T::zero();
    for (a, b) in u.iter().zip(v) {
        acc += a.conjugate() * *b;
    }
    acc
}

#[inline]
pub fn norm<T: Scalar>(v: &[T]) -> f64 {
    v.iter().map(|x| x.modulus_squared()).sum::<f64>().sqrt()
}

fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * *xi;
    }
}

fn scale<T: Scalar>(v: &mut [T], s: f64) {
    for x in v.iter_mut() {
        *x = x.scale(s);
    }
}

/// `||A v - lambda v||`.
pub fn residual<T: Scalar, O: LinearOperator<T> + ?Sized>(op: &O, lambda: f64, v: &[T]) -> f64 {
    let mut w = vec![T::zero(); v.len()];
    op.apply(v, &mut w);
    axpy(T::from_real(-lambda), v, &mut w);
    norm(&w)
}

pub fn lowest_eigenpairs<T: Scalar, O: LinearOperator<T> + ?Sized>(
    op: &O,
    opts: &EigenOptions,
) -> Result<Eigenpairs<T>> {
    let dim = op.dim();
    if opts.k == 0 || opts.k > dim {
        return Err(Error::InvalidParameter {
            name: "k",
            reason: format!("need 1 <= k <= dim = {dim}, got {}", opts.k),
        });
    }
    if dim <= opts.dense_threshold {
        Ok(dense_lowest(op.to_dense(), opts.k, opts.want_vectors))
    } else {
        lanczos(op, opts)
    }
}

pub fn dense_lowest<T: Scalar>(m: DMatrix<T>, k: usize, want_vectors: bool) -> Eigenpairs<T> {
    let dim = m.nrows();
    if !want_vectors {
        let ev = m.symmetric_eigenvalues();
        let mut values: Vec<f64> = ev.iter().copied().collect();
        values.sort_by(f64::total_cmp);
        values.truncate(k);
        return Eigenpairs { values, vectors: Vec::new(), matvecs: 0 };
    }
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order[..k].iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order[..k]
        .iter()
        .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect();
    Eigenpairs { values, vectors, matvecs: 0 }
}

struct Krylov<T> {
    basis: Vec<Vec<T>>,
    alphas: Vec<f64>,
    betas: Vec<f64>,
}

fn tridiagonal_eigen(alphas: &[f64], betas: &[f64]) -> SymmetricEigen<f64, nalgebra::Dyn> {
    let m = alphas.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alphas[i];
        if i + 1 < m {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    SymmetricEigen::new(t)
}

fn sorted_order(values: &nalgebra::DVector<f64>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    order
}

fn orthogonalize<T: Scalar>(v: &mut [T], against: &[&[T]]) {
    for _ in 0..2 {
        for u in against {
            let c = inner(u, v);
            axpy(-c, u, v);
        }
    }
}

fn random_unit<T: Scalar>(rng: &mut ChaCha8Rng, dim: usize) -> Vec<T> {
    let mut v: Vec<T> = (0..dim)
        .map(|_| {
            let re: f64 = rng.gen_range(-1.0..1.0);
            if T::IS_COMPLEX {
                let im: f64 = rng.gen_range(-1.0..1.0);
                T::from_c64(nalgebra::Complex::new(re, im))
            } else {
                T::from_real(re)
            }
        })
        .collect();
    let n = norm(&v);
    scale(&mut v, 1.0 / n);
    v
}

/// One Lanczos pass from `start` in the complement of `locked`; stops early
/// once the lowest Ritz value's residual estimate drops below `tol / 10`.
fn lanczos_pass<T: Scalar, O: LinearOperator<T> + ?Sized>(
    op: &O,
    start: Vec<T>,
    locked: &[Vec<T>],
    max_steps: usize,
    tol: f64,
    matvecs: &mut usize,
) -> Krylov<T> {
    let dim = op.dim();
    let mut kr = Krylov { basis: vec![start], alphas: Vec::new(), betas: Vec::new() };
    let mut w = vec![T::zero(); dim];
    for j in 0..max_steps {
        op.apply(&kr.basis[j], &mut w);
        *matvecs += 1;
        let alpha = inner(&kr.basis[j], &w).real();
        kr.alphas.push(alpha);
        // Full reorthogonalization against the Krylov basis and locked set.
        for _ in 0..2 {
            for u in kr.basis.iter().chain(locked.iter()) {
                let c = inner(u, &w);
                axpy(-c, u, &mut w);
            }
        }
        let beta = norm(&w);
        let m = kr.alphas.len();
        let check = m == max_steps || beta < 1e-12 || m % 5 == 0;
        if check {
            let eig = tridiagonal_eigen(&kr.alphas, &kr.betas);
            let lowest = sorted_order(&eig.eigenvalues)[0];
            let estimate = beta * eig.eigenvectors[(m - 1, lowest)].abs();
            if estimate < 0.1 * tol || beta < 1e-12 || m == max_steps {
                break;
            }
        }
        kr.betas.push(beta);
        let mut next = std::mem::replace(&mut w, vec![T::zero(); dim]);
        scale(&mut next, 1.0 / beta);
        kr.basis.push(next);
    }
    kr
}

fn ritz_vector<T: Scalar>(kr: &Krylov<T>, coeffs: nalgebra::DVectorView<'_, f64>) -> Vec<T> {
    let dim = kr.basis[0].len();
    let mut x = vec![T::zero(); dim];
    for (v, &c) in kr.basis.iter().zip(coeffs.iter()) {
        axpy(T::from_real(c), v, &mut x);
    }
    let n = norm(&x);
    scale(&mut x, 1.0 / n);
    x
}

fn lanczos<T: Scalar, O: LinearOperator<T> + ?Sized>(op: &O, opts: &EigenOptions) -> Result<Eigenpairs<T>> {
    let dim = op.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut locked_vals: Vec<f64> = Vec::new();
    let mut locked: Vec<Vec<T>> = Vec::new();
    let mut matvecs = 0usize;
    let mut start = random_unit::<T>(&mut rng, dim);
    let mut last_residual = f64::INFINITY;
    // After k vectors are locked, one extra search in their complement makes
    // sure no lower level was skipped.
    let mut verifying = false;

    loop {
        if matvecs >= opts.max_matvecs {
            return Err(Error::NoConvergence { iterations: matvecs, residual: last_residual });
        }
        {
            let refs: Vec<&[T]> = locked.iter().map(|v| v.as_slice()).collect();
            orthogonalize(&mut start, &refs);
        }
        let mut n0 = norm(&start);
        if n0 < 1e-8 {
            start = random_unit(&mut rng, dim);
            let refs: Vec<&[T]> = locked.iter().map(|v| v.as_slice()).collect();
            orthogonalize(&mut start, &refs);
            n0 = norm(&start);
        }
        scale(&mut start, 1.0 / n0);
        let steps = opts.krylov_dim.min(dim - locked.len()).max(1);
        let kr = lanczos_pass(op, start, &locked, steps, opts.tol, &mut matvecs);
        let eig = tridiagonal_eigen(&kr.alphas, &kr.betas);
        let order = sorted_order(&eig.eigenvalues);
        let theta = eig.eigenvalues[order[0]];
        let x = ritz_vector(&kr, eig.eigenvectors.column(order[0]));
        let res = residual(op, theta, &x);
        matvecs += 1;
        last_residual = res;
        let next_start = |rng: &mut ChaCha8Rng| {
            let mut s = if order.len() > 1 {
                ritz_vector(&kr, eig.eigenvectors.column(order[1]))
            } else {
                random_unit(rng, dim)
            };
            let noise: Vec<T> = random_unit(rng, dim);
            axpy(T::from_real(1e-2), &noise, &mut s);
            s
        };
        if res > opts.tol {
            start = x;
            continue;
        }
        if verifying {
            let top = locked_vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let scale_e = top.abs().max(1.0);
            if theta < top - 1e-8 * scale_e {
                let worst = locked_vals
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.total_cmp(b.1))
                    .map(|(i, _)| i)
                    .unwrap();
                locked_vals.remove(worst);
                locked.remove(worst);
                locked_vals.push(theta);
                locked.push(x);
                start = next_start(&mut rng);
                continue;
            }
            break;
        }
        locked_vals.push(theta);
        locked.push(x);
        if locked.len() == opts.k {
            if opts.k == 1 || locked.len() == dim {
                break;
            }
            verifying = true;
            start = random_unit(&mut rng, dim);
        } else {
            start = next_start(&mut rng);
        }
    }

    let mut order: Vec<usize> = (0..locked.len()).collect();
    order.sort_by(|&a, &b| locked_vals[a].total_cmp(&locked_vals[b]));
    let values = order.iter().map(|&i| locked_vals[i]).collect();
    let vectors = if opts.want_vectors {
        order.iter().map(|&i| locked[i].clone()).collect()
    } else {
        Vec::new()
    };
    Ok(Eigenpairs { values, vectors, matvecs })
}
