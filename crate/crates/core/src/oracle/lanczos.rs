//! Lanczos iteration with full reorthogonalization for extremal eigenpairs
//! of real symmetric operators given by a matrix-vector product.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct RitzPair {
    pub value: f64,
    pub vector: Vec<f64>,
    /// `‖Av − λv‖` for the unit Ritz vector.
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct LanczosOptions {
    pub low: usize,
    pub high: usize,
    /// Absolute residual target.
    pub tol: f64,
    pub seed: u64,
    /// Largest Krylov dimension before giving up.
    pub max_dim: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(b, a)| *b += alpha * a);
}

/// Eigen-decomposition of the Lanczos tridiagonal `T_m`.
fn ritz(alpha: &[f64], beta: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let m = alpha.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = t.symmetric_eigen();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m, m, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// The `low` smallest and `high` largest eigenpairs, ascending and without duplicates.
///
/// Eigenvalue multiplicities are not resolved: a Krylov space holds one
/// direction per eigenspace.
pub fn extremal<F>(n: usize, matvec: F, opts: &LanczosOptions) -> Result<Vec<RitzPair>>
where
    F: Fn(&[f64], &mut [f64]),
{
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut q: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let nq = dot(&q, &q).sqrt();
    q.iter_mut().for_each(|v| *v /= nq);
    let max_dim = opts.max_dim.min(n).max(1);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_dim.min(512));
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let mut scale = 0.0f64;
    loop {
        matvec(&q, &mut w);
        let a = dot(&w, &q);
        alpha.push(a);
        axpy(-a, &q, &mut w);
        if let (Some(prev), Some(&b)) = (basis.last(), beta.last()) {
            axpy(-b, prev, &mut w);
        }
        basis.push(q.clone());
        // two passes of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for v in &basis {
                let c = dot(&w, v);
                axpy(-c, v, &mut w);
            }
        }
        let b = dot(&w, &w).sqrt();
        scale = scale.max(a.abs() + b);
        let m = alpha.len();
        let exhausted = b <= 1e-13 * scale.max(f64::MIN_POSITIVE) || m >= n;
        let check = exhausted || m >= max_dim || m % 8.max(m / 16) == 0;
        if check {
            let (values, vecs) = ritz(&alpha, &beta);
            let want: Vec<usize> = {
                let mut idx: Vec<usize> = (0..m.min(opts.low)).collect();
                idx.extend((m.saturating_sub(opts.high)..m).filter(|i| *i >= m.min(opts.low)));
                idx
            };
            let res = |i: usize| if exhausted { 0.0 } else { b * vecs[(m - 1, i)].abs() };
            let converged = want.iter().all(|&i| res(i) <= opts.tol);
            let enough = m >= (opts.low + opts.high).min(n) || exhausted;
            if converged && enough {
                let mut out: Vec<RitzPair> = Vec::new();
                for &i in &want {
                    let mut v = vec![0.0; n];
                    for (k, qk) in basis.iter().enumerate() {
                        axpy(vecs[(k, i)], qk, &mut v);
                    }
                    let norm = dot(&v, &v).sqrt();
                    v.iter_mut().for_each(|x| *x /= norm);
                    out.push(RitzPair { value: values[i], vector: v, residual: res(i) });
                }
                out.dedup_by(|a, b| (a.value - b.value).abs() <= opts.tol);
                return Ok(out);
            }
            if m >= max_dim || exhausted {
                let worst = want.iter().map(|&i| res(i)).fold(0.0, f64::max);
                return Err(Error::NonConvergence(format!(
                    "Lanczos: residual {worst:e} above {:e} after {m} steps",
                    opts.tol
                )));
            }
        }
        beta.push(b);
        q = w.iter().map(|v| v / b).collect();
    }
}
