//! Finite sections of lattice operators on cubes with zero boundary values.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::TruncationConfig;
use crate::error::{Error, Result};
use crate::wiener::{LatticeOperator, Window};

/// Largest dense matrix (entries) the oracle builds.
pub const DENSE_LIMIT: usize = 10_000_000;

/// Sparse row storage of `P_L A P_L` on `[−L, L]ᴺ`, rows in lexicographic point order.
#[derive(Debug, Clone)]
pub struct TruncatedMatrix {
    window: Window,
    rows: Vec<Vec<(usize, Complex64)>>,
    real: bool,
}

/// Entry `(x, x − α) = a_α(x)` for `x, x − α` in the cube; other entries are dropped.
pub fn truncate(op: &LatticeOperator, cfg: &TruncationConfig) -> Result<TruncatedMatrix> {
    cfg.validate()?;
    let window = Window::cube(op.dim(), cfg.l);
    truncate_on(op, &window)
}

pub fn truncate_on(op: &LatticeOperator, window: &Window) -> Result<TruncatedMatrix> {
    if window.dim() != op.dim() {
        return Err(Error::DimensionMismatch(op.dim(), window.dim()));
    }
    let terms: Vec<(&Vec<i64>, _)> = op.terms().collect();
    let rows: Vec<Vec<(usize, Complex64)>> = (0..window.len())
        .into_par_iter()
        .map(|i| {
            let x = window.point(i);
            let mut row: Vec<(usize, Complex64)> = Vec::with_capacity(terms.len());
            for (alpha, a) in &terms {
                let y: Vec<i64> = x.iter().zip(alpha.iter()).map(|(p, q)| p - q).collect();
                if let Some(j) = window.index_of(&y) {
                    let v = a.eval(&x);
                    if v != Complex64::new(0.0, 0.0) {
                        row.push((j, v));
                    }
                }
            }
            row.sort_by_key(|e| e.0);
            row
        })
        .collect();
    let real = rows.iter().flatten().all(|(_, v)| v.im == 0.0);
    Ok(TruncatedMatrix { window: window.clone(), rows, real })
}

impl TruncatedMatrix {
    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn nonzeros(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }

    pub fn row(&self, i: usize) -> &[(usize, Complex64)] {
        &self.rows[i]
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        match self.rows[i].binary_search_by_key(&j, |e| e.0) {
            Ok(k) => self.rows[i][k].1,
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// Maximum absolute row sum, an upper bound for the spectral norm of a Hermitian matrix.
    pub fn norm_bound(&self) -> f64 {
        self.rows.iter().map(|r| r.iter().map(|e| e.1.norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// `max |M_ij − conj(M_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        self.rows
            .par_iter()
            .enumerate()
            .map(|(i, row)| row.iter().map(|&(j, v)| (v - self.entry(j, i).conj()).norm()).fold(0.0, f64::max))
            .reduce(|| 0.0, f64::max)
    }

    pub fn check_hermitian(&self) -> Result<()> {
        let defect = self.hermitian_defect();
        if defect > 1e-14 * self.norm_bound().max(1.0) {
            return Err(Error::NotSelfAdjoint(defect));
        }
        Ok(())
    }

    /// Diagonal and (modulus of the) off-diagonal if the matrix is tridiagonal.
    ///
    /// A Hermitian tridiagonal matrix is unitarily similar, by a diagonal phase
    /// matrix, to the real one with off-diagonal `|M_{i+1,i}|`.
    pub fn as_tridiagonal(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        if self.rows.iter().enumerate().any(|(i, r)| r.iter().any(|&(j, _)| j + 1 < i || i + 1 < j)) {
            return None;
        }
        let n = self.size();
        let diag = (0..n).map(|i| self.entry(i, i).re).collect();
        let off = (0..n.saturating_sub(1)).map(|i| self.entry(i + 1, i).norm()).collect();
        Some((diag, off))
    }

    /// `y = M x` in the real representation: `M` itself if real, otherwise
    /// the `2n` embedding `[[Re M, −Im M], [Im M, Re M]]`.
    pub fn real_matvec(&self, x: &[f64], y: &mut [f64]) {
        let n = self.size();
        let row_real = |i: usize| self.rows[i].iter().map(|&(j, v)| v.re * x[j]).sum::<f64>();
        if self.real {
            if n > 4096 {
                y.par_iter_mut().enumerate().for_each(|(i, out)| *out = row_real(i));
            } else {
                y.iter_mut().enumerate().for_each(|(i, out)| *out = row_real(i));
            }
            return;
        }
        let (xr, xi) = x.split_at(n);
        let compute = |i: usize| -> (f64, f64) {
            self.rows[i].iter().fold((0.0, 0.0), |(a, b), &(j, v)| {
                (a + v.re * xr[j] - v.im * xi[j], b + v.im * xr[j] + v.re * xi[j])
            })
        };
        let pairs: Vec<(f64, f64)> = if n > 4096 { (0..n).into_par_iter().map(compute).collect() } else { (0..n).map(compute).collect() };
        for (i, (a, b)) in pairs.into_iter().enumerate() {
            y[i] = a;
            y[n + i] = b;
        }
    }

    /// Dimension of the real representation used by [`real_matvec`](Self::real_matvec).
    pub fn real_size(&self) -> usize {
        if self.real {
            self.size()
        } else {
            2 * self.size()
        }
    }

    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        let n = self.size();
        if n.saturating_mul(n) > DENSE_LIMIT {
            return Err(Error::TruncationTooLarge(n * n));
        }
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }

    /// Rayleigh quotient `⟨Mv, v⟩ / ⟨v, v⟩` of a real vector in the real representation.
    pub fn rayleigh(&self, v: &[f64]) -> f64 {
        let mut y = vec![0.0; v.len()];
        self.real_matvec(v, &mut y);
        let num: f64 = y.iter().zip(v).map(|(a, b)| a * b).sum();
        let den: f64 = v.iter().map(|a| a * a).sum();
        num / den
    }
}
