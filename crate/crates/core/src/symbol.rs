//! Fourier symbols `Â(θ) = Σ_α a_α e^{−i⟨α,θ⟩}` of constant-coefficient operators.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interval::{Interval, SpectrumSet};
use crate::torus::{refine_extremum, PointCloud, TorusGrid};
use crate::wiener::LatticeOperator;

/// Default extremum refinement tolerance.
pub const DEFAULT_REFINE_TOL: f64 = 1e-10;

/// Imaginary parts above this make a symbol non-real.
pub const REAL_TOL: f64 = 1e-10;

/// A translation-invariant operator: shift → complex constant.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantOperatorView {
    dim: usize,
    terms: Vec<(Vec<i64>, Complex64)>,
}

impl ConstantOperatorView {
    pub fn new(op: &LatticeOperator) -> Result<Self> {
        let mut terms = Vec::with_capacity(op.len());
        for (shift, c) in op.terms() {
            match c.as_constant() {
                Some(v) => terms.push((shift.clone(), v)),
                None => return Err(Error::NotTranslationInvariant(shift.clone())),
            }
        }
        Ok(ConstantOperatorView { dim: op.dim(), terms })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[(Vec<i64>, Complex64)] {
        &self.terms
    }

    pub fn eval(&self, theta: &[f64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(alpha, a)| {
                let phase: f64 = alpha.iter().zip(theta).map(|(&k, &t)| k as f64 * t).sum();
                a * Complex64::from_polar(1.0, -phase)
            })
            .sum()
    }

    /// Detects `c + Σ_k w_k (2 − 2cos θ_k)` by exact term matching; returns `(c, w)`.
    pub fn laplacian_template(&self) -> Option<(f64, Vec<f64>)> {
        let mut centre = 0.0;
        let mut plus = vec![None; self.dim];
        let mut minus = vec![None; self.dim];
        for (alpha, a) in &self.terms {
            if a.im != 0.0 {
                return None;
            }
            let nonzero: Vec<usize> = (0..self.dim).filter(|&k| alpha[k] != 0).collect();
            match nonzero.as_slice() {
                [] => centre = a.re,
                [k] if alpha[*k] == 1 => plus[*k] = Some(a.re),
                [k] if alpha[*k] == -1 => minus[*k] = Some(a.re),
                _ => return None,
            }
        }
        let mut w = vec![0.0; self.dim];
        for k in 0..self.dim {
            match (plus[k], minus[k]) {
                (Some(p), Some(m)) if p == m => w[k] = -p,
                (None, None) => {}
                _ => return None,
            }
        }
        let c = centre - 2.0 * w.iter().sum::<f64>();
        Some((c, w))
    }
}

pub fn symbol_eval(a: &ConstantOperatorView, theta: &[f64]) -> Complex64 {
    a.eval(theta)
}

/// Samples the symbol over the grid in the grid's point order.
pub fn range_cloud(a: &ConstantOperatorView, grid: &TorusGrid) -> Result<PointCloud> {
    if grid.dim() != a.dim {
        return Err(Error::DimensionMismatch(a.dim, grid.dim()));
    }
    let samples: Vec<Complex64> = (0..grid.len()).into_par_iter().map(|i| a.eval(&grid.point(i))).collect();
    PointCloud::new(samples, grid.clone())
}

/// Spectrum of a self-adjoint constant-coefficient operator as the symbol range.
///
/// The Laplacian template yields exact endpoints `[c + 4Σ min(w,0), c + 4Σ max(w,0)]`;
/// otherwise grid extrema are refined by coordinate-wise golden-section search.
pub fn spectrum_constant(a: &ConstantOperatorView, grid: &TorusGrid, refine_tol: f64) -> Result<SpectrumSet> {
    if let Some((c, w)) = a.laplacian_template() {
        let lo = c + 4.0 * w.iter().map(|v| v.min(0.0)).sum::<f64>();
        let hi = c + 4.0 * w.iter().map(|v| v.max(0.0)).sum::<f64>();
        return SpectrumSet::exact(&[(lo, hi)]);
    }
    let cloud = range_cloud(a, grid)?;
    let max_im = cloud.samples().iter().fold(0.0f64, |m, v| m.max(v.im.abs()));
    if max_im > REAL_TOL {
        return Err(Error::UseRangeCloud(max_im));
    }
    let (imin, imax) = argextrema(cloud.samples().iter().map(|v| v.re));
    let half: Vec<f64> = (0..grid.dim()).map(|k| grid.spacing(k)).collect();
    let f = |t: &[f64]| a.eval(t).re;
    let (_, lo) = refine_extremum(f, &grid.point(imin), &half, false, refine_tol);
    let (_, hi) = refine_extremum(f, &grid.point(imax), &half, true, refine_tol);
    SpectrumSet::exact(&[(lo, hi)])
}

/// Indices of the minimum and maximum of a nonempty sequence.
pub(crate) fn argextrema<I: Iterator<Item = f64>>(values: I) -> (usize, usize) {
    let mut imin = 0;
    let mut imax = 0;
    let mut vmin = f64::INFINITY;
    let mut vmax = f64::NEG_INFINITY;
    for (i, v) in values.enumerate() {
        if v < vmin {
            vmin = v;
            imin = i;
        }
        if v > vmax {
            vmax = v;
            imax = i;
        }
    }
    (imin, imax)
}

/// CSV-ready rows `θ_1, …, θ_N, Re Â, Im Â`.
pub fn cloud_rows(cloud: &PointCloud) -> Vec<Vec<f64>> {
    cloud
        .samples()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let mut row = cloud.grid().point(i);
            row.push(v.re);
            row.push(v.im);
            row
        })
        .collect()
}

/// Interval `[min, max]` of the real symbol over a grid, without refinement.
pub fn sampled_range(a: &ConstantOperatorView, grid: &TorusGrid) -> Result<Interval> {
    let cloud = range_cloud(a, grid)?;
    let lo = cloud.samples().iter().map(|v| v.re).fold(f64::INFINITY, f64::min);
    let hi = cloud.samples().iter().map(|v| v.re).fold(f64::NEG_INFINITY, f64::max);
    Interval::new(lo, hi)
}
