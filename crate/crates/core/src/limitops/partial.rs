//! Partial limits of coefficients along sequences tending to infinity.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::wiener::{Coefficient, TwoValued, Window};

pub type SequenceFn = Arc<dyn Fn(u64) -> Vec<i64> + Send + Sync>;

/// A sequence `j ↦ g(j) ∈ ℤᴺ` with a human-readable description.
#[derive(Clone)]
pub struct GeneratingSequence {
    pub description: String,
    g: SequenceFn,
}

impl GeneratingSequence {
    pub fn new(description: impl Into<String>, g: SequenceFn) -> Self {
        GeneratingSequence { description: description.into(), g }
    }

    pub fn at(&self, j: u64) -> Vec<i64> {
        (self.g)(j)
    }

    /// Case a: block midpoints `⌊(γ_k⁻ + γ_k⁺)/2⌋`.
    pub fn interior_of_lambda(t: &TwoValued) -> Self {
        let t = t.clone();
        Self::new("g(k) = ⌊(γ_k⁻ + γ_k⁺)/2⌋", Arc::new(move |k| vec![(t.gm(k).unwrap() + t.gp(k).unwrap()).div_euclid(2)]))
    }

    /// Case b: gap midpoints `⌊(γ_k⁺ + γ_{k+1}⁻)/2⌋`.
    pub fn gap_of_lambda(t: &TwoValued) -> Self {
        let t = t.clone();
        Self::new("g(k) = ⌊(γ_k⁺ + γ_{k+1}⁻)/2⌋", Arc::new(move |k| vec![(t.gp(k).unwrap() + t.gm(k + 1).unwrap()).div_euclid(2)]))
    }

    /// Case c: left block edges `γ_k⁻`.
    pub fn left_edge(t: &TwoValued) -> Self {
        let t = t.clone();
        Self::new("g(k) = γ_k⁻", Arc::new(move |k| vec![t.gm(k).unwrap()]))
    }

    /// Case d: first gap points `γ_k⁺ + 1`.
    pub fn right_edge(t: &TwoValued) -> Self {
        let t = t.clone();
        Self::new("g(k) = γ_k⁺ + 1", Arc::new(move |k| vec![t.gp(k).unwrap() + 1]))
    }

    /// Points on the first axis where `√|x|` equals `phase + 2π(offset + j)`.
    pub fn sqrt_phase(dim: usize, phase: f64, offset: u64) -> Self {
        Self::new(
            format!("g(j) = ⌊({phase:.6} + 2π(j + {offset}))²⌋ e_1"),
            Arc::new(move |j| {
                let s = phase + 2.0 * std::f64::consts::PI * (offset + j) as f64;
                let mut g = vec![0; dim.max(1)];
                g[0] = (s * s).floor() as i64;
                g
            }),
        )
    }

    /// `g(j) = j·step`.
    pub fn linear(step: Vec<i64>) -> Self {
        Self::new(
            format!("g(j) = j·{step:?}"),
            Arc::new(move |j| step.iter().map(|s| s * j as i64).collect()),
        )
    }
}

impl fmt::Debug for GeneratingSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GeneratingSequence({})", self.description)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PartialLimitReport {
    pub sequence: String,
    pub window_lo: Vec<i64>,
    pub window_hi: Vec<i64>,
    /// Inspected indices `j ∈ [j_max/2, j_max]`.
    pub tail: (u64, u64),
    /// Translates `x ↦ c(x + g(j))` on the window, one row per tail index.
    pub translates: Vec<Vec<Complex64>>,
    /// `sup_x |c(x + g(j)) − c(x + g(j_max))|` per tail index.
    pub deviation: Vec<f64>,
    pub oscillation: f64,
    pub converged: bool,
    /// Limit table on the window (lexicographic) when converged.
    pub limit: Option<Vec<Complex64>>,
}

impl PartialLimitReport {
    /// Agreement of the limit table with `c` on the window.
    pub fn matches(&self, c: &Coefficient, tol: f64) -> bool {
        let Some(limit) = &self.limit else { return false };
        let w = Window::new(self.window_lo.clone(), self.window_hi.clone()).expect("report window is valid");
        let ok = w.points().zip(limit).all(|(x, v)| (c.eval(&x) - v).norm() <= tol);
        ok
    }
}

/// Samples `c(x + g(j))` for `x` in the window and `j ∈ [j_max/2, j_max]`.
pub fn partial_limit_along(
    c: &Coefficient,
    g: &GeneratingSequence,
    window: &Window,
    j_max: u64,
    tol: f64,
) -> Result<PartialLimitReport> {
    if j_max < 2 {
        return Err(Error::Invalid(format!("j_max must be >= 2, got {j_max}")));
    }
    let lo_j = j_max / 2;
    let norm = |v: &[i64]| v.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0);
    let mut prev = 0u64;
    for j in lo_j..=j_max {
        let gj = g.at(j);
        if gj.len() != window.dim() {
            return Err(Error::DimensionMismatch(window.dim(), gj.len()));
        }
        let n = norm(&gj);
        if j > lo_j && n < prev {
            return Err(Error::SequenceBounded);
        }
        prev = n;
    }
    if norm(&g.at(j_max)) <= norm(&g.at(lo_j)) {
        return Err(Error::SequenceBounded);
    }
    let translates: Vec<Vec<Complex64>> = (lo_j..=j_max)
        .map(|j| {
            let gj = g.at(j);
            window
                .points()
                .map(|x| {
                    let y: Vec<i64> = x.iter().zip(&gj).map(|(a, b)| a + b).collect();
                    c.eval(&y)
                })
                .collect()
        })
        .collect();
    let last = translates.last().unwrap().clone();
    let deviation: Vec<f64> = translates
        .iter()
        .map(|row| row.iter().zip(&last).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
        .collect();
    let oscillation = deviation.iter().copied().fold(0.0, f64::max);
    let converged = oscillation <= tol;
    Ok(PartialLimitReport {
        sequence: g.description.clone(),
        window_lo: window.lo().to_vec(),
        window_hi: window.hi().to_vec(),
        tail: (lo_j, j_max),
        translates,
        deviation,
        oscillation,
        converged,
        limit: converged.then_some(last),
    })
}
