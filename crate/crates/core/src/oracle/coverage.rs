//! Predicted spectrum versus truncation eigenvalues.

use serde::Serialize;

use super::{eigenvalues, truncate, TruncationConfig};
use crate::error::{Error, Result};
use crate::interval::SpectrumSet;
use crate::wiener::LatticeOperator;

/// Truncation sizes an outlier must persist through to count as stable.
pub const MIN_STABLE_SIZES: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outlier {
    /// Value at the largest truncation radius.
    pub value: f64,
    /// Distance to the predicted set.
    pub distance: f64,
    pub stable: bool,
    /// `max − min` of the matched values across truncation sizes.
    pub spread: f64,
    /// Nearest outlier within `10δ` at each size, in config order.
    pub per_size: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeSummary {
    pub l: i64,
    pub size: usize,
    pub eigenvalue_count: usize,
    pub coverage_fraction: f64,
    pub outlier_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub predicted: SpectrumSet,
    /// Eigenvalues at the largest truncation radius.
    pub eigenvalues: Vec<f64>,
    pub delta: f64,
    /// Fraction of probe points of `predicted` within `δ` of an eigenvalue (largest radius).
    pub coverage_fraction: f64,
    pub outliers: Vec<Outlier>,
    pub sizes: Vec<SizeSummary>,
    /// False when fewer than [`MIN_STABLE_SIZES`] sizes were run; then nothing is stable.
    pub stability_assessed: bool,
}

impl CoverageReport {
    pub fn stable_outliers(&self) -> impl Iterator<Item = &Outlier> {
        self.outliers.iter().filter(|o| o.stable)
    }

    /// Stable outliers indicate that the prediction misses part of the spectrum.
    pub fn flags_mismatch(&self) -> bool {
        self.stable_outliers().next().is_some()
    }

    /// Eigenvalues at the largest radius with unstable outliers removed.
    pub fn filtered_eigenvalues(&self) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .copied()
            .filter(|&e| self.predicted.distance_to(e) <= self.delta || self.outliers.iter().any(|o| o.stable && o.value == e))
            .collect()
    }
}

fn nearest(sorted: &[f64], x: f64) -> Option<f64> {
    let i = sorted.partition_point(|&v| v < x);
    let mut best: Option<f64> = None;
    for j in [i.wrapping_sub(1), i] {
        if let Some(&v) = sorted.get(j) {
            if best.is_none_or(|b| (v - x).abs() < (b - x).abs()) {
                best = Some(v);
            }
        }
    }
    best
}

/// Fraction of probe points (spacing `δ/2`) within `δ` of some eigenvalue.
pub fn coverage_fraction(predicted: &SpectrumSet, eigs: &[f64], delta: f64) -> f64 {
    let probes = predicted.probe_points(delta / 2.0);
    if probes.is_empty() {
        return 0.0;
    }
    let hit = probes.iter().filter(|&&p| nearest(eigs, p).is_some_and(|e| (e - p).abs() <= delta)).count();
    hit as f64 / probes.len() as f64
}

/// Truncates `op` at every configured radius and compares with `predicted`.
pub fn coverage(predicted: &SpectrumSet, op: &LatticeOperator, cfgs: &[TruncationConfig], delta: f64) -> Result<CoverageReport> {
    let spectra = cfgs
        .iter()
        .map(|cfg| {
            let m = truncate(op, cfg)?;
            Ok((cfg.l, m.size(), eigenvalues(&m, cfg)?))
        })
        .collect::<Result<Vec<_>>>()?;
    coverage_from(predicted, spectra, delta)
}

/// As [`coverage`], from precomputed `(L, matrix size, sorted eigenvalues)` triples.
pub fn coverage_from(predicted: &SpectrumSet, spectra: Vec<(i64, usize, Vec<f64>)>, delta: f64) -> Result<CoverageReport> {
    if predicted.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    if !(delta > 0.0) {
        return Err(Error::Invalid(format!("matching tolerance must be positive, got {delta}")));
    }
    if spectra.is_empty() {
        return Err(Error::Invalid("coverage needs at least one truncation size".into()));
    }
    let outliers_at: Vec<Vec<f64>> = spectra
        .iter()
        .map(|(_, _, e)| e.iter().copied().filter(|&v| predicted.distance_to(v) > delta).collect())
        .collect();
    let sizes: Vec<SizeSummary> = spectra
        .iter()
        .zip(&outliers_at)
        .map(|((l, n, e), o)| SizeSummary {
            l: *l,
            size: *n,
            eigenvalue_count: e.len(),
            coverage_fraction: coverage_fraction(predicted, e, delta),
            outlier_count: o.len(),
        })
        .collect();
    let largest = (0..spectra.len()).max_by_key(|&i| spectra[i].0).unwrap();
    let stability_assessed = spectra.len() >= MIN_STABLE_SIZES;
    let window = 10.0 * delta;
    let outliers = outliers_at[largest]
        .iter()
        .map(|&value| {
            let per_size: Vec<Option<f64>> =
                outliers_at.iter().map(|o| nearest(o, value).filter(|v| (v - value).abs() < window)).collect();
            let present: Vec<f64> = per_size.iter().flatten().copied().collect();
            let spread = present.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v)) - present.iter().fold(f64::INFINITY, |m, &v| m.min(v));
            let stable = stability_assessed && present.len() == spectra.len() && spread < window;
            Outlier { value, distance: predicted.distance_to(value), stable, spread, per_size }
        })
        .collect();
    let (_, _, eigenvalues) = spectra.into_iter().nth(largest).unwrap();
    Ok(CoverageReport {
        predicted: predicted.clone(),
        coverage_fraction: sizes[largest].coverage_fraction,
        eigenvalues,
        delta,
        outliers,
        sizes,
        stability_assessed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteEigenvalue {
    pub value: f64,
    /// Spread across truncation sizes, an accuracy estimate.
    pub spread: f64,
}

/// Stable outliers of the truncations relative to `ess`: candidate discrete eigenvalues.
pub fn discrete_eigs(op: &LatticeOperator, ess: &SpectrumSet, cfgs: &[TruncationConfig], delta: f64) -> Result<Vec<DiscreteEigenvalue>> {
    let report = coverage(ess, op, cfgs, delta)?;
    Ok(report.stable_outliers().map(|o| DiscreteEigenvalue { value: o.value, spread: o.spread }).collect())
}
