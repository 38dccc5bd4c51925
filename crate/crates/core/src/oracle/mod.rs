//! Finite-section oracle: truncations `P_L A P_L` on cubes, their eigenvalues,
//! and comparison against predicted spectra.

pub mod coverage;
pub mod lanczos;
pub mod tridiag;
pub mod truncate;

use crate::error::{Error, Result};

pub use coverage::{coverage, discrete_eigs, CoverageReport, DiscreteEigenvalue, Outlier, SizeSummary};
pub use truncate::{truncate, TruncatedMatrix};

/// Boundary rule of the truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    /// Values outside the cube are zero.
    #[default]
    Dirichlet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigMode {
    All,
    /// The given number of eigenvalues at each end of the spectrum.
    Extremal(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationConfig {
    /// Cube radius: the section lives on `[−L, L]ᴺ`.
    pub l: i64,
    pub boundary: Boundary,
    pub mode: EigMode,
    /// Relative residual bound `‖Mv − λv‖ ≤ residual_tol·‖M‖`.
    pub residual_tol: f64,
    pub seed: u64,
}

impl TruncationConfig {
    pub fn new(l: i64) -> Self {
        TruncationConfig { l, boundary: Boundary::Dirichlet, mode: EigMode::All, residual_tol: 1e-9, seed: 0x5eed }
    }

    pub fn extremal(l: i64, count: usize) -> Self {
        TruncationConfig { mode: EigMode::Extremal(count), ..Self::new(l) }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.l < 1 {
            return Err(Error::Invalid(format!("truncation radius must be >= 1, got {}", self.l)));
        }
        if !(self.residual_tol > 0.0) {
            return Err(Error::Invalid(format!("residual_tol must be positive, got {}", self.residual_tol)));
        }
        if self.mode == EigMode::Extremal(0) {
            return Err(Error::Invalid("extremal mode needs a positive count".into()));
        }
        Ok(())
    }

    /// One config per radius, sharing mode, tolerance and seed.
    pub fn sequence(&self, radii: &[i64]) -> Vec<TruncationConfig> {
        radii.iter().map(|&l| TruncationConfig { l, ..self.clone() }).collect()
    }
}

/// Eigenvalues of a Hermitian truncation, ascending.
///
/// Tridiagonal sections get every eigenvalue from implicit QL, bracketed by
/// Sturm counts. Other sections use dense Hermitian solves in `All` mode and
/// Lanczos in `Extremal` mode.
pub fn eigenvalues(m: &TruncatedMatrix, cfg: &TruncationConfig) -> Result<Vec<f64>> {
    Ok(eigenpairs(m, cfg, false)?.into_iter().map(|p| p.value).collect())
}

/// As [`eigenvalues`]; with `vectors` set, extremal mode also returns Ritz vectors
/// (in the real representation of [`TruncatedMatrix::real_matvec`]).
pub fn eigenpairs(m: &TruncatedMatrix, cfg: &TruncationConfig, vectors: bool) -> Result<Vec<lanczos::RitzPair>> {
    cfg.validate()?;
    m.check_hermitian()?;
    let norm = m.norm_bound().max(f64::MIN_POSITIVE);
    let bare = |v: Vec<f64>| v.into_iter().map(|value| lanczos::RitzPair { value, vector: Vec::new(), residual: 0.0 }).collect();
    match cfg.mode {
        EigMode::All => {
            if let Some((d, e)) = m.as_tridiagonal() {
                let vals = tridiag::eigenvalues(&d, &e)?;
                tridiag::sturm_check(&d, &e, &vals, cfg.residual_tol * norm + 1e-13 * norm, 64)?;
                return Ok(bare(vals));
            }
            let dense = m.to_dense()?;
            let h = (&dense + dense.adjoint()) * num_complex::Complex64::new(0.5, 0.0);
            let mut vals: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
            vals.sort_by(f64::total_cmp);
            Ok(bare(vals))
        }
        EigMode::Extremal(k) => {
            let n = m.real_size();
            // complex sections are embedded in dimension 2n, where every eigenvalue appears twice
            let k_eff = if m.is_real() { k } else { 2 * k };
            let opts = lanczos::LanczosOptions {
                low: k_eff,
                high: k_eff,
                tol: cfg.residual_tol * norm,
                seed: cfg.seed,
                max_dim: krylov_limit(n, k_eff),
            };
            let mut pairs = lanczos::extremal(n, |x, y| m.real_matvec(x, y), &opts)?;
            if !vectors {
                pairs.iter_mut().for_each(|p| p.vector = Vec::new());
            }
            Ok(pairs)
        }
    }
}

/// Krylov dimension cap: at least `2k + 20`, otherwise 1000 steps or a basis of
/// about 2·10⁷ numbers, whichever is smaller.
pub fn krylov_limit(n: usize, k: usize) -> usize {
    let memory = 20_000_000 / n.max(1);
    1000usize.min(memory).max(2 * k + 20).min(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wiener::{Coefficient, LatticeOperator, Periodic};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn laplacian_section_is_tridiagonal() {
        let m = truncate(&LatticeOperator::laplacian(1), &TruncationConfig::new(3)).unwrap();
        assert_eq!(m.size(), 7);
        let (d, e) = m.as_tridiagonal().unwrap();
        assert!(d.iter().all(|&v| v == 2.0));
        assert!(e.iter().all(|&v| v == 1.0));
        assert_eq!(m.entry(1, 0), Complex64::new(-1.0, 0.0));
        let vals = eigenvalues(&m, &TruncationConfig::new(3)).unwrap();
        for (j, v) in vals.iter().enumerate() {
            assert!((v - (2.0 - 2.0 * ((j + 1) as f64 * PI / 8.0).cos())).abs() < 1e-12);
        }
    }

    #[test]
    fn multiplication_section_is_diagonal() {
        let phi = Coefficient::periodic(Periodic::from_real(vec![2], &[0.0, 3.0]).unwrap());
        let m = truncate(&LatticeOperator::multiplication(1, phi), &TruncationConfig::new(2)).unwrap();
        for i in 0..5 {
            assert_eq!(m.entry(i, i).re, if (i as i64 - 2).rem_euclid(2) == 0 { 0.0 } else { 3.0 });
        }
        let vals = eigenvalues(&m, &TruncationConfig::new(2)).unwrap();
        assert_eq!(vals, vec![0.0, 0.0, 0.0, 3.0, 3.0]);
    }

    #[test]
    fn hermitian_sections() {
        let a = Complex64::from_polar(1.0, 0.4);
        let op = LatticeOperator::build_schrodinger(2, &[0.5, 1.0], &[Coefficient::constant(a), Coefficient::one()], Coefficient::real(0.3)).unwrap();
        let m = truncate(&op, &TruncationConfig::new(4)).unwrap();
        assert!(m.hermitian_defect() <= 1e-14);
        assert!(!m.is_real());
        let all = eigenvalues(&m, &TruncationConfig::new(4)).unwrap();
        let ext = eigenvalues(&m, &TruncationConfig::extremal(4, 2)).unwrap();
        assert!((ext[0] - all[0]).abs() < 1e-8);
        assert!((ext.last().unwrap() - all.last().unwrap()).abs() < 1e-8);
        let bad = truncate(&LatticeOperator::shift(&[1]), &TruncationConfig::new(3)).unwrap();
        assert!(matches!(eigenvalues(&bad, &TruncationConfig::new(3)), Err(Error::NotSelfAdjoint(_))));
    }

    #[test]
    fn two_by_two_swap() {
        let op = LatticeOperator::shift(&[1]).add(&LatticeOperator::shift(&[-1])).unwrap();
        let m = truncate_window(&op);
        let v = eigenvalues(&m, &TruncationConfig::new(1)).unwrap();
        assert!((v[0] + 1.0).abs() < 1e-15 && (v[1] - 1.0).abs() < 1e-15);
    }

    fn truncate_window(op: &LatticeOperator) -> TruncatedMatrix {
        truncate::truncate_on(op, &crate::wiener::Window::new(vec![0], vec![1]).unwrap()).unwrap()
    }

    #[test]
    fn interlacing_with_numerical_range() {
        let phi = Coefficient::periodic(Periodic::from_real(vec![3], &[-1.0, 2.0, 0.5]).unwrap());
        let op = LatticeOperator::schrodinger(1, phi);
        for l in [10, 50, 200] {
            let vals = eigenvalues(&truncate(&op, &TruncationConfig::new(l)).unwrap(), &TruncationConfig::new(l)).unwrap();
            // sp ⊆ [inf Φ, sup Φ + 4]
            assert!(vals[0] >= -1.0 - 1e-12 && *vals.last().unwrap() <= 6.0 + 1e-12);
        }
    }
}
