//! Matrix symbols of r-periodic operators.
//!
//! Regrouping `u` into blocks `U(y)_j = u(r·y + j)` (residues `j` in
//! lexicographic order) turns an r-periodic operator into a block Laurent
//! operator. Its symbol is
//!
//! ```text
//! σ(t) = Σ_α μ(a_α) · Λ̂_1^{−α_1}(t_1) ⊗ … ⊗ Λ̂_N^{−α_N}(t_N),
//! ```
//!
//! with `μ(a)` the diagonal of the period table and `Λ̂_j(t)` the `r_j × r_j`
//! matrix with ones on the superdiagonal and `t^{-1}` in the bottom-left
//! corner. Its inverse has ones on the subdiagonal and `t` in the top-right
//! corner, so every power `Λ̂^{−s}` is the generalized permutation
//! `e_i ↦ t^{⌊(i+s)/r⌋} e_{(i+s) mod r}`; no numerical inversion is needed.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interval::{Interval, SpectrumSet};
use crate::symbol::argextrema;
use crate::torus::{refine_extremum, TorusGrid};
use crate::wiener::coefficient::lcm;
use crate::wiener::{LatticeFunction, LatticeOperator, Periodicity, Window};

/// Hermitian defect allowed in band computations.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Default grid: 2048 points for N = 1, 128 per axis for N = 2, 32 for N = 3.
pub fn default_grid(dim: usize) -> TorusGrid {
    let n = match dim {
        0 | 1 => 2048,
        2 => 128,
        3 => 32,
        _ => 8,
    };
    TorusGrid::uniform(dim.max(1), n).expect("valid default grid")
}

/// Smallest common period of all coefficients; `None` if some coefficient is not periodic.
pub fn common_period(op: &LatticeOperator) -> Option<Vec<usize>> {
    let mut r = vec![1usize; op.dim()];
    for (_, c) in op.terms() {
        match c.periodicity() {
            Periodicity::Constant => {}
            Periodicity::Periodic(p) if p.len() == op.dim() => {
                for (a, b) in r.iter_mut().zip(&p) {
                    *a = lcm(*a, *b);
                }
            }
            _ => return None,
        }
    }
    Some(r)
}

/// The `d × d` matrix symbol of an r-periodic operator, `d = ∏ r_j`.
#[derive(Debug, Clone)]
pub struct PeriodSymbol {
    period: Vec<usize>,
    d: usize,
    terms: Vec<(Vec<i64>, Vec<Complex64>)>,
}

/// Per block column: target row and the exponent vector of `t`.
fn generalized_permutation(period: &[usize], alpha: &[i64], col: usize) -> (usize, Vec<i64>) {
    let mut rem = col;
    let mut residues = vec![0i64; period.len()];
    for axis in (0..period.len()).rev() {
        residues[axis] = (rem % period[axis]) as i64;
        rem /= period[axis];
    }
    let mut row = 0usize;
    let mut exps = vec![0i64; period.len()];
    for axis in 0..period.len() {
        let r = period[axis] as i64;
        let s = residues[axis] + alpha[axis];
        exps[axis] = s.div_euclid(r);
        row = row * period[axis] + s.rem_euclid(r) as usize;
    }
    (row, exps)
}

impl PeriodSymbol {
    pub fn period(&self) -> &[usize] {
        &self.period
    }

    pub fn size(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.period.len()
    }

    /// Diagonal tables `μ(a_α)` by shift.
    pub fn terms(&self) -> &[(Vec<i64>, Vec<Complex64>)] {
        &self.terms
    }

    /// `σ(θ)` with `t_j = e^{iθ_j}`.
    pub fn eval(&self, theta: &[f64]) -> DMatrix<Complex64> {
        let mut m = DMatrix::<Complex64>::zeros(self.d, self.d);
        for (alpha, diag) in &self.terms {
            for col in 0..self.d {
                let (row, exps) = generalized_permutation(&self.period, alpha, col);
                let phase: f64 = exps.iter().zip(theta).map(|(&q, &t)| q as f64 * t).sum();
                m[(row, col)] += diag[row] * Complex64::from_polar(1.0, phase);
            }
        }
        m
    }

    /// The symbol of `A − λI`.
    pub fn shifted(&self, lambda: f64) -> PeriodSymbol {
        let mut out = self.clone();
        let zero = vec![0i64; self.dim()];
        match out.terms.iter_mut().find(|(a, _)| *a == zero) {
            Some((_, diag)) => diag.iter_mut().for_each(|v| *v -= lambda),
            None => out.terms.push((zero, vec![Complex64::new(-lambda, 0.0); self.d])),
        }
        out
    }

    /// Lipschitz constant of `θ ↦ σ(θ)` in operator norm (w.r.t. the max-norm on θ).
    pub fn lipschitz_bound(&self) -> f64 {
        self.terms
            .iter()
            .map(|(alpha, diag)| {
                let sup = diag.iter().fold(0.0f64, |m, v| m.max(v.norm()));
                let q: f64 = alpha.iter().zip(&self.period).map(|(&a, &r)| (a.unsigned_abs() as f64 / r as f64).ceil() + 1.0).sum();
                sup * q
            })
            .sum()
    }
}

/// Builds `σ(𝓐)` for period `r`; every coefficient period must divide `r`.
pub fn build_symbol(op: &LatticeOperator, period: &[usize]) -> Result<PeriodSymbol> {
    if period.len() != op.dim() {
        return Err(Error::DimensionMismatch(op.dim(), period.len()));
    }
    if period.contains(&0) {
        return Err(Error::PeriodMismatch(format!("period {period:?} has a zero entry")));
    }
    let cell = Window::new(vec![0; period.len()], period.iter().map(|&r| r as i64 - 1).collect())?;
    let mut terms = Vec::new();
    for (alpha, c) in op.terms() {
        match c.periodicity() {
            Periodicity::Constant => {}
            Periodicity::Periodic(p) => {
                if p.len() != period.len() || p.iter().zip(period).any(|(a, b)| b % a != 0) {
                    return Err(Error::PeriodMismatch(format!(
                        "coefficient at shift {alpha:?} has period {p:?}, which does not divide {period:?}"
                    )));
                }
            }
            Periodicity::Aperiodic => {
                return Err(Error::PeriodMismatch(format!("coefficient at shift {alpha:?} is not periodic")))
            }
        }
        let diag: Vec<Complex64> = cell.points().map(|x| c.eval(&x)).collect();
        terms.push((alpha.clone(), diag));
    }
    let d = cell.len();
    Ok(PeriodSymbol { period: period.to_vec(), d, terms })
}

/// Sorted eigenvalues of `σ(θ)` at every grid point.
#[derive(Debug, Clone)]
pub struct BandSample {
    pub grid: TorusGrid,
    pub values: Vec<Vec<f64>>,
}

impl BandSample {
    /// Rows `θ_1, …, θ_N, λ_1, …, λ_d`.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let mut row = self.grid.point(i);
                row.extend_from_slice(v);
                row
            })
            .collect()
    }

    pub fn band_count(&self) -> usize {
        self.values.first().map_or(0, |v| v.len())
    }

    /// Sampled `[min λ_k, max λ_k]`.
    pub fn band_range(&self, k: usize) -> (f64, f64) {
        self.values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v[k]), hi.max(v[k])))
    }
}

fn hermitian_defect(m: &DMatrix<Complex64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..=i {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Sorted eigenvalues of a Hermitian matrix with the residual contract
/// `‖σv − λv‖ ≤ 1e−10·‖σ‖`.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    let defect = hermitian_defect(m);
    let norm = m.norm();
    if defect > HERMITIAN_TOL * norm.max(1.0) {
        return Err(Error::NotSelfAdjoint(defect));
    }
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = h.clone().symmetric_eigen();
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        let v: DVector<Complex64> = eig.eigenvectors.column(k).into_owned();
        let r = (&h * &v - &v * Complex64::new(lambda, 0.0)).norm();
        if r > 1e-10 * norm.max(1e-300) {
            return Err(Error::NonConvergence(format!("Hermitian eigensolver residual {r:e} for λ = {lambda}")));
        }
    }
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

pub fn band_sample(p: &PeriodSymbol, grid: &TorusGrid) -> Result<BandSample> {
    if grid.dim() != p.dim() {
        return Err(Error::DimensionMismatch(p.dim(), grid.dim()));
    }
    let values = (0..grid.len())
        .into_par_iter()
        .map(|i| hermitian_eigenvalues(&p.eval(&grid.point(i))))
        .collect::<Result<Vec<_>>>()?;
    Ok(BandSample { grid: grid.clone(), values })
}

/// `⋃_k Γ_k` with `Γ_k = [min λ_k, max λ_k]`, extrema refined to `refine_tol`.
pub fn periodic_spectrum(p: &PeriodSymbol, grid: &TorusGrid, refine_tol: f64) -> Result<SpectrumSet> {
    let bands = band_sample(p, grid)?;
    periodic_spectrum_from(p, &bands, refine_tol)
}

/// As [`periodic_spectrum`], reusing an existing band sample.
pub fn periodic_spectrum_from(p: &PeriodSymbol, bands: &BandSample, refine_tol: f64) -> Result<SpectrumSet> {
    let grid = &bands.grid;
    let half: Vec<f64> = (0..grid.dim()).map(|k| grid.spacing(k)).collect();
    let intervals = (0..bands.band_count())
        .into_par_iter()
        .map(|k| {
            let f = |t: &[f64]| hermitian_eigenvalues(&p.eval(t)).map(|v| v[k]).unwrap_or(f64::NAN);
            let (imin, imax) = argextrema(bands.values.iter().map(|v| v[k]));
            let (glo, ghi) = bands.band_range(k);
            let (_, lo) = refine_extremum(f, &grid.point(imin), &half, false, refine_tol);
            let (_, hi) = refine_extremum(f, &grid.point(imax), &half, true, refine_tol);
            let lo = if lo.is_finite() { lo.min(glo) } else { glo };
            let hi = if hi.is_finite() { hi.max(ghi) } else { ghi };
            Interval::new(lo, hi)
        })
        .collect::<Result<Vec<_>>>()?;
    SpectrumSet::normalize(intervals, 0.0)
}

/// Result of the determinant test.
#[derive(Debug, Clone, PartialEq)]
pub struct InvertibilityReport {
    pub invertible: bool,
    /// Point where `|det σ|` is smallest.
    pub witness: Vec<f64>,
    pub min_abs_det: f64,
    pub det_tol: f64,
}

/// `det σ(θ) ≠ 0` on the torus, with `det_tol = 1e−12·max‖σ‖^d`.
pub fn invertibility_check(p: &PeriodSymbol, grid: &TorusGrid) -> Result<InvertibilityReport> {
    if grid.dim() != p.dim() {
        return Err(Error::DimensionMismatch(p.dim(), grid.dim()));
    }
    let samples: Vec<(f64, f64)> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let m = p.eval(&grid.point(i));
            (m.clone().lu().determinant().norm(), m.norm())
        })
        .collect();
    let norm = samples.iter().fold(0.0f64, |m, s| m.max(s.1));
    let det_tol = 1e-12 * norm.max(1.0).powi(p.size() as i32);
    let (imin, _) = argextrema(samples.iter().map(|s| s.0));
    let half: Vec<f64> = (0..grid.dim()).map(|k| grid.spacing(k)).collect();
    let f = |t: &[f64]| p.eval(t).lu().determinant().norm();
    let (witness, min_abs_det) = refine_extremum(f, &grid.point(imin), &half, false, 0.0);
    Ok(InvertibilityReport { invertible: min_abs_det > det_tol, witness, min_abs_det, det_tol })
}

/// Regroups `u` into block form on the block window.
fn regroup(u: &LatticeFunction, period: &[usize], blocks: &Window) -> Vec<Vec<Complex64>> {
    let cell = Window::new(vec![0; period.len()], period.iter().map(|&r| r as i64 - 1).collect()).unwrap();
    blocks
        .points()
        .map(|y| {
            cell.points()
                .map(|j| {
                    let x: Vec<i64> = y.iter().zip(&j).zip(period).map(|((&y, &j), &r)| r as i64 * y + j).collect();
                    u.get(&x)
                })
                .collect()
        })
        .collect()
}

/// Maximum discrepancy between `T_r A u` (scalar application, then regrouping)
/// and the block operator `Σ μ(a_α) Λ^{−α}` applied to `T_r u`, for random `u`
/// supported in `radius` blocks around the origin.
pub fn conjugation_check(op: &LatticeOperator, period: &[usize], radius: i64, seed: u64) -> Result<f64> {
    use rand::{Rng, SeedableRng};
    if radius < 1 {
        return Err(Error::SupportEscape);
    }
    let sym = build_symbol(op, period)?;
    let dim = op.dim();
    let rmax = *period.iter().max().unwrap() as i64;
    let margin = op.shift_radius() / rmax + 2;
    let inner = Window::cube(dim, radius);
    let outer = Window::cube(dim, radius + margin);
    let scalar = |w: &Window| {
        Window::new(
            w.lo().iter().zip(period).map(|(&l, &r)| l * r as i64).collect(),
            w.hi().iter().zip(period).map(|(&h, &r)| h * r as i64 + r as i64 - 1).collect(),
        )
        .unwrap()
    };
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut u = LatticeFunction::zero(dim);
    for x in scalar(&inner).points() {
        u.set(x, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    }
    // route 1: apply on the lattice, regroup afterwards
    let au = op.apply(&u, &scalar(&outer))?;
    let lhs = regroup(&au, period, &outer);
    // route 2: block operator on the regrouped input, read off the symbol tables
    let blocks_in = regroup(&u, period, &inner);
    let d = sym.size();
    let mut rhs = vec![vec![Complex64::new(0.0, 0.0); d]; outer.len()];
    for (bi, y) in inner.points().enumerate() {
        for (alpha, diag) in sym.terms() {
            for col in 0..d {
                let (row, exps) = generalized_permutation(period, alpha, col);
                // t^q acts as the block shift y ↦ y + q
                let target: Vec<i64> = y.iter().zip(&exps).map(|(a, b)| a + b).collect();
                let to = outer.index_of(&target).ok_or(Error::SupportEscape)?;
                rhs[to][row] += diag[row] * blocks_in[bi][col];
            }
        }
    }
    let mut worst = 0.0f64;
    for (a, b) in lhs.iter().zip(&rhs) {
        for (x, y) in a.iter().zip(b) {
            worst = worst.max((x - y).norm());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::{spectrum_constant, ConstantOperatorView};
    use crate::wiener::{Coefficient, Periodic};
    use std::f64::consts::PI;

    fn jacobi(phi: [f64; 2]) -> LatticeOperator {
        let p = Coefficient::periodic(Periodic::from_real(vec![2], &phi).unwrap());
        LatticeOperator::shift(&[1])
            .add(&LatticeOperator::shift(&[-1]))
            .unwrap()
            .add(&LatticeOperator::multiplication(1, p))
            .unwrap()
    }

    /// Closed-form bands of the 2-periodic Jacobi operator:
    /// `λ² − (Φ0 + Φ1)λ + Φ0Φ1 − γ = 0`, `γ = |1 + t|² ∈ [0, 4]`.
    fn jacobi_bands(phi: [f64; 2]) -> SpectrumSet {
        let s = phi[0] + phi[1];
        let root = |g: f64, sign: f64| (s + sign * ((phi[0] - phi[1]).powi(2) + 4.0 * g).sqrt()) / 2.0;
        SpectrumSet::exact(&[(root(4.0, -1.0), root(0.0, -1.0)), (root(0.0, 1.0), root(4.0, 1.0))]).unwrap()
    }

    #[test]
    fn symbol_matches_two_by_two_example() {
        let sym = build_symbol(&jacobi([0.0, 3.0]), &[2]).unwrap();
        let theta = 0.37;
        let t = Complex64::from_polar(1.0, theta);
        let m = sym.eval(&[theta]);
        assert!((m[(0, 0)] - Complex64::new(0.0, 0.0)).norm() < 1e-15);
        assert!((m[(0, 1)] - (1.0 + t)).norm() < 1e-15);
        assert!((m[(1, 0)] - (1.0 + t.inv())).norm() < 1e-15);
        assert!((m[(1, 1)] - Complex64::new(3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn band_orientation() {
        let sym = build_symbol(&jacobi([0.0, 3.0]), &[2]).unwrap();
        let at0 = hermitian_eigenvalues(&sym.eval(&[0.0])).unwrap();
        let atpi = hermitian_eigenvalues(&sym.eval(&[PI])).unwrap();
        assert!((at0[0] + 1.0).abs() < 1e-12 && (at0[1] - 4.0).abs() < 1e-12);
        assert!(atpi[0].abs() < 1e-12 && (atpi[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn periodic_jacobi_bands() {
        let grid = default_grid(1);
        for phi in [[0.0, 3.0], [0.0, 1.0], [2.0, -0.5]] {
            let sym = build_symbol(&jacobi(phi), &[2]).unwrap();
            let s = periodic_spectrum(&sym, &grid, 1e-12).unwrap();
            let expect = jacobi_bands(phi);
            assert_eq!(s.len(), expect.len());
            assert!(s.hausdorff_distance(&expect).unwrap() < 1e-9, "{phi:?}: {s:?}");
        }
        let s = periodic_spectrum(&build_symbol(&jacobi([0.0, 3.0]), &[2]).unwrap(), &grid, 1e-12).unwrap();
        assert_eq!(s.len(), 2);
        // constant potential c gives [c - 2, c + 2]
        let sym = build_symbol(&jacobi([0.7, 0.7]), &[2]).unwrap();
        let s = periodic_spectrum(&sym, &grid, 1e-12).unwrap();
        assert!(s.hausdorff_distance(&SpectrumSet::exact(&[(-1.3, 2.7)]).unwrap()).unwrap() < 1e-9);
    }

    #[test]
    fn folding_invariance() {
        let d = LatticeOperator::laplacian(1);
        let direct = spectrum_constant(&ConstantOperatorView::new(&d).unwrap(), &default_grid(1), 1e-12).unwrap();
        for r in 1..=4 {
            let s = periodic_spectrum(&build_symbol(&d, &[r]).unwrap(), &default_grid(1), 1e-12).unwrap();
            assert!(s.hausdorff_distance(&direct).unwrap() < 1e-9, "r = {r}: {s:?}");
        }
        let d2 = LatticeOperator::laplacian(2).plus_identity(0.5);
        let s = periodic_spectrum(&build_symbol(&d2, &[2, 1]).unwrap(), &TorusGrid::uniform(2, 64).unwrap(), 1e-12).unwrap();
        assert!(s.hausdorff_distance(&SpectrumSet::exact(&[(0.5, 8.5)]).unwrap()).unwrap() < 1e-9);
    }

    #[test]
    fn r_one_is_reflected_scalar_symbol() {
        let op = LatticeOperator::from_terms(1, [(vec![1], Coefficient::constant(Complex64::new(0.3, 0.4)))]).unwrap();
        let sym = build_symbol(&op, &[1]).unwrap();
        let view = ConstantOperatorView::new(&op).unwrap();
        for theta in [0.1, 1.0, 2.5] {
            assert!((sym.eval(&[theta])[(0, 0)] - view.eval(&[-theta])).norm() < 1e-15);
        }
    }

    #[test]
    fn period_mismatch() {
        let op = jacobi([0.0, 3.0]);
        assert!(matches!(build_symbol(&op, &[3]), Err(Error::PeriodMismatch(_))));
        assert!(build_symbol(&op, &[4]).is_ok());
        assert_eq!(common_period(&op), Some(vec![2]));
    }

    #[test]
    fn non_hermitian_symbol_is_rejected() {
        let op = LatticeOperator::shift(&[1]);
        let sym = build_symbol(&op, &[2]).unwrap();
        assert!(matches!(band_sample(&sym, &TorusGrid::uniform(1, 8).unwrap()), Err(Error::NotSelfAdjoint(_))));
    }

    #[test]
    fn invertibility_examples() {
        let sym = build_symbol(&jacobi([0.0, 3.0]), &[2]).unwrap();
        let grid = default_grid(1);
        assert!(invertibility_check(&sym.shifted(1.5), &grid).unwrap().invertible);
        assert!(!invertibility_check(&sym.shifted(3.5), &grid).unwrap().invertible);
        let id = build_symbol(&LatticeOperator::identity(2), &[2, 2]).unwrap();
        assert!(invertibility_check(&id, &TorusGrid::uniform(2, 8).unwrap()).unwrap().invertible);
    }

    #[test]
    fn bands_agree_with_invertibility_sweep() {
        let sym = build_symbol(&jacobi([0.0, 3.0]), &[2]).unwrap();
        let grid = TorusGrid::uniform(1, 256).unwrap();
        let spec = periodic_spectrum(&sym, &grid, 1e-12).unwrap();
        for k in 0..=120 {
            let lambda = -2.0 + 7.0 * k as f64 / 120.0 + 1e-3;
            if spec.distance_to(lambda) < 1e-3 && !spec.contains(lambda, 0.0) {
                continue;
            }
            let inv = invertibility_check(&sym.shifted(lambda), &grid).unwrap().invertible;
            assert_eq!(inv, !spec.contains(lambda, 0.0), "λ = {lambda}");
        }
    }

    #[test]
    fn bands_are_lipschitz_and_hermitian() {
        let p = Coefficient::periodic(Periodic::from_real(vec![3], &[0.5, -1.0, 2.0]).unwrap());
        let op = LatticeOperator::schrodinger(1, p);
        let sym = build_symbol(&op, &[3]).unwrap();
        let grid = TorusGrid::uniform(1, 512).unwrap();
        let bands = band_sample(&sym, &grid).unwrap();
        let c = sym.lipschitz_bound();
        for i in 0..grid.len() {
            let j = (i + 1) % grid.len();
            for k in 0..3 {
                assert!((bands.values[i][k] - bands.values[j][k]).abs() <= c * grid.spacing(0) + 1e-12);
            }
            assert!(hermitian_defect(&sym.eval(&grid.point(i))) < 1e-12);
        }
    }

    #[test]
    fn conjugation_identity() {
        let r = conjugation_check(&jacobi([0.0, 3.0]), &[2], 6, 7).unwrap();
        assert!(r <= 1e-12, "{r}");
        let r = conjugation_check(&LatticeOperator::laplacian(1), &[3], 6, 8).unwrap();
        assert!(r <= 1e-12, "{r}");
        let r = conjugation_check(&LatticeOperator::laplacian(2).plus_identity(1.0), &[1, 1], 3, 9).unwrap();
        assert_eq!(r, 0.0);
        let p = Coefficient::periodic(Periodic::from_real(vec![2, 3], &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]).unwrap());
        let op = LatticeOperator::schrodinger(2, p).add(&LatticeOperator::shift(&[2, -1])).unwrap();
        let r = conjugation_check(&op, &[2, 3], 3, 10).unwrap();
        assert!(r <= 1e-12, "{r}");
    }
}
