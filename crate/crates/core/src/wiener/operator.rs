//! Finite shift series `A = Σ_α a_α V_α` on l²(ℤᴺ), `(V_g u)(x) = u(x − g)`.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::coefficient::Coefficient;
use super::lattice::{add_vec, neg_vec, unit, LatticeFunction, Window};
use crate::error::{Error, Result};

/// Default probe radius for sampled sup norms (per axis).
pub fn default_probe(dim: usize) -> Window {
    const MAX_POINTS: f64 = 1e7;
    let r = if dim <= 1 { 1000 } else { 100 };
    // keep the probe cube below MAX_POINTS points in high dimension
    let cap = ((MAX_POINTS.powf(1.0 / dim.max(1) as f64) - 1.0) / 2.0).floor() as i64;
    Window::cube(dim.max(1), r.min(cap.max(1)))
}

/// A Wiener-algebra element with finitely many shifts.
#[derive(Clone, Debug)]
pub struct LatticeOperator {
    dim: usize,
    terms: BTreeMap<Vec<i64>, Coefficient>,
}

impl LatticeOperator {
    pub fn zero(dim: usize) -> Self {
        LatticeOperator { dim, terms: BTreeMap::new() }
    }

    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<i64>, Coefficient)>,
    {
        let mut op = Self::zero(dim);
        for (shift, coef) in terms {
            if shift.len() != dim {
                return Err(Error::DimensionMismatch(dim, shift.len()));
            }
            op.add_term(shift, coef);
        }
        Ok(op)
    }

    pub fn identity(dim: usize) -> Self {
        Self::multiplication(dim, Coefficient::one())
    }

    /// The shift `V_g`.
    pub fn shift(g: &[i64]) -> Self {
        let mut op = Self::zero(g.len());
        op.add_term(g.to_vec(), Coefficient::one());
        op
    }

    /// The multiplication operator `c I`.
    pub fn multiplication(dim: usize, c: Coefficient) -> Self {
        let mut op = Self::zero(dim);
        op.add_term(vec![0; dim], c);
        op
    }

    /// `2I − V_{e_k} − V_{−e_k}` along one axis.
    pub fn laplacian_axis(dim: usize, axis: usize) -> Self {
        let mut op = Self::zero(dim);
        op.add_term(vec![0; dim], Coefficient::real(2.0));
        op.add_term(unit(dim, axis, 1), Coefficient::real(-1.0));
        op.add_term(unit(dim, axis, -1), Coefficient::real(-1.0));
        op
    }

    /// `Δ_N = Σ_k (2I − V_{e_k} − V_{−e_k})`, spectrum `[0, 4N]`.
    pub fn laplacian(dim: usize) -> Self {
        (0..dim).fold(Self::zero(dim), |acc, k| acc.add(&Self::laplacian_axis(dim, k)).unwrap())
    }

    /// `Δ_N + Φ I`.
    pub fn schrodinger(dim: usize, potential: Coefficient) -> Self {
        Self::laplacian(dim).add(&Self::multiplication(dim, potential)).unwrap()
    }

    /// Expands `Σ_k (1/2m_k)(V_{e_k} − a_k I)(V_{−e_k} − ā_k I) + Φ I` into shift terms.
    ///
    /// With `m_k = 1/2` and `|a_k| ≡ 1` this is `Σ_k (2 − a_k V_{−e_k} − ā_k V_{e_k}) + Φ`.
    pub fn build_schrodinger(
        dim: usize,
        masses: &[f64],
        magnetic: &[Coefficient],
        potential: Coefficient,
    ) -> Result<Self> {
        if masses.len() != dim {
            return Err(Error::DimensionMismatch(dim, masses.len()));
        }
        if magnetic.len() != dim {
            return Err(Error::DimensionMismatch(dim, magnetic.len()));
        }
        if let Some(&m) = masses.iter().find(|&&m| !(m > 0.0) || !m.is_finite()) {
            return Err(Error::NonPositiveMass(m));
        }
        let mut op = Self::multiplication(dim, potential);
        for k in 0..dim {
            let w = Complex64::new(1.0 / (2.0 * masses[k]), 0.0);
            let a = &magnetic[k];
            let e = unit(dim, k, 1);
            op.add_term(vec![0; dim], Coefficient::one().add(&a.abs_sqr()).scale(w));
            op.add_term(e.clone(), a.conj().shifted(&e).scale(-w));
            op.add_term(neg_vec(&e), a.scale(-w));
        }
        Ok(op)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, &Coefficient)> {
        self.terms.iter()
    }

    pub fn term(&self, shift: &[i64]) -> Option<&Coefficient> {
        self.terms.get(shift)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `max_α ‖α‖_∞`.
    pub fn shift_radius(&self) -> i64 {
        self.terms.keys().flat_map(|a| a.iter().map(|v| v.abs())).max().unwrap_or(0)
    }

    /// Adds `c V_shift`, merging with an existing term and dropping exact zeros.
    pub fn add_term(&mut self, shift: Vec<i64>, c: Coefficient) {
        let merged = match self.terms.remove(&shift) {
            Some(old) => old.add(&c),
            None => c,
        };
        if !merged.is_zero() {
            self.terms.insert(shift, merged);
        }
    }

    fn check_dim(&self, other: &LatticeOperator) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        Ok(())
    }

    pub fn add(&self, other: &LatticeOperator) -> Result<LatticeOperator> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (s, c) in &other.terms {
            out.add_term(s.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &LatticeOperator) -> Result<LatticeOperator> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> LatticeOperator {
        let mut out = Self::zero(self.dim);
        for (s, a) in &self.terms {
            out.add_term(s.clone(), a.scale(c));
        }
        out
    }

    /// `A + cI`.
    pub fn plus_identity(&self, c: f64) -> LatticeOperator {
        let mut out = self.clone();
        out.add_term(vec![0; self.dim], Coefficient::real(c));
        out
    }

    /// `AB` with `c_γ(x) = Σ_{α+β=γ} a_α(x) b_β(x − α)`.
    pub fn compose(&self, other: &LatticeOperator) -> Result<LatticeOperator> {
        self.check_dim(other)?;
        let mut out = Self::zero(self.dim);
        for (alpha, a) in &self.terms {
            for (beta, b) in &other.terms {
                out.add_term(add_vec(alpha, beta), a.mul(&b.shifted(alpha)));
            }
        }
        Ok(out)
    }

    /// `A*`: the term `a_α V_α` becomes `conj(a_α(· + α)) V_{−α}`.
    pub fn adjoint(&self) -> LatticeOperator {
        let mut out = Self::zero(self.dim);
        for (alpha, a) in &self.terms {
            let minus = neg_vec(alpha);
            out.add_term(minus.clone(), a.conj().shifted(&minus));
        }
        out
    }

    /// `V_{−h} A V_h`, whose coefficients are `x ↦ a_α(x + h)`.
    pub fn translate(&self, h: &[i64]) -> LatticeOperator {
        let minus = neg_vec(h);
        self.map_coefficients(|c| c.shifted(&minus))
    }

    pub fn map_coefficients<F: Fn(&Coefficient) -> Coefficient>(&self, f: F) -> LatticeOperator {
        let mut out = Self::zero(self.dim);
        for (s, c) in &self.terms {
            out.add_term(s.clone(), f(c));
        }
        out
    }

    /// `Σ_α sup|a_α|` with sampled sups taken over [`default_probe`].
    pub fn wiener_norm(&self) -> f64 {
        self.wiener_norm_on(&default_probe(self.dim))
    }

    pub fn wiener_norm_on(&self, probe: &Window) -> f64 {
        self.terms.values().map(|c| c.sup_norm(probe)).sum()
    }

    /// `(Au)(x) = Σ_α a_α(x) u(x − α)` for `x` in `window`.
    pub fn apply(&self, u: &LatticeFunction, window: &Window) -> Result<LatticeFunction> {
        if u.dim() != self.dim {
            return Err(Error::DimensionMismatch(self.dim, u.dim()));
        }
        if window.dim() != self.dim {
            return Err(Error::DimensionMismatch(self.dim, window.dim()));
        }
        let mut out = LatticeFunction::zero(self.dim);
        for (y, v) in u.iter() {
            for (alpha, a) in &self.terms {
                let x = add_vec(y, alpha);
                if !window.contains(&x) {
                    return Err(Error::SupportEscape);
                }
                out.add_at(x.clone(), a.eval(&x) * v);
            }
        }
        Ok(out)
    }

    /// All coefficients are constants.
    pub fn is_constant(&self) -> bool {
        self.terms.values().all(|c| c.as_constant().is_some())
    }

    /// `max |a_α(x) − b_α(x)|` over shifts and window points.
    pub fn max_coefficient_diff(&self, other: &LatticeOperator, window: &Window) -> f64 {
        let zero = Coefficient::zero();
        let shifts: std::collections::BTreeSet<&Vec<i64>> = self.terms.keys().chain(other.terms.keys()).collect();
        let mut worst = 0.0f64;
        for s in shifts {
            let a = self.terms.get(s).unwrap_or(&zero);
            let b = other.terms.get(s).unwrap_or(&zero);
            for x in window.points() {
                worst = worst.max((a.eval(&x) - b.eval(&x)).norm());
            }
        }
        worst
    }

    pub fn approx_eq_on(&self, other: &LatticeOperator, window: &Window, tol: f64) -> bool {
        self.dim == other.dim && self.max_coefficient_diff(other, window) <= tol
    }

    /// Hermitian defect `max |a − (A*)|` on `window`.
    pub fn self_adjoint_defect(&self, window: &Window) -> f64 {
        self.max_coefficient_diff(&self.adjoint(), window)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wiener::coefficient::{Periodic, TwoValued};
    use proptest::prelude::*;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    #[test]
    fn shift_moves_delta() {
        let u = LatticeFunction::delta(&[0]);
        let w = Window::cube(1, 3);
        let v = LatticeOperator::shift(&[1]).apply(&u, &w).unwrap();
        assert_eq!(v.get(&[1]), c(1.0));
        assert_eq!(v.get(&[0]), c(0.0));
    }

    #[test]
    fn laplacian_kills_constants_inside() {
        let inner = Window::cube(1, 10);
        let u = LatticeFunction::constant_on(&inner, c(1.0));
        let v = LatticeOperator::laplacian(1).apply(&u, &Window::cube(1, 11)).unwrap();
        for x in -9..=9 {
            assert!(v.get(&[x]).norm() < 1e-15);
        }
        assert_eq!(v.get(&[11]), c(-1.0));
    }

    #[test]
    fn apply_reports_support_escape() {
        let u = LatticeFunction::delta(&[3]);
        let err = LatticeOperator::laplacian(1).apply(&u, &Window::cube(1, 3)).unwrap_err();
        assert_eq!(err, Error::SupportEscape);
    }

    #[test]
    fn two_valued_multiplication_at_nine() {
        let phi = Coefficient::two_valued(TwoValued::squares(0.0, 5.0).unwrap());
        let op = LatticeOperator::multiplication(1, phi);
        let w = Window::cube(1, 20);
        // 9 = γ_3⁻ lies in Λ
        let v = op.apply(&LatticeFunction::delta(&[9]), &w).unwrap();
        assert_eq!(v.get(&[9]), c(0.0));
        let v = op.apply(&LatticeFunction::delta(&[7]), &w).unwrap();
        assert_eq!(v.get(&[7]), c(5.0));
    }

    #[test]
    fn compose_shift_with_multiplication() {
        let phi = Coefficient::periodic(Periodic::from_real(vec![3], &[1.0, 2.0, 7.0]).unwrap());
        let op = LatticeOperator::shift(&[1]).compose(&LatticeOperator::multiplication(1, phi.clone())).unwrap();
        assert_eq!(op.len(), 1);
        let a = op.term(&[1]).unwrap();
        for x in -5..5 {
            assert_eq!(a.eval(&[x]), phi.eval(&[x - 1]));
        }
    }

    #[test]
    fn laplacian_squared() {
        let d = LatticeOperator::laplacian(1);
        let d2 = d.compose(&d).unwrap();
        let expect = [(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)];
        assert_eq!(d2.len(), 5);
        for (s, v) in expect {
            assert_eq!(d2.term(&[s]).unwrap().as_constant(), Some(c(v)));
        }
        let id = d.compose(&LatticeOperator::identity(1)).unwrap();
        assert!(id.approx_eq_on(&d, &Window::cube(1, 5), 0.0));
    }

    #[test]
    fn adjoint_examples() {
        let a = LatticeOperator::shift(&[1]).adjoint();
        assert_eq!(a.term(&[-1]).unwrap().as_constant(), Some(c(1.0)));
        let b = LatticeOperator::shift(&[2]).scale(Complex64::new(1.0, 2.0)).adjoint();
        assert_eq!(b.term(&[-2]).unwrap().as_constant(), Some(Complex64::new(1.0, -2.0)));
        let phi = Coefficient::periodic(Periodic::from_real(vec![2], &[0.0, 3.0]).unwrap());
        let m = LatticeOperator::multiplication(1, phi);
        assert!(m.adjoint().approx_eq_on(&m, &Window::cube(1, 4), 0.0));
    }

    #[test]
    fn wiener_norms() {
        assert_eq!(LatticeOperator::laplacian(1).wiener_norm(), 4.0);
        assert_eq!(LatticeOperator::laplacian(3).wiener_norm(), 12.0);
        let phi = Coefficient::two_valued(TwoValued::squares(0.0, 5.0).unwrap());
        let op = LatticeOperator::shift(&[1])
            .add(&LatticeOperator::shift(&[-1]))
            .unwrap()
            .add(&LatticeOperator::multiplication(1, phi))
            .unwrap();
        assert_eq!(op.wiener_norm(), 7.0);
    }

    #[test]
    fn add_and_scale() {
        let d = LatticeOperator::laplacian(2);
        assert!(d.sub(&d).unwrap().is_empty());
        let k = d.scale(c(0.5));
        assert_eq!(k.term(&[0, 0]).unwrap().as_constant(), Some(c(2.0)));
        let j = LatticeOperator::laplacian(1)
            .add(&LatticeOperator::multiplication(1, Coefficient::periodic(Periodic::from_real(vec![2], &[0.0, 3.0]).unwrap())))
            .unwrap();
        assert_eq!(j.len(), 3);
        assert!(LatticeOperator::laplacian(1).add(&d).is_err());
    }

    #[test]
    fn builder_without_magnetic_field_is_identity_scaled() {
        let op = LatticeOperator::build_schrodinger(1, &[0.5], &[Coefficient::zero()], Coefficient::zero()).unwrap();
        let w = Window::cube(1, 6);
        assert!(op.approx_eq_on(&LatticeOperator::identity(1), &w, 0.0));
        for x in -3..=3 {
            let v = op.apply(&LatticeFunction::delta(&[x]), &w).unwrap();
            assert_eq!(v.get(&[x]), c(1.0));
            assert_eq!(v.norm(), 1.0);
        }
    }

    #[test]
    fn builder_with_unit_phase() {
        let phi = 0.7f64;
        let a = Complex64::from_polar(1.0, phi);
        let op = LatticeOperator::build_schrodinger(1, &[0.5], &[Coefficient::constant(a)], Coefficient::zero()).unwrap();
        let expect = LatticeOperator::from_terms(
            1,
            [
                (vec![0], Coefficient::real(2.0)),
                (vec![1], Coefficient::constant(-a.conj())),
                (vec![-1], Coefficient::constant(-a)),
            ],
        )
        .unwrap();
        assert!(op.approx_eq_on(&expect, &Window::cube(1, 5), 1e-15));
        assert!(op.self_adjoint_defect(&Window::cube(1, 5)) < 1e-15);
        assert_eq!(
            LatticeOperator::build_schrodinger(1, &[0.0], &[Coefficient::one()], Coefficient::zero()).unwrap_err(),
            Error::NonPositiveMass(0.0)
        );
    }

    #[test]
    fn translate_reads_coefficients_ahead() {
        let phi = Coefficient::periodic(Periodic::from_real(vec![3], &[1.0, 2.0, 7.0]).unwrap());
        let op = LatticeOperator::multiplication(1, phi.clone()).translate(&[1]);
        assert_eq!(op.term(&[0]).unwrap().eval(&[0]), phi.eval(&[1]));
    }

    proptest! {
        #[test]
        fn adjoint_relation_on_random_vectors(
            re in proptest::collection::vec(-1.0f64..1.0, 7),
            im in proptest::collection::vec(-1.0f64..1.0, 7),
        ) {
            let phi = Coefficient::periodic(Periodic::from_real(vec![2], &[0.3, -1.0]).unwrap());
            let op = LatticeOperator::from_terms(1, [
                (vec![1], Coefficient::constant(Complex64::new(0.2, 1.0))),
                (vec![-2], phi.clone()),
                (vec![0], phi.shifted(&[1]).scale(Complex64::new(0.0, 1.0))),
            ]).unwrap();
            let w = Window::cube(1, 8);
            let mut u = LatticeFunction::zero(1);
            let mut v = LatticeFunction::zero(1);
            for k in 0..7 {
                u.set(vec![k as i64 - 3], Complex64::new(re[k], im[k]));
                v.set(vec![3 - k as i64], Complex64::new(im[k], -re[k]));
            }
            let lhs = op.apply(&u, &w).unwrap().inner(&v);
            let rhs = u.inner(&op.adjoint().apply(&v, &w).unwrap());
            prop_assert!((lhs - rhs).norm() < 1e-12);
        }
    }
}
