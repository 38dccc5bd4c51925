//! Essential spectrum as the union of limit-operator spectra.

use rayon::prelude::*;
use serde::Serialize;

use super::family::{apply_choices, combinations, combo_label, leaf_groups};
use super::formulas::DiscreteSearch;
use crate::error::{Error, Result};
use crate::floquet::{self, build_symbol, common_period, periodic_spectrum};
use crate::interval::{Interval, SpectrumSet};
use crate::oracle::{discrete_eigs, DiscreteEigenvalue};
use crate::symbol::{spectrum_constant, ConstantOperatorView, DEFAULT_REFINE_TOL};
use crate::torus::TorusGrid;
use crate::wiener::{Coefficient, LatticeOperator, PartialLimits, Profile};

#[derive(Debug, Clone)]
pub struct LimitOptions {
    /// Torus grid for symbol and band sampling; defaults depend on the dimension.
    pub grid: Option<TorusGrid>,
    pub refine_tol: f64,
    pub search: DiscreteSearch,
    /// Samples per envelope when a slowly oscillating coefficient does not enter additively.
    pub so_samples: usize,
}

impl Default for LimitOptions {
    fn default() -> Self {
        LimitOptions { grid: None, refine_tol: DEFAULT_REFINE_TOL, search: DiscreteSearch::default(), so_samples: 65 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MemberSpectrum {
    pub label: String,
    pub spectrum: SpectrumSet,
    pub discrete: Vec<DiscreteEigenvalue>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GeneralSpectrum {
    pub spectrum: SpectrumSet,
    pub members: Vec<MemberSpectrum>,
    pub notes: Vec<String>,
}

/// Union of the spectra of all limit operators of `h`.
///
/// Limit operators are dispatched to the symbol (constant), the Floquet symbol
/// (periodic) or, for coefficients depending on one coordinate through
/// piecewise-constant profiles, to a separation of variables whose discrete
/// part comes from truncations. A slowly oscillating coefficient entering as
/// `w·s(x)` at shift zero contributes an exact Minkowski sum; otherwise its
/// envelope is sampled and gaps narrower than twice the Wiener distance between
/// neighbouring samples are closed.
pub fn ess_spectrum_general(h: &LatticeOperator, opts: &LimitOptions) -> Result<GeneralSpectrum> {
    let groups = leaf_groups(h, false)?;
    let combos = combinations(&groups)?;
    let results: Vec<Result<(Vec<MemberSpectrum>, Vec<String>)>> = combos
        .par_iter()
        .map(|picks| {
            let op = apply_choices(h, &groups, picks);
            with_envelopes(&op, combo_label(&groups, picks), opts)
        })
        .collect();
    let mut members = Vec::new();
    let mut notes = Vec::new();
    for r in results {
        let (m, n) = r?;
        members.extend(m);
        for note in n {
            if !notes.contains(&note) {
                notes.push(note);
            }
        }
    }
    if groups.len() > 1 {
        notes.push("limit choices of distinct coefficients are combined independently".into());
    }
    let spectrum = SpectrumSet::normalize(members.iter().flat_map(|m| m.spectrum.components().iter().copied()), 0.0)?;
    Ok(GeneralSpectrum { spectrum, members, notes })
}

fn so_leaves(op: &LatticeOperator) -> Vec<Coefficient> {
    let mut out: Vec<Coefficient> = Vec::new();
    for (_, c) in op.terms() {
        for l in c.leaves() {
            if let Coefficient::SlowlyOscillating(_) = l {
                if !out.iter().any(|o| o.leaf_id() == l.leaf_id()) {
                    out.push(l.clone());
                }
            }
        }
    }
    out
}

fn contains_leaf(c: &Coefficient, id: u64) -> bool {
    c.leaves().iter().any(|l| l.leaf_id() == Some(id))
}

/// Real weight `w` if the leaf enters `op` only as `w·leaf` summed into the shift-zero coefficient.
fn additive_weight(op: &LatticeOperator, id: u64) -> Option<f64> {
    let zero = vec![0; op.dim()];
    for (s, c) in op.terms() {
        if *s != zero && contains_leaf(c, id) {
            return None;
        }
    }
    let weight = |t: &Coefficient| -> Option<f64> {
        match t {
            l if l.leaf_id() == Some(id) => Some(1.0),
            Coefficient::Product(f) if f.len() == 2 => {
                let (l, k) = if f[0].leaf_id() == Some(id) { (&f[0], &f[1]) } else { (&f[1], &f[0]) };
                let w = k.as_constant()?;
                (l.leaf_id() == Some(id) && w.im == 0.0).then_some(w.re)
            }
            _ => None,
        }
    };
    let c0 = op.term(&zero)?;
    match c0 {
        Coefficient::Sum(items) => {
            let hits: Vec<&Coefficient> = items.iter().filter(|t| contains_leaf(t, id)).collect();
            if hits.len() != 1 {
                return None;
            }
            weight(hits[0])
        }
        other => weight(other),
    }
}

fn replace_leaf(op: &LatticeOperator, id: u64, value: Coefficient) -> LatticeOperator {
    op.map_coefficients(|c| c.substitute(&|l| (l.leaf_id() == Some(id)).then(|| value.clone())))
}

fn with_envelopes(op: &LatticeOperator, label: String, opts: &LimitOptions) -> Result<(Vec<MemberSpectrum>, Vec<String>)> {
    let leaves = so_leaves(op);
    let Some(leaf) = leaves.first() else {
        let (spectrum, discrete) = member_spectrum(op, opts)?;
        return Ok((vec![MemberSpectrum { label, spectrum, discrete }], vec![]));
    };
    let Coefficient::SlowlyOscillating(s) = leaf else { unreachable!() };
    let id = s.id();
    let mut notes = Vec::new();
    if leaves.len() > 1 {
        notes.push("distinct slowly oscillating coefficients are treated as independent".into());
    }
    match s.limits() {
        PartialLimits::Points(points) => {
            let mut out = Vec::new();
            for v in points {
                let (m, n) = with_envelopes(&replace_leaf(op, id, Coefficient::constant(*v)), format!("{label}; SO partial limit {v}"), opts)?;
                out.extend(m);
                notes.extend(n);
            }
            Ok((out, notes))
        }
        &PartialLimits::Envelope { lo, hi } => {
            if let Some(w) = additive_weight(op, id) {
                let base = replace_leaf(op, id, Coefficient::real(lo));
                let (inner, n) = with_envelopes(&base, format!("{label}; SO envelope [{lo}, {hi}]"), opts)?;
                notes.extend(n);
                let d = w * (hi - lo);
                let spread = Interval::new(d.min(0.0), d.max(0.0))?;
                let out = inner
                    .into_iter()
                    .map(|m| MemberSpectrum {
                        label: m.label,
                        spectrum: m.spectrum.minkowski_sum(&spread),
                        discrete: m.discrete,
                    })
                    .collect();
                return Ok((out, notes));
            }
            let k = opts.so_samples.max(2);
            let values: Vec<f64> = (0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect();
            let ops: Vec<LatticeOperator> = values.iter().map(|&v| replace_leaf(op, id, Coefficient::real(v))).collect();
            let mut eta = 0.0f64;
            for pair in ops.windows(2) {
                eta = eta.max(pair[1].sub(&pair[0])?.wiener_norm());
            }
            notes.push(format!("envelope [{lo}, {hi}] sampled at {k} points; gaps below {:.3e} closed", 2.0 * eta));
            let mut parts = Vec::new();
            let mut discrete = Vec::new();
            for (v, o) in values.iter().zip(&ops) {
                let (m, n) = with_envelopes(o, format!("{label}; SO value {v}"), opts)?;
                notes.extend(n);
                for ms in m {
                    parts.extend(ms.spectrum.components().iter().copied());
                    discrete.extend(ms.discrete);
                }
            }
            let spectrum = SpectrumSet::normalize(parts, 2.0 * eta)?;
            let spectrum = SpectrumSet::normalize(spectrum.components().iter().copied(), 0.0)?;
            Ok((vec![MemberSpectrum { label: format!("{label}; SO envelope [{lo}, {hi}] sampled"), spectrum, discrete }], notes))
        }
    }
}

/// Spectrum of a limit operator without slowly oscillating or decaying parts.
pub fn member_spectrum(op: &LatticeOperator, opts: &LimitOptions) -> Result<(SpectrumSet, Vec<DiscreteEigenvalue>)> {
    let grid_for = |dim: usize, fallback: TorusGrid| opts.grid.clone().filter(|g| g.dim() == dim).unwrap_or(fallback);
    let dim = op.dim();
    if op.is_constant() {
        let view = ConstantOperatorView::new(op)?;
        return Ok((spectrum_constant(&view, &grid_for(dim, TorusGrid::default_for(dim)), opts.refine_tol)?, vec![]));
    }
    if let Some(r) = common_period(op) {
        let p = build_symbol(op, &r)?;
        return Ok((periodic_spectrum(&p, &grid_for(dim, floquet::default_grid(dim)), opts.refine_tol)?, vec![]));
    }
    separable_profile_spectrum(op, opts)
}

/// `H = T_axis + Φ(x_axis) + Σ_{k≠axis} T_k` with constant one-axis operators `T_k`:
/// `sp(H) = sp(T_axis + Φ) + Σ_k sp(T_k)`.
fn separable_profile_spectrum(op: &LatticeOperator, opts: &LimitOptions) -> Result<(SpectrumSet, Vec<DiscreteEigenvalue>)> {
    let dim = op.dim();
    let zero = vec![0; dim];
    let not_separable = || Error::NotClassifiable("limit operator is neither periodic nor separable along a profile axis".into());
    let profile = match op.term(&zero) {
        Some(Coefficient::Profile(p)) => (**p).clone(),
        _ => return Err(not_separable()),
    };
    let axis = profile.axis;
    let mut along = LatticeOperator::zero(1);
    let mut across: Vec<LatticeOperator> = vec![LatticeOperator::zero(1); dim];
    for (s, c) in op.terms() {
        if *s == zero {
            continue;
        }
        let c = c.as_constant().ok_or_else(not_separable)?;
        let nz: Vec<usize> = (0..dim).filter(|&k| s[k] != 0).collect();
        if nz.len() != 1 {
            return Err(not_separable());
        }
        let k = nz[0];
        let target = if k == axis { &mut along } else { &mut across[k] };
        target.add_term(vec![s[k]], Coefficient::constant(c));
    }
    let mut transversal = Interval::point(0.0);
    for (k, t) in across.iter().enumerate() {
        if k == axis || t.is_empty() {
            continue;
        }
        let sp = spectrum_constant(&ConstantOperatorView::new(t)?, &TorusGrid::default_for(1), opts.refine_tol)?;
        transversal = transversal.sum(&sp.hull().expect("symbol range is an interval"));
    }
    let line = |value: f64| -> Result<SpectrumSet> {
        let t = along.plus_identity(value);
        spectrum_constant(&ConstantOperatorView::new(&t)?, &TorusGrid::default_for(1), opts.refine_tol)
    };
    let sigma = line(profile.minus)?.union(&line(profile.plus)?);
    let mut one_d = along.clone();
    one_d.add_term(vec![0], Coefficient::profile(Profile { axis: 0, ..profile.clone() }));
    let discrete = discrete_eigs(&one_d, &sigma, &opts.search.configs(), opts.search.delta)?;
    let parts = sigma
        .components()
        .iter()
        .copied()
        .chain(discrete.iter().map(|e| Interval::point(e.value)))
        .map(|iv| iv.sum(&transversal));
    Ok((SpectrumSet::normalize(parts, 0.0)?, discrete))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limitops::formulas::*;
    use crate::wiener::{AxisProfile, Periodic, SlowlyOscillating, TwoValued};

    fn close(a: &SpectrumSet, b: &SpectrumSet, tol: f64) -> bool {
        a.hausdorff_distance(b).unwrap() <= tol && a.len() == b.len()
    }

    #[test]
    fn two_valued_matches_closed_form() {
        for (a, b) in [(0.0, 5.0), (0.0, 2.0), (-3.0, 1.5)] {
            let h = LatticeOperator::schrodinger(1, Coefficient::two_valued(TwoValued::squares(a, b).unwrap()));
            let g = ess_spectrum_general(&h, &LimitOptions::default()).unwrap();
            assert!(close(&g.spectrum, &ess_spectrum_two_valued(a, b).unwrap(), 1e-9), "{a} {b}: {:?}", g.spectrum);
            assert!(g.members.iter().all(|m| m.discrete.is_empty()));
        }
    }

    #[test]
    fn slowly_oscillating_is_exact() {
        for dim in 1..=3 {
            let s = SlowlyOscillating::sin_sqrt(-1.0, 1.0).unwrap();
            let h = LatticeOperator::schrodinger(dim, Coefficient::slowly_oscillating(s));
            let g = ess_spectrum_general(&h, &LimitOptions::default()).unwrap();
            assert_eq!(g.spectrum.to_pairs(), ess_spectrum_so(-1.0, 1.0, dim).unwrap().to_pairs());
        }
    }

    #[test]
    fn semiperiodic_matches_band_formula() {
        let p = Periodic::from_real(vec![2], &[0.0, 3.0]).unwrap();
        let s = SlowlyOscillating::sin_log(-0.25, 0.25).unwrap();
        let pot = Coefficient::periodic(p.clone()).add(&Coefficient::slowly_oscillating(s));
        let h = LatticeOperator::schrodinger(1, pot);
        let g = ess_spectrum_general(&h, &LimitOptions::default()).unwrap();
        let bands = ess_spectrum_general(&LatticeOperator::schrodinger(1, Coefficient::periodic(p)), &LimitOptions::default())
            .unwrap()
            .spectrum
            .to_pairs();
        let expect = ess_spectrum_semiperiodic(&bands, -0.25, 0.25).unwrap();
        assert!(close(&g.spectrum, &expect, 1e-12));
    }

    #[test]
    fn two_valued_with_slowly_oscillating_values() {
        let chi = Coefficient::two_valued(TwoValued::squares(1.0, 0.0).unwrap());
        let sa = Coefficient::slowly_oscillating(SlowlyOscillating::sin_sqrt(0.0, 1.0).unwrap());
        let sb = Coefficient::slowly_oscillating(SlowlyOscillating::sin_log(10.0, 11.0).unwrap());
        let pot = sb.add(&sa.add(&sb.neg()).mul(&chi));
        let h = LatticeOperator::schrodinger(1, pot);
        let opts = LimitOptions { so_samples: 9, ..Default::default() };
        let g = ess_spectrum_general(&h, &opts).unwrap();
        let expect = ess_spectrum_two_valued_so(0.0, 1.0, 10.0, 11.0).unwrap();
        assert!(close(&g.spectrum, &expect, 1e-9), "{:?}", g.spectrum);
    }

    #[test]
    fn waveguide_agrees_with_formula() {
        let p = AxisProfile::new(1, 0, 2, Coefficient::zero(), Coefficient::real(-5.0), Coefficient::zero(), vec![]).unwrap();
        let h = LatticeOperator::schrodinger(2, Coefficient::axis_profile(p));
        let g = ess_spectrum_general(&h, &LimitOptions::default()).unwrap();
        let well = Profile { axis: 1, start: 0, middle: vec![-5.0; 3], minus: 0.0, plus: 0.0 };
        let w = ess_spectrum_waveguide(2, (0.0, 0.0), (0.0, 0.0), &[well], &DiscreteSearch::default()).unwrap();
        assert!(close(&g.spectrum, &w.spectrum, 1e-9), "{:?} vs {:?}", g.spectrum, w.spectrum);
    }

    #[test]
    fn step_potential_has_no_discrete_spectrum() {
        let h = LatticeOperator::schrodinger(1, Coefficient::profile(Profile::step(0, 0, 5.0, 0.0)));
        let g = ess_spectrum_general(&h, &LimitOptions::default()).unwrap();
        assert_eq!(g.spectrum.to_pairs(), vec![(0.0, 4.0), (5.0, 9.0)]);
    }
}
