//! Closed-form essential spectra for the standard coefficient classes.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::{Interval, SpectrumSet};
use crate::oracle::{discrete_eigs, DiscreteEigenvalue, TruncationConfig};
use crate::wiener::{Coefficient, LatticeOperator, Profile};

fn envelope(lo: f64, hi: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::InvalidEnvelope { lo, hi });
    }
    Ok(())
}

/// `Δ + Φ` on ℤᴺ with Φ slowly oscillating between `m` and `M`: `[m, M + 4N]`.
pub fn ess_spectrum_so(m: f64, big_m: f64, dim: usize) -> Result<SpectrumSet> {
    envelope(m, big_m)?;
    SpectrumSet::exact(&[(m, big_m + 4.0 * dim as f64)])
}

/// `Δ + Φ` on ℤ with `Φ = a` on Λ and `b` off Λ: `[a, a+4] ∪ [b, b+4]`.
pub fn ess_spectrum_two_valued(a: f64, b: f64) -> Result<SpectrumSet> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Invalid(format!("non-finite values a = {a}, b = {b}")));
    }
    SpectrumSet::normalize([Interval::new(a, a + 4.0)?, Interval::new(b, b + 4.0)?], 0.0)
}

/// Two-valued potential whose values are themselves slowly oscillating with
/// envelopes `[m_a, M_a]` and `[m_b, M_b]`.
pub fn ess_spectrum_two_valued_so(ma: f64, big_ma: f64, mb: f64, big_mb: f64) -> Result<SpectrumSet> {
    envelope(ma, big_ma)?;
    envelope(mb, big_mb)?;
    SpectrumSet::normalize([Interval::new(ma, big_ma + 4.0)?, Interval::new(mb, big_mb + 4.0)?], 0.0)
}

/// Periodic bands `[m_i, M_i]` plus a slowly oscillating potential with envelope
/// `[m_Ψ, M_Ψ]`: `⋃ [m_i + m_Ψ, M_i + M_Ψ]`.
pub fn ess_spectrum_semiperiodic(bands: &[(f64, f64)], m_psi: f64, big_m_psi: f64) -> Result<SpectrumSet> {
    if bands.is_empty() {
        return Err(Error::EmptyBands);
    }
    envelope(m_psi, big_m_psi)?;
    let ivs = bands.iter().map(|&(lo, hi)| Interval::new(lo + m_psi, hi + big_m_psi)).collect::<Result<Vec<_>>>()?;
    SpectrumSet::normalize(ivs, 0.0)
}

/// Settings for numerically located discrete eigenvalues.
#[derive(Debug, Clone)]
pub struct DiscreteSearch {
    pub radii: Vec<i64>,
    pub delta: f64,
    pub seed: u64,
}

impl Default for DiscreteSearch {
    fn default() -> Self {
        DiscreteSearch { radii: vec![200, 400, 800], delta: 1e-3, seed: 0x5eed }
    }
}

impl DiscreteSearch {
    pub fn configs(&self) -> Vec<TruncationConfig> {
        TruncationConfig::new(1).with_seed(self.seed).sequence(&self.radii)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileEigenvalues {
    pub profile_index: usize,
    /// Essential spectrum of the one-dimensional profile operator.
    pub sigma: SpectrumSet,
    pub eigenvalues: Vec<DiscreteEigenvalue>,
}

#[derive(Debug, Clone, Serialize)]
pub struct WaveguideSpectrum {
    pub spectrum: SpectrumSet,
    pub profiles: Vec<ProfileEigenvalues>,
}

fn profile_from_values(p: &Profile) -> Result<()> {
    if p.middle.iter().chain([p.minus, p.plus].iter()).any(|v| !v.is_finite()) {
        return Err(Error::ProfileWithoutTails("profile values must be finite".into()));
    }
    Ok(())
}

/// The one-dimensional operator `Δ_1 + Φᵍ` of a transversal profile.
pub fn profile_operator(p: &Profile) -> LatticeOperator {
    let q = Profile { axis: 0, ..p.clone() };
    LatticeOperator::schrodinger(1, Coefficient::profile(q))
}

/// Essential spectrum of `Δ + Φ` on ℤᴺ for a potential that is `Φ₋` and `Φ₊`
/// (slowly oscillating, envelopes given) far along the last axis and has
/// transversal limit profiles `profiles`:
///
/// ```text
/// [m₋, M₋ + 4N] ∪ [m₊, M₊ + 4N] ∪ ⋃_g ⋃_j (λ_j(g) + [0, 4(N−1)])
/// ```
///
/// with `λ_j(g)` the discrete eigenvalues of `Δ_1 + Φᵍ`, located numerically.
pub fn ess_spectrum_waveguide(
    dim: usize,
    env_minus: (f64, f64),
    env_plus: (f64, f64),
    profiles: &[Profile],
    search: &DiscreteSearch,
) -> Result<WaveguideSpectrum> {
    if dim < 2 {
        return Err(Error::Invalid("waveguide needs dimension >= 2".into()));
    }
    envelope(env_minus.0, env_minus.1)?;
    envelope(env_plus.0, env_plus.1)?;
    let n = dim as f64;
    let mut parts = vec![
        Interval::new(env_minus.0, env_minus.1 + 4.0 * n)?,
        Interval::new(env_plus.0, env_plus.1 + 4.0 * n)?,
    ];
    let cfgs = search.configs();
    let mut out = Vec::new();
    for (i, p) in profiles.iter().enumerate() {
        profile_from_values(p)?;
        let sigma = SpectrumSet::normalize(
            [Interval::new(p.minus, p.minus + 4.0)?, Interval::new(p.plus, p.plus + 4.0)?],
            0.0,
        )?;
        let eigenvalues = discrete_eigs(&profile_operator(p), &sigma, &cfgs, search.delta)?;
        for e in &eigenvalues {
            parts.push(Interval::new(e.value, e.value + 4.0 * (n - 1.0))?);
        }
        for c in sigma.components() {
            parts.push(Interval::new(c.lo(), c.hi() + 4.0 * (n - 1.0))?);
        }
        out.push(ProfileEigenvalues { profile_index: i, sigma, eigenvalues });
    }
    Ok(WaveguideSpectrum { spectrum: SpectrumSet::normalize(parts, 0.0)?, profiles: out })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        assert_eq!(ess_spectrum_so(-1.0, 1.0, 2).unwrap().to_pairs(), vec![(-1.0, 9.0)]);
        assert_eq!(ess_spectrum_two_valued(0.0, 5.0).unwrap().to_pairs(), vec![(0.0, 4.0), (5.0, 9.0)]);
        assert_eq!(ess_spectrum_two_valued(0.0, 2.0).unwrap().to_pairs(), vec![(0.0, 6.0)]);
        assert_eq!(
            ess_spectrum_two_valued_so(0.0, 1.0, 10.0, 11.0).unwrap().to_pairs(),
            vec![(0.0, 5.0), (10.0, 15.0)]
        );
        assert_eq!(
            ess_spectrum_semiperiodic(&[(0.0, 1.0), (3.0, 4.0)], -0.5, 0.5).unwrap().to_pairs(),
            vec![(-0.5, 1.5), (2.5, 4.5)]
        );
        assert_eq!(ess_spectrum_so(1.0, 0.0, 1).unwrap_err(), Error::InvalidEnvelope { lo: 1.0, hi: 0.0 });
        assert_eq!(ess_spectrum_semiperiodic(&[], 0.0, 0.0).unwrap_err(), Error::EmptyBands);
    }

    #[test]
    fn waveguide_well_adds_bound_state_bands() {
        let well = Profile { axis: 1, start: 0, middle: vec![-5.0; 3], minus: 0.0, plus: 0.0 };
        let w = ess_spectrum_waveguide(2, (0.0, 0.0), (0.0, 0.0), &[well], &DiscreteSearch::default()).unwrap();
        let eigs = &w.profiles[0].eigenvalues;
        assert!(!eigs.is_empty());
        for e in eigs {
            assert!(e.value < 0.0 || e.value > 4.0);
            assert!(e.spread < 1e-6);
            assert!(w.spectrum.contains(e.value, 0.0) && w.spectrum.contains(e.value + 4.0, 0.0));
        }
        assert!(w.spectrum.inf().unwrap() < -1.0);
    }
}
