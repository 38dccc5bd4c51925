//! Three-particle lattice Hamiltonian
//!
//! ```text
//! H = (1/2m₁)(Δ ⊗ I) + (1/2m₂)(I ⊗ Δ) + W₁ ⊗ I + I ⊗ W₂ + W₁₂(x¹ − x²)
//! ```
//!
//! on `l²(ℤ³ × ℤ³)` with decaying potentials. Its essential spectrum is
//! `sp(H₁) ∪ sp(H₂) ∪ sp(H₁₂)`, where `H_j` keeps only `W_j` and `H₁₂` keeps
//! only the interaction. With `m = 6/m₁ + 6/m₂` each of the three contains `[0, m]`.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::{Interval, SpectrumSet};
use crate::oracle::{eigenpairs, truncate, DiscreteEigenvalue, TruncationConfig};
use crate::wiener::{Coefficient, Compact, LatticeOperator, Window};

/// A real potential on ℤ³ sampled on `[−radius, radius]³` and zero outside.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledPotential {
    pub radius: i64,
    /// Values in lexicographic order of the sample cube.
    pub table: Vec<f64>,
    /// Beyond this radius the samples must be below the decay tolerance.
    pub decay_radius: i64,
}

impl SampledPotential {
    pub fn new(radius: i64, table: Vec<f64>, decay_radius: i64) -> Result<Self> {
        let side = (2 * radius + 1) as usize;
        if radius < 0 || table.len() != side.pow(3) {
            return Err(Error::Invalid(format!(
                "potential table of length {} does not fit radius {radius}",
                table.len()
            )));
        }
        if table.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("potential values must be finite".into()));
        }
        if !(0..=radius).contains(&decay_radius) {
            return Err(Error::Invalid(format!("decay radius {decay_radius} outside 0..={radius}")));
        }
        Ok(SampledPotential { radius, table, decay_radius })
    }

    pub fn zero() -> Self {
        SampledPotential { radius: 0, table: vec![0.0], decay_radius: 0 }
    }

    /// `c` at the origin, zero elsewhere.
    pub fn delta(c: f64) -> Self {
        let mut table = vec![0.0; 27];
        table[13] = c;
        SampledPotential { radius: 1, table, decay_radius: 0 }
    }

    pub fn window(&self) -> Window {
        Window::cube(3, self.radius)
    }

    pub fn eval(&self, x: &[i64]) -> f64 {
        self.window().index_of(x).map_or(0.0, |i| self.table[i])
    }

    /// Infimum over ℤ³, including the tail value 0.
    pub fn inf(&self) -> f64 {
        self.table.iter().copied().fold(0.0, f64::min)
    }

    /// Supremum over ℤ³, including the tail value 0.
    pub fn sup(&self) -> f64 {
        self.table.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.table.iter().all(|&v| v == 0.0)
    }

    /// Largest sample on the boundary shell or beyond the decay radius.
    pub fn tail_max(&self) -> f64 {
        let w = self.window();
        w.points()
            .zip(&self.table)
            .filter(|(x, _)| {
                let r = x.iter().map(|v| v.abs()).max().unwrap_or(0);
                r > self.decay_radius || (self.radius > 0 && r == self.radius)
            })
            .map(|(_, v)| v.abs())
            .fold(0.0, f64::max)
    }

    pub fn coefficient(&self) -> Result<Coefficient> {
        if self.is_zero() {
            return Ok(Coefficient::zero());
        }
        Ok(Coefficient::compact(Compact::from_real(3, self.radius, &self.table)?))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ThreeBodyProblem {
    m1: f64,
    m2: f64,
    w1: SampledPotential,
    w2: SampledPotential,
    w12: SampledPotential,
    decay_tol: f64,
}

impl ThreeBodyProblem {
    pub fn new(
        m1: f64,
        m2: f64,
        w1: SampledPotential,
        w2: SampledPotential,
        w12: SampledPotential,
        decay_tol: f64,
    ) -> Result<Self> {
        for m in [m1, m2] {
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::NonPositiveMass(m));
            }
        }
        for (name, w) in [("W1", &w1), ("W2", &w2), ("W12", &w12)] {
            let t = w.tail_max();
            if t > decay_tol {
                return Err(Error::DecayViolation { name: name.into(), value: t, tol: decay_tol });
            }
        }
        Ok(ThreeBodyProblem { m1, m2, w1, w2, w12, decay_tol })
    }

    /// Free problem with the given masses.
    pub fn free(m1: f64, m2: f64) -> Result<Self> {
        Self::new(m1, m2, SampledPotential::zero(), SampledPotential::zero(), SampledPotential::zero(), 0.0)
    }

    pub fn masses(&self) -> (f64, f64) {
        (self.m1, self.m2)
    }

    pub fn potential(&self, which: Particle) -> &SampledPotential {
        match which {
            Particle::One => &self.w1,
            Particle::Two => &self.w2,
        }
    }

    pub fn decay_tol(&self) -> f64 {
        self.decay_tol
    }

    pub fn interaction(&self) -> &SampledPotential {
        &self.w12
    }

    /// `m = 6/m₁ + 6/m₂`, the width of the free two-particle spectrum.
    pub fn m(&self) -> f64 {
        6.0 / self.m1 + 6.0 / self.m2
    }

    fn mass(&self, p: Particle) -> f64 {
        match p {
            Particle::One => self.m1,
            Particle::Two => self.m2,
        }
    }

    /// `(1/2m_j)Δ + W_j` on ℤ³.
    pub fn one_body_operator(&self, j: Particle) -> Result<LatticeOperator> {
        let kinetic = LatticeOperator::laplacian(3).scale(Complex64::new(0.5 / self.mass(j), 0.0));
        let mut op = kinetic;
        op.add_term(vec![0; 3], self.potential(j).coefficient()?);
        Ok(op)
    }

    /// `H₁₂` on ℤ⁶ with coordinates `(x¹, x²)`.
    pub fn interaction_operator(&self) -> Result<LatticeOperator> {
        let mut op = LatticeOperator::zero(6);
        for k in 0..6 {
            let m = if k < 3 { self.m1 } else { self.m2 };
            op = op.add(&LatticeOperator::laplacian_axis(6, k).scale(Complex64::new(0.5 / m, 0.0)))?;
        }
        if !self.w12.is_zero() {
            let w = self.w12.clone();
            let f = Coefficient::function(
                "W12(x1 - x2)",
                Arc::new(move |x: &[i64]| Complex64::new(w.eval(&[x[0] - x[3], x[1] - x[4], x[2] - x[5]]), 0.0)),
            );
            op.add_term(vec![0; 6], f);
        }
        Ok(op)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Particle {
    One,
    Two,
}

impl Particle {
    pub fn other(self) -> Particle {
        match self {
            Particle::One => Particle::Two,
            Particle::Two => Particle::One,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ThreeBodyOracle {
    /// Truncation radii for the one-body operators on ℤ³.
    pub radii: Vec<i64>,
    /// Truncation radii for the interaction operator on ℤ⁶.
    pub interaction_radii: Vec<i64>,
    /// Eigenvalues computed at each end.
    pub count: usize,
    /// Successive-radius agreement required for stability.
    pub stable_tol: f64,
    /// Minimal distance from the continuous part.
    pub gap: f64,
    /// Largest feasible six-dimensional section.
    pub max_size: usize,
    pub seed: u64,
}

impl Default for ThreeBodyOracle {
    fn default() -> Self {
        ThreeBodyOracle {
            radii: vec![6, 8, 10],
            interaction_radii: vec![2, 3],
            count: 6,
            stable_tol: 1e-4,
            gap: 1e-3,
            max_size: 2_000_000,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ComponentSpectrum {
    pub spectrum: SpectrumSet,
    pub eigenvalues: Vec<DiscreteEigenvalue>,
    /// Extremal truncation eigenvalues per radius.
    pub per_radius: Vec<(i64, Vec<f64>)>,
    pub notes: Vec<String>,
}

fn extremal_values(op: &LatticeOperator, l: i64, count: usize, seed: u64) -> Result<Vec<f64>> {
    let cfg = TruncationConfig::extremal(l, count).with_seed(seed);
    let m = truncate(op, &cfg)?;
    Ok(eigenpairs(&m, &cfg, false)?.into_iter().map(|p| p.value).collect())
}

/// Values at the last radius outside `band` by more than `gap` whose nearest
/// counterparts agree within `stable_tol` between successive radii.
fn stable_outliers(per_radius: &[(i64, Vec<f64>)], band: &Interval, gap: f64, stable_tol: f64) -> Vec<DiscreteEigenvalue> {
    let Some((_, last)) = per_radius.last() else { return vec![] };
    let nearest = |vals: &[f64], x: f64| vals.iter().copied().min_by(|a, b| (a - x).abs().total_cmp(&(b - x).abs()));
    let mut out = Vec::new();
    for &e in last {
        if band.distance_to(e) <= gap {
            continue;
        }
        let chain: Option<Vec<f64>> = per_radius.iter().map(|(_, v)| nearest(v, e)).collect();
        let Some(chain) = chain else { continue };
        if per_radius.len() < 2 || chain.windows(2).any(|w| (w[1] - w[0]).abs() >= stable_tol) {
            continue;
        }
        let lo = chain.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = chain.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        out.push(DiscreteEigenvalue { value: e, spread: hi - lo });
    }
    out
}

/// `sp(H_j) = sp((1/2m_j)Δ + W_j) + [0, 6/m_other]`, the one-body spectrum being
/// `[0, 6/m_j]` together with stable discrete eigenvalues from truncations.
pub fn subsystem_spectrum(p: &ThreeBodyProblem, j: Particle, cfg: &ThreeBodyOracle) -> Result<ComponentSpectrum> {
    let band = Interval::new(0.0, 6.0 / p.mass(j))?;
    let spread = Interval::new(0.0, 6.0 / p.mass(j.other()))?;
    let mut notes = Vec::new();
    let (eigenvalues, per_radius) = if p.potential(j).is_zero() {
        (vec![], vec![])
    } else {
        let op = p.one_body_operator(j)?;
        let per_radius =
            cfg.radii.iter().map(|&l| Ok((l, extremal_values(&op, l, cfg.count, cfg.seed)?))).collect::<Result<Vec<_>>>()?;
        if per_radius.len() < 2 {
            notes.push("a single truncation radius cannot establish stability".into());
        }
        (stable_outliers(&per_radius, &band, cfg.gap, cfg.stable_tol), per_radius)
    };
    let parts = std::iter::once(band).chain(eigenvalues.iter().map(|e| Interval::point(e.value))).map(|iv| iv.sum(&spread));
    Ok(ComponentSpectrum { spectrum: SpectrumSet::normalize(parts, 0.0)?, eigenvalues, per_radius, notes })
}

#[derive(Debug, Clone, Serialize)]
pub struct InteractionSpectrum {
    pub component: ComponentSpectrum,
    /// Lowest truncation eigenvalue per radius; each is an upper bound for `inf sp(H₁₂)`.
    pub ground: Vec<(i64, f64)>,
    /// `[inf W₁₂, sup W₁₂ + m]`, which contains `sp(H₁₂)`.
    pub enclosure: Interval,
    pub bounds_only: bool,
}

/// Best-effort spectrum of the interaction operator: `[0, m]` plus stable
/// outliers of small six-dimensional truncations. Accuracy is limited by the
/// feasible radii; the enclosure is always reported.
pub fn interaction_spectrum(p: &ThreeBodyProblem, cfg: &ThreeBodyOracle) -> Result<InteractionSpectrum> {
    let m = p.m();
    let band = Interval::new(0.0, m)?;
    let enclosure = Interval::new(p.w12.inf(), p.w12.sup() + m)?;
    let mut notes = vec!["interaction spectrum from small truncations; treat outliers as estimates".to_string()];
    if p.w12.is_zero() {
        let component = ComponentSpectrum { spectrum: SpectrumSet::single(band), eigenvalues: vec![], per_radius: vec![], notes: vec![] };
        return Ok(InteractionSpectrum { component, ground: vec![], enclosure, bounds_only: false });
    }
    let op = p.interaction_operator()?;
    let feasible: Vec<i64> = cfg.interaction_radii.iter().copied().filter(|&l| ((2 * l + 1) as usize).pow(6) <= cfg.max_size).collect();
    if feasible.len() < cfg.interaction_radii.len() {
        notes.push(format!("radii above the size limit {} skipped", cfg.max_size));
    }
    let mut per_radius = Vec::new();
    for &l in &feasible {
        match extremal_values(&op, l, cfg.count, cfg.seed) {
            Ok(v) => per_radius.push((l, v)),
            Err(Error::NonConvergence(msg)) => notes.push(format!("radius {l} skipped: {msg}")),
            Err(e) => return Err(e),
        }
    }
    let bounds_only = per_radius.is_empty();
    if bounds_only {
        notes.push("bounds only: no feasible truncation".into());
    }
    let ground = per_radius.iter().map(|(l, v)| (*l, v[0])).collect();
    let eigenvalues = stable_outliers(&per_radius, &band, cfg.gap, cfg.stable_tol);
    let parts = std::iter::once(band).chain(eigenvalues.iter().map(|e| Interval::point(e.value)));
    let component = ComponentSpectrum { spectrum: SpectrumSet::normalize(parts, 0.0)?, eigenvalues, per_radius, notes };
    Ok(InteractionSpectrum { component, ground, enclosure, bounds_only })
}

#[derive(Debug, Clone, Serialize)]
pub struct ThreeBodySpectrum {
    pub spectrum: SpectrumSet,
    pub h1: ComponentSpectrum,
    pub h2: ComponentSpectrum,
    pub h12: InteractionSpectrum,
    /// Closed-form infimum and supremum estimates.
    pub bounds: (f64, f64),
}

/// `sp(H₁) ∪ sp(H₂) ∪ sp(H₁₂)`.
pub fn ess_spectrum_three_body(p: &ThreeBodyProblem, cfg: &ThreeBodyOracle) -> Result<ThreeBodySpectrum> {
    let ((h1, h2), h12) = rayon::join(
        || rayon::join(|| subsystem_spectrum(p, Particle::One, cfg), || subsystem_spectrum(p, Particle::Two, cfg)),
        || interaction_spectrum(p, cfg),
    );
    let (h1, h2, h12) = (h1?, h2?, h12?);
    let spectrum = h1.spectrum.union(&h2.spectrum).union(&h12.component.spectrum);
    Ok(ThreeBodySpectrum { spectrum, h1, h2, h12, bounds: bounds_formula(p) })
}

/// `inf = min(inf W₁, inf W₂, inf W₁₂)`, `sup = max(sup W_k) + m`, with tails included.
pub fn bounds_formula(p: &ThreeBodyProblem) -> (f64, f64) {
    let ws = [&p.w1, &p.w2, &p.w12];
    let inf = ws.iter().map(|w| w.inf()).fold(f64::INFINITY, f64::min);
    let sup = ws.iter().map(|w| w.sup()).fold(f64::NEG_INFINITY, f64::max) + p.m();
    (inf, sup)
}

/// Range of Rayleigh quotients of the truncation at radius `l` over its
/// extremal Ritz vectors and `trials` random vectors: an inner approximation
/// of `[inf sp(A), sup sp(A)]`.
pub fn rayleigh_bounds(a: &LatticeOperator, l: i64, trials: usize, seed: u64) -> Result<Interval> {
    let cfg = TruncationConfig::extremal(l, 1).with_seed(seed);
    let m = truncate(a, &cfg)?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for pair in eigenpairs(&m, &cfg, true)? {
        let q = m.rayleigh(&pair.vector);
        lo = lo.min(q);
        hi = hi.max(q);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    for _ in 0..trials {
        let v: Vec<f64> = (0..m.real_size()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let q = m.rayleigh(&v);
        lo = lo.min(q);
        hi = hi.max(q);
    }
    Interval::new(lo, hi)
}
