//! Bounded coefficient functions ℤᴺ → ℂ with category tags.
//!
//! A [`Coefficient`] is a small expression tree. Leaves carry the semantic
//! class of the function (constant, periodic, slowly oscillating, two-valued,
//! axis profile, finitely supported, opaque); inner nodes are sums, products,
//! translates and conjugates. Evaluation only uses the tree; limit-operator
//! enumeration replaces leaves by their partial limits and rebuilds the tree.
//!
//! The smart constructors fold subtrees whose value is constant, periodic or
//! a piecewise-constant axis profile back into the corresponding leaf, so the
//! category of a composed coefficient stays visible.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num_complex::Complex64;

use super::lattice::Window;
use crate::error::{Error, Result};

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

fn next_id() -> u64 {
    NEXT_ID.fetch_add(1, Ordering::Relaxed)
}

pub type Evaluator = Arc<dyn Fn(&[i64]) -> Complex64 + Send + Sync>;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Declared set of partial limits at infinity of a slowly oscillating function.
#[derive(Debug, Clone, PartialEq)]
pub enum PartialLimits {
    /// Real function with `liminf = lo`, `limsup = hi`; the partial-limit set is all of `[lo, hi]`.
    Envelope { lo: f64, hi: f64 },
    /// Finitely many (possibly complex) partial limits.
    Points(Vec<Complex64>),
}

/// Evaluators for slowly oscillating functions.
#[derive(Clone)]
pub enum SoKind {
    /// `centre + amplitude · sin(√‖x‖₂)`
    SinSqrt { centre: f64, amplitude: f64 },
    /// `centre + amplitude · sin(ln(1 + ‖x‖₂))`
    SinLog { centre: f64, amplitude: f64 },
    Custom { label: String, eval: Evaluator },
}

#[derive(Clone)]
pub struct SlowlyOscillating {
    id: u64,
    kind: SoKind,
    limits: PartialLimits,
}

impl SlowlyOscillating {
    pub fn new(kind: SoKind, limits: PartialLimits) -> Result<Self> {
        if let PartialLimits::Envelope { lo, hi } = limits {
            if !(lo <= hi) {
                return Err(Error::InvalidEnvelope { lo, hi });
            }
        }
        if let PartialLimits::Points(ref p) = limits {
            if p.is_empty() {
                return Err(Error::Invalid("slowly oscillating coefficient needs at least one partial limit".into()));
            }
        }
        Ok(SlowlyOscillating { id: next_id(), kind, limits })
    }

    /// `sin(√|x|)` scaled so that its partial limits fill `[lo, hi]`.
    pub fn sin_sqrt(lo: f64, hi: f64) -> Result<Self> {
        Self::new(
            SoKind::SinSqrt { centre: 0.5 * (lo + hi), amplitude: 0.5 * (hi - lo) },
            PartialLimits::Envelope { lo, hi },
        )
    }

    /// `sin(ln(1 + |x|))` scaled so that its partial limits fill `[lo, hi]`.
    pub fn sin_log(lo: f64, hi: f64) -> Result<Self> {
        Self::new(
            SoKind::SinLog { centre: 0.5 * (lo + hi), amplitude: 0.5 * (hi - lo) },
            PartialLimits::Envelope { lo, hi },
        )
    }

    pub fn custom(label: impl Into<String>, eval: Evaluator, limits: PartialLimits) -> Result<Self> {
        Self::new(SoKind::Custom { label: label.into(), eval }, limits)
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn kind(&self) -> &SoKind {
        &self.kind
    }

    pub fn limits(&self) -> &PartialLimits {
        &self.limits
    }

    pub fn eval(&self, x: &[i64]) -> Complex64 {
        let r = || x.iter().map(|&v| (v as f64) * (v as f64)).sum::<f64>().sqrt();
        match &self.kind {
            SoKind::SinSqrt { centre, amplitude } => Complex64::new(centre + amplitude * r().sqrt().sin(), 0.0),
            SoKind::SinLog { centre, amplitude } => Complex64::new(centre + amplitude * (1.0 + r()).ln().sin(), 0.0),
            SoKind::Custom { eval, .. } => eval(x),
        }
    }

    /// Samples along user sequences and reports values outside the declared envelope.
    ///
    /// Only the tail `j ∈ [j_max/2, j_max]` is inspected. Returns warnings; an
    /// empty vector means the declaration is consistent with the samples.
    pub fn cross_check(&self, sequences: &[&dyn Fn(u64) -> Vec<i64>], j_max: u64, tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        for (s, g) in sequences.iter().enumerate() {
            for j in j_max / 2..=j_max {
                let v = self.eval(&g(j));
                let ok = match &self.limits {
                    PartialLimits::Envelope { lo, hi } => v.re >= lo - tol && v.re <= hi + tol && v.im.abs() <= tol,
                    PartialLimits::Points(p) => p.iter().any(|c| (c - v).norm() <= tol),
                };
                if !ok {
                    out.push(format!("sequence {s}: value {v} at j = {j} lies outside the declared partial limits"));
                    break;
                }
            }
        }
        out
    }
}

/// Integer sequence `k ↦ γ_k`, `k = 0, 1, 2, …`.
#[derive(Debug, Clone, PartialEq)]
pub enum GammaSequence {
    /// `γ_k = c2·k² + c1·k + c0`
    Quadratic { c2: i64, c1: i64, c0: i64 },
    /// Finitely many terms; points beyond the last term are outside Λ.
    Explicit(Vec<i64>),
}

impl GammaSequence {
    pub fn get(&self, k: u64) -> Option<i64> {
        match self {
            GammaSequence::Quadratic { c2, c1, c0 } => {
                let k = k as i64;
                Some(c2 * k * k + c1 * k + c0)
            }
            GammaSequence::Explicit(v) => v.get(k as usize).copied(),
        }
    }

    fn len(&self) -> Option<usize> {
        match self {
            GammaSequence::Quadratic { .. } => None,
            GammaSequence::Explicit(v) => Some(v.len()),
        }
    }
}

/// Potential equal to `a` on `Λ = ⋃_k {x : γ_k⁻ ≤ |x| ≤ γ_k⁺}` and `b` elsewhere (1-D).
#[derive(Debug, Clone)]
pub struct TwoValued {
    id: u64,
    a: f64,
    b: f64,
    gamma_minus: GammaSequence,
    gamma_plus: GammaSequence,
}

impl TwoValued {
    /// Validates ordering `γ_k⁻ ≤ γ_k⁺ < γ_{k+1}⁻` and the divergence of lengths and gaps.
    pub fn new(a: f64, b: f64, gamma_minus: GammaSequence, gamma_plus: GammaSequence) -> Result<Self> {
        let bad = |m: &str| Err(Error::InvalidSequences(m.to_string()));
        let count = match (gamma_minus.len(), gamma_plus.len()) {
            (None, None) => 1024usize,
            (Some(n), Some(m)) if n == m => n,
            (Some(n), None) | (None, Some(n)) => n,
            _ => return bad("explicit sequences must have equal length"),
        };
        if count < 8 {
            return bad("need at least 8 terms to check divergence");
        }
        if !a.is_finite() || !b.is_finite() {
            return bad("values a and b must be finite");
        }
        let gm: Vec<i64> = (0..count as u64).map(|k| gamma_minus.get(k).unwrap()).collect();
        let gp: Vec<i64> = (0..count as u64).map(|k| gamma_plus.get(k).unwrap()).collect();
        if gm[0] < 0 {
            return bad("γ_0⁻ must be nonnegative");
        }
        for k in 0..count {
            if gm[k] > gp[k] {
                return bad(&format!("γ_{k}⁻ > γ_{k}⁺"));
            }
            if k + 1 < count && gp[k] >= gm[k + 1] {
                return bad(&format!("γ_{k}⁺ >= γ_{}⁻", k + 1));
            }
        }
        // desk-scale divergence: the last quarter must dominate the first quarter
        let lengths: Vec<i64> = (0..count).map(|k| gp[k] - gm[k]).collect();
        let gaps: Vec<i64> = (0..count - 1).map(|k| gm[k + 1] - gp[k]).collect();
        for (name, seq) in [("γ⁺ − γ⁻", &lengths), ("γ_{k+1}⁻ − γ_k⁺", &gaps)] {
            let q = seq.len() / 4;
            let head = seq[..q.max(1)].iter().max().unwrap();
            let tail = seq[seq.len() - q.max(1)..].iter().min().unwrap();
            if tail <= head {
                return bad(&format!("{name} does not tend to infinity on the sampled range"));
            }
        }
        Ok(TwoValued { id: next_id(), a, b, gamma_minus, gamma_plus })
    }

    /// The example sequences `γ_k⁻ = k²`, `γ_k⁺ = k² + k`.
    pub fn squares(a: f64, b: f64) -> Result<Self> {
        Self::new(
            a,
            b,
            GammaSequence::Quadratic { c2: 1, c1: 0, c0: 0 },
            GammaSequence::Quadratic { c2: 1, c1: 1, c0: 0 },
        )
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn gamma_minus(&self) -> &GammaSequence {
        &self.gamma_minus
    }

    pub fn gamma_plus(&self) -> &GammaSequence {
        &self.gamma_plus
    }

    pub fn gm(&self, k: u64) -> Option<i64> {
        self.gamma_minus.get(k)
    }

    pub fn gp(&self, k: u64) -> Option<i64> {
        self.gamma_plus.get(k)
    }

    /// Membership `x ∈ Λ`, decided by locating `|x|` among the γ⁻ terms.
    pub fn in_lambda(&self, x: i64) -> bool {
        let r = x.abs();
        // largest k with γ_k⁻ ≤ r
        let k = match &self.gamma_minus {
            GammaSequence::Explicit(v) => {
                let p = v.partition_point(|&g| g <= r);
                if p == 0 {
                    return false;
                }
                (p - 1) as u64
            }
            GammaSequence::Quadratic { .. } => {
                if self.gm(0).unwrap() > r {
                    return false;
                }
                let mut hi = 1u64;
                while self.gm(hi).unwrap() <= r {
                    hi *= 2;
                }
                let mut lo = 0u64;
                while hi - lo > 1 {
                    let mid = lo + (hi - lo) / 2;
                    if self.gm(mid).unwrap() <= r {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo
            }
        };
        match self.gp(k) {
            Some(g) => r <= g,
            None => false,
        }
    }

    pub fn eval(&self, x: &[i64]) -> f64 {
        if self.in_lambda(x[0]) {
            self.a
        } else {
            self.b
        }
    }
}

/// `Φ(x) = Φ₋(x)` for `x_axis < h1`, `Φ₀(x)` on `[h1, h2]`, `Φ₊(x)` for `x_axis > h2`.
///
/// The parts are constant or slowly oscillating. `transversal` lists declared
/// partial limits `(Φ₋ᵍ, Φ₀ᵍ, Φ₊ᵍ)` along sequences with `x_axis` held fixed.
#[derive(Clone)]
pub struct AxisProfile {
    id: u64,
    axis: usize,
    h1: i64,
    h2: i64,
    minus: Coefficient,
    zero: Coefficient,
    plus: Coefficient,
    transversal: Vec<[f64; 3]>,
}

impl AxisProfile {
    pub fn new(
        axis: usize,
        h1: i64,
        h2: i64,
        minus: Coefficient,
        zero: Coefficient,
        plus: Coefficient,
        transversal: Vec<[f64; 3]>,
    ) -> Result<Self> {
        if h1 > h2 {
            return Err(Error::Invalid(format!("axis profile needs h1 <= h2, got {h1} > {h2}")));
        }
        for part in [&minus, &zero, &plus] {
            match part {
                Coefficient::Constant(_) | Coefficient::SlowlyOscillating(_) | Coefficient::Compact(_) => {}
                other => {
                    return Err(Error::ProfileWithoutTails(format!(
                        "axis profile parts must be constant or slowly oscillating, got {other:?}"
                    )))
                }
            }
        }
        Ok(AxisProfile { id: next_id(), axis, h1, h2, minus, zero, plus, transversal })
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn axis(&self) -> usize {
        self.axis
    }

    pub fn h1(&self) -> i64 {
        self.h1
    }

    pub fn h2(&self) -> i64 {
        self.h2
    }

    pub fn minus(&self) -> &Coefficient {
        &self.minus
    }

    pub fn zero(&self) -> &Coefficient {
        &self.zero
    }

    pub fn plus(&self) -> &Coefficient {
        &self.plus
    }

    pub fn transversal(&self) -> &[[f64; 3]] {
        &self.transversal
    }

    pub fn eval(&self, x: &[i64]) -> Complex64 {
        let t = x[self.axis];
        if t < self.h1 {
            self.minus.eval(x)
        } else if t > self.h2 {
            self.plus.eval(x)
        } else {
            self.zero.eval(x)
        }
    }
}

/// Real piecewise-constant function of one coordinate with constant tails:
/// `minus` for `x_axis < start`, `middle[x_axis − start]` next, `plus` after.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub axis: usize,
    pub start: i64,
    pub middle: Vec<f64>,
    pub minus: f64,
    pub plus: f64,
}

impl Profile {
    /// `left` for `x_axis < at`, `right` for `x_axis ≥ at`.
    pub fn step(axis: usize, at: i64, left: f64, right: f64) -> Self {
        Profile { axis, start: at, middle: Vec::new(), minus: left, plus: right }
    }

    pub fn value_at(&self, t: i64) -> f64 {
        if t < self.start {
            self.minus
        } else if ((t - self.start) as usize) < self.middle.len() {
            self.middle[(t - self.start) as usize]
        } else {
            self.plus
        }
    }

    pub fn end(&self) -> i64 {
        self.start + self.middle.len() as i64
    }

    pub fn max_abs(&self) -> f64 {
        self.middle.iter().chain([self.minus, self.plus].iter()).fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Drops middle entries equal to the adjacent tail value.
    fn trimmed(mut self) -> Self {
        while self.middle.first() == Some(&self.minus) {
            self.middle.remove(0);
            self.start += 1;
        }
        while self.middle.last() == Some(&self.plus) {
            self.middle.pop();
        }
        if self.middle.is_empty() && self.minus == self.plus {
            self.start = 0;
        }
        self
    }
}

/// Finitely supported table on the cube `[-radius, radius]ᴺ`, zero outside.
#[derive(Debug, Clone)]
pub struct Compact {
    id: u64,
    window: Window,
    table: Vec<Complex64>,
}

impl Compact {
    pub fn new(dim: usize, radius: i64, table: Vec<Complex64>) -> Result<Self> {
        let window = Window::cube(dim, radius);
        if table.len() != window.len() {
            return Err(Error::Invalid(format!(
                "compact table has {} entries, cube of radius {radius} in dimension {dim} needs {}",
                table.len(),
                window.len()
            )));
        }
        Ok(Compact { id: next_id(), window, table })
    }

    pub fn from_real(dim: usize, radius: i64, table: &[f64]) -> Result<Self> {
        Self::new(dim, radius, table.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn table(&self) -> &[Complex64] {
        &self.table
    }

    pub fn radius(&self) -> i64 {
        self.window.hi()[0]
    }

    pub fn eval(&self, x: &[i64]) -> Complex64 {
        self.window.index_of(x).map(|i| self.table[i]).unwrap_or(ZERO)
    }
}

/// Opaque evaluator with no category knowledge.
#[derive(Clone)]
pub struct FunctionCoefficient {
    id: u64,
    label: String,
    eval: Evaluator,
}

impl FunctionCoefficient {
    pub fn new(label: impl Into<String>, eval: Evaluator) -> Self {
        FunctionCoefficient { id: next_id(), label: label.into(), eval }
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// r-periodic table in lexicographic order of residues.
#[derive(Debug, Clone, PartialEq)]
pub struct Periodic {
    period: Vec<usize>,
    table: Arc<Vec<Complex64>>,
}

impl Periodic {
    pub fn new(period: Vec<usize>, table: Vec<Complex64>) -> Result<Self> {
        if period.is_empty() || period.contains(&0) {
            return Err(Error::Invalid(format!("invalid period {period:?}")));
        }
        let d: usize = period.iter().product();
        if table.len() != d {
            return Err(Error::Invalid(format!("period {period:?} needs {d} table entries, got {}", table.len())));
        }
        Ok(Periodic { period, table: Arc::new(table) })
    }

    pub fn from_real(period: Vec<usize>, table: &[f64]) -> Result<Self> {
        Self::new(period, table.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn period(&self) -> &[usize] {
        &self.period
    }

    pub fn table(&self) -> &[Complex64] {
        &self.table
    }

    pub fn index_of(&self, x: &[i64]) -> usize {
        let mut idx = 0usize;
        for (axis, &r) in self.period.iter().enumerate() {
            idx = idx * r + x[axis].rem_euclid(r as i64) as usize;
        }
        idx
    }

    pub fn eval(&self, x: &[i64]) -> Complex64 {
        self.table[self.index_of(x)]
    }
}

/// Periodicity class of a coefficient expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Periodicity {
    Constant,
    Periodic(Vec<usize>),
    Aperiodic,
}

impl Periodicity {
    fn combine(self, other: Periodicity) -> Periodicity {
        match (self, other) {
            (Periodicity::Aperiodic, _) | (_, Periodicity::Aperiodic) => Periodicity::Aperiodic,
            (Periodicity::Constant, p) | (p, Periodicity::Constant) => p,
            (Periodicity::Periodic(a), Periodicity::Periodic(b)) => {
                if a.len() != b.len() {
                    return Periodicity::Aperiodic;
                }
                Periodicity::Periodic(a.iter().zip(&b).map(|(&x, &y)| lcm(x, y)).collect())
            }
        }
    }
}

pub(crate) fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// Coarse category tag of a coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Constant,
    Periodic,
    SlowlyOscillating,
    TwoValued,
    AxisProfile,
    Profile,
    Compact,
    Function,
    Derived,
}

/// A bounded coefficient function ℤᴺ → ℂ.
#[derive(Clone)]
pub enum Coefficient {
    Constant(Complex64),
    Periodic(Periodic),
    SlowlyOscillating(Arc<SlowlyOscillating>),
    TwoValued(Arc<TwoValued>),
    AxisProfile(Arc<AxisProfile>),
    Profile(Arc<Profile>),
    Compact(Arc<Compact>),
    Function(Arc<FunctionCoefficient>),
    Sum(Vec<Coefficient>),
    Product(Vec<Coefficient>),
    /// `x ↦ c(x − s)`
    Shift(Box<Coefficient>, Vec<i64>),
    Conj(Box<Coefficient>),
}

impl Coefficient {
    pub fn constant(c: Complex64) -> Self {
        Coefficient::Constant(c)
    }

    pub fn real(v: f64) -> Self {
        Coefficient::Constant(Complex64::new(v, 0.0))
    }

    pub fn zero() -> Self {
        Coefficient::Constant(ZERO)
    }

    pub fn one() -> Self {
        Coefficient::Constant(ONE)
    }

    pub fn periodic(p: Periodic) -> Self {
        Coefficient::Periodic(p).fold()
    }

    pub fn slowly_oscillating(s: SlowlyOscillating) -> Self {
        Coefficient::SlowlyOscillating(Arc::new(s))
    }

    pub fn two_valued(t: TwoValued) -> Self {
        Coefficient::TwoValued(Arc::new(t))
    }

    pub fn axis_profile(p: AxisProfile) -> Self {
        Coefficient::AxisProfile(Arc::new(p))
    }

    pub fn profile(p: Profile) -> Self {
        let p = p.trimmed();
        if p.middle.is_empty() && p.minus == p.plus {
            return Coefficient::real(p.minus);
        }
        Coefficient::Profile(Arc::new(p))
    }

    pub fn compact(c: Compact) -> Self {
        Coefficient::Compact(Arc::new(c))
    }

    pub fn function(label: impl Into<String>, eval: Evaluator) -> Self {
        Coefficient::Function(Arc::new(FunctionCoefficient::new(label, eval)))
    }

    pub fn eval(&self, x: &[i64]) -> Complex64 {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::Periodic(p) => p.eval(x),
            Coefficient::SlowlyOscillating(s) => s.eval(x),
            Coefficient::TwoValued(t) => Complex64::new(t.eval(x), 0.0),
            Coefficient::AxisProfile(p) => p.eval(x),
            Coefficient::Profile(p) => Complex64::new(p.value_at(x[p.axis]), 0.0),
            Coefficient::Compact(c) => c.eval(x),
            Coefficient::Function(f) => (f.eval)(x),
            Coefficient::Sum(v) => v.iter().map(|c| c.eval(x)).sum(),
            Coefficient::Product(v) => v.iter().map(|c| c.eval(x)).product(),
            Coefficient::Shift(c, s) => {
                let y: Vec<i64> = x.iter().zip(s).map(|(a, b)| a - b).collect();
                c.eval(&y)
            }
            Coefficient::Conj(c) => c.eval(x).conj(),
        }
    }

    pub fn category(&self) -> Category {
        match self {
            Coefficient::Constant(_) => Category::Constant,
            Coefficient::Periodic(_) => Category::Periodic,
            Coefficient::SlowlyOscillating(_) => Category::SlowlyOscillating,
            Coefficient::TwoValued(_) => Category::TwoValued,
            Coefficient::AxisProfile(_) => Category::AxisProfile,
            Coefficient::Profile(_) => Category::Profile,
            Coefficient::Compact(_) => Category::Compact,
            Coefficient::Function(_) => Category::Function,
            _ => Category::Derived,
        }
    }

    pub fn as_constant(&self) -> Option<Complex64> {
        match self {
            Coefficient::Constant(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Coefficient::Constant(c) if *c == ZERO)
    }

    pub fn periodicity(&self) -> Periodicity {
        match self {
            Coefficient::Constant(_) => Periodicity::Constant,
            Coefficient::Periodic(p) => Periodicity::Periodic(p.period.clone()),
            Coefficient::Sum(v) | Coefficient::Product(v) => {
                v.iter().fold(Periodicity::Constant, |acc, c| acc.combine(c.periodicity()))
            }
            Coefficient::Shift(c, _) | Coefficient::Conj(c) => c.periodicity(),
            _ => Periodicity::Aperiodic,
        }
    }

    /// Axis and breakpoint span if the expression is a piecewise-constant
    /// function of one coordinate built from constants and [`Profile`] leaves.
    ///
    /// `Some((None, _))` means "no profile leaf at all".
    fn profile_span(&self) -> Option<(Option<usize>, Option<(i64, i64)>)> {
        fn merge(a: Option<(i64, i64)>, b: Option<(i64, i64)>) -> Option<(i64, i64)> {
            match (a, b) {
                (Some((l1, h1)), Some((l2, h2))) => Some((l1.min(l2), h1.max(h2))),
                (x, None) | (None, x) => x,
            }
        }
        match self {
            Coefficient::Constant(_) => Some((None, None)),
            Coefficient::Profile(p) => Some((Some(p.axis), Some((p.start, p.end())))),
            Coefficient::Sum(v) | Coefficient::Product(v) => {
                let mut axis = None;
                let mut span = None;
                for c in v {
                    let (a, s) = c.profile_span()?;
                    match (axis, a) {
                        (Some(x), Some(y)) if x != y => return None,
                        (None, Some(y)) => axis = Some(y),
                        _ => {}
                    }
                    span = merge(span, s);
                }
                Some((axis, span))
            }
            Coefficient::Shift(c, s) => {
                let (a, span) = c.profile_span()?;
                match a {
                    Some(axis) => Some((a, span.map(|(l, h)| (l + s[axis], h + s[axis])))),
                    None => Some((None, span)),
                }
            }
            Coefficient::Conj(c) => c.profile_span(),
            _ => None,
        }
    }

    /// Collapses an expression to a leaf when its values determine one.
    fn fold(self) -> Self {
        if matches!(self, Coefficient::Constant(_)) {
            return self;
        }
        match self.periodicity() {
            Periodicity::Constant => {
                return Coefficient::Constant(self.eval(&[0; 8][..self.guess_dim().unwrap_or(1)]));
            }
            Periodicity::Periodic(r) => {
                let d: usize = r.iter().product();
                let cell = Window::new(vec![0; r.len()], r.iter().map(|&v| v as i64 - 1).collect()).unwrap();
                let table: Vec<Complex64> = cell.points().map(|x| self.eval(&x)).collect();
                if d == 1 || table.iter().all(|v| *v == table[0]) {
                    return Coefficient::Constant(table[0]);
                }
                if let Coefficient::Periodic(_) = self {
                    return self;
                }
                return Coefficient::Periodic(Periodic { period: r, table: Arc::new(table) });
            }
            Periodicity::Aperiodic => {}
        }
        if let Coefficient::Profile(_) = self {
            return self;
        }
        if let Some((Some(axis), Some((lo, hi)))) = self.profile_span() {
            let dim = self.guess_dim().unwrap_or(axis + 1).max(axis + 1);
            let at = |t: i64| {
                let mut x = vec![0; dim];
                x[axis] = t;
                self.eval(&x)
            };
            let vals: Vec<Complex64> = (lo - 1..=hi).map(at).collect();
            if vals.iter().all(|v| v.im == 0.0) {
                let p = Profile {
                    axis,
                    start: lo,
                    middle: vals[1..vals.len() - 1].iter().map(|v| v.re).collect(),
                    minus: vals[0].re,
                    plus: vals[vals.len() - 1].re,
                };
                return Coefficient::profile(p);
            }
        }
        self
    }

    /// Dimension implied by leaves that know it (periodic tables, compact tables, shifts).
    fn guess_dim(&self) -> Option<usize> {
        match self {
            Coefficient::Periodic(p) => Some(p.period.len()),
            Coefficient::Compact(c) => Some(c.window.dim()),
            Coefficient::Shift(_, s) => Some(s.len()),
            Coefficient::Sum(v) | Coefficient::Product(v) => v.iter().find_map(|c| c.guess_dim()),
            Coefficient::Conj(c) => c.guess_dim(),
            Coefficient::AxisProfile(p) => Some(p.axis + 1),
            Coefficient::Profile(p) => Some(p.axis + 1),
            Coefficient::TwoValued(_) => Some(1),
            _ => None,
        }
    }

    pub fn add(&self, other: &Coefficient) -> Coefficient {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if let (Some(a), Some(b)) = (self.as_constant(), other.as_constant()) {
            return Coefficient::Constant(a + b);
        }
        let mut items = Vec::new();
        for c in [self, other] {
            match c {
                Coefficient::Sum(v) => items.extend(v.iter().cloned()),
                c => items.push(c.clone()),
            }
        }
        // gather constants into one summand
        let mut constant = ZERO;
        items.retain(|c| match c.as_constant() {
            Some(v) => {
                constant += v;
                false
            }
            None => true,
        });
        if constant != ZERO {
            items.push(Coefficient::Constant(constant));
        }
        if items.len() == 1 {
            return items.pop().unwrap();
        }
        Coefficient::Sum(items).fold()
    }

    pub fn mul(&self, other: &Coefficient) -> Coefficient {
        if self.is_zero() || other.is_zero() {
            return Coefficient::zero();
        }
        if let Some(c) = self.as_constant() {
            if c == ONE {
                return other.clone();
            }
        }
        if let Some(c) = other.as_constant() {
            if c == ONE {
                return self.clone();
            }
        }
        if let (Some(a), Some(b)) = (self.as_constant(), other.as_constant()) {
            return Coefficient::Constant(a * b);
        }
        let mut items = Vec::new();
        for c in [self, other] {
            match c {
                Coefficient::Product(v) => items.extend(v.iter().cloned()),
                c => items.push(c.clone()),
            }
        }
        Coefficient::Product(items).fold()
    }

    pub fn scale(&self, c: Complex64) -> Coefficient {
        self.mul(&Coefficient::Constant(c))
    }

    pub fn neg(&self) -> Coefficient {
        self.scale(Complex64::new(-1.0, 0.0))
    }

    /// The translate `x ↦ self(x − s)`.
    pub fn shifted(&self, s: &[i64]) -> Coefficient {
        if s.iter().all(|&v| v == 0) {
            return self.clone();
        }
        match self {
            Coefficient::Constant(_) => self.clone(),
            Coefficient::Shift(inner, t) => {
                let total: Vec<i64> = t.iter().zip(s).map(|(a, b)| a + b).collect();
                inner.shifted(&total)
            }
            Coefficient::Profile(p) => {
                let mut q = (**p).clone();
                q.start += s[p.axis];
                Coefficient::profile(q)
            }
            _ => Coefficient::Shift(Box::new(self.clone()), s.to_vec()).fold(),
        }
    }

    pub fn conj(&self) -> Coefficient {
        match self {
            Coefficient::Constant(c) => Coefficient::Constant(c.conj()),
            Coefficient::Conj(inner) => (**inner).clone(),
            Coefficient::TwoValued(_) | Coefficient::Profile(_) => self.clone(),
            Coefficient::SlowlyOscillating(s) if matches!(s.limits, PartialLimits::Envelope { .. }) && !matches!(s.kind, SoKind::Custom { .. }) => {
                self.clone()
            }
            _ => Coefficient::Conj(Box::new(self.clone())).fold(),
        }
    }

    /// `|self|²` as a coefficient.
    pub fn abs_sqr(&self) -> Coefficient {
        self.mul(&self.conj())
    }

    /// Rebuilds the tree, replacing every leaf for which `f` returns a value.
    pub fn substitute(&self, f: &dyn Fn(&Coefficient) -> Option<Coefficient>) -> Coefficient {
        if let Some(r) = f(self) {
            return r;
        }
        match self {
            Coefficient::Sum(v) => v.iter().fold(Coefficient::zero(), |acc, c| acc.add(&c.substitute(f))),
            Coefficient::Product(v) => v.iter().fold(Coefficient::one(), |acc, c| acc.mul(&c.substitute(f))),
            Coefficient::Shift(c, s) => c.substitute(f).shifted(s),
            Coefficient::Conj(c) => c.substitute(f).conj(),
            other => other.clone(),
        }
    }

    /// All leaves (non-composite nodes) of the expression.
    pub fn leaves(&self) -> Vec<&Coefficient> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a Coefficient>) {
        match self {
            Coefficient::Sum(v) | Coefficient::Product(v) => v.iter().for_each(|c| c.collect_leaves(out)),
            Coefficient::Shift(c, _) | Coefficient::Conj(c) => c.collect_leaves(out),
            leaf => out.push(leaf),
        }
    }

    /// Identifier of a stateful leaf (slowly oscillating, two-valued, axis profile, compact, function).
    pub fn leaf_id(&self) -> Option<u64> {
        match self {
            Coefficient::SlowlyOscillating(s) => Some(s.id),
            Coefficient::TwoValued(t) => Some(t.id),
            Coefficient::AxisProfile(p) => Some(p.id),
            Coefficient::Compact(c) => Some(c.id),
            Coefficient::Function(f) => Some(f.id),
            _ => None,
        }
    }

    /// Sup norm: exact for tables, two-valued and profile data, otherwise the
    /// maximum over `probe`.
    pub fn sup_norm(&self, probe: &Window) -> f64 {
        match self {
            Coefficient::Constant(c) => c.norm(),
            Coefficient::Periodic(p) => p.table.iter().fold(0.0f64, |m, v| m.max(v.norm())),
            Coefficient::TwoValued(t) => t.a.abs().max(t.b.abs()),
            Coefficient::Profile(p) => p.max_abs(),
            Coefficient::Compact(c) => c.table.iter().fold(0.0f64, |m, v| m.max(v.norm())),
            Coefficient::SlowlyOscillating(s) => {
                let env = match &s.limits {
                    PartialLimits::Envelope { lo, hi } => lo.abs().max(hi.abs()),
                    PartialLimits::Points(p) => p.iter().fold(0.0f64, |m, v| m.max(v.norm())),
                };
                probe.points().fold(env, |m, x| m.max(s.eval(&x).norm()))
            }
            _ => probe.points().fold(0.0f64, |m, x| m.max(self.eval(&x).norm())),
        }
    }

    /// Pointwise agreement on a window.
    pub fn approx_eq_on(&self, other: &Coefficient, window: &Window, tol: f64) -> bool {
        window.points().all(|x| (self.eval(&x) - other.eval(&x)).norm() <= tol)
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Constant(c) if c.im == 0.0 => write!(f, "{}", c.re),
            Coefficient::Constant(c) => write!(f, "{c}"),
            Coefficient::Periodic(p) => write!(f, "periodic{:?}{:?}", p.period, p.table),
            Coefficient::SlowlyOscillating(s) => {
                let name = match &s.kind {
                    SoKind::SinSqrt { .. } => "sin_sqrt".to_string(),
                    SoKind::SinLog { .. } => "sin_log".to_string(),
                    SoKind::Custom { label, .. } => label.clone(),
                };
                write!(f, "so({name}; {:?})", s.limits)
            }
            Coefficient::TwoValued(t) => write!(f, "two_valued(a={}, b={})", t.a, t.b),
            Coefficient::AxisProfile(p) => {
                write!(f, "axis_profile(axis {}, [{}, {}]: {:?} | {:?} | {:?})", p.axis, p.h1, p.h2, p.minus, p.zero, p.plus)
            }
            Coefficient::Profile(p) => {
                write!(f, "profile(axis {}: {} | {:?}@{} | {})", p.axis, p.minus, p.middle, p.start, p.plus)
            }
            Coefficient::Compact(c) => write!(f, "compact(radius {})", c.radius()),
            Coefficient::Function(g) => write!(f, "fn({})", g.label),
            Coefficient::Sum(v) => f.debug_tuple("sum").field(v).finish(),
            Coefficient::Product(v) => f.debug_tuple("product").field(v).finish(),
            Coefficient::Shift(c, s) => write!(f, "shift({c:?}, {s:?})"),
            Coefficient::Conj(c) => write!(f, "conj({c:?})"),
        }
    }
}

impl From<f64> for Coefficient {
    fn from(v: f64) -> Self {
        Coefficient::real(v)
    }
}

impl From<Complex64> for Coefficient {
    fn from(c: Complex64) -> Self {
        Coefficient::Constant(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    #[test]
    fn two_valued_membership_by_direct_evaluation() {
        let t = TwoValued::squares(0.0, 5.0).unwrap();
        // Λ = {0} ∪ [1,2] ∪ [4,6] ∪ [9,12] ∪ [16,20] …
        let inside: Vec<i64> = (-13..=13).filter(|&x| t.in_lambda(x)).collect();
        assert_eq!(inside, vec![-12, -11, -10, -9, -6, -5, -4, -2, -1, 0, 1, 2, 4, 5, 6, 9, 10, 11, 12]);
        assert_eq!(t.eval(&[9]), 0.0);
        assert_eq!(t.eval(&[7]), 5.0);
        assert!(t.in_lambda(200 * 200 + 200));
        assert!(!t.in_lambda(200 * 200 + 201));
    }

    #[test]
    fn two_valued_rejects_bad_sequences() {
        let q = |c2, c1, c0| GammaSequence::Quadratic { c2, c1, c0 };
        // overlapping blocks
        assert!(TwoValued::new(0.0, 1.0, q(1, 0, 0), q(2, 0, 0)).is_err());
        // constant block length does not diverge
        assert!(TwoValued::new(0.0, 1.0, q(0, 10, 0), q(0, 10, 3)).is_err());
        assert!(TwoValued::new(0.0, 1.0, GammaSequence::Explicit(vec![0, 5]), GammaSequence::Explicit(vec![1, 6])).is_err());
    }

    #[test]
    fn periodic_table_is_lexicographic() {
        let p = Periodic::from_real(vec![2, 3], &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!(p.eval(&[1, 2]), c(5.0));
        assert_eq!(p.eval(&[-1, -1]), c(5.0));
        assert_eq!(p.eval(&[2, 4]), c(1.0));
    }

    #[test]
    fn folding_keeps_categories() {
        let phi = Coefficient::periodic(Periodic::from_real(vec![2], &[0.0, 3.0]).unwrap());
        let shifted = phi.shifted(&[1]);
        assert_eq!(shifted.category(), Category::Periodic);
        assert_eq!(shifted.eval(&[0]), c(3.0));
        let sum = phi.add(&Coefficient::real(1.0));
        assert_eq!(sum.category(), Category::Periodic);
        assert_eq!(sum.eval(&[1]), c(4.0));
        let k = Coefficient::real(2.0).add(&Coefficient::real(-2.0));
        assert!(k.is_zero());
        let step = Coefficient::profile(Profile::step(0, 0, 5.0, 0.0));
        let moved = step.shifted(&[3]).add(&Coefficient::real(1.0));
        assert_eq!(moved.category(), Category::Profile);
        assert_eq!(moved.eval(&[2]), c(6.0));
        assert_eq!(moved.eval(&[3]), c(1.0));
    }

    #[test]
    fn substitution_replaces_leaves() {
        let so = Coefficient::slowly_oscillating(SlowlyOscillating::sin_sqrt(-1.0, 2.0).unwrap());
        let phi = Coefficient::periodic(Periodic::from_real(vec![2], &[0.0, 3.0]).unwrap());
        let expr = phi.mul(&so).add(&so);
        let id = so.leaf_id().unwrap();
        let lim = expr.substitute(&|leaf| (leaf.leaf_id() == Some(id)).then(|| Coefficient::real(2.0)));
        assert_eq!(lim.category(), Category::Periodic);
        assert_eq!(lim.eval(&[1]), c(8.0));
    }

    #[test]
    fn sup_norms_are_exact_for_tables() {
        let w = Window::cube(1, 3);
        let t = Coefficient::two_valued(TwoValued::squares(0.0, 5.0).unwrap());
        assert_eq!(t.sup_norm(&w), 5.0);
        let p = Coefficient::periodic(Periodic::from_real(vec![2], &[-4.0, 3.0]).unwrap());
        assert_eq!(p.sup_norm(&w), 4.0);
    }

    #[test]
    fn slowly_oscillating_cross_check() {
        let s = SlowlyOscillating::sin_sqrt(-1.0, 2.0).unwrap();
        let along = |j: u64| vec![(j * j) as i64];
        assert!(s.cross_check(&[&along], 100, 1e-12).is_empty());
        let wrong = SlowlyOscillating::custom(
            "wrong",
            Arc::new(|x: &[i64]| Complex64::new((x[0] as f64).sqrt().sin() * 3.0, 0.0)),
            PartialLimits::Envelope { lo: -1.0, hi: 1.0 },
        )
        .unwrap();
        assert!(!wrong.cross_check(&[&along], 100, 1e-12).is_empty());
        assert!(SlowlyOscillating::sin_sqrt(2.0, 1.0).is_err());
    }
}
