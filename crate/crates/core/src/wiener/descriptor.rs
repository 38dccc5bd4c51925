//! Serializable operator descriptions.
//!
//! ```json
//! { "dim": 1,
//!   "terms": [ { "shift": [1], "coef": { "kind": "constant", "value": -1.0 } } ],
//!   "laplacian": true,
//!   "potential": { "kind": "periodic", "period": [2], "table": [0.0, 3.0] } }
//! ```
//!
//! `laplacian` and `potential` are shorthands that add `Δ_N` and `Φ I`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::coefficient::{
    AxisProfile, Coefficient, Compact, GammaSequence, PartialLimits, Periodic, Profile, SlowlyOscillating, SoKind,
    TwoValued,
};
use super::operator::LatticeOperator;
use crate::error::{Error, Result};

/// Real number or `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Real(f64),
    Pair([f64; 2]),
}

impl From<ComplexValue> for Complex64 {
    fn from(v: ComplexValue) -> Self {
        match v {
            ComplexValue::Real(r) => Complex64::new(r, 0.0),
            ComplexValue::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

impl From<Complex64> for ComplexValue {
    fn from(c: Complex64) -> Self {
        if c.im == 0.0 {
            ComplexValue::Real(c.re)
        } else {
            ComplexValue::Pair([c.re, c.im])
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GammaDescriptor {
    /// `c2·k² + c1·k + c0`
    Quadratic {
        #[serde(default)]
        c2: i64,
        #[serde(default)]
        c1: i64,
        #[serde(default)]
        c0: i64,
    },
    Explicit(Vec<i64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SoProfileName {
    SinSqrt,
    SinLog,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientDescriptor {
    Constant {
        value: ComplexValue,
    },
    Periodic {
        period: Vec<usize>,
        table: Vec<ComplexValue>,
    },
    TwoValued {
        a: f64,
        b: f64,
        gamma_minus: GammaDescriptor,
        gamma_plus: GammaDescriptor,
    },
    SlowlyOscillating {
        profile: SoProfileName,
        envelope: [f64; 2],
    },
    Compact {
        dim: usize,
        radius: i64,
        table: Vec<ComplexValue>,
    },
    Step {
        axis: usize,
        at: i64,
        left: f64,
        right: f64,
    },
    Profile {
        axis: usize,
        start: i64,
        middle: Vec<f64>,
        minus: f64,
        plus: f64,
    },
    AxisProfile {
        axis: usize,
        h1: i64,
        h2: i64,
        minus: Box<CoefficientDescriptor>,
        zero: Box<CoefficientDescriptor>,
        plus: Box<CoefficientDescriptor>,
        #[serde(default)]
        transversal: Vec<[f64; 3]>,
    },
    Sum {
        terms: Vec<CoefficientDescriptor>,
    },
    Product {
        factors: Vec<CoefficientDescriptor>,
    },
    Shift {
        by: Vec<i64>,
        coef: Box<CoefficientDescriptor>,
    },
    Conj {
        coef: Box<CoefficientDescriptor>,
    },
}

fn gamma(d: &GammaDescriptor) -> GammaSequence {
    match d {
        GammaDescriptor::Quadratic { c2, c1, c0 } => GammaSequence::Quadratic { c2: *c2, c1: *c1, c0: *c0 },
        GammaDescriptor::Explicit(v) => GammaSequence::Explicit(v.clone()),
    }
}

fn gamma_back(g: &GammaSequence) -> GammaDescriptor {
    match g {
        GammaSequence::Quadratic { c2, c1, c0 } => GammaDescriptor::Quadratic { c2: *c2, c1: *c1, c0: *c0 },
        GammaSequence::Explicit(v) => GammaDescriptor::Explicit(v.clone()),
    }
}

impl CoefficientDescriptor {
    pub fn build(&self) -> Result<Coefficient> {
        use CoefficientDescriptor as D;
        Ok(match self {
            D::Constant { value } => Coefficient::constant((*value).into()),
            D::Periodic { period, table } => {
                Coefficient::periodic(Periodic::new(period.clone(), table.iter().map(|&v| v.into()).collect())?)
            }
            D::TwoValued { a, b, gamma_minus, gamma_plus } => {
                Coefficient::two_valued(TwoValued::new(*a, *b, gamma(gamma_minus), gamma(gamma_plus))?)
            }
            D::SlowlyOscillating { profile, envelope: [lo, hi] } => {
                let s = match profile {
                    SoProfileName::SinSqrt => SlowlyOscillating::sin_sqrt(*lo, *hi)?,
                    SoProfileName::SinLog => SlowlyOscillating::sin_log(*lo, *hi)?,
                };
                Coefficient::slowly_oscillating(s)
            }
            D::Compact { dim, radius, table } => {
                Coefficient::compact(Compact::new(*dim, *radius, table.iter().map(|&v| v.into()).collect())?)
            }
            D::Step { axis, at, left, right } => Coefficient::profile(Profile::step(*axis, *at, *left, *right)),
            D::Profile { axis, start, middle, minus, plus } => Coefficient::profile(Profile {
                axis: *axis,
                start: *start,
                middle: middle.clone(),
                minus: *minus,
                plus: *plus,
            }),
            D::AxisProfile { axis, h1, h2, minus, zero, plus, transversal } => Coefficient::axis_profile(AxisProfile::new(
                *axis,
                *h1,
                *h2,
                minus.build()?,
                zero.build()?,
                plus.build()?,
                transversal.clone(),
            )?),
            D::Sum { terms } => {
                let mut acc = Coefficient::zero();
                for t in terms {
                    acc = acc.add(&t.build()?);
                }
                acc
            }
            D::Product { factors } => {
                let mut acc = Coefficient::one();
                for t in factors {
                    acc = acc.mul(&t.build()?);
                }
                acc
            }
            D::Shift { by, coef } => coef.build()?.shifted(by),
            D::Conj { coef } => coef.build()?.conj(),
        })
    }

    /// Describes a coefficient; opaque evaluators have no description.
    pub fn describe(c: &Coefficient) -> Result<Self> {
        use CoefficientDescriptor as D;
        let table = |v: &[Complex64]| v.iter().map(|&c| c.into()).collect();
        Ok(match c {
            Coefficient::Constant(v) => D::Constant { value: (*v).into() },
            Coefficient::Periodic(p) => D::Periodic { period: p.period().to_vec(), table: table(p.table()) },
            Coefficient::TwoValued(t) => D::TwoValued {
                a: t.a(),
                b: t.b(),
                gamma_minus: gamma_back(t.gamma_minus()),
                gamma_plus: gamma_back(t.gamma_plus()),
            },
            Coefficient::SlowlyOscillating(s) => {
                let profile = match s.kind() {
                    SoKind::SinSqrt { .. } => SoProfileName::SinSqrt,
                    SoKind::SinLog { .. } => SoProfileName::SinLog,
                    SoKind::Custom { label, .. } => {
                        return Err(Error::Invalid(format!("custom slowly oscillating coefficient '{label}' has no description")))
                    }
                };
                match s.limits() {
                    PartialLimits::Envelope { lo, hi } => D::SlowlyOscillating { profile, envelope: [*lo, *hi] },
                    PartialLimits::Points(_) => {
                        return Err(Error::Invalid("slowly oscillating coefficient with point limits has no description".into()))
                    }
                }
            }
            Coefficient::Compact(k) => D::Compact { dim: k.window().dim(), radius: k.radius(), table: table(k.table()) },
            Coefficient::Profile(p) => D::Profile {
                axis: p.axis,
                start: p.start,
                middle: p.middle.clone(),
                minus: p.minus,
                plus: p.plus,
            },
            Coefficient::AxisProfile(p) => D::AxisProfile {
                axis: p.axis(),
                h1: p.h1(),
                h2: p.h2(),
                minus: Box::new(Self::describe(p.minus())?),
                zero: Box::new(Self::describe(p.zero())?),
                plus: Box::new(Self::describe(p.plus())?),
                transversal: p.transversal().to_vec(),
            },
            Coefficient::Function(f) => {
                return Err(Error::Invalid(format!("opaque coefficient '{}' has no description", f.label())))
            }
            Coefficient::Sum(v) => D::Sum { terms: v.iter().map(Self::describe).collect::<Result<_>>()? },
            Coefficient::Product(v) => D::Product { factors: v.iter().map(Self::describe).collect::<Result<_>>()? },
            Coefficient::Shift(inner, s) => D::Shift { by: s.clone(), coef: Box::new(Self::describe(inner)?) },
            Coefficient::Conj(inner) => D::Conj { coef: Box::new(Self::describe(inner)?) },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDescriptor {
    pub shift: Vec<i64>,
    pub coef: CoefficientDescriptor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorDescriptor {
    pub dim: usize,
    #[serde(default)]
    pub terms: Vec<TermDescriptor>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub laplacian: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<CoefficientDescriptor>,
}

impl OperatorDescriptor {
    pub fn build(&self) -> Result<LatticeOperator> {
        if self.dim == 0 {
            return Err(Error::Invalid("operator dimension must be >= 1".into()));
        }
        let mut op = if self.laplacian { LatticeOperator::laplacian(self.dim) } else { LatticeOperator::zero(self.dim) };
        for t in &self.terms {
            if t.shift.len() != self.dim {
                return Err(Error::DimensionMismatch(self.dim, t.shift.len()));
            }
            op.add_term(t.shift.clone(), t.coef.build()?);
        }
        if let Some(p) = &self.potential {
            op.add_term(vec![0; self.dim], p.build()?);
        }
        Ok(op)
    }

    pub fn describe(op: &LatticeOperator) -> Result<Self> {
        Ok(OperatorDescriptor {
            dim: op.dim(),
            terms: op
                .terms()
                .map(|(s, c)| Ok(TermDescriptor { shift: s.clone(), coef: CoefficientDescriptor::describe(c)? }))
                .collect::<Result<_>>()?,
            laplacian: false,
            potential: None,
        })
    }
}
