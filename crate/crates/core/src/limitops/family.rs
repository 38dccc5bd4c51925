//! Enumeration of the limit operators of a Schrödinger-type operator.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

use super::partial::{partial_limit_along, GeneratingSequence, PartialLimitReport};
use crate::error::{Error, Result};
use crate::wiener::{AxisProfile, Coefficient, LatticeOperator, PartialLimits, Profile, SoKind, TwoValued, Window};

/// Cap on the number of enumerated members.
pub const MAX_MEMBERS: usize = 4096;

/// Offset of the phase counter in slowly oscillating generating sequences.
const SO_PHASE_OFFSET: u64 = 100_000_000;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum LeafKey {
    Id(u64),
    /// All profile leaves along one axis move together.
    ProfileAxis(usize),
}

#[derive(Clone)]
pub(crate) enum Replacement {
    Fixed(Coefficient),
    /// Profiles along the axis collapse to their right (`true`) or left tail.
    Tail(bool),
    Keep,
}

#[derive(Clone)]
pub(crate) struct Choice {
    pub replace: Replacement,
    pub label: String,
    pub sequence: Option<GeneratingSequence>,
}

pub(crate) struct LeafGroup {
    pub key: LeafKey,
    pub choices: Vec<Choice>,
}

/// A limit operator with the recipe that produced it.
#[derive(Clone)]
pub struct Member {
    pub operator: LatticeOperator,
    pub label: String,
    /// A sequence along which the operator's translates converge to this member, when known.
    pub sequence: Option<GeneratingSequence>,
}

impl fmt::Debug for Member {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Member").field("label", &self.label).field("operator", &self.operator).finish()
    }
}

/// A slowly oscillating coefficient whose partial limits fill an interval.
#[derive(Debug, Clone, Serialize)]
pub struct ConnectedEnvelope {
    pub label: String,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone)]
pub struct LimitOperatorFamily {
    pub dim: usize,
    pub members: Vec<Member>,
    /// Members at the endpoints of each envelope stand for the whole segment between them.
    pub connected: Vec<ConnectedEnvelope>,
    pub notes: Vec<String>,
}

fn so_label(s: &crate::wiener::SlowlyOscillating) -> String {
    match s.kind() {
        SoKind::SinSqrt { .. } => "sin√|x|".to_string(),
        SoKind::SinLog { .. } => "sin ln(1+|x|)".to_string(),
        SoKind::Custom { label, .. } => label.clone(),
    }
}

fn so_choices(s: &crate::wiener::SlowlyOscillating, dim: usize) -> Vec<Choice> {
    match s.limits() {
        PartialLimits::Envelope { lo, hi } => {
            let seq = |phase: f64| match s.kind() {
                SoKind::SinSqrt { .. } => Some(GeneratingSequence::sqrt_phase(dim, phase, SO_PHASE_OFFSET)),
                _ => None,
            };
            vec![
                Choice {
                    replace: Replacement::Fixed(Coefficient::real(*lo)),
                    label: format!("SO partial limit at envelope endpoint m = {lo}"),
                    sequence: seq(1.5 * PI),
                },
                Choice {
                    replace: Replacement::Fixed(Coefficient::real(*hi)),
                    label: format!("SO partial limit at envelope endpoint M = {hi}"),
                    sequence: seq(0.5 * PI),
                },
            ]
        }
        PartialLimits::Points(p) => p
            .iter()
            .map(|v| Choice {
                replace: Replacement::Fixed(Coefficient::constant(*v)),
                label: format!("SO partial limit {v}"),
                sequence: None,
            })
            .collect(),
    }
}

fn two_valued_choices(t: &TwoValued) -> Vec<Choice> {
    let (a, b) = (t.a(), t.b());
    vec![
        Choice {
            replace: Replacement::Fixed(Coefficient::real(a)),
            label: "interior of Λ".into(),
            sequence: Some(GeneratingSequence::interior_of_lambda(t)),
        },
        Choice {
            replace: Replacement::Fixed(Coefficient::real(b)),
            label: "gap of Λ".into(),
            sequence: Some(GeneratingSequence::gap_of_lambda(t)),
        },
        Choice {
            replace: Replacement::Fixed(Coefficient::profile(Profile::step(0, 0, b, a))),
            label: "left edge h".into(),
            sequence: Some(GeneratingSequence::left_edge(t)),
        },
        Choice {
            replace: Replacement::Fixed(Coefficient::profile(Profile::step(0, 0, a, b))),
            label: "right edge h".into(),
            sequence: Some(GeneratingSequence::right_edge(t)),
        },
    ]
}

fn axis_profile_choices(p: &AxisProfile, dim: usize) -> Result<Vec<Choice>> {
    let axis = p.axis();
    let along = |sign: i64, part: &Coefficient| {
        let mut e = vec![0; dim];
        e[axis] = sign;
        matches!(part, Coefficient::Constant(_)).then(|| GeneratingSequence::linear(e))
    };
    let mut out = vec![
        Choice {
            replace: Replacement::Fixed(p.plus().clone()),
            label: "g_N → +∞".into(),
            sequence: along(1, p.plus()),
        },
        Choice {
            replace: Replacement::Fixed(p.minus().clone()),
            label: "g_N → −∞".into(),
            sequence: along(-1, p.minus()),
        },
    ];
    if dim < 2 {
        return Ok(out);
    }
    let mut triples = p.transversal().to_vec();
    if triples.is_empty() {
        let real = |c: &Coefficient| c.as_constant().filter(|v| v.im == 0.0).map(|v| v.re);
        match (real(p.minus()), real(p.zero()), real(p.plus())) {
            (Some(m), Some(z), Some(q)) => triples.push([m, z, q]),
            _ => {
                return Err(Error::ProfileWithoutTails(
                    "non-constant profile parts need declared transversal limits".into(),
                ))
            }
        }
    }
    for [m, z, q] in triples {
        let prof = Profile {
            axis,
            start: p.h1(),
            middle: vec![z; (p.h2() - p.h1() + 1) as usize],
            minus: m,
            plus: q,
        };
        let sequence = if p.transversal().is_empty() {
            let mut e = vec![0; dim];
            e[(axis + 1) % dim] = 1;
            Some(GeneratingSequence::linear(e))
        } else {
            None
        };
        out.push(Choice {
            replace: Replacement::Fixed(Coefficient::profile(prof)),
            label: format!("transversal, g_N const: ({m}, {z}, {q})"),
            sequence,
        });
    }
    Ok(out)
}

fn profile_choices(axis: usize, dim: usize) -> Vec<Choice> {
    let e = |s: i64| {
        let mut v = vec![0; dim];
        v[axis] = s;
        Some(GeneratingSequence::linear(v))
    };
    let mut out = vec![
        Choice { replace: Replacement::Tail(true), label: format!("g_{} → +∞", axis + 1), sequence: e(1) },
        Choice { replace: Replacement::Tail(false), label: format!("g_{} → −∞", axis + 1), sequence: e(-1) },
    ];
    if dim >= 2 {
        let mut v = vec![0; dim];
        v[(axis + 1) % dim] = 1;
        out.push(Choice {
            replace: Replacement::Keep,
            label: format!("transversal, g_{} const", axis + 1),
            sequence: Some(GeneratingSequence::linear(v)),
        });
    }
    out
}

/// Groups the non-trivial leaves of `h`. Slowly oscillating leaves are included only with `with_so`.
pub(crate) fn leaf_groups(h: &LatticeOperator, with_so: bool) -> Result<Vec<LeafGroup>> {
    let dim = h.dim();
    let mut groups: BTreeMap<LeafKey, Vec<Choice>> = BTreeMap::new();
    for (_, c) in h.terms() {
        for leaf in c.leaves() {
            let key = match leaf {
                Coefficient::Profile(p) => LeafKey::ProfileAxis(p.axis),
                other => match other.leaf_id() {
                    Some(id) => LeafKey::Id(id),
                    None => continue,
                },
            };
            if groups.contains_key(&key) {
                continue;
            }
            let choices = match leaf {
                Coefficient::SlowlyOscillating(s) if with_so => so_choices(s, dim),
                Coefficient::SlowlyOscillating(_) => continue,
                Coefficient::TwoValued(_) if dim != 1 => {
                    return Err(Error::NotClassifiable("two-valued coefficients are one-dimensional".into()))
                }
                Coefficient::TwoValued(t) => two_valued_choices(t),
                Coefficient::AxisProfile(p) => axis_profile_choices(p, dim)?,
                Coefficient::Profile(p) => profile_choices(p.axis, dim),
                Coefficient::Compact(_) => vec![Choice {
                    replace: Replacement::Fixed(Coefficient::zero()),
                    label: "decaying coefficient".into(),
                    sequence: Some(GeneratingSequence::linear(crate::wiener::lattice::unit(dim, 0, 1))),
                }],
                Coefficient::Function(f) => {
                    return Err(Error::NotClassifiable(format!("no limit data for coefficient '{}'", f.label())))
                }
                _ => continue,
            };
            groups.insert(key, choices);
        }
    }
    Ok(groups.into_iter().map(|(key, choices)| LeafGroup { key, choices }).collect())
}

fn leaf_key(c: &Coefficient) -> Option<LeafKey> {
    match c {
        Coefficient::Profile(p) => Some(LeafKey::ProfileAxis(p.axis)),
        other => other.leaf_id().map(LeafKey::Id),
    }
}

/// Replaces leaves according to one choice per group, then drops decaying parts
/// that the replacement may have exposed.
pub(crate) fn apply_choices(h: &LatticeOperator, groups: &[LeafGroup], picks: &[usize]) -> LatticeOperator {
    let table: BTreeMap<&LeafKey, &Replacement> =
        groups.iter().zip(picks).map(|(g, &i)| (&g.key, &g.choices[i].replace)).collect();
    let f = |c: &Coefficient| -> Option<Coefficient> {
        let key = leaf_key(c)?;
        match table.get(&key)? {
            Replacement::Fixed(r) => Some(r.clone()),
            Replacement::Tail(right) => match c {
                Coefficient::Profile(p) => Some(Coefficient::real(if *right { p.plus } else { p.minus })),
                _ => None,
            },
            Replacement::Keep => None,
        }
    };
    let out = h.map_coefficients(|c| c.substitute(&f));
    out.map_coefficients(|c| c.substitute(&|l| matches!(l, Coefficient::Compact(_)).then(Coefficient::zero)))
}

/// All index combinations, one per group.
pub(crate) fn combinations(groups: &[LeafGroup]) -> Result<Vec<Vec<usize>>> {
    let total = groups.iter().try_fold(1usize, |acc, g| acc.checked_mul(g.choices.len().max(1)));
    match total {
        Some(n) if n <= MAX_MEMBERS => {}
        _ => return Err(Error::Invalid(format!("more than {MAX_MEMBERS} limit-operator combinations"))),
    }
    let mut out = vec![vec![]];
    for g in groups {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..g.choices.len()).map(move |i| {
                    let mut q = p.clone();
                    q.push(i);
                    q
                })
            })
            .collect();
    }
    Ok(out)
}

pub(crate) fn combo_label(groups: &[LeafGroup], picks: &[usize]) -> String {
    if groups.is_empty() {
        return "periodic or constant: the operator itself".into();
    }
    groups.iter().zip(picks).map(|(g, &i)| g.choices[i].label.as_str()).collect::<Vec<_>>().join("; ")
}

fn has_periodic_leaf(h: &LatticeOperator) -> bool {
    h.terms().any(|(_, c)| c.leaves().iter().any(|l| matches!(l, Coefficient::Periodic(_))))
}

/// Enumerates representative limit operators.
///
/// Periodic coefficients are kept as they are (translates by multiples of the
/// period). Slowly oscillating envelopes are represented by their endpoints and
/// listed in `connected`. When leaves are independent, the family is the
/// product of their individual limit choices.
pub fn enumerate_limit_ops(h: &LatticeOperator) -> Result<LimitOperatorFamily> {
    let groups = leaf_groups(h, true)?;
    let mut notes = Vec::new();
    let mut connected = Vec::new();
    for (_, c) in h.terms() {
        for leaf in c.leaves() {
            if let Coefficient::SlowlyOscillating(s) = leaf {
                if let PartialLimits::Envelope { lo, hi } = s.limits() {
                    let label = so_label(s);
                    if !connected.iter().any(|e: &ConnectedEnvelope| e.label == label && e.lo == *lo && e.hi == *hi) {
                        connected.push(ConnectedEnvelope { label, lo: *lo, hi: *hi });
                    }
                }
            }
        }
    }
    let independent = groups.iter().filter(|g| g.choices.iter().any(|c| c.sequence.is_some() || g.choices.len() > 1)).count();
    if independent > 1 {
        notes.push("limit choices of distinct coefficients are combined independently".into());
    }
    let decaying = |g: &LeafGroup| g.choices[0].label == "decaying coefficient";
    let lead = groups.iter().position(|g| !decaying(g)).or(if groups.is_empty() { None } else { Some(0) });
    let single = !has_periodic_leaf(h) && groups.iter().filter(|g| !decaying(g)).count() <= 1;
    let period_step = crate::floquet::common_period(h).map(|r| {
        let mut e = vec![0; h.dim()];
        e[0] = r[0] as i64;
        GeneratingSequence::linear(e)
    });
    let members = combinations(&groups)?
        .into_iter()
        .map(|picks| {
            let operator = apply_choices(h, &groups, &picks);
            let sequence = match lead {
                None => period_step.clone(),
                Some(k) if single => groups[k].choices[picks[k]].sequence.clone(),
                Some(_) => None,
            };
            Member { operator, label: combo_label(&groups, &picks), sequence }
        })
        .collect();
    Ok(LimitOperatorFamily { dim: h.dim(), members, connected, notes })
}

#[derive(Debug, Clone, Serialize)]
pub struct TermCheck {
    pub shift: Vec<i64>,
    pub report: PartialLimitReport,
    pub matches: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MemberCheck {
    pub label: String,
    pub terms: Vec<TermCheck>,
    pub ok: bool,
}

/// Translates `h` along the member's generating sequence and compares every
/// coefficient with the member's on `window`.
pub fn verify_member(h: &LatticeOperator, member: &Member, window: &Window, j_max: u64, tol: f64) -> Result<MemberCheck> {
    let seq = member
        .sequence
        .as_ref()
        .ok_or_else(|| Error::Invalid(format!("member '{}' has no generating sequence", member.label)))?;
    let mut shifts: Vec<Vec<i64>> = h.terms().map(|(s, _)| s.clone()).collect();
    shifts.extend(member.operator.terms().map(|(s, _)| s.clone()));
    shifts.sort();
    shifts.dedup();
    let zero = Coefficient::zero();
    let mut terms = Vec::new();
    for s in shifts {
        let src = h.term(&s).unwrap_or(&zero);
        let target = member.operator.term(&s).unwrap_or(&zero);
        let report = partial_limit_along(src, seq, window, j_max, tol)?;
        let matches = report.converged && report.matches(target, tol);
        terms.push(TermCheck { shift: s, report, matches });
    }
    let ok = terms.iter().all(|t| t.matches);
    Ok(MemberCheck { label: member.label.clone(), terms, ok })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wiener::SlowlyOscillating;

    #[test]
    fn two_valued_family_has_four_checked_members() {
        let t = TwoValued::squares(0.0, 5.0).unwrap();
        let h = LatticeOperator::schrodinger(1, Coefficient::two_valued(t));
        let fam = enumerate_limit_ops(&h).unwrap();
        assert_eq!(fam.members.len(), 4);
        let labels: Vec<&str> = fam.members.iter().map(|m| m.label.as_str()).collect();
        assert_eq!(labels, ["interior of Λ", "gap of Λ", "left edge h", "right edge h"]);
        for m in &fam.members {
            let chk = verify_member(&h, m, &Window::cube(1, 8), 200, 1e-9).unwrap();
            assert!(chk.ok, "{}", m.label);
        }
    }

    #[test]
    fn slowly_oscillating_endpoints_are_checked() {
        let s = SlowlyOscillating::sin_sqrt(-1.0, 2.0).unwrap();
        let h = LatticeOperator::schrodinger(2, Coefficient::slowly_oscillating(s));
        let fam = enumerate_limit_ops(&h).unwrap();
        assert_eq!(fam.members.len(), 2);
        assert_eq!(fam.connected.len(), 1);
        for m in &fam.members {
            assert!(m.operator.is_constant());
            let chk = verify_member(&h, m, &Window::cube(2, 8), 200, 1e-9).unwrap();
            assert!(chk.ok, "{}: {:?}", m.label, chk.terms.iter().map(|t| t.report.oscillation).collect::<Vec<_>>());
        }
    }

    #[test]
    fn periodic_operator_is_its_own_limit() {
        let p = crate::wiener::Periodic::from_real(vec![2], &[0.0, 1.0]).unwrap();
        let h = LatticeOperator::schrodinger(1, Coefficient::periodic(p));
        let fam = enumerate_limit_ops(&h).unwrap();
        assert_eq!(fam.members.len(), 1);
        assert!(fam.members[0].operator.approx_eq_on(&h, &Window::cube(1, 10), 0.0));
    }

    #[test]
    fn compact_perturbation_vanishes() {
        let c = crate::wiener::Compact::from_real(1, 1, &[1.0, -2.0, 1.0]).unwrap();
        let h = LatticeOperator::schrodinger(1, Coefficient::compact(c));
        let fam = enumerate_limit_ops(&h).unwrap();
        assert_eq!(fam.members.len(), 1);
        assert!(fam.members[0].operator.approx_eq_on(&LatticeOperator::laplacian(1), &Window::cube(1, 5), 0.0));
        assert!(verify_member(&h, &fam.members[0], &Window::cube(1, 8), 200, 1e-12).unwrap().ok);
    }

    #[test]
    fn waveguide_family() {
        let p = AxisProfile::new(1, 0, 2, Coefficient::zero(), Coefficient::real(-5.0), Coefficient::zero(), vec![]).unwrap();
        let h = LatticeOperator::schrodinger(2, Coefficient::axis_profile(p));
        let fam = enumerate_limit_ops(&h).unwrap();
        assert_eq!(fam.members.len(), 3);
        for m in &fam.members {
            assert!(verify_member(&h, m, &Window::cube(2, 8), 200, 1e-12).unwrap().ok, "{}", m.label);
        }
        let guide = &fam.members[2].operator;
        assert!(!guide.is_constant());
        assert_eq!(guide.term(&[0, 0]).unwrap().eval(&[7, 1]).re, -1.0);
    }

    #[test]
    fn opaque_functions_are_rejected() {
        let c = Coefficient::function("opaque", std::sync::Arc::new(|x: &[i64]| (x[0] as f64).sin().into()));
        let h = LatticeOperator::schrodinger(1, c);
        assert!(matches!(enumerate_limit_ops(&h), Err(Error::NotClassifiable(_))));
    }
}
