//! Closed real intervals and finite unions of them.
//!
//! Spectra of self-adjoint operators in this crate are always closed sets
//! made of finitely many intervals (bands). [`SpectrumSet`] keeps them in
//! normal form: sorted, pairwise disjoint, with gaps wider than `merge_tol`.

use serde::de::{Deserialize, Deserializer};
use serde::ser::{Serialize, SerializeSeq, Serializer};

use crate::error::{Error, Result};

/// Default merge tolerance in energy units.
pub const DEFAULT_MERGE_TOL: f64 = 1e-9;

/// A closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidInterval { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn distance_to(&self, x: f64) -> f64 {
        if x < self.lo {
            self.lo - x
        } else if x > self.hi {
            x - self.hi
        } else {
            0.0
        }
    }

    pub fn translate(&self, c: f64) -> Self {
        Interval { lo: self.lo + c, hi: self.hi + c }
    }

    /// `{x + y : x ∈ self, y ∈ other}`.
    pub fn sum(&self, other: &Interval) -> Self {
        Interval { lo: self.lo + other.lo, hi: self.hi + other.hi }
    }
}

/// A normalized finite union of disjoint closed intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSet {
    components: Vec<Interval>,
    merge_tol: f64,
}

impl SpectrumSet {
    pub fn empty() -> Self {
        SpectrumSet { components: Vec::new(), merge_tol: DEFAULT_MERGE_TOL }
    }

    /// Normalizes an arbitrary collection of intervals into a sorted disjoint union.
    ///
    /// Neighbouring intervals whose gap is at most `merge_tol` are fused.
    pub fn normalize<I>(intervals: I, merge_tol: f64) -> Result<Self>
    where
        I: IntoIterator<Item = Interval>,
    {
        if !(merge_tol >= 0.0) {
            return Err(Error::Invalid(format!("merge_tol must be nonnegative, got {merge_tol}")));
        }
        let mut items: Vec<Interval> = Vec::new();
        for iv in intervals {
            // re-validate: an Interval may have been built from a copy of invalid fields
            items.push(Interval::new(iv.lo, iv.hi)?);
        }
        items.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(a.hi.total_cmp(&b.hi)));
        let mut components: Vec<Interval> = Vec::with_capacity(items.len());
        for iv in items {
            match components.last_mut() {
                Some(last) if iv.lo - last.hi <= merge_tol => {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                    }
                }
                _ => components.push(iv),
            }
        }
        Ok(SpectrumSet { components, merge_tol })
    }

    /// Builds a set from `(lo, hi)` pairs with the default tolerance.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let ivs = pairs.iter().map(|&(lo, hi)| Interval::new(lo, hi)).collect::<Result<Vec<_>>>()?;
        Self::normalize(ivs, DEFAULT_MERGE_TOL)
    }

    /// Builds a set from `(lo, hi)` pairs, merging only true overlaps.
    pub fn exact(pairs: &[(f64, f64)]) -> Result<Self> {
        let ivs = pairs.iter().map(|&(lo, hi)| Interval::new(lo, hi)).collect::<Result<Vec<_>>>()?;
        Self::normalize(ivs, 0.0)
    }

    pub fn single(iv: Interval) -> Self {
        SpectrumSet { components: vec![iv], merge_tol: DEFAULT_MERGE_TOL }
    }

    pub fn components(&self) -> &[Interval] {
        &self.components
    }

    pub fn merge_tol(&self) -> f64 {
        self.merge_tol
    }

    pub fn with_merge_tol(&self, merge_tol: f64) -> Result<Self> {
        Self::normalize(self.components.iter().copied(), merge_tol)
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn inf(&self) -> Option<f64> {
        self.components.first().map(|c| c.lo)
    }

    pub fn sup(&self) -> Option<f64> {
        self.components.last().map(|c| c.hi)
    }

    pub fn hull(&self) -> Option<Interval> {
        Some(Interval { lo: self.inf()?, hi: self.sup()? })
    }

    pub fn to_pairs(&self) -> Vec<(f64, f64)> {
        self.components.iter().map(|c| (c.lo, c.hi)).collect()
    }

    /// Union with another set; the larger of the two merge tolerances is kept.
    pub fn union(&self, other: &SpectrumSet) -> SpectrumSet {
        let tol = self.merge_tol.max(other.merge_tol);
        Self::normalize(self.components.iter().chain(other.components.iter()).copied(), tol)
            .expect("components of normalized sets are valid")
    }

    pub fn union_all<'a, I>(sets: I, merge_tol: f64) -> SpectrumSet
    where
        I: IntoIterator<Item = &'a SpectrumSet>,
    {
        let all: Vec<Interval> = sets.into_iter().flat_map(|s| s.components.iter().copied()).collect();
        Self::normalize(all, merge_tol).expect("components of normalized sets are valid")
    }

    /// Minkowski sum `{s + j : s ∈ self, j ∈ interval}`.
    pub fn minkowski_sum(&self, interval: &Interval) -> SpectrumSet {
        Self::normalize(self.components.iter().map(|c| c.sum(interval)), self.merge_tol)
            .expect("sums of valid intervals are valid")
    }

    pub fn translate(&self, c: f64) -> SpectrumSet {
        self.minkowski_sum(&Interval::point(c))
    }

    /// Distance from `x` to the set; `+∞` for the empty set.
    pub fn distance_to(&self, x: f64) -> f64 {
        // components are sorted: locate the first component with hi >= x
        let idx = self.components.partition_point(|c| c.hi < x);
        let mut best = f64::INFINITY;
        if idx < self.components.len() {
            best = best.min(self.components[idx].distance_to(x));
        }
        if idx > 0 {
            best = best.min(self.components[idx - 1].distance_to(x));
        }
        best
    }

    /// True iff `dist(x, self) <= tol`.
    pub fn contains(&self, x: f64, tol: f64) -> bool {
        self.distance_to(x) <= tol
    }

    /// True iff every point of `other` lies within `tol` of `self`.
    pub fn contains_set(&self, other: &SpectrumSet, tol: f64) -> bool {
        directed_hausdorff(other, self) <= tol
    }

    /// Gaps between consecutive components as open intervals `(hi_k, lo_{k+1})`.
    pub fn gaps(&self) -> Vec<(f64, f64)> {
        self.components.windows(2).map(|w| (w[0].hi, w[1].lo)).collect()
    }

    /// Hausdorff distance between two nonempty sets.
    pub fn hausdorff_distance(&self, other: &SpectrumSet) -> Result<f64> {
        if self.is_empty() || other.is_empty() {
            return Err(Error::EmptySpectrum);
        }
        Ok(directed_hausdorff(self, other).max(directed_hausdorff(other, self)))
    }

    /// Sample points covering every component with spacing at most `spacing`.
    pub fn probe_points(&self, spacing: f64) -> Vec<f64> {
        let mut out = Vec::new();
        for c in &self.components {
            let steps = ((c.width() / spacing).ceil() as usize).max(1);
            if c.width() == 0.0 {
                out.push(c.lo);
                continue;
            }
            for k in 0..=steps {
                out.push(c.lo + c.width() * k as f64 / steps as f64);
            }
        }
        out
    }
}

/// `sup_{x ∈ a} dist(x, b)`.
fn directed_hausdorff(a: &SpectrumSet, b: &SpectrumSet) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    if b.is_empty() {
        return f64::INFINITY;
    }
    let mut worst: f64 = 0.0;
    for c in &a.components {
        worst = worst.max(b.distance_to(c.lo)).max(b.distance_to(c.hi));
    }
    // inside a component of `a` the distance to `b` peaks at gap midpoints of `b`
    for (glo, ghi) in b.gaps() {
        let mid = 0.5 * (glo + ghi);
        if a.distance_to(mid) == 0.0 {
            worst = worst.max(0.5 * (ghi - glo));
        }
    }
    worst
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        [self.lo, self.hi].serialize(serializer)
    }
}

impl Serialize for SpectrumSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.components.len()))?;
        for c in &self.components {
            seq.serialize_element(&[c.lo, c.hi])?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for SpectrumSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let pairs: Vec<[f64; 2]> = Vec::deserialize(deserializer)?;
        let ivs = pairs
            .iter()
            .map(|p| Interval::new(p[0], p[1]))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        SpectrumSet::normalize(ivs, DEFAULT_MERGE_TOL).map_err(serde::de::Error::custom)
    }
}
