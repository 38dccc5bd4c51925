//! Boxes in ℤᴺ and finitely supported lattice functions.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A box `[lo_1, hi_1] × … × [lo_N, hi_N]` in ℤᴺ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    lo: Vec<i64>,
    hi: Vec<i64>,
}

impl Window {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch(lo.len(), hi.len()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return Err(Error::Invalid(format!("empty window {lo:?}..{hi:?}")));
        }
        Ok(Window { lo, hi })
    }

    /// The cube `[-radius, radius]ᴺ`.
    pub fn cube(dim: usize, radius: i64) -> Self {
        Window { lo: vec![-radius; dim], hi: vec![radius; dim] }
    }

    /// The cube of the given radius around `centre`.
    pub fn around(centre: &[i64], radius: i64) -> Self {
        Window {
            lo: centre.iter().map(|c| c - radius).collect(),
            hi: centre.iter().map(|c| c + radius).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[i64] {
        &self.lo
    }

    pub fn hi(&self) -> &[i64] {
        &self.hi
    }

    pub fn side(&self, axis: usize) -> usize {
        (self.hi[axis] - self.lo[axis] + 1) as usize
    }

    pub fn len(&self) -> usize {
        (0..self.dim()).map(|a| self.side(a)).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        x.len() == self.dim() && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| a <= v && v <= b)
    }

    /// Shrinks the window by `margin` on every side.
    pub fn shrink(&self, margin: i64) -> Option<Window> {
        let lo: Vec<i64> = self.lo.iter().map(|v| v + margin).collect();
        let hi: Vec<i64> = self.hi.iter().map(|v| v - margin).collect();
        Window::new(lo, hi).ok()
    }

    /// Lexicographic index of `x` (first axis slowest).
    pub fn index_of(&self, x: &[i64]) -> Option<usize> {
        if !self.contains(x) {
            return None;
        }
        let mut idx = 0usize;
        for axis in 0..self.dim() {
            idx = idx * self.side(axis) + (x[axis] - self.lo[axis]) as usize;
        }
        Some(idx)
    }

    pub fn point(&self, mut idx: usize) -> Vec<i64> {
        let mut x = vec![0; self.dim()];
        for axis in (0..self.dim()).rev() {
            let side = self.side(axis);
            x[axis] = self.lo[axis] + (idx % side) as i64;
            idx /= side;
        }
        x
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }
}

/// A finitely supported function ℤᴺ → ℂ.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LatticeFunction {
    dim: usize,
    values: BTreeMap<Vec<i64>, Complex64>,
}

impl LatticeFunction {
    pub fn zero(dim: usize) -> Self {
        LatticeFunction { dim, values: BTreeMap::new() }
    }

    pub fn delta(x: &[i64]) -> Self {
        let mut f = Self::zero(x.len());
        f.set(x.to_vec(), Complex64::new(1.0, 0.0));
        f
    }

    /// The function equal to `value` on every point of `window`.
    pub fn constant_on(window: &Window, value: Complex64) -> Self {
        let mut f = Self::zero(window.dim());
        for x in window.points() {
            f.set(x, value);
        }
        f
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn set(&mut self, x: Vec<i64>, value: Complex64) {
        debug_assert_eq!(x.len(), self.dim);
        self.values.insert(x, value);
    }

    pub fn add_at(&mut self, x: Vec<i64>, value: Complex64) {
        *self.values.entry(x).or_insert(Complex64::new(0.0, 0.0)) += value;
    }

    pub fn get(&self, x: &[i64]) -> Complex64 {
        self.values.get(x).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<i64>, &Complex64)> {
        self.values.iter()
    }

    /// Points carrying a nonzero value.
    pub fn support(&self) -> impl Iterator<Item = &Vec<i64>> {
        self.values.iter().filter(|(_, v)| v.norm_sqr() > 0.0).map(|(k, _)| k)
    }

    /// l² inner product `Σ u(x) conj(v(x))`.
    pub fn inner(&self, other: &LatticeFunction) -> Complex64 {
        self.values.iter().map(|(x, u)| u * other.get(x).conj()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.values.values().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max_x |self(x) − other(x)|` over the union of both supports.
    pub fn max_abs_diff(&self, other: &LatticeFunction) -> f64 {
        let a = self.values.iter().map(|(x, v)| (v - other.get(x)).norm());
        let b = other.values.iter().map(|(x, v)| (v - self.get(x)).norm());
        a.chain(b).fold(0.0, f64::max)
    }

    /// Restriction to a window.
    pub fn restrict(&self, window: &Window) -> LatticeFunction {
        LatticeFunction {
            dim: self.dim,
            values: self.values.iter().filter(|(x, _)| window.contains(x)).map(|(x, v)| (x.clone(), *v)).collect(),
        }
    }
}

pub(crate) fn add_vec(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub(crate) fn neg_vec(a: &[i64]) -> Vec<i64> {
    a.iter().map(|x| -x).collect()
}

pub(crate) fn unit(dim: usize, axis: usize, sign: i64) -> Vec<i64> {
    let mut e = vec![0; dim];
    e[axis] = sign;
    e
}
