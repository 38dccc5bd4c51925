//! Uniform grids on the torus `[0, 2π)ᴺ` and local extremum refinement.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Uniform grid with `θ_j = 2πk / n_j`, `k = 0..n_j`, lexicographic point order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorusGrid {
    resolution: Vec<usize>,
}

impl TorusGrid {
    pub fn new(resolution: Vec<usize>) -> Result<Self> {
        if resolution.is_empty() {
            return Err(Error::Invalid("torus grid needs dimension >= 1".into()));
        }
        if let Some(&n) = resolution.iter().find(|&&n| n < 2) {
            return Err(Error::Invalid(format!("torus grid resolution must be >= 2, got {n}")));
        }
        Ok(TorusGrid { resolution })
    }

    pub fn uniform(dim: usize, n: usize) -> Result<Self> {
        Self::new(vec![n; dim])
    }

    /// Default resolution for scalar symbols: 2048 per axis for N ≤ 2, 128 for N = 3.
    pub fn default_for(dim: usize) -> Self {
        let n = match dim {
            0..=2 => 2048,
            3 => 128,
            _ => 16,
        };
        TorusGrid { resolution: vec![n; dim.max(1)] }
    }

    pub fn dim(&self) -> usize {
        self.resolution.len()
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    pub fn len(&self) -> usize {
        self.resolution.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        2.0 * PI / self.resolution[axis] as f64
    }

    /// Coordinates of the point with lexicographic index `idx`.
    pub fn point(&self, mut idx: usize) -> Vec<f64> {
        let mut theta = vec![0.0; self.dim()];
        for axis in (0..self.dim()).rev() {
            let n = self.resolution[axis];
            theta[axis] = 2.0 * PI * (idx % n) as f64 / n as f64;
            idx /= n;
        }
        theta
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }
}

/// Complex symbol samples tied to the grid they were taken on.
#[derive(Debug, Clone)]
pub struct PointCloud {
    samples: Vec<Complex64>,
    grid: TorusGrid,
}

impl PointCloud {
    pub fn new(samples: Vec<Complex64>, grid: TorusGrid) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::Invalid(format!(
                "point cloud has {} samples for a grid of {} points",
                samples.len(),
                grid.len()
            )));
        }
        Ok(PointCloud { samples, grid })
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section minimization of `f` on `[a, b]` down to bracket width `x_tol`.
pub fn golden_section_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, x_tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iter = 0;
    while (b - a).abs() > x_tol && iter < 200 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        iter += 1;
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Refines a grid extremum of `f` by golden-section search along each
/// coordinate line, within `half_width[j]` of the starting point.
///
/// Sweeps repeat until the value changes by less than `tol`. Returns the
/// refined point and value; the value never gets worse than at `start`.
pub fn refine_extremum<F>(f: F, start: &[f64], half_width: &[f64], maximize: bool, tol: f64) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
{
    let sign = if maximize { -1.0 } else { 1.0 };
    let eval = |p: &[f64]| sign * f(p);
    let mut best = start.to_vec();
    let mut best_val = eval(&best);
    let x_tol = 1e-13;
    for _sweep in 0..30 {
        let before = best_val;
        for axis in 0..best.len() {
            let centre = best[axis];
            let mut probe = best.clone();
            let (s, v) = golden_section_min(
                |s| {
                    probe[axis] = s;
                    eval(&probe)
                },
                centre - half_width[axis],
                centre + half_width[axis],
                x_tol,
            );
            if v < best_val {
                best[axis] = s;
                best_val = v;
            }
        }
        if (before - best_val).abs() < tol {
            break;
        }
    }
    (best, sign * best_val)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_points_are_lexicographic() {
        let g = TorusGrid::new(vec![2, 4]).unwrap();
        assert_eq!(g.len(), 8);
        assert_eq!(g.point(0), vec![0.0, 0.0]);
        assert_eq!(g.point(1), vec![0.0, PI / 2.0]);
        assert_eq!(g.point(4), vec![PI, 0.0]);
        assert_eq!(g.points().count(), 8);
    }

    #[test]
    fn grid_rejects_coarse_resolution() {
        assert!(TorusGrid::new(vec![1]).is_err());
        assert!(TorusGrid::new(vec![]).is_err());
    }

    #[test]
    fn cloud_size_must_match_grid() {
        let g = TorusGrid::uniform(1, 4).unwrap();
        assert!(PointCloud::new(vec![Complex64::new(0.0, 0.0); 3], g.clone()).is_err());
        assert!(PointCloud::new(vec![Complex64::new(0.0, 0.0); 4], g).is_ok());
    }

    #[test]
    fn golden_section_finds_parabola_vertex() {
        let (x, v) = golden_section_min(|x| (x - 0.3).powi(2) + 1.0, -1.0, 2.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-6);
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn refine_recovers_off_grid_extremum() {
        // cos(θ₁ − 0.01) + cos(θ₂ + 0.02) has its max 2 off the grid
        let f = |p: &[f64]| (p[0] - 0.01).cos() + (p[1] + 0.02).cos();
        let (p, v) = refine_extremum(f, &[0.0, 0.0], &[0.1, 0.1], true, 1e-14);
        assert!((v - 2.0).abs() < 1e-12);
        assert!((p[0] - 0.01).abs() < 1e-5);
    }
}
