use num_complex::Complex64;

use super::grid::{DiscreteSpace, Rect};
use crate::{Error, Result};

/// Piecewise-constant potential on `[x_0, x_K]` with `K` pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePotential {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewisePotential {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 || values.len() + 1 != breakpoints.len() {
            return Err(Error::invalid(format!(
                "{} breakpoints need {} values, got {}",
                breakpoints.len(),
                breakpoints.len().saturating_sub(1),
                values.len()
            )));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("breakpoints must be strictly increasing"));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::invalid(format!(
                "potential values must be finite and nonnegative, got {v}"
            )));
        }
        Ok(PiecewisePotential {
            breakpoints,
            values,
        })
    }

    /// `K` equal pieces on `[lo, hi]`.
    pub fn uniform(lo: f64, hi: f64, values: Vec<f64>) -> Result<Self> {
        let k = values.len();
        let bps = (0..=k)
            .map(|j| lo + (hi - lo) * j as f64 / k as f64)
            .collect();
        Self::new(bps, values)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn pieces(&self) -> usize {
        self.values.len()
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.breakpoints[0], *self.breakpoints.last().unwrap())
    }

    pub fn piece_bounds(&self, k: usize) -> (f64, f64) {
        (self.breakpoints[k], self.breakpoints[k + 1])
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Piece values with `i·s` added on the listed pieces.
    pub fn shifted(&self, s: f64, region_pieces: &[usize]) -> Vec<Complex64> {
        self.values
            .iter()
            .enumerate()
            .map(|(k, &v)| Complex64::new(v, if region_pieces.contains(&k) { s } else { 0.0 }))
            .collect()
    }

    /// Value at `x`; a node sitting on an interior breakpoint gets the
    /// average of the two adjacent pieces.
    pub fn value_at(&self, x: f64) -> f64 {
        let (lo, hi) = self.interval();
        let tol = 1e-12 * (hi - lo);
        for (k, &bp) in self
            .breakpoints
            .iter()
            .enumerate()
            .skip(1)
            .take(self.pieces() - 1)
        {
            if (x - bp).abs() <= tol {
                return 0.5 * (self.values[k - 1] + self.values[k]);
            }
        }
        let k = self.breakpoints[1..]
            .partition_point(|&bp| bp <= x)
            .min(self.pieces() - 1);
        self.values[k]
    }

    pub fn sample(&self, space: &DiscreteSpace) -> Vec<f64> {
        (0..space.len())
            .map(|k| self.value_at(space.x(k)))
            .collect()
    }
}

/// 2D potential: a constant background with rectangular patches; later
/// patches override earlier ones.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RectPotential {
    pub background: f64,
    pub patches: Vec<(Rect, f64)>,
}

impl RectPotential {
    pub fn sample(&self, space: &DiscreteSpace) -> Vec<f64> {
        (0..space.len())
            .map(|k| {
                let (x, y) = space.coords(k);
                self.patches
                    .iter()
                    .rev()
                    .find(|(r, _)| r.contains(x, y, 1e-12))
                    .map_or(self.background, |(_, v)| *v)
            })
            .collect()
    }
}
