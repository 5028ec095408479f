use super::grid::{DiscreteSpace, Rect};
use super::potential::PiecewisePotential;
use crate::{Error, Result};

/// The subdomain `R`.
#[derive(Debug, Clone, PartialEq)]
pub enum RegionSpec {
    /// Union of half-open intervals `[lo, hi)` (1D).
    Intervals(Vec<(f64, f64)>),
    /// Union of closed rectangles (2D).
    Rects(Vec<Rect>),
}

impl RegionSpec {
    /// Region made of the listed (0-based) pieces of a 1D potential.
    pub fn from_pieces(potential: &PiecewisePotential, pieces: &[usize]) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::invalid("region needs at least one piece"));
        }
        let mut out = Vec::with_capacity(pieces.len());
        for &k in pieces {
            if k >= potential.pieces() {
                return Err(Error::invalid(format!(
                    "region piece {} out of range 1..={}",
                    k + 1,
                    potential.pieces()
                )));
            }
            out.push(potential.piece_bounds(k));
        }
        Ok(RegionSpec::Intervals(out))
    }
}

/// The discrete `χ_R`: membership of each node in `R` and the fraction of
/// its grid cell lying in `R`.
///
/// Membership follows the tie rule of [`region_mask`]; the operator and the
/// localization measures use the cell fractions, which are `1/2` on a
/// straight piece of `∂R`. A full node on the boundary would move the
/// discrete region by `h/2` and make shifted eigenvalues first-order accurate.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorVector {
    values: Vec<bool>,
    weights: Vec<f64>,
}

impl IndicatorVector {
    /// A 0/1 indicator whose weights equal its membership.
    pub fn new(values: Vec<bool>) -> Result<Self> {
        let weights = values.iter().map(|&v| if v { 1.0 } else { 0.0 }).collect();
        Self::with_weights(values, weights)
    }

    /// Membership with separate cell fractions in `[0, 1]`.
    pub fn with_weights(values: Vec<bool>, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != values.len() {
            return Err(Error::LengthMismatch {
                expected: values.len(),
                got: weights.len(),
            });
        }
        if let Some(w) = weights.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(Error::invalid(format!("cell fraction {w} outside [0, 1]")));
        }
        let count = values.iter().filter(|&&v| v).count();
        if count == 0 || weights.iter().all(|&w| w == 0.0) {
            return Err(Error::invalid("region contains no grid nodes"));
        }
        if count == values.len() || weights.iter().all(|&w| w == 1.0) {
            return Err(Error::invalid(
                "region covers every grid node; R must be a proper subset",
            ));
        }
        Ok(IndicatorVector { values, weights })
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.values
    }

    /// Fraction of each node's cell inside `R`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn count(&self) -> usize {
        self.values.iter().filter(|&&v| v).count()
    }

    pub fn complement(&self) -> IndicatorVector {
        IndicatorVector {
            values: self.values.iter().map(|v| !v).collect(),
            weights: self.weights.iter().map(|w| 1.0 - w).collect(),
        }
    }
}

/// Total length of the union of intervals.
fn union_length(mut ivs: Vec<(f64, f64)>) -> f64 {
    ivs.retain(|(lo, hi)| hi > lo);
    ivs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut total = 0.0;
    let mut cur: Option<(f64, f64)> = None;
    for (lo, hi) in ivs {
        match cur {
            Some((clo, chi)) if lo <= chi => cur = Some((clo, chi.max(hi))),
            Some((clo, chi)) => {
                total += chi - clo;
                cur = Some((lo, hi));
            }
            None => cur = Some((lo, hi)),
        }
    }
    total + cur.map_or(0.0, |(lo, hi)| hi - lo)
}

/// Area of the union of rectangles `(x0, x1, y0, y1)`, by slabs between
/// consecutive x-coordinates.
fn union_area(rects: &[(f64, f64, f64, f64)]) -> f64 {
    let mut xs: Vec<f64> = rects.iter().flat_map(|r| [r.0, r.1]).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs.windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            let ys = rects
                .iter()
                .filter(|r| r.0 <= mid && mid <= r.1)
                .map(|r| (r.2, r.3))
                .collect();
            (w[1] - w[0]) * union_length(ys)
        })
        .sum()
}

/// Rounds fractions that differ from 0, 1/2 or 1 only by roundoff.
fn snap(f: f64) -> f64 {
    let q = (f * 4.0).round() / 4.0;
    if (f - q).abs() <= 1e-9 {
        q
    } else {
        f.clamp(0.0, 1.0)
    }
}

/// Marks the nodes of `space` lying in `region`.
///
/// 1D intervals are half-open, so a node on a breakpoint belongs to the
/// piece on its right. 2D rectangles are closed. Weights are the fraction of
/// the cell `[x ± h/2]` (times `[y ± h/2]` in 2D) inside `R`.
pub fn region_mask(space: &DiscreteSpace, region: &RegionSpec) -> Result<IndicatorVector> {
    let h = space.h();
    let tol = 1e-9 * h;
    let half = 0.5 * h;
    let (values, weights) = match region {
        RegionSpec::Intervals(ivs) => {
            if space.dim() != 1 {
                return Err(Error::invalid("interval regions need a 1D grid"));
            }
            (0..space.len())
                .map(|k| {
                    let x = space.x(k);
                    let inside = ivs.iter().any(|&(lo, hi)| x >= lo - tol && x < hi - tol);
                    let clipped = ivs
                        .iter()
                        .map(|&(lo, hi)| (lo.max(x - half), hi.min(x + half)))
                        .collect();
                    (inside, snap(union_length(clipped) / h))
                })
                .unzip()
        }
        RegionSpec::Rects(rects) => {
            if space.dim() != 2 {
                return Err(Error::invalid("rectangle regions need a 2D grid"));
            }
            (0..space.len())
                .map(|k| {
                    let (x, y) = space.coords(k);
                    let inside = rects.iter().any(|r| r.contains(x, y, tol));
                    let clipped: Vec<_> = rects
                        .iter()
                        .map(|r| {
                            (
                                r.x0.max(x - half),
                                r.x1.min(x + half),
                                r.y0.max(y - half),
                                r.y1.min(y + half),
                            )
                        })
                        .filter(|c| c.1 > c.0 && c.3 > c.2)
                        .collect();
                    (inside, snap(union_area(&clipped) / (h * h)))
                })
                .unzip()
        }
    };
    IndicatorVector::with_weights(values, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_grid_1d, build_grid_2d, Rect, RectUnionDomain, ThreeBulb};

    #[test]
    fn eighth_grid_piece_mask() {
        let g = build_grid_1d(0.0, 1.0, 0.125).unwrap();
        let m = region_mask(&g, &RegionSpec::Intervals(vec![(0.5, 0.75)])).unwrap();
        let marked: Vec<f64> = (0..g.len())
            .filter(|&k| m.as_slice()[k])
            .map(|k| g.x(k))
            .collect();
        assert_eq!(marked, vec![0.5, 0.625]);
    }

    #[test]
    fn full_region_is_rejected() {
        let g = build_grid_1d(0.0, 1.0, 0.125).unwrap();
        assert!(region_mask(&g, &RegionSpec::Intervals(vec![(0.0, 1.0)])).is_err());
    }

    #[test]
    fn middle_bulb_fraction() {
        let h = 0.1;
        let layout = ThreeBulb::default();
        let g = build_grid_2d(&layout.domain().unwrap(), h).unwrap();
        let m = region_mask(&g, &RegionSpec::Rects(vec![layout.middle().unwrap()])).unwrap();
        // Interior of the 2x2 bulb plus the interface segments it closes over.
        let expected = 19 * 19 + 2 * 9;
        assert_eq!(m.count(), expected);
        let frac = m.count() as f64 / g.len() as f64;
        assert!((frac - 4.0 / 33.0).abs() < 0.01, "fraction {frac}");
    }

    #[test]
    fn boundary_nodes_carry_half_weight() {
        let g = build_grid_1d(0.0, 1.0, 0.125).unwrap();
        let m = region_mask(&g, &RegionSpec::Intervals(vec![(0.5, 0.75)])).unwrap();
        let w: Vec<f64> = m.weights().to_vec();
        assert_eq!(w, vec![0.0, 0.0, 0.0, 0.5, 1.0, 0.5, 0.0]);
        // Quadrature of the indicator is exact.
        let len: f64 = w.iter().sum::<f64>() * g.h();
        assert!((len - 0.25).abs() < 1e-15);
        let c = m.complement();
        assert_eq!(c.weights()[3], 0.5);
        assert!(!c.as_slice()[3]);
    }

    #[test]
    fn bulb_weights_on_bridge_openings() {
        let h = 0.1;
        let layout = ThreeBulb::default();
        let g = build_grid_2d(&layout.domain().unwrap(), h).unwrap();
        let m = region_mask(&g, &RegionSpec::Rects(vec![layout.middle().unwrap()])).unwrap();
        let mut halves = 0;
        for k in 0..g.len() {
            let (x, _) = g.coords(k);
            let w = m.weights()[k];
            if (x - 6.0).abs() < 1e-9 || (x - 8.0).abs() < 1e-9 {
                assert_eq!(w, 0.5);
                halves += 1;
            } else {
                assert!(w == 0.0 || w == 1.0);
            }
        }
        assert_eq!(halves, 2 * 9);
        let area = m.weights().iter().sum::<f64>() * h * h;
        // Bulb interior nodes plus the two openings, each half a cell wide.
        assert!((area - (19.0 * 19.0 + 9.0) * h * h).abs() < 1e-12, "{area}");
    }

    #[test]
    fn overlapping_rectangles_are_not_double_counted() {
        let d = RectUnionDomain::new(vec![Rect::new(0.0, 4.0, 0.0, 1.0).unwrap()]).unwrap();
        let g = build_grid_2d(&d, 0.5).unwrap();
        let r = RegionSpec::Rects(vec![
            Rect::new(0.0, 2.0, 0.0, 1.0).unwrap(),
            Rect::new(1.0, 2.0, 0.0, 1.0).unwrap(),
        ]);
        let m = region_mask(&g, &r).unwrap();
        assert!(m.weights().iter().all(|w| (0.0..=1.0).contains(w)));
        // Cells cover [0.25, 3.75] x [0.25, 0.75]; R meets them in [0.25, 2].
        let area = m.weights().iter().sum::<f64>() * 0.25;
        assert!((area - 1.75 * 0.5).abs() < 1e-12, "{area}");
    }

    #[test]
    fn mask_is_deterministic() {
        let g = build_grid_1d(0.0, 1.0, 1e-3).unwrap();
        let r = RegionSpec::Intervals(vec![(0.25, 0.5)]);
        assert_eq!(region_mask(&g, &r).unwrap(), region_mask(&g, &r).unwrap());
    }
}
