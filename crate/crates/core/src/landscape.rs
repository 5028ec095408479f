//! Landscape-function baseline: `L u = 1`, the effective potential
//! `W = 1/u`, well-based eigenvalue estimates and the pointwise bound
//! `|ψ| ≤ λ·u·‖ψ‖_∞`.

use num_complex::Complex64;

use crate::domain::{DiscreteSpace, Geometry};
use crate::localization::relative_residual;
use crate::numerics::{factorize_shifted, SymMatrix};
use crate::{Error, Result};

/// Level factor for the 1D localization intervals, relative to the well depth.
pub const LEVEL_FACTOR: f64 = 1.875;

/// A local minimum of the effective potential.
#[derive(Debug, Clone, PartialEq)]
pub struct WellMinimum {
    /// Grid node carrying the discrete minimum.
    pub node: usize,
    /// Location refined by a parabola through the node and its axis neighbours.
    pub location: (f64, f64),
    /// `W` at the refined location.
    pub w: f64,
}

impl WellMinimum {
    /// Landscape value `u = 1/W` at the minimum.
    pub fn u(&self) -> f64 {
        1.0 / self.w
    }
}

/// Outcome of the pointwise landscape bound for one eigenpair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    /// `max_x |ψ(x)| − λ·u(x)·‖ψ‖_∞`; nonpositive when the bound holds exactly.
    pub max_violation: f64,
    /// Allowance for the discretization, `10·h²·λ·‖ψ‖_∞`.
    pub slack: f64,
    pub holds: bool,
}

/// Solves `L u = 1` with the Dirichlet operator `l`.
pub fn solve_landscape(l: &SymMatrix) -> Result<Vec<f64>> {
    let n = l.dim();
    if n == 0 {
        return Err(Error::invalid("landscape needs a nonempty operator"));
    }
    // The factorization is of z·I − L, so z = 0 yields −u.
    let f = factorize_shifted(Complex64::new(0.0, 0.0), l)?;
    let x = f.solve(&vec![Complex64::new(1.0, 0.0); n]);
    let u: Vec<f64> = x.iter().map(|z| -z.re).collect();
    if let Some(k) = u.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::invalid(format!(
            "landscape function is not positive at node {k} (u = {:e}); the discretization is too coarse or L is not positive definite",
            u[k]
        )));
    }
    Ok(u)
}

/// Local minima of `W = 1/u`, sorted by `W` ascending.
///
/// A node is a minimum when no neighbour has a smaller `W` and every
/// neighbour outside its plateau (the connected set of nodes sharing its
/// exact value) is strictly larger; a plateau reports its first node.
/// Dirichlet boundary neighbours count as `W = ∞`.
pub fn effective_potential_minima(space: &DiscreteSpace, u: &[f64]) -> Result<Vec<WellMinimum>> {
    if u.len() != space.len() {
        return Err(Error::LengthMismatch {
            expected: space.len(),
            got: u.len(),
        });
    }
    if let Some(k) = u.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::invalid(format!(
            "effective potential needs u > 0, node {k} has {:e}",
            u[k]
        )));
    }
    let w: Vec<f64> = u.iter().map(|v| 1.0 / v).collect();
    let mut seen = vec![false; w.len()];
    let mut out = Vec::new();
    for start in 0..w.len() {
        if seen[start] {
            continue;
        }
        let value = w[start];
        let mut plateau = vec![start];
        let mut stack = vec![start];
        seen[start] = true;
        let mut is_min = true;
        while let Some(k) = stack.pop() {
            for j in space.neighbors(k) {
                if w[j] == value {
                    if !seen[j] {
                        seen[j] = true;
                        plateau.push(j);
                        stack.push(j);
                    }
                } else if w[j] < value {
                    is_min = false;
                }
            }
        }
        if is_min {
            let node = *plateau.iter().min().expect("plateau holds its seed");
            let (location, wmin) = refine(space, &w, node);
            out.push(WellMinimum {
                node,
                location,
                w: wmin,
            });
        }
    }
    out.sort_by(|a, b| a.w.total_cmp(&b.w).then(a.node.cmp(&b.node)));
    Ok(out)
}

/// Parabolic vertex through a node and its two neighbours along each axis.
fn refine(space: &DiscreteSpace, w: &[f64], k: usize) -> ((f64, f64), f64) {
    let (x, y) = space.coords(k);
    let (i, j) = space.lattice(k);
    let h = space.h();
    let mut loc = [x, y];
    let mut value = w[k];
    let axes: &[(i64, i64)] = match space.geometry() {
        Geometry::Interval(..) => &[(1, 0)],
        _ => &[(1, 0), (0, 1)],
    };
    for (axis, &(di, dj)) in axes.iter().enumerate() {
        let (Some(lo), Some(hi)) = (
            space.index_of(i - di, j - dj),
            space.index_of(i + di, j + dj),
        ) else {
            continue;
        };
        let (wm, w0, wp) = (w[lo], w[k], w[hi]);
        let curv = wm - 2.0 * w0 + wp;
        if curv > 0.0 {
            let t = 0.5 * (wm - wp) / curv;
            loc[axis] += t * h;
            value += -0.125 * (wp - wm).powi(2) / curv;
        }
    }
    ((loc[0], loc[1]), value)
}

/// Well-based eigenvalue estimates `λ̃_k = (1 + d/4)·W_k`.
pub fn estimate_eigenvalues(minima: &[WellMinimum], d: usize) -> Result<Vec<f64>> {
    if !(d == 1 || d == 2) {
        return Err(Error::invalid(format!("dimension must be 1 or 2, got {d}")));
    }
    let factor = 1.0 + d as f64 / 4.0;
    Ok(minima.iter().map(|m| factor * m.w).collect())
}

/// Pointwise bound `|ψ| ≤ λ·u·‖ψ‖_∞` for an eigenpair of `l`.
///
/// Rejects pairs whose relative residual exceeds `1e-8`, since the bound
/// only holds for eigenvectors.
pub fn landscape_bound_check(
    space: &DiscreteSpace,
    l: &SymMatrix,
    u: &[f64],
    lambda: f64,
    psi: &[f64],
) -> Result<BoundCheck> {
    for (name, len) in [("u", u.len()), ("psi", psi.len())] {
        if len != space.len() {
            return Err(Error::invalid(format!(
                "{name} has length {len}, grid has {}",
                space.len()
            )));
        }
    }
    let peak = psi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Err(Error::ZeroVector);
    }
    let res = relative_residual(l, lambda, psi) / lambda.abs().max(1.0);
    if !(res <= 1e-8) {
        return Err(Error::invalid(format!(
            "bound check needs an eigenpair, relative residual is {res:e}"
        )));
    }
    let max_violation = psi
        .iter()
        .zip(u)
        .map(|(p, uu)| p.abs() - lambda * uu * peak)
        .fold(f64::NEG_INFINITY, f64::max);
    let slack = 10.0 * space.h().powi(2) * lambda.abs() * peak;
    Ok(BoundCheck {
        max_violation,
        slack,
        holds: max_violation <= slack,
    })
}

/// 1D localization interval: the connected component of
/// `{W ≤ factor·W_min}` around the minimum, with ends found by linear
/// interpolation of `u` between grid nodes (and the Dirichlet ends, where
/// `u = 0`).
pub fn level_set_interval(
    space: &DiscreteSpace,
    u: &[f64],
    minimum: &WellMinimum,
    factor: f64,
) -> Result<(f64, f64)> {
    let Geometry::Interval(lo, hi) = *space.geometry() else {
        return Err(Error::invalid("level-set intervals are only defined in 1D"));
    };
    if u.len() != space.len() {
        return Err(Error::LengthMismatch {
            expected: space.len(),
            got: u.len(),
        });
    }
    if !(factor >= 1.0) {
        return Err(Error::invalid(format!(
            "level factor must be at least 1, got {factor}"
        )));
    }
    let level = 1.0 / (factor * minimum.w);
    let n = u.len();
    let at = |k: isize| {
        if k < 0 || k as usize >= n {
            0.0
        } else {
            u[k as usize]
        }
    };
    let x_of = |k: isize| lo + (k + 1) as f64 * space.h();
    let crossing = |inside: isize, outside: isize| {
        let (ui, uo) = (at(inside), at(outside));
        let t = (ui - level) / (ui - uo);
        x_of(inside) + t * (x_of(outside) - x_of(inside))
    };
    let k0 = minimum.node as isize;
    let mut left = k0;
    while at(left - 1) >= level {
        left -= 1;
    }
    let mut right = k0;
    while at(right + 1) >= level {
        right += 1;
    }
    let a = crossing(left, left - 1).max(lo);
    let b = crossing(right, right + 1).min(hi);
    Ok((a, b))
}
