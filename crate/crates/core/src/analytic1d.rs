//! Semi-analytic eigensolver for 1D piecewise-constant potentials with
//! Dirichlet ends.
//!
//! On a piece with constant value `q` the solution of `-ψ'' + qψ = μψ` is
//! propagated by the transfer matrix `[[C, S], [-ζS, C]]` with `ζ = μ − q`,
//! `C = cos(√ζ ℓ)` and `S = sin(√ζ ℓ)/√ζ`. Both are even in `√ζ`, so the
//! characteristic function `D(μ) = ψ(x_K)` (with `ψ(x_0) = 0`,
//! `ψ'(x_0) = 1`) is entire and branch-free.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::contour::{contains, SearchRegion};
use crate::domain::PiecewisePotential;
use crate::{Error, Result};

const SERIES_LIMIT: f64 = 1.0;
const SERIES_TERMS: usize = 24;

/// Piecewise-constant potential with complex values.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPotential {
    pub breakpoints: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl ComplexPotential {
    pub fn real(p: &PiecewisePotential) -> Self {
        ComplexPotential {
            breakpoints: p.breakpoints().to_vec(),
            values: p.values().iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    /// `V + i·s·χ_R` with `R` the union of the listed pieces.
    pub fn shifted(p: &PiecewisePotential, s: f64, region_pieces: &[usize]) -> Self {
        ComplexPotential {
            breakpoints: p.breakpoints().to_vec(),
            values: p.shifted(s, region_pieces),
        }
    }

    fn len(&self, k: usize) -> f64 {
        self.breakpoints[k + 1] - self.breakpoints[k]
    }

    fn pieces(&self) -> usize {
        self.values.len()
    }
}

/// `D(μ)` and `∂D/∂μ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicValue {
    pub d: Complex64,
    pub dprime: Complex64,
}

/// `(C, S, ∂C/∂ζ, ∂S/∂ζ)` at `(ζ, ℓ)`.
fn piece_functions(zeta: Complex64, l: f64) -> (Complex64, Complex64, Complex64, Complex64) {
    let u = zeta * l * l;
    if u.norm() < SERIES_LIMIT {
        let mut c = Complex64::new(0.0, 0.0);
        let mut s = Complex64::new(0.0, 0.0);
        let mut ds = Complex64::new(0.0, 0.0);
        // term_n = (−u)^n / (2n)!, next divides by (2n+1)
        let mut pow = Complex64::new(1.0, 0.0);
        let mut fact = 1.0;
        for n in 0..SERIES_TERMS {
            c += pow / fact;
            let fact_odd = fact * (2 * n + 1) as f64;
            s += pow / fact_odd;
            if n >= 1 {
                // n (−1)^n u^(n−1) / (2n+1)! = −n (−u)^(n−1)/(2n+1)!
                ds += -(n as f64) * (pow / (-u)) / fact_odd;
            }
            fact = fact_odd * (2 * n + 2) as f64;
            pow *= -u;
        }
        if u.norm() == 0.0 {
            ds = Complex64::new(-1.0 / 6.0, 0.0);
        }
        let s = s * l;
        let ds = ds * l * l * l;
        (c, s, -0.5 * l * s, ds)
    } else {
        let w = zeta.sqrt();
        let c = (w * l).cos();
        let s = (w * l).sin() / w;
        (c, s, -0.5 * l * s, (l * c - s) / (2.0 * zeta))
    }
}

/// Propagates `(ψ, ψ')` and its μ-derivative, rescaling after each piece.
/// Returns `(D, D')` divided by `exp(log_scale)`.
fn propagate(p: &ComplexPotential, mu: Complex64) -> (Complex64, Complex64, f64) {
    let mut y = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
    let mut dy = [Complex64::new(0.0, 0.0); 2];
    let mut log_scale = 0.0;
    for k in 0..p.pieces() {
        let zeta = mu - p.values[k];
        let (c, s, dc, ds) = piece_functions(zeta, p.len(k));
        let m = [[c, s], [-zeta * s, c]];
        let dm = [[dc, ds], [-s - zeta * ds, dc]];
        let ny = [
            m[0][0] * y[0] + m[0][1] * y[1],
            m[1][0] * y[0] + m[1][1] * y[1],
        ];
        let ndy = [
            m[0][0] * dy[0] + m[0][1] * dy[1] + dm[0][0] * y[0] + dm[0][1] * y[1],
            m[1][0] * dy[0] + m[1][1] * dy[1] + dm[1][0] * y[0] + dm[1][1] * y[1],
        ];
        let big = ny.iter().chain(&ndy).map(|z| z.norm()).fold(0.0, f64::max);
        if big > 0.0 && big.is_finite() {
            y = [ny[0] / big, ny[1] / big];
            dy = [ndy[0] / big, ndy[1] / big];
            log_scale += big.ln();
        } else {
            y = ny;
            dy = ndy;
        }
    }
    (y[0], dy[0], log_scale)
}

pub fn characteristic(p: &ComplexPotential, mu: Complex64) -> CharacteristicValue {
    let (d, dp, ls) = propagate(p, mu);
    let f = ls.exp();
    CharacteristicValue {
        d: d * f,
        dprime: dp * f,
    }
}

/// Number of eigenvalues of the real problem strictly below `lambda`, by
/// counting interior zeros of the initial-value solution.
pub fn count_below(p: &PiecewisePotential, lambda: f64) -> usize {
    let (mut y, mut dy) = (0.0f64, 1.0f64);
    let mut zeros: i64 = 0;
    for k in 0..p.pieces() {
        let (lo, hi) = p.piece_bounds(k);
        let l = hi - lo;
        let zeta = lambda - p.values()[k];
        let (ny, ndy) = if zeta > 0.0 {
            let kk = zeta.sqrt();
            let th0 = (kk * y).atan2(dy);
            zeros += ((th0 + kk * l) / PI).floor() as i64 - (th0 / PI).floor() as i64;
            let (sn, cs) = (kk * l).sin_cos();
            (y * cs + dy * sn / kk, -kk * y * sn + dy * cs)
        } else {
            let (ny, ndy) = if zeta == 0.0 {
                (y + dy * l, dy)
            } else {
                let kk = (-zeta).sqrt();
                // Scaled by exp(−κℓ) to avoid overflow; signs are unchanged.
                // Both outputs share the growing amplitude κy + y′, computed
                // once: near a well eigenvalue it is a cancellation residue,
                // and separate roundings would scramble the phase passed on.
                let e = (-2.0 * kk * l).exp();
                let (grow, decay) = (kk * y + dy, kk * y - dy);
                (0.5 * (grow + e * decay) / kk, 0.5 * (grow - e * decay))
            };
            if y != 0.0 && (ny == 0.0 || ny.signum() != y.signum()) {
                zeros += 1;
            }
            (ny, ndy)
        };
        let big = ny.abs().max(ndy.abs());
        y = ny / big;
        dy = ndy / big;
    }
    if y == 0.0 {
        zeros -= 1;
    }
    zeros.max(0) as usize
}

/// Real eigenvalues in `[a, b)`, each located by bisection on the
/// eigenvalue count to the last representable bit.
pub fn real_eigs(p: &PiecewisePotential, a: f64, b: f64) -> Result<Vec<f64>> {
    if !(a < b) {
        return Err(Error::invalid(format!(
            "real_eigs needs a < b, got [{a}, {b}]"
        )));
    }
    let na = count_below(p, a);
    let nb = count_below(p, b);
    let mut out = Vec::with_capacity(nb.saturating_sub(na));
    let mut lo_hint = a;
    for j in na..nb {
        let (mut lo, mut hi) = (lo_hint, b);
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if count_below(p, mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        out.push(hi);
        lo_hint = lo;
    }
    Ok(out)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (1..=n)
        .map(|i| {
            let mut x = (PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
enum Basis {
    /// `C(ζ, t)`, `S(ζ, t)/ℓ`.
    Series,
    /// `e^{−wt}`, `e^{w(t−ℓ)}` with `w = √(−ζ)`, `Re w ≥ 0`.
    Exponential(Complex64),
}

/// Solution of the Dirichlet problem at an eigenvalue, stored as bounded
/// per-piece coefficients so that evaluation is stable through barriers.
#[derive(Debug, Clone)]
pub struct Eigenfunction {
    breakpoints: Vec<f64>,
    zetas: Vec<Complex64>,
    bases: Vec<Basis>,
    coeffs: Vec<(Complex64, Complex64)>,
    scale: Complex64,
}

impl Eigenfunction {
    fn basis_values(&self, k: usize, t: f64) -> [(Complex64, Complex64); 2] {
        let l = self.breakpoints[k + 1] - self.breakpoints[k];
        basis_values(self.bases[k], self.zetas[k], l, t)
    }

    /// `ψ(x)` for `x` in the interval.
    pub fn eval(&self, x: f64) -> Complex64 {
        let k = self.breakpoints[1..]
            .partition_point(|&bp| bp < x)
            .min(self.zetas.len() - 1);
        let t = x - self.breakpoints[k];
        let [(f1, _), (f2, _)] = self.basis_values(k, t);
        let (a, b) = self.coeffs[k];
        self.scale * (a * f1 + b * f2)
    }

    /// Composite Gauss–Legendre integral of `g(x, ψ(x))` over piece `k`.
    pub fn integrate_piece(&self, k: usize, g: &dyn Fn(Complex64) -> f64) -> f64 {
        let (lo, hi) = (self.breakpoints[k], self.breakpoints[k + 1]);
        let l = hi - lo;
        let freq = self.zetas[k].sqrt().norm();
        let panels = ((l * (freq + 1.0) / 0.5).ceil() as usize).clamp(4, 100_000);
        let width = l / panels as f64;
        let (a, b) = self.coeffs[k];
        let mut acc = 0.0;
        for j in 0..panels {
            let left = j as f64 * width;
            for &(xi, wi) in GL.iter() {
                let t = left + 0.5 * width * (xi + 1.0);
                let [(f1, _), (f2, _)] = self.basis_values(k, t);
                acc += 0.5 * width * wi * g(self.scale * (a * f1 + b * f2));
            }
        }
        acc
    }

    pub fn piece_count(&self) -> usize {
        self.zetas.len()
    }
}

static GL: std::sync::LazyLock<Vec<(f64, f64)>> = std::sync::LazyLock::new(|| gauss_legendre(10));

fn basis_values(basis: Basis, zeta: Complex64, l: f64, t: f64) -> [(Complex64, Complex64); 2] {
    match basis {
        Basis::Series => {
            let (c, s, _, _) = piece_functions(zeta, t);
            [(c, -zeta * s), (s / l, c / l)]
        }
        Basis::Exponential(w) => {
            let e1 = (-w * t).exp();
            let e2 = (w * (t - l)).exp();
            [(e1, -w * e1), (e2, w * e2)]
        }
    }
}

/// Eigenfunction at a root `mu` of `D`, normalized to unit `L²` norm and
/// rotation-normalized.
pub fn eigenfunction(p: &ComplexPotential, mu: Complex64) -> Result<Eigenfunction> {
    let k = p.pieces();
    let mut bases = Vec::with_capacity(k);
    let mut zetas = Vec::with_capacity(k);
    for j in 0..k {
        let zeta = mu - p.values[j];
        let l = p.len(j);
        zetas.push(zeta);
        bases.push(if (zeta * l * l).norm() < SERIES_LIMIT {
            Basis::Series
        } else {
            Basis::Exponential((-zeta).sqrt())
        });
    }
    // Rows: ψ(x_0) = 0, continuity of ψ and ψ' at interior breakpoints, ψ(x_K) = 0.
    let n = 2 * k;
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    let start = |j: usize| basis_values(bases[j], zetas[j], p.len(j), 0.0);
    let end = |j: usize| basis_values(bases[j], zetas[j], p.len(j), p.len(j));
    let s0 = start(0);
    m[(0, 0)] = s0[0].0;
    m[(0, 1)] = s0[1].0;
    for j in 0..k - 1 {
        let (e, s) = (end(j), start(j + 1));
        let dscale = 1.0 / (1.0 + zetas[j].norm().sqrt().max(zetas[j + 1].norm().sqrt()));
        let r = 1 + 2 * j;
        m[(r, 2 * j)] = e[0].0;
        m[(r, 2 * j + 1)] = e[1].0;
        m[(r, 2 * j + 2)] = -s[0].0;
        m[(r, 2 * j + 3)] = -s[1].0;
        m[(r + 1, 2 * j)] = e[0].1 * dscale;
        m[(r + 1, 2 * j + 1)] = e[1].1 * dscale;
        m[(r + 1, 2 * j + 2)] = -s[0].1 * dscale;
        m[(r + 1, 2 * j + 3)] = -s[1].1 * dscale;
    }
    let el = end(k - 1);
    m[(n - 1, n - 2)] = el[0].0;
    m[(n - 1, n - 1)] = el[1].0;

    let svd = m.svd(false, true);
    let vt = svd
        .v_t
        .ok_or_else(|| Error::invalid("singular value decomposition failed"))?;
    let (imin, smin) =
        svd.singular_values
            .iter()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc },
            );
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    if smin > 1e-8 * smax {
        return Err(Error::invalid(format!(
            "mu = {mu} is not an eigenvalue (relative singular value {:e})",
            smin / smax
        )));
    }
    let v: Vec<Complex64> = vt.row(imin).iter().map(|z| z.conj()).collect();
    let coeffs = (0..k).map(|j| (v[2 * j], v[2 * j + 1])).collect();
    let mut f = Eigenfunction {
        breakpoints: p.breakpoints.clone(),
        zetas,
        bases,
        coeffs,
        scale: Complex64::new(1.0, 0.0),
    };

    let mass: f64 = (0..k)
        .map(|j| f.integrate_piece(j, &|z| z.norm_sqr()))
        .sum();
    f.scale = Complex64::new(1.0 / mass.sqrt(), 0.0);
    let (mut a, mut b, mut d) = (0.0, 0.0, 0.0);
    for j in 0..k {
        a += f.integrate_piece(j, &|z| z.im * z.im);
        b += f.integrate_piece(j, &|z| z.re * z.im);
        d += f.integrate_piece(j, &|z| z.re * z.re);
    }
    let c = crate::localization::rotation_from_gram(a, b, d);
    f.scale *= c;
    let mean: f64 = (0..k).map(|j| f.integrate_piece(j, &|z| z.re)).sum();
    let flip = if mean.abs() >= 1e-12 {
        mean < 0.0
    } else {
        // Largest |Re ψ| on a fine sampling.
        let (lo, hi) = (p.breakpoints[0], p.breakpoints[k]);
        let big = (0..=4000)
            .map(|i| f.eval(lo + (hi - lo) * i as f64 / 4000.0).re)
            .fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        big < 0.0
    };
    if flip {
        f.scale = -f.scale;
    }
    Ok(f)
}

/// Localization data of an eigenfunction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootMeasures {
    pub mu: Complex64,
    pub delta: f64,
    pub tau: f64,
    pub alpha: f64,
    /// `‖(L − Re μ) φ₁‖ / ‖φ₁‖` for the rotated eigenfunction `φ = φ₁ + iφ₂`.
    pub residual_rel: f64,
}

/// Measures of the eigenfunction at `mu` with respect to the region pieces.
/// `s` is the shift in the potential (`0` for the real problem).
pub fn measures(
    p: &ComplexPotential,
    mu: Complex64,
    s: f64,
    region_pieces: &[usize],
) -> Result<RootMeasures> {
    let f = eigenfunction(p, mu)?;
    let (mut inside, mut outside, mut im_sq, mut re_sq, mut res) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for j in 0..f.piece_count() {
        let mass = f.integrate_piece(j, &|z| z.norm_sqr());
        let in_r = region_pieces.contains(&j);
        if in_r {
            inside += mass;
        } else {
            outside += mass;
        }
        im_sq += f.integrate_piece(j, &|z| z.im * z.im);
        re_sq += f.integrate_piece(j, &|z| z.re * z.re);
        // (L − μ₁)φ₁ = (s·χ_R − μ₂) φ₂ on each piece.
        let coef = if in_r { s } else { 0.0 } - mu.im;
        res += coef * coef * f.integrate_piece(j, &|z| z.im * z.im);
    }
    let total = inside + outside;
    Ok(RootMeasures {
        mu,
        delta: (outside / total).sqrt(),
        tau: (inside / total).sqrt(),
        alpha: im_sq.sqrt(),
        residual_rel: (res / re_sq).sqrt(),
    })
}

/// Samples of the normalized, rotated eigenfunction.
pub fn eigenfunction_samples(
    p: &ComplexPotential,
    mu: Complex64,
    xs: &[f64],
) -> Result<Vec<Complex64>> {
    let f = eigenfunction(p, mu)?;
    Ok(xs.iter().map(|&x| f.eval(x)).collect())
}

/// Winding number of `D` along a closed curve `t ↦ (z(t), z'(t))`,
/// `t ∈ [0, period]`, by adaptive phase tracking. Each step is accepted
/// only when the phase increment is small and agrees with the trapezoid
/// estimate of `Im ∫ D'/D dz`.
pub fn count_roots(
    p: &ComplexPotential,
    curve: &dyn Fn(f64) -> Complex64,
    period: f64,
) -> Result<i64> {
    let eval = |t: f64| {
        let z = curve(t);
        let (d, dp, _) = propagate(p, z);
        (z, d, dp)
    };
    let min_step = 1e-13 * period.max(1.0);
    let mut t = 0.0;
    let mut dt = period / 2000.0;
    let (mut z0, mut d0, mut dp0) = eval(0.0);
    if d0 == Complex64::new(0.0, 0.0) {
        return Err(Error::RootNearContour(format!("D vanishes at {z0}")));
    }
    let mut winding = 0.0;
    while t < period {
        // Keep each step well inside the local phase scale 1/|D'/D|.
        let rate = (dp0 / d0).norm();
        let step = dt.min(period - t).min(0.2 / rate.max(1e-300));
        let t1 = if period - t <= step { period } else { t + step };
        let (z1, d1, dp1) = eval(t1);
        let dphase = (d1 / d0).arg();
        let predicted = (0.5 * (dp0 / d0 + dp1 / d1) * (z1 - z0)).im;
        let rate1 = (dp1 / d1).norm();
        let smooth = rate1 * (z1 - z0).norm() < 0.4;
        if d1 != Complex64::new(0.0, 0.0)
            && smooth
            && dphase.abs() < 0.5
            && (dphase - predicted).abs() < 0.05
        {
            winding += dphase;
            t = t1;
            z0 = z1;
            d0 = d1;
            dp0 = dp1;
            dt = step * 1.5;
        } else {
            dt = step * 0.25;
            if dt < min_step {
                return Err(Error::RootNearContour(format!(
                    "phase of D unresolved near {z1}"
                )));
            }
        }
    }
    let count = winding / (2.0 * PI);
    let rounded = count.round();
    if (count - rounded).abs() > 0.1 {
        return Err(Error::RootNearContour(format!(
            "winding number {count} is not near an integer"
        )));
    }
    Ok(rounded as i64)
}

pub fn count_roots_stadium(p: &ComplexPotential, region: &SearchRegion) -> Result<i64> {
    count_roots(p, &|t| region.stadium_point(t).0, region.period())
}

pub fn count_roots_circle(p: &ComplexPotential, center: Complex64, radius: f64) -> Result<i64> {
    count_roots(p, &|t| center + Complex64::from_polar(radius, t), 2.0 * PI)
}

/// Winding number of `D` around the axis-aligned rectangle `[lo, hi]`.
fn count_roots_rect(p: &ComplexPotential, lo: Complex64, hi: Complex64) -> Result<i64> {
    let (w, h) = (hi.re - lo.re, hi.im - lo.im);
    let curve = |t: f64| {
        if t < w {
            Complex64::new(lo.re + t, lo.im)
        } else if t < w + h {
            Complex64::new(hi.re, lo.im + t - w)
        } else if t < 2.0 * w + h {
            Complex64::new(hi.re - (t - w - h), hi.im)
        } else {
            Complex64::new(lo.re, hi.im - (t - 2.0 * w - h))
        }
    };
    count_roots(p, &curve, 2.0 * (w + h))
}

/// Roots inside `[lo, hi]` by recursive bisection on the argument-principle
/// count, finishing each single-root box with Newton.
fn bisect_roots(
    p: &ComplexPotential,
    lo: Complex64,
    hi: Complex64,
    count: i64,
    depth: usize,
    out: &mut Vec<Complex64>,
) -> Result<()> {
    if count <= 0 {
        return Ok(());
    }
    let (w, h) = (hi.re - lo.re, hi.im - lo.im);
    if count == 1 {
        if let Some(mu) = newton(p, 0.5 * (lo + hi), 0.25 * w.max(h)) {
            if mu.re >= lo.re && mu.re <= hi.re && mu.im >= lo.im && mu.im <= hi.im {
                out.push(mu);
                return Ok(());
            }
        }
    }
    if depth > 60 {
        return Err(Error::RootNearContour(format!(
            "root bisection stalled in [{lo}, {hi}]"
        )));
    }
    // Split the longer side; nudge the cut off-centre if a root sits on it.
    for frac in [0.5, 0.4631, 0.5527, 0.3819] {
        let (mid_lo, mid_hi) = if w >= h {
            let x = lo.re + frac * w;
            (Complex64::new(x, hi.im), Complex64::new(x, lo.im))
        } else {
            let y = lo.im + frac * h;
            (Complex64::new(hi.re, y), Complex64::new(lo.re, y))
        };
        let Ok(first) = count_roots_rect(p, lo, mid_lo) else {
            continue;
        };
        bisect_roots(p, lo, mid_lo, first, depth + 1, out)?;
        return bisect_roots(p, mid_hi, hi, count - first, depth + 1, out);
    }
    Err(Error::RootNearContour(format!(
        "no root-free cut in [{lo}, {hi}]"
    )))
}

/// Damped Newton iteration on `D`; `None` when it fails to converge.
fn newton(p: &ComplexPotential, seed: Complex64, max_step: f64) -> Option<Complex64> {
    let mut mu = seed;
    let mut small_steps = 0;
    for _ in 0..80 {
        let (d, dp, _) = propagate(p, mu);
        if dp == Complex64::new(0.0, 0.0) || !d.is_finite() || !dp.is_finite() {
            return None;
        }
        let mut step = d / dp;
        if step.norm() > max_step {
            step *= max_step / step.norm();
        }
        mu -= step;
        if step.norm() <= 1e-13 * (1.0 + mu.norm()) {
            small_steps += 1;
            if small_steps >= 2 {
                return Some(mu);
            }
        }
    }
    None
}

/// Roots of the shifted characteristic function inside `U`, verified
/// complete against the argument-principle count on the stadium boundary.
pub fn complex_eigs(
    p: &PiecewisePotential,
    s: f64,
    region_pieces: &[usize],
    region: &SearchRegion,
) -> Result<Vec<Complex64>> {
    if !(s > 0.0) {
        return Err(Error::invalid(format!("shift s must be positive, got {s}")));
    }
    if let Some(&k) = region_pieces.iter().find(|&&k| k >= p.pieces()) {
        return Err(Error::invalid(format!(
            "region piece {} out of range 1..={}",
            k + 1,
            p.pieces()
        )));
    }
    let shifted = ComplexPotential::shifted(p, s, region_pieces);
    let r = region.r();
    // Every eigenvalue μ of the shifted problem has |Re μ − λ| ≤ s/2 for some
    // real eigenvalue λ, so seeds are only needed near those.
    let lo = region.a - r - 0.5 * s;
    let hi = region.b + r + 0.5 * s;
    let lambdas = real_eigs(p, lo.min(p.min_value() - 1.0).max(lo), hi)?;
    let real = ComplexPotential::real(p);
    let mut seeds = Vec::new();
    for &lam in &lambdas {
        let tau = measures(&real, Complex64::new(lam, 0.0), 0.0, region_pieces)
            .map(|m| m.tau)
            .unwrap_or(0.5);
        seeds.push(Complex64::new(lam, s * tau * tau));
    }
    let expected = count_roots_stadium(&shifted, region)?;
    let mut spacing = 0.5 * r;
    for _attempt in 0..3 {
        let mut grid = seeds.clone();
        let im_lo = region.s - r;
        let nx = ((region.b - region.a + 2.0 * r) / spacing).ceil() as usize + 1;
        let ny = (r / spacing).ceil() as usize + 1;
        for i in 0..nx {
            let x = region.a - r + i as f64 * spacing;
            if !lambdas.iter().any(|&l| (x - l).abs() <= 0.5 * s + r) {
                continue;
            }
            for j in 0..ny {
                let z = Complex64::new(x, im_lo + j as f64 * spacing);
                if contains(region, z, 0.5 * spacing) {
                    grid.push(z);
                }
            }
        }
        let max_step = 0.5 * (s + r);
        let mut roots: Vec<Complex64> = Vec::new();
        for seed in grid {
            if let Some(mu) = newton(&shifted, seed, max_step) {
                if contains(region, mu, 0.0)
                    && mu.im > 0.0
                    && !roots
                        .iter()
                        .any(|q| (q - mu).norm() <= 1e-8 * (1.0 + mu.norm()))
                {
                    roots.push(mu);
                }
            }
        }
        roots.sort_by(|a, b| a.re.total_cmp(&b.re));
        if roots.len() as i64 == expected {
            return Ok(roots);
        }
        if _attempt == 2 {
            break;
        }
        spacing *= 0.5;
    }
    // Seeded Newton missed something: fall back to bisecting the bounding box.
    let lo = Complex64::new(region.a - r, region.s - r);
    let hi = Complex64::new(region.b + r, region.s + r);
    let total = count_roots_rect(&shifted, lo, hi)?;
    let mut found = Vec::new();
    bisect_roots(&shifted, lo, hi, total, 0, &mut found)?;
    let mut roots: Vec<Complex64> = found
        .into_iter()
        .filter(|&mu| contains(region, mu, 0.0))
        .collect();
    roots.sort_by(|a, b| a.re.total_cmp(&b.re));
    if roots.len() as i64 == expected {
        Ok(roots)
    } else {
        Err(Error::IncompleteRoots {
            expected,
            found: roots.len(),
            roots,
        })
    }
}
