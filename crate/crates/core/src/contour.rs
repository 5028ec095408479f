//! Stadium search regions and trapezoid-rule rational filters.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::{Error, Result};

/// `U(a, b, s, δ*)`: points within `r = s·δ*` of the segment `[a, b] + i·s`
/// lying strictly below its line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchRegion {
    pub a: f64,
    pub b: f64,
    pub s: f64,
    pub delta_star: f64,
}

impl SearchRegion {
    pub fn new(a: f64, b: f64, s: f64, delta_star: f64) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::invalid(format!(
                "search interval needs a < b, got [{a}, {b}]"
            )));
        }
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::invalid(format!("shift s must be positive, got {s}")));
        }
        if !(delta_star > 0.0 && delta_star < 0.5) {
            return Err(Error::invalid(format!(
                "delta_star must lie in (0, 1/2), got {delta_star}"
            )));
        }
        Ok(SearchRegion {
            a,
            b,
            s,
            delta_star,
        })
    }

    pub fn r(&self) -> f64 {
        self.s * self.delta_star
    }

    /// Perimeter of the stadium.
    pub fn period(&self) -> f64 {
        2.0 * PI * self.r() + 2.0 * (self.b - self.a)
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.a + self.b), self.s)
    }

    /// Aspect ratio of the full stadium, `(b − a + 2r) / 2r`.
    pub fn aspect(&self) -> f64 {
        (self.b - self.a + 2.0 * self.r()) / (2.0 * self.r())
    }

    /// Distance from `z` to the segment `[a, b] + i·s`.
    pub fn distance_to_segment(&self, z: Complex64) -> f64 {
        let x = z.re.clamp(self.a, self.b);
        Complex64::new(z.re - x, z.im - self.s).norm()
    }

    /// Point and unit tangent of the counterclockwise boundary at arc length
    /// `t`, starting from `b + i(s − r)`.
    pub fn stadium_point(&self, t: f64) -> (Complex64, Complex64) {
        let (a, b, s, r) = (self.a, self.b, self.s, self.r());
        let p = self.period();
        let t = t.rem_euclid(p);
        let t1 = PI * r;
        let t2 = t1 + b - a;
        let t3 = t2 + PI * r;
        if t < t1 {
            let th = t / r;
            (
                Complex64::new(b + r * th.sin(), s - r * th.cos()),
                Complex64::new(th.cos(), th.sin()),
            )
        } else if t < t2 {
            (Complex64::new(b + t1 - t, s + r), Complex64::new(-1.0, 0.0))
        } else if t < t3 {
            let th = (t + a - b) / r;
            (
                Complex64::new(a + r * th.sin(), s - r * th.cos()),
                Complex64::new(th.cos(), th.sin()),
            )
        } else {
            (Complex64::new(a - t3 + t, s - r), Complex64::new(1.0, 0.0))
        }
    }
}

/// Membership in `U` enlarged by `margin`.
pub fn contains(region: &SearchRegion, z: Complex64, margin: f64) -> bool {
    region.distance_to_segment(z) <= region.r() + margin && z.im < region.s
}

/// `f(z) = Σ w_k / (z_k − z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalFilter {
    pub poles: Vec<Complex64>,
    pub weights: Vec<Complex64>,
}

/// Trapezoid rule for the Cauchy integral over the stadium boundary with
/// nodes offset by `πr/2` from the start of the parameterization.
pub fn build_filter(region: &SearchRegion, n: usize) -> Result<RationalFilter> {
    if n < 8 || !n.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "pole count must be even and at least 8, got {n}"
        )));
    }
    let h = region.period() / n as f64;
    let offset = 0.5 * PI * region.r();
    let denom = Complex64::new(0.0, 2.0 * PI);
    let (poles, weights) = (0..n)
        .map(|k| {
            let (z, dz) = region.stadium_point(k as f64 * h + offset);
            (z, dz * h / denom)
        })
        .unzip();
    Ok(RationalFilter { poles, weights })
}

/// Trapezoid rule on the circle `|z − center| = radius`, nodes at angles
/// `2π(k + ½)/n` so that none falls on the real axis.
pub fn build_circle_filter(center: f64, radius: f64, n: usize) -> Result<RationalFilter> {
    if n < 8 || !n.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "pole count must be even and at least 8, got {n}"
        )));
    }
    if !(radius > 0.0) {
        return Err(Error::invalid(format!(
            "circle radius must be positive, got {radius}"
        )));
    }
    let (poles, weights) = (0..n)
        .map(|k| {
            let e = Complex64::from_polar(1.0, 2.0 * PI * (k as f64 + 0.5) / n as f64);
            (center + radius * e, radius * e / n as f64)
        })
        .unzip();
    Ok(RationalFilter { poles, weights })
}

impl RationalFilter {
    pub fn len(&self) -> usize {
        self.poles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poles.is_empty()
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (zk, wk) in self.poles.iter().zip(&self.weights) {
            let d = zk - z;
            if d.norm() <= 1e-14 * (1.0 + zk.norm()) {
                return Err(Error::invalid(format!("filter evaluated on pole {zk}")));
            }
            acc += wk / d;
        }
        Ok(acc)
    }

    /// `|f|` at `(Re z, Im z)` grid points spanning `[re0, re1] × [im0, im1]`.
    pub fn grid(
        &self,
        re: (f64, f64),
        im: (f64, f64),
        nx: usize,
        ny: usize,
    ) -> Vec<(f64, f64, f64)> {
        let step = |lo: f64, hi: f64, n: usize, k: usize| {
            if n <= 1 {
                lo
            } else {
                lo + (hi - lo) * k as f64 / (n - 1) as f64
            }
        };
        let mut out = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let z = Complex64::new(step(re.0, re.1, nx, i), step(im.0, im.1, ny, j));
                let v = self.eval(z).map_or(f64::INFINITY, |f| f.norm());
                out.push((z.re, z.im, v));
            }
        }
        out
    }
}

/// `κ = max_outside |f| / min_inside |f|`.
pub fn contraction_ratio(
    filter: &RationalFilter,
    inside: &[Complex64],
    outside: &[Complex64],
) -> Result<f64> {
    if inside.is_empty() || outside.is_empty() {
        return Err(Error::invalid(
            "contraction ratio needs nonempty inside and outside samples",
        ));
    }
    let mut max_out = 0.0f64;
    for z in outside {
        max_out = max_out.max(filter.eval(*z)?.norm());
    }
    let mut min_in = f64::INFINITY;
    for z in inside {
        min_in = min_in.min(filter.eval(*z)?.norm());
    }
    Ok(max_out / min_in)
}

/// Splits `U(a, b, s, δ*)` into the fewest equal pieces whose aspect ratio
/// is at most `max_aspect`, widening interior cut points by `r/2` on each
/// side so neighbouring pieces overlap by `r`.
pub fn split_region(
    a: f64,
    b: f64,
    s: f64,
    delta_star: f64,
    max_aspect: f64,
) -> Result<Vec<SearchRegion>> {
    let whole = SearchRegion::new(a, b, s, delta_star)?;
    if !(max_aspect >= 2.0) {
        return Err(Error::invalid(format!(
            "max_aspect must be at least 2, got {max_aspect}"
        )));
    }
    let r = whole.r();
    // Smallest p with (b − a)/p ≤ 2r(max_aspect − 1), guarded against rounding.
    let span = 2.0 * r * (max_aspect - 1.0);
    let mut p = ((b - a) / span).ceil().max(1.0) as usize;
    while p > 1 && (b - a) / (p - 1) as f64 <= span * (1.0 + 1e-12) {
        p -= 1;
    }
    while (b - a) / p as f64 > span * (1.0 + 1e-12) {
        p += 1;
    }
    (0..p)
        .map(|j| {
            let lo = a + (b - a) * j as f64 / p as f64;
            let hi = if j + 1 == p {
                b
            } else {
                a + (b - a) * (j + 1) as f64 / p as f64
            };
            let lo = if j == 0 { lo } else { lo - 0.5 * r };
            let hi = if j + 1 == p { hi } else { hi + 0.5 * r };
            SearchRegion::new(lo, hi, s, delta_star)
        })
        .collect()
}
