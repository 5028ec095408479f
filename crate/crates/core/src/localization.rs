//! Localization measures and the identities tying eigenpairs of `L_s` to
//! approximate eigenpairs of `L`.

use num_complex::Complex64;

use crate::domain::{IndicatorVector, ShiftedOperator};
use crate::numerics::vector::{inner, norm};
use crate::numerics::SymMatrix;
use crate::{Error, Result};

/// Measures of one vector with respect to a region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizationReport {
    pub delta: f64,
    pub tau: f64,
    pub alpha: f64,
    pub c: Complex64,
    pub residual_rel: f64,
}

/// Result of [`normalize_rotation`].
#[derive(Debug, Clone)]
pub struct Rotated {
    pub phi: Vec<Complex64>,
    pub c: Complex64,
    pub alpha: f64,
}

fn check_len(mask: &IndicatorVector, v: &[Complex64]) -> Result<()> {
    if mask.len() != v.len() {
        return Err(Error::LengthMismatch {
            expected: mask.len(),
            got: v.len(),
        });
    }
    Ok(())
}

/// Squared weighted mass inside and outside the mask.
fn split_mass(weight: f64, v: &[Complex64], mask: &IndicatorVector) -> (f64, f64) {
    let (mut inside, mut outside) = (0.0, 0.0);
    for (z, &w) in v.iter().zip(mask.weights()) {
        inside += w * z.norm_sqr();
        outside += (1.0 - w) * z.norm_sqr();
    }
    (weight * inside, weight * outside)
}

/// `(δ, τ)`: relative mass of `v` outside and inside the region.
pub fn delta_tau(weight: f64, v: &[Complex64], mask: &IndicatorVector) -> Result<(f64, f64)> {
    check_len(mask, v)?;
    let (inside, outside) = split_mass(weight, v, mask);
    let total = inside + outside;
    if total == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(((outside / total).sqrt(), (inside / total).sqrt()))
}

/// Multiplies a unit vector by the unimodular `c` minimizing `‖Im(cφ)‖`.
pub fn normalize_rotation(weight: f64, phi: &[Complex64]) -> Result<Rotated> {
    let nrm = norm(weight, phi);
    if nrm == 0.0 {
        return Err(Error::ZeroVector);
    }
    if (nrm - 1.0).abs() > 1e-10 {
        return Err(Error::invalid(format!(
            "rotation normalization needs a unit vector, norm is {nrm}"
        )));
    }
    let (mut a, mut b, mut d) = (0.0, 0.0, 0.0);
    for z in phi {
        a += z.im * z.im;
        b += z.re * z.im;
        d += z.re * z.re;
    }
    let c = rotation_from_gram(a * weight, b * weight, d * weight);
    let mut rotated: Vec<Complex64> = phi.iter().map(|z| c * z).collect();
    let sum: f64 = rotated.iter().map(|z| z.re).sum::<f64>() * weight;
    let flip = if sum.abs() >= 1e-12 {
        sum < 0.0
    } else {
        let big = rotated
            .iter()
            .map(|z| z.re)
            .fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        big < 0.0
    };
    let c = if flip {
        rotated.iter_mut().for_each(|z| *z = -*z);
        -c
    } else {
        c
    };
    let alpha = (rotated.iter().map(|z| z.im * z.im).sum::<f64>() * weight).sqrt();
    Ok(Rotated {
        phi: rotated,
        c,
        alpha,
    })
}

/// Unit `c = c₁ + i·c₂` from the eigenvector of the smaller eigenvalue of
/// `[[‖φ₂‖², ⟨φ₁,φ₂⟩], [⟨φ₁,φ₂⟩, ‖φ₁‖²]]`; `1` when the eigenvalues coincide.
/// The sign is left to the caller.
pub fn rotation_from_gram(a: f64, b: f64, d: f64) -> Complex64 {
    let half_gap = (0.5 * (a - d)).hypot(b);
    if half_gap <= 1e-14 * (a + d) {
        return Complex64::new(1.0, 0.0);
    }
    let lam = 0.5 * (a + d) - half_gap;
    let v1 = (b, lam - a);
    let v2 = (lam - d, b);
    let (c1, c2) = if v1.0.hypot(v1.1) >= v2.0.hypot(v2.1) {
        v1
    } else {
        v2
    };
    let len = c1.hypot(c2);
    Complex64::new(c1 / len, c2 / len)
}

/// `⟨L_s φ, φ⟩ / ‖φ‖²`. The imaginary part is `s·τ²(φ)` by construction.
pub fn rayleigh_mu(weight: f64, op: &ShiftedOperator, phi: &[Complex64]) -> Result<Complex64> {
    check_len(op.mask(), phi)?;
    let mut lphi = vec![Complex64::new(0.0, 0.0); phi.len()];
    op.l().mul_complex(phi, &mut lphi);
    let (inside, outside) = split_mass(weight, phi, op.mask());
    let total = inside + outside;
    if total == 0.0 {
        return Err(Error::ZeroVector);
    }
    let re = inner(weight, phi, &lphi).re / total;
    Ok(Complex64::new(re, op.s() * inside / total))
}

/// Both sides of `‖(L − μ₁)φ₁‖² = ‖(s·χ_R − μ₂)φ₂‖²`, which reads
/// `s²(τ⁴‖φ₂‖²_{Ω∖R} + δ⁴‖φ₂‖²_R)` for an eigenpair of `L_s` with unit
/// `φ`; `μ₁` is the real part of the Rayleigh quotient and `μ₂ = s·τ²`.
pub fn residual_identity(
    weight: f64,
    l: &SymMatrix,
    phi: &[Complex64],
    mask: &IndicatorVector,
    s: f64,
) -> Result<(f64, f64)> {
    check_len(mask, phi)?;
    let nrm = norm(weight, phi);
    if nrm == 0.0 {
        return Err(Error::ZeroVector);
    }
    let phi: Vec<Complex64> = phi.iter().map(|z| z / nrm).collect();
    let (_, tau) = delta_tau(weight, &phi, mask)?;
    let phi1: Vec<f64> = phi.iter().map(|z| z.re).collect();
    let mut lphi1 = vec![0.0; phi1.len()];
    l.mul_real(&phi1, &mut lphi1);
    let mut lphi = vec![Complex64::new(0.0, 0.0); phi.len()];
    l.mul_complex(&phi, &mut lphi);
    let mu1 = inner(weight, &phi, &lphi).re;
    let lhs = weight
        * lphi1
            .iter()
            .zip(&phi1)
            .map(|(a, b)| (a - mu1 * b).powi(2))
            .sum::<f64>();
    // ‖(s·χ − sτ²)φ₂‖²; χ is 0 or 1 away from ∂R, giving the τ⁴ and δ⁴ terms.
    let mu2 = s * tau * tau;
    let rhs = weight
        * phi
            .iter()
            .zip(mask.weights())
            .map(|(z, &w)| (s * w - mu2).powi(2) * z.im * z.im)
            .sum::<f64>();
    Ok((lhs, rhs))
}

/// `‖(L − μ)ψ‖ / ‖ψ‖` for a real vector.
pub fn relative_residual(l: &SymMatrix, mu: f64, psi: &[f64]) -> f64 {
    let mut lpsi = vec![0.0; psi.len()];
    l.mul_real(psi, &mut lpsi);
    let num: f64 = lpsi
        .iter()
        .zip(psi)
        .map(|(a, b)| (a - mu * b).powi(2))
        .sum();
    let den: f64 = psi.iter().map(|b| b * b).sum();
    (num / den).sqrt()
}

/// Full report for a unit eigenvector approximation of `L_s`.
pub fn localization_report(
    weight: f64,
    op: &ShiftedOperator,
    phi: &[Complex64],
) -> Result<LocalizationReport> {
    let (delta, tau) = delta_tau(weight, phi, op.mask())?;
    let nrm = norm(weight, phi);
    let unit: Vec<Complex64> = phi.iter().map(|z| z / nrm).collect();
    let rot = normalize_rotation(weight, &unit)?;
    let mu = rayleigh_mu(weight, op, &rot.phi)?;
    let phi1: Vec<f64> = rot.phi.iter().map(|z| z.re).collect();
    Ok(LocalizationReport {
        delta,
        tau,
        alpha: rot.alpha,
        c: rot.c,
        residual_rel: relative_residual(op.l(), mu.re, &phi1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{
        assemble_operator, build_grid_1d, region_mask, shift_operator, RegionSpec,
    };
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sine_grid(n: f64, h: f64) -> (crate::domain::DiscreteSpace, Vec<Complex64>) {
        let g = build_grid_1d(0.0, 1.0, h).unwrap();
        let v = (0..g.len())
            .map(|k| c((n * PI * g.x(k)).sin(), 0.0))
            .collect();
        (g, v)
    }

    #[test]
    fn supported_in_mask() {
        let m = IndicatorVector::new(vec![true, true, false]).unwrap();
        let (d, t) = delta_tau(0.25, &[c(1.0, 0.0), c(0.0, 2.0), c(0.0, 0.0)], &m).unwrap();
        assert_eq!((d, t), (0.0, 1.0));
    }

    #[test]
    fn sine_fractions_in_first_quarter() {
        let r = RegionSpec::Intervals(vec![(0.0, 0.25)]);
        let (g, v) = sine_grid(4.0, 1e-3);
        let m = region_mask(&g, &r).unwrap();
        let (_, t) = delta_tau(g.weight(), &v, &m).unwrap();
        assert!((t * t - 0.25).abs() < 1e-5);
        // sin(πx) does not vanish on the breakpoint, so the node there
        // contributes an O(h) mass to whichever side owns it.
        let h = 1e-4;
        let (g, v) = sine_grid(1.0, h);
        let (_, t) = delta_tau(g.weight(), &v, &region_mask(&g, &r).unwrap()).unwrap();
        assert!((t * t - 0.25 * (1.0 - 2.0 / PI)).abs() < 2.0 * h);
    }

    #[test]
    fn real_vector_needs_no_rotation() {
        let v = vec![c(0.6, 0.0), c(0.8, 0.0)];
        let r = normalize_rotation(1.0, &v).unwrap();
        assert_eq!(r.c, c(1.0, 0.0));
        assert_eq!(r.alpha, 0.0);
    }

    #[test]
    fn imaginary_vector_rotates_to_real() {
        let v = vec![c(0.0, 0.6), c(0.0, 0.8)];
        let r = normalize_rotation(1.0, &v).unwrap();
        assert!(r.alpha < 1e-15);
        assert!((r.phi[0] - c(0.6, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn orthogonal_parts_keep_identity() {
        let v = vec![c(0.8, 0.0), c(0.0, 0.6)];
        let r = normalize_rotation(1.0, &v).unwrap();
        assert!((r.alpha - 0.6).abs() < 1e-15);
        assert!((r.c - c(1.0, 0.0)).norm() < 1e-15);
        // Brute-force minimum over the unit circle.
        let best = (0..100_000)
            .map(|k| {
                let d = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 1e5);
                v.iter().map(|z| (d * z).im.powi(2)).sum::<f64>().sqrt()
            })
            .fold(f64::INFINITY, f64::min);
        assert!((best - r.alpha).abs() < 1e-9);
    }

    #[test]
    fn rotation_is_minimal_against_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let w = 0.01;
        let mut v: Vec<Complex64> = (0..99)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let n = norm(w, &v);
        v.iter_mut().for_each(|z| *z /= n);
        let r = normalize_rotation(w, &v).unwrap();
        for _ in 0..1000 {
            let d = Complex64::from_polar(1.0, rng.gen_range(0.0..2.0 * PI));
            let im = (v.iter().map(|z| (d * z).im.powi(2)).sum::<f64>() * w).sqrt();
            assert!(im >= r.alpha - 1e-10);
        }
    }

    #[test]
    fn alpha_vanishes_iff_dependent() {
        let dep = vec![c(0.3, 0.6), c(0.4, 0.8)];
        let n = norm(1.0, &dep);
        let dep: Vec<_> = dep.iter().map(|z| z / n).collect();
        assert!(normalize_rotation(1.0, &dep).unwrap().alpha < 1e-15);
        let indep = vec![c(0.6, 0.1), c(0.1, 0.78)];
        let n = norm(1.0, &indep);
        let indep: Vec<_> = indep.iter().map(|z| z / n).collect();
        assert!(normalize_rotation(1.0, &indep).unwrap().alpha > 1e-3);
    }

    #[test]
    fn imaginary_rayleigh_part_is_shift_times_tau_squared() {
        let g = build_grid_1d(0.0, 1.0, 1e-3).unwrap();
        let l = assemble_operator(&g, &vec![0.0; g.len()]).unwrap();
        let m = region_mask(&g, &RegionSpec::Intervals(vec![(0.5, 0.75)])).unwrap();
        let op = shift_operator(l, 1.0, m.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let v: Vec<Complex64> = (0..g.len())
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let mu = rayleigh_mu(g.weight(), &op, &v).unwrap();
        let (_, tau) = delta_tau(g.weight(), &v, &m).unwrap();
        assert!((mu.im - tau * tau).abs() < 1e-14);
    }

    #[test]
    fn delta_from_imaginary_part() {
        let delta = |im_mu: f64, s: f64| (1.0 - im_mu / s).sqrt();
        assert!((delta(0.99894524, 1.0) - 0.0324770).abs() < 5e-7);
        assert!((delta(9991.7736, 1e4) - 0.02868).abs() < 5e-5);
    }

    #[test]
    fn complement_swaps_measures() {
        let m = IndicatorVector::new(vec![true, false, false, true]).unwrap();
        let v = vec![c(1.0, 0.5), c(0.2, 0.0), c(-0.3, 0.1), c(0.0, 0.7)];
        let (d, t) = delta_tau(0.5, &v, &m).unwrap();
        let (dc, tc) = delta_tau(0.5, &v, &m.complement()).unwrap();
        assert_eq!((d, t), (tc, dc));
        assert!((d * d + t * t - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_vector_is_rejected() {
        let m = IndicatorVector::new(vec![true, false]).unwrap();
        assert!(matches!(
            delta_tau(1.0, &[c(0.0, 0.0); 2], &m),
            Err(Error::ZeroVector)
        ));
    }
}
