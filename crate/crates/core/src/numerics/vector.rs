use num_complex::Complex64;

use crate::{Error, Result};

/// Grid function with complex values; the mass weight lives with the space.
pub type ComplexVector = Vec<Complex64>;

/// `w · Σ conj(u_i) v_i`, the lumped-mass inner product.
pub fn weighted_inner(weight: f64, u: &[Complex64], v: &[Complex64]) -> Result<Complex64> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch {
            expected: u.len(),
            got: v.len(),
        });
    }
    Ok(inner(weight, u, v))
}

pub fn weighted_norm(weight: f64, u: &[Complex64]) -> f64 {
    norm(weight, u)
}

#[inline]
pub(crate) fn inner(weight: f64, u: &[Complex64], v: &[Complex64]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        acc += a.conj() * b;
    }
    acc * weight
}

#[inline]
pub(crate) fn norm(weight: f64, u: &[Complex64]) -> f64 {
    (u.iter().map(|z| z.norm_sqr()).sum::<f64>() * weight).sqrt()
}

pub(crate) fn axpy(alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub(crate) fn scale(alpha: Complex64, x: &mut [Complex64]) {
    for xi in x.iter_mut() {
        *xi *= alpha;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ones_have_unit_mass() {
        let u = vec![Complex64::new(1.0, 0.0); 4];
        let ip = weighted_inner(0.25, &u, &u).unwrap();
        assert!((ip - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn sine_samples_have_half_mass() {
        // h Σ sin²(πjh) over interior nodes is exactly 1/2.
        let h = 0.25;
        let u: Vec<_> = (1..4)
            .map(|j| Complex64::new((PI * j as f64 * h).sin(), 0.0))
            .collect();
        let ip = weighted_inner(h, &u, &u).unwrap();
        assert!((ip.re - 0.5).abs() < 1e-15 && ip.im.abs() < 1e-15);
    }

    #[test]
    fn mismatched_lengths_are_rejected() {
        let u = vec![Complex64::new(1.0, 0.0); 3];
        let v = vec![Complex64::new(1.0, 0.0); 4];
        assert!(matches!(
            weighted_inner(1.0, &u, &v),
            Err(Error::LengthMismatch { .. })
        ));
    }

    proptest::proptest! {
        #[test]
        fn conjugate_symmetric(parts in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0), 1..20)) {
            let u: Vec<_> = parts.iter().map(|p| Complex64::new(p.0, p.1)).collect();
            let v: Vec<_> = parts.iter().map(|p| Complex64::new(p.2, p.3)).collect();
            let uv = weighted_inner(0.3, &u, &v).unwrap();
            let vu = weighted_inner(0.3, &v, &u).unwrap();
            proptest::prop_assert!((uv - vu.conj()).norm() < 1e-14);
        }
    }
}
