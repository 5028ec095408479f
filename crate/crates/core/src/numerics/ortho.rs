use num_complex::Complex64;

use super::vector::{axpy, inner, norm, scale, ComplexVector};
use crate::{Error, Result};

const DROP_TOL: f64 = 1e-12;

/// Weighted modified Gram–Schmidt with one reorthogonalization pass.
///
/// Vectors whose remaining norm falls below `1e-12` of their initial norm
/// are dropped; the effective rank is the length of the returned block.
pub fn orthonormalize(
    weight: f64,
    block: Vec<ComplexVector>,
) -> Result<(Vec<ComplexVector>, usize)> {
    if block.is_empty() {
        return Err(Error::invalid("orthonormalize needs a nonempty block"));
    }
    let n = block[0].len();
    let mut basis: Vec<ComplexVector> = Vec::with_capacity(block.len());
    for mut v in block {
        if v.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: v.len(),
            });
        }
        let initial = norm(weight, &v);
        if initial == 0.0 || !initial.is_finite() {
            continue;
        }
        for _pass in 0..2 {
            for q in &basis {
                let c = inner(weight, q, &v);
                axpy(-c, q, &mut v);
            }
        }
        let remaining = norm(weight, &v);
        if remaining <= DROP_TOL * initial {
            continue;
        }
        scale(Complex64::new(1.0 / remaining, 0.0), &mut v);
        basis.push(v);
    }
    if basis.is_empty() {
        return Err(Error::RankZero);
    }
    let rank = basis.len();
    Ok((basis, rank))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_block(k: usize, n: usize, seed: u64) -> Vec<ComplexVector> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..k)
            .map(|_| {
                (0..n)
                    .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect()
            })
            .collect()
    }

    fn gram_error(weight: f64, q: &[ComplexVector]) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in q.iter().enumerate() {
            for (j, b) in q.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((inner(weight, a, b) - target).norm());
            }
        }
        worst
    }

    #[test]
    fn random_block_is_orthonormal() {
        let w = 1.0 / 1000.0;
        let (q, rank) = orthonormalize(w, random_block(8, 999, 3)).unwrap();
        assert_eq!(rank, 8);
        assert!(gram_error(w, &q) <= 1e-12);
    }

    #[test]
    fn orthonormal_input_is_unchanged() {
        let w = 0.5;
        let (q, _) = orthonormalize(w, random_block(4, 50, 9)).unwrap();
        let (q2, _) = orthonormalize(w, q.clone()).unwrap();
        for (a, b) in q.iter().zip(&q2) {
            assert!(a.iter().zip(b).all(|(x, y)| (x - y).norm() <= 1e-12));
        }
    }

    #[test]
    fn duplicate_drops_rank() {
        let mut block = random_block(3, 40, 1);
        block.push(block[1].clone());
        let (_, rank) = orthonormalize(1.0, block).unwrap();
        assert_eq!(rank, 3);
    }

    #[test]
    fn zero_block_is_rank_zero() {
        let block = vec![vec![Complex64::new(0.0, 0.0); 5]; 2];
        assert!(matches!(orthonormalize(1.0, block), Err(Error::RankZero)));
    }
}
