use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Error, Result};

const RESIDUAL_TOL: f64 = 1e-10;

/// Eigenvalue with a unit (Euclidean) eigenvector of a small dense matrix.
#[derive(Debug, Clone)]
pub struct DensePair {
    pub value: Complex64,
    pub vector: Vec<Complex64>,
}

/// Full eigendecomposition of a small, (near-)normal dense matrix.
///
/// Hermitian input goes through the symmetric QR algorithm and returns
/// exactly real values; otherwise a complex Schur form is computed and the
/// eigenvectors are recovered by triangular back-substitution. Pairs are
/// sorted by real part, then imaginary part.
pub fn small_dense_eig(h: &DMatrix<Complex64>) -> Result<Vec<DensePair>> {
    let k = h.nrows();
    if k != h.ncols() {
        return Err(Error::invalid(format!(
            "dense eigensolve needs a square matrix, got {}x{}",
            k,
            h.ncols()
        )));
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    let scale = h.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok((0..k)
            .map(|j| {
                let mut v = vec![Complex64::new(0.0, 0.0); k];
                v[j] = Complex64::new(1.0, 0.0);
                DensePair {
                    value: Complex64::new(0.0, 0.0),
                    vector: v,
                }
            })
            .collect());
    }
    let skew = (h - h.adjoint())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let bound = RESIDUAL_TOL * h.norm();
    let mut pairs = if skew <= 1e-14 * scale {
        // The symmetric QR sweep now and then leaves a close pair poorly
        // resolved; the Schur route is slower but reliable there.
        let first = hermitian(h);
        if worst_residual(h, &first) <= bound {
            first
        } else {
            hermitian_schur(h)?
        }
    } else {
        general(h, scale)?
    };
    let worst = worst_residual(h, &pairs);
    if worst > bound {
        return Err(Error::DenseEig {
            best_residual: worst,
        });
    }
    pairs.sort_by(|a, b| {
        a.value
            .re
            .total_cmp(&b.value.re)
            .then(a.value.im.total_cmp(&b.value.im))
    });
    Ok(pairs)
}

fn worst_residual(h: &DMatrix<Complex64>, pairs: &[DensePair]) -> f64 {
    let k = h.nrows();
    pairs
        .iter()
        .map(|p| {
            let v = DMatrix::from_column_slice(k, 1, &p.vector);
            (h * &v - v * p.value).norm()
        })
        .fold(0.0, f64::max)
}

fn hermitian(h: &DMatrix<Complex64>) -> Vec<DensePair> {
    let sym = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    (0..h.nrows())
        .map(|j| DensePair {
            value: Complex64::new(eig.eigenvalues[j], 0.0),
            vector: eig.eigenvectors.column(j).iter().copied().collect(),
        })
        .collect()
}

/// For Hermitian input the Schur factor is diagonal and the unitary factor
/// holds the eigenvectors.
fn hermitian_schur(h: &DMatrix<Complex64>) -> Result<Vec<DensePair>> {
    let sym = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let schur =
        nalgebra::linalg::Schur::try_new(sym, f64::EPSILON, 10_000).ok_or(Error::DenseEig {
            best_residual: f64::INFINITY,
        })?;
    let (q, t) = schur.unpack();
    Ok((0..h.nrows())
        .map(|j| DensePair {
            value: Complex64::new(t[(j, j)].re, 0.0),
            vector: q.column(j).iter().copied().collect(),
        })
        .collect())
}

fn general(h: &DMatrix<Complex64>, scale: f64) -> Result<Vec<DensePair>> {
    let k = h.nrows();
    let schur = nalgebra::linalg::Schur::try_new(h.clone(), f64::EPSILON, 10_000).ok_or(
        Error::DenseEig {
            best_residual: f64::INFINITY,
        },
    )?;
    let (q, t) = schur.unpack();
    let guard = f64::EPSILON * scale;
    let mut out = Vec::with_capacity(k);
    for j in 0..k {
        let lam = t[(j, j)];
        let mut y = vec![Complex64::new(0.0, 0.0); k];
        y[j] = Complex64::new(1.0, 0.0);
        for i in (0..j).rev() {
            let mut acc = Complex64::new(0.0, 0.0);
            for l in i + 1..=j {
                acc += t[(i, l)] * y[l];
            }
            let mut den = t[(i, i)] - lam;
            if den.norm() < guard {
                den = Complex64::new(guard, 0.0);
            }
            y[i] = -acc / den;
        }
        let yv = DMatrix::from_column_slice(k, 1, &y);
        let mut v = &q * yv;
        let nv = v.norm();
        v /= Complex64::new(nv, 0.0);
        out.push(DensePair {
            value: lam,
            vector: v.iter().copied().collect(),
        });
    }
    Ok(out)
}
