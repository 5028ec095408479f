use num_complex::Complex64;

use super::grid::DiscreteSpace;
use super::region::IndicatorVector;
use crate::numerics::{SymMatrix, SymmetricOperator};
use crate::{Error, Result};

/// `-Δ_h + diag(V)` with homogeneous Dirichlet conditions.
pub fn assemble_operator(space: &DiscreteSpace, potential: &[f64]) -> Result<SymMatrix> {
    if potential.len() != space.len() {
        return Err(Error::LengthMismatch {
            expected: space.len(),
            got: potential.len(),
        });
    }
    if let Some(v) = potential.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::invalid(format!(
            "potential must be nonnegative, found {v}"
        )));
    }
    let h2 = 1.0 / (space.h() * space.h());
    let diag = 2.0 * space.dim() as f64 * h2;
    let mut triplets = Vec::with_capacity(space.len() * (2 * space.dim() + 1));
    for (k, v) in potential.iter().enumerate() {
        triplets.push((k, k, diag + v));
        for nb in space.neighbors(k) {
            triplets.push((k, nb, -h2));
        }
    }
    SymMatrix::from_triplets(space.len(), &triplets, false)
}

/// `L_s = L + i·s·diag(χ_R)`, normal by construction.
#[derive(Debug, Clone)]
pub struct ShiftedOperator {
    l: SymMatrix,
    s: f64,
    mask: IndicatorVector,
}

pub fn shift_operator(l: SymMatrix, s: f64, mask: IndicatorVector) -> Result<ShiftedOperator> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::invalid(format!("shift s must be positive, got {s}")));
    }
    if mask.len() != l.dim() {
        return Err(Error::LengthMismatch {
            expected: l.dim(),
            got: mask.len(),
        });
    }
    Ok(ShiftedOperator { l, s, mask })
}

impl ShiftedOperator {
    pub fn l(&self) -> &SymMatrix {
        &self.l
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn mask(&self) -> &IndicatorVector {
        &self.mask
    }
}

impl SymmetricOperator for ShiftedOperator {
    fn dim(&self) -> usize {
        self.l.dim()
    }

    fn real_part(&self) -> &SymMatrix {
        &self.l
    }

    fn diagonal_shift(&self, i: usize) -> Complex64 {
        Complex64::new(0.0, self.s * self.mask.weights()[i])
    }

    fn is_selfadjoint(&self) -> bool {
        false
    }
}
