use num_complex::Complex64;

use crate::{Error, Result};

/// Real symmetric sparse matrix in compressed-row storage.
///
/// Both triangles are stored so that products need no special casing.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SymMatrix {
    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are summed.
    /// Only one triangle needs to be supplied for off-diagonal entries when
    /// `mirror` is true.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)], mirror: bool) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(Error::invalid(format!(
                    "triplet ({i}, {j}) outside {n}x{n}"
                )));
            }
            rows[i].push((j, v));
            if mirror && i != j {
                rows[j].push((i, v));
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for row in &mut rows {
            row.sort_by_key(|&(j, _)| j);
            let mut last: Option<usize> = None;
            for &(j, v) in row.iter() {
                if last == Some(j) {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(j);
                    vals.push(v);
                    last = Some(j);
                }
            }
            row_ptr.push(cols.len());
        }
        let m = SymMatrix {
            n,
            row_ptr,
            cols,
            vals,
        };
        if !m.is_symmetric(0.0) {
            return Err(Error::invalid(
                "triplets do not describe a symmetric matrix",
            ));
        }
        Ok(m)
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        SymMatrix {
            n,
            row_ptr: (0..=n).collect(),
            cols: (0..n).collect(),
            vals: diag.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()]
            .iter()
            .copied()
            .zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| {
            self.row(i)
                .all(|(j, v)| (self.get(j, i) - v).abs() <= tol * v.abs().max(1.0))
        })
    }

    pub fn mul_real(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    pub fn mul_complex(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, v) in self.row(i) {
                acc += x[j] * v;
            }
            *yi = acc;
        }
    }

    /// Matrix with rows and columns renumbered so that new index `k` is old
    /// index `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> SymMatrix {
        let mut inv = vec![0; self.n];
        for (k, &p) in perm.iter().enumerate() {
            inv[p] = k;
        }
        let triplets: Vec<_> = (0..self.n)
            .flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v)))
            .map(|(i, j, v)| (inv[i], inv[j], v))
            .collect();
        SymMatrix::from_triplets(self.n, &triplets, false).expect("permutation preserves symmetry")
    }
}
