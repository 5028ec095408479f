//! Direct factorizations of `z·I − A` for complex symmetric `A = L + D`,
//! where `L` is real symmetric sparse and `D` a complex diagonal.
//!
//! The primary path is an envelope (profile) `LDLᵀ` without pivoting, which
//! exploits complex symmetry and keeps storage at the profile of a
//! bandwidth-reducing ordering. Each factorization is checked on a probe
//! vector; if the unpivoted elimination lost accuracy it is redone with a
//! partially pivoted band LU.

use num_complex::Complex64;

use super::sparse::SymMatrix;
use crate::{Error, Result};

const PROBE_TOL: f64 = 1e-9;

/// Operators whose shifted systems can be factorized.
pub trait SymmetricOperator: Sync {
    fn dim(&self) -> usize;

    /// Real symmetric part `L`.
    fn real_part(&self) -> &SymMatrix;

    /// Extra complex diagonal entry at row `i`.
    fn diagonal_shift(&self, _i: usize) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }

    fn is_selfadjoint(&self) -> bool {
        true
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        self.real_part().mul_complex(x, y);
        if !self.is_selfadjoint() {
            for (i, (yi, xi)) in y.iter_mut().zip(x).enumerate() {
                *yi += self.diagonal_shift(i) * xi;
            }
        }
    }
}

impl SymmetricOperator for SymMatrix {
    fn dim(&self) -> usize {
        SymMatrix::dim(self)
    }

    fn real_part(&self) -> &SymMatrix {
        self
    }
}

/// Fill-reducing ordering and envelope of a sparsity pattern; shared by all
/// shifts of the same operator.
#[derive(Debug, Clone)]
pub struct Structure {
    perm: Vec<usize>,
    inv: Vec<usize>,
    first: Vec<usize>,
}

impl Structure {
    pub fn analyze(a: &SymMatrix) -> Self {
        let natural: Vec<usize> = (0..a.dim()).collect();
        let rcm = reverse_cuthill_mckee(a);
        let env_nat = envelope_size(a, &natural);
        let env_rcm = envelope_size(a, &rcm);
        let perm = if env_rcm < env_nat { rcm } else { natural };
        let mut inv = vec![0; perm.len()];
        for (k, &p) in perm.iter().enumerate() {
            inv[p] = k;
        }
        let mut first: Vec<usize> = (0..perm.len()).collect();
        for (k, &old) in perm.iter().enumerate() {
            for (j, _) in a.row(old) {
                first[k] = first[k].min(inv[j]);
            }
        }
        Structure { perm, inv, first }
    }

    pub fn envelope(&self) -> usize {
        self.first.iter().enumerate().map(|(i, &f)| i - f).sum()
    }

    fn bandwidth(&self) -> usize {
        self.first
            .iter()
            .enumerate()
            .map(|(i, &f)| i - f)
            .max()
            .unwrap_or(0)
    }
}

fn envelope_size(a: &SymMatrix, perm: &[usize]) -> usize {
    let mut inv = vec![0; perm.len()];
    for (k, &p) in perm.iter().enumerate() {
        inv[p] = k;
    }
    perm.iter()
        .enumerate()
        .map(|(k, &old)| k - a.row(old).map(|(j, _)| inv[j]).min().unwrap_or(k).min(k))
        .sum()
}

fn reverse_cuthill_mckee(a: &SymMatrix) -> Vec<usize> {
    let n = a.dim();
    let degree: Vec<usize> = (0..n)
        .map(|i| a.row(i).filter(|&(j, _)| j != i).count())
        .collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let start = (0..n)
            .filter(|&i| !visited[i])
            .min_by_key(|&i| degree[i])
            .unwrap();
        let root = pseudo_peripheral(a, start, &visited);
        visited[root] = true;
        let mut head = order.len();
        order.push(root);
        while head < order.len() {
            let v = order[head];
            head += 1;
            let mut nbrs: Vec<usize> = a.row(v).map(|(j, _)| j).filter(|&j| !visited[j]).collect();
            nbrs.sort_by_key(|&j| degree[j]);
            for j in nbrs {
                visited[j] = true;
                order.push(j);
            }
        }
    }
    order.reverse();
    order
}

fn pseudo_peripheral(a: &SymMatrix, start: usize, blocked: &[bool]) -> usize {
    let mut root = start;
    let mut depth = 0;
    for _ in 0..8 {
        let levels = bfs_levels(a, root, blocked);
        let max_level = *levels.iter().flatten().max().unwrap_or(&0);
        if max_level <= depth && depth > 0 {
            break;
        }
        depth = max_level;
        root = levels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == Some(max_level))
            .map(|(i, _)| i)
            .min_by_key(|&i| a.row(i).count())
            .unwrap_or(root);
    }
    root
}

fn bfs_levels(a: &SymMatrix, root: usize, blocked: &[bool]) -> Vec<Option<usize>> {
    let mut level = vec![None; a.dim()];
    level[root] = Some(0);
    let mut queue = std::collections::VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        let lv = level[v].unwrap();
        for (j, _) in a.row(v) {
            if level[j].is_none() && !blocked[j] {
                level[j] = Some(lv + 1);
                queue.push_back(j);
            }
        }
    }
    level
}

/// Reusable factorization of `z·I − A` for one complex shift `z`.
#[derive(Debug, Clone)]
pub struct ShiftedFactorization {
    shift: Complex64,
    perm: Vec<usize>,
    inner: Factor,
}

#[derive(Debug, Clone)]
enum Factor {
    Ldlt(EnvelopeLdlt),
    Lu(BandLu),
}

/// Factorizes `z·I − A`.
pub fn factorize_shifted(z: Complex64, a: &dyn SymmetricOperator) -> Result<ShiftedFactorization> {
    let structure = Structure::analyze(a.real_part());
    ShiftedFactorization::with_structure(z, a, &structure)
}

impl ShiftedFactorization {
    pub fn with_structure(
        z: Complex64,
        a: &dyn SymmetricOperator,
        structure: &Structure,
    ) -> Result<Self> {
        let ldlt = match EnvelopeLdlt::factor(z, a, structure) {
            Ok(f) => f,
            // A zero pivot without pivoting does not imply singularity.
            Err(Error::SingularPivot { .. }) => return Self::pivoted(z, a, structure),
            Err(e) => return Err(e),
        };
        let mut fact = ShiftedFactorization {
            shift: z,
            perm: structure.perm.clone(),
            inner: Factor::Ldlt(ldlt),
        };
        let err = fact.probe_error(a);
        if err > PROBE_TOL {
            if let Ok(candidate) = Self::pivoted(z, a, structure) {
                if candidate.probe_error(a) < err {
                    fact = candidate;
                }
            }
        }
        Ok(fact)
    }

    fn pivoted(z: Complex64, a: &dyn SymmetricOperator, structure: &Structure) -> Result<Self> {
        let lu = BandLu::factor(z, a, structure)?;
        Ok(ShiftedFactorization {
            shift: z,
            perm: structure.perm.clone(),
            inner: Factor::Lu(lu),
        })
    }

    pub fn shift(&self) -> Complex64 {
        self.shift
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn is_pivoted(&self) -> bool {
        matches!(self.inner, Factor::Lu(_))
    }

    /// Solves `(z·I − A) x = b`.
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let mut work: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        match &self.inner {
            Factor::Ldlt(f) => f.solve_in_place(&mut work),
            Factor::Lu(f) => f.solve_in_place(&mut work),
        }
        let mut x = vec![Complex64::new(0.0, 0.0); b.len()];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = work[k];
        }
        x
    }

    fn probe_error(&self, a: &dyn SymmetricOperator) -> f64 {
        let n = self.dim();
        let v: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new((0.7 * i as f64 + 0.3).cos(), (1.3 * i as f64 + 0.1).sin()))
            .collect();
        let mut av = vec![Complex64::new(0.0, 0.0); n];
        a.apply(&v, &mut av);
        let b: Vec<Complex64> = v
            .iter()
            .zip(&av)
            .map(|(vi, ai)| self.shift * vi - ai)
            .collect();
        let x = self.solve(&b);
        let num: f64 = x.iter().zip(&v).map(|(a, b)| (a - b).norm_sqr()).sum();
        let den: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        (num / den).sqrt()
    }
}

fn shifted_entries(
    z: Complex64,
    a: &dyn SymmetricOperator,
    old_row: usize,
) -> impl Iterator<Item = (usize, Complex64)> + '_ {
    let extra = a.diagonal_shift(old_row);
    a.real_part().row(old_row).map(move |(j, v)| {
        if j == old_row {
            (j, z - v - extra)
        } else {
            (j, Complex64::new(-v, 0.0))
        }
    })
}

/// Unpivoted envelope `LDLᵀ` of a complex symmetric matrix.
#[derive(Debug, Clone)]
struct EnvelopeLdlt {
    first: Vec<usize>,
    start: Vec<usize>,
    l: Vec<Complex64>,
    d: Vec<Complex64>,
}

impl EnvelopeLdlt {
    fn factor(z: Complex64, a: &dyn SymmetricOperator, s: &Structure) -> Result<Self> {
        let n = s.perm.len();
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for i in 0..n {
            start.push(start[i] + (i - s.first[i]));
        }
        let mut l = vec![Complex64::new(0.0, 0.0); start[n]];
        let mut d = vec![Complex64::new(0.0, 0.0); n];
        let mut scale = 0.0f64;
        for i in 0..n {
            for (j, v) in shifted_entries(z, a, s.perm[i]) {
                let jn = s.inv[j];
                scale = scale.max(v.norm());
                if jn < i {
                    l[start[i] + jn - s.first[i]] = v;
                } else if jn == i {
                    d[i] = v;
                }
            }
        }
        let tiny = scale * 4.0 * f64::EPSILON;
        for i in 0..n {
            let fi = s.first[i];
            let (before, rest) = l.split_at_mut(start[i]);
            let row_i = &mut rest[..i - fi];
            // g_ij = a_ij − Σ_k g_ik l_jk
            for j in fi..i {
                let fj = s.first[j];
                let k0 = fi.max(fj);
                let row_j = &before[start[j]..start[j] + (j - fj)];
                let mut acc = Complex64::new(0.0, 0.0);
                for k in k0..j {
                    acc += row_i[k - fi] * row_j[k - fj];
                }
                row_i[j - fi] -= acc;
            }
            let mut di = d[i];
            for j in fi..i {
                let g = row_i[j - fi];
                let lij = g / d[j];
                di -= g * lij;
                row_i[j - fi] = lij;
            }
            if di.norm() <= tiny || !di.is_finite() {
                return Err(Error::SingularPivot {
                    row: s.perm[i],
                    shift: z,
                });
            }
            d[i] = di;
        }
        Ok(EnvelopeLdlt {
            first: s.first.clone(),
            start,
            l,
            d,
        })
    }

    fn solve_in_place(&self, x: &mut [Complex64]) {
        let n = x.len();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.l[self.start[i]..self.start[i + 1]];
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, lik) in row.iter().enumerate() {
                acc += lik * x[fi + k];
            }
            x[i] -= acc;
        }
        for (xi, di) in x.iter_mut().zip(&self.d) {
            *xi /= di;
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let xi = x[i];
            let row = &self.l[self.start[i]..self.start[i + 1]];
            for (k, lik) in row.iter().enumerate() {
                x[fi + k] -= lik * xi;
            }
        }
    }
}

/// Band LU with partial pivoting, LAPACK `gbtrf` layout.
#[derive(Debug, Clone)]
struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    ab: Vec<Complex64>,
    ipiv: Vec<usize>,
}

impl BandLu {
    fn factor(z: Complex64, a: &dyn SymmetricOperator, s: &Structure) -> Result<Self> {
        let n = s.perm.len();
        let kl = s.bandwidth();
        let ku = kl;
        let ldab = 2 * kl + ku + 1;
        let kv = kl + ku;
        let mut ab = vec![Complex64::new(0.0, 0.0); ldab * n];
        let mut scale = 0.0f64;
        for i in 0..n {
            for (j, v) in shifted_entries(z, a, s.perm[i]) {
                let jn = s.inv[j];
                scale = scale.max(v.norm());
                ab[kv + i - jn + jn * ldab] = v;
            }
        }
        let idx = |r: usize, c: usize| kv + r - c + c * ldab;
        let tiny = scale * 4.0 * f64::EPSILON;
        let mut ipiv = vec![0; n];
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut jp = 0;
            let mut best = -1.0;
            for p in 0..=km {
                let v = ab[kv + p + j * ldab].norm();
                if v > best {
                    best = v;
                    jp = p;
                }
            }
            ipiv[j] = j + jp;
            if best <= tiny {
                return Err(Error::SingularPivot {
                    row: s.perm[j],
                    shift: z,
                });
            }
            ju = ju.max((j + ku + jp).min(n - 1));
            if jp != 0 {
                for c in j..=ju {
                    ab.swap(idx(j, c), idx(j + jp, c));
                }
            }
            let piv = ab[kv + j * ldab];
            for p in 1..=km {
                ab[kv + p + j * ldab] /= piv;
            }
            for c in j + 1..=ju {
                let u = ab[idx(j, c)];
                if u != Complex64::new(0.0, 0.0) {
                    for p in 1..=km {
                        let m = ab[kv + p + j * ldab];
                        ab[idx(j + p, c)] -= m * u;
                    }
                }
            }
        }
        Ok(BandLu {
            n,
            kl,
            ku,
            ab,
            ipiv,
        })
    }

    fn solve_in_place(&self, b: &mut [Complex64]) {
        let n = self.n;
        let ldab = 2 * self.kl + self.ku + 1;
        let kv = self.kl + self.ku;
        for j in 0..n.saturating_sub(1) {
            let km = self.kl.min(n - 1 - j);
            let l = self.ipiv[j];
            if l != j {
                b.swap(l, j);
            }
            let bj = b[j];
            for p in 1..=km {
                b[j + p] -= self.ab[kv + p + j * ldab] * bj;
            }
        }
        for j in (0..n).rev() {
            b[j] /= self.ab[kv + j * ldab];
            let bj = b[j];
            let lo = j.saturating_sub(kv);
            for (i, bi) in b.iter_mut().enumerate().take(j).skip(lo) {
                *bi -= self.ab[kv + i - j + j * ldab] * bj;
            }
        }
    }
}

/// Number of eigenvalues of the real symmetric `a` strictly below `sigma`
/// (Sylvester inertia of `a − σI`).
pub fn inertia_below(a: &SymMatrix, sigma: f64) -> Result<usize> {
    let structure = Structure::analyze(a);
    inertia_with_structure(a, sigma, &structure)
}

pub fn inertia_with_structure(a: &SymMatrix, sigma: f64, structure: &Structure) -> Result<usize> {
    let mut shift = sigma;
    for attempt in 0..4 {
        // d of σI − A has the opposite sign convention: count positive pivots.
        match EnvelopeLdlt::factor(Complex64::new(shift, 0.0), a, structure) {
            Ok(f) => return Ok(f.d.iter().filter(|d| d.re > 0.0).count()),
            Err(_) if attempt < 3 => {
                shift = sigma + 1e-12 * (1.0 + sigma.abs()) * (attempt + 1) as f64
            }
            Err(e) => return Err(e),
        }
    }
    unreachable!()
}
