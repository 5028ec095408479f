//! Filtered subspace iteration with Rayleigh–Ritz extraction.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::contour::{build_circle_filter, contains, RationalFilter, SearchRegion};
use crate::numerics::vector::{inner, norm};
use crate::numerics::{
    inertia_with_structure, orthonormalize, small_dense_eig, ComplexVector, ShiftedFactorization,
    Structure, SymMatrix, SymmetricOperator,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeastConfig {
    pub m: usize,
    pub max_iters: usize,
    pub ritz_tol: f64,
    pub rng_seed: u64,
    pub expand_factor: f64,
}

impl Default for FeastConfig {
    fn default() -> Self {
        FeastConfig {
            m: 16,
            max_iters: 20,
            ritz_tol: 1e-10,
            rng_seed: 7,
            expand_factor: 1.5,
        }
    }
}

impl FeastConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m < 4 {
            return Err(Error::invalid(format!(
                "subspace dimension m must be at least 4, got {}",
                self.m
            )));
        }
        if !(self.ritz_tol > 0.0) {
            return Err(Error::invalid(format!(
                "ritz_tol must be positive, got {}",
                self.ritz_tol
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be positive"));
        }
        if !(self.expand_factor > 1.0) {
            return Err(Error::invalid(format!(
                "expand_factor must exceed 1, got {}",
                self.expand_factor
            )));
        }
        Ok(())
    }
}

/// Approximate eigenpair with a unit (weighted) vector.
#[derive(Debug, Clone)]
pub struct RitzPair {
    pub value: Complex64,
    pub vector: ComplexVector,
    /// `‖A v − θ v‖ / |θ|`.
    pub residual_rel: f64,
    /// False when the residual is above tolerance at the final iteration.
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub index: usize,
    pub value: Complex64,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct FeastOutput {
    pub pairs: Vec<RitzPair>,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<TraceRow>,
}

/// Factorizes `z·I − A` with a fallback perturbation when `z` hits the
/// spectrum.
pub(crate) fn factorize_pole(
    z: Complex64,
    op: &dyn SymmetricOperator,
    structure: &Structure,
) -> Result<ShiftedFactorization> {
    let mut shift = z;
    let mut last = None;
    for _ in 0..4 {
        match ShiftedFactorization::with_structure(shift, op, structure) {
            Ok(f) => return Ok(f),
            Err(e @ Error::SingularPivot { .. }) => {
                shift += 1e-8 * (1.0 + shift.norm());
                last = Some(e);
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap())
}

/// `Σ_k w_k (z_k I − A)⁻¹` with every pole factorized once.
///
/// For real symmetric `A` and a filter whose poles come in conjugate pairs
/// with conjugate weights, only the upper half-plane poles are factorized
/// and the real part is doubled; blocks must then be real.
pub struct FilteredOperator {
    weights: Vec<Complex64>,
    factors: Vec<ShiftedFactorization>,
    conjugate_pairs: bool,
}

impl FilteredOperator {
    pub fn new(filter: &RationalFilter, op: &dyn SymmetricOperator) -> Result<Self> {
        let structure = Structure::analyze(op.real_part());
        Self::with_structure(filter, op, &structure, false)
    }

    fn with_structure(
        filter: &RationalFilter,
        op: &dyn SymmetricOperator,
        structure: &Structure,
        conjugate_pairs: bool,
    ) -> Result<Self> {
        let selected: Vec<(Complex64, Complex64)> = filter
            .poles
            .iter()
            .zip(&filter.weights)
            .filter(|(z, _)| !conjugate_pairs || z.im > 0.0)
            .map(|(z, w)| (*z, *w))
            .collect();
        let factors = selected
            .par_iter()
            .map(|(z, _)| factorize_pole(*z, op, structure))
            .collect::<Result<Vec<_>>>()?;
        Ok(FilteredOperator {
            weights: selected.into_iter().map(|(_, w)| w).collect(),
            factors,
            conjugate_pairs,
        })
    }

    pub fn apply(&self, block: &[ComplexVector]) -> Vec<ComplexVector> {
        let n = block.first().map_or(0, |v| v.len());
        let zero = || vec![vec![Complex64::new(0.0, 0.0); n]; block.len()];
        let sum = self
            .factors
            .par_iter()
            .zip(self.weights.par_iter())
            .map(|(f, w)| {
                block
                    .iter()
                    .map(|y| {
                        let x = f.solve(y);
                        if self.conjugate_pairs {
                            x.iter()
                                .map(|xi| Complex64::new(2.0 * (w * xi).re, 0.0))
                                .collect()
                        } else {
                            x.iter().map(|xi| w * xi).collect()
                        }
                    })
                    .collect::<Vec<ComplexVector>>()
            })
            .reduce(zero, |mut acc, part| {
                for (a, p) in acc.iter_mut().zip(part) {
                    for (ai, pi) in a.iter_mut().zip(p) {
                        *ai += pi;
                    }
                }
                acc
            });
        sum
    }
}

fn random_block(rng: &mut ChaCha8Rng, k: usize, n: usize, real: bool) -> Vec<ComplexVector> {
    (0..k)
        .map(|_| {
            (0..n)
                .map(|_| {
                    Complex64::new(
                        rng.gen_range(-1.0..1.0),
                        if real { 0.0 } else { rng.gen_range(-1.0..1.0) },
                    )
                })
                .collect()
        })
        .collect()
}

fn apply_op(op: &dyn SymmetricOperator, v: &[Complex64]) -> ComplexVector {
    let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
    op.apply(v, &mut out);
    out
}

/// Selection rules for one subspace iteration run.
struct Selection<'a> {
    /// Ritz values tracked for convergence.
    working: &'a dyn Fn(Complex64) -> bool,
    /// Ritz values returned.
    report: &'a dyn Fn(Complex64) -> bool,
    /// Exact number of eigenvalues expected, when known.
    expected: Option<usize>,
}

fn subspace_iteration(
    op: &dyn SymmetricOperator,
    weight: f64,
    filtered: &FilteredOperator,
    select: Selection<'_>,
    cfg: &FeastConfig,
    real: bool,
) -> Result<FeastOutput> {
    cfg.validate()?;
    let n = op.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut m = cfg.m.min(n);
    let mut y = random_block(&mut rng, m, n, real);
    let mut trace = Vec::new();
    let mut total_iters = 0;
    loop {
        let mut prev_inside: Option<usize> = None;
        let mut expand = false;
        let mut last: Vec<RitzPair> = Vec::new();
        let mut converged = false;
        for it in 1..=cfg.max_iters {
            total_iters += 1;
            let x = filtered.apply(&y);
            let (q, rank) = match orthonormalize(weight, x) {
                Ok(v) => v,
                Err(Error::RankZero) => (Vec::new(), 0),
                Err(e) => return Err(e),
            };
            if rank == 0 {
                return Ok(FeastOutput {
                    pairs: Vec::new(),
                    iterations: total_iters,
                    converged: true,
                    trace,
                });
            }
            let aq: Vec<ComplexVector> = q.par_iter().map(|v| apply_op(op, v)).collect();
            let h = DMatrix::from_fn(rank, rank, |i, j| inner(weight, &q[i], &aq[j]));
            let h = if real {
                let re = h.map(|z| Complex64::new(z.re, 0.0));
                (&re + re.transpose()) * Complex64::new(0.5, 0.0)
            } else if op.is_selfadjoint() {
                (&h + h.adjoint()) * Complex64::new(0.5, 0.0)
            } else {
                h
            };
            let eig = small_dense_eig(&h)?;
            let mut pairs = Vec::with_capacity(rank);
            for p in &eig {
                let mut v = vec![Complex64::new(0.0, 0.0); n];
                let mut av = vec![Complex64::new(0.0, 0.0); n];
                for (c, (qi, aqi)) in p.vector.iter().zip(q.iter().zip(&aq)) {
                    for k in 0..n {
                        v[k] += c * qi[k];
                        av[k] += c * aqi[k];
                    }
                }
                let nv = norm(weight, &v);
                let r: ComplexVector = av.iter().zip(&v).map(|(a, b)| a - p.value * b).collect();
                let denom = if p.value.norm() > 0.0 {
                    p.value.norm()
                } else {
                    1.0
                };
                let residual_rel = norm(weight, &r) / nv / denom;
                v.iter_mut().for_each(|z| *z /= nv);
                if real {
                    v.iter_mut().for_each(|z| z.im = 0.0);
                }
                pairs.push(RitzPair {
                    value: p.value,
                    vector: v,
                    residual_rel,
                    converged: residual_rel <= cfg.ritz_tol,
                });
            }
            let inside: Vec<usize> = (0..pairs.len())
                .filter(|&i| (select.working)(pairs[i].value))
                .collect();
            for &i in &inside {
                trace.push(TraceRow {
                    iter: total_iters,
                    index: i,
                    value: pairs[i].value,
                    residual: pairs[i].residual_rel,
                });
            }
            if inside.len() >= rank && rank == m && m < n {
                expand = true;
                last = pairs;
                break;
            }
            let all_small = inside.iter().all(|&i| pairs[i].converged);
            let count_ok = select
                .expected
                .map_or(prev_inside == Some(inside.len()), |e| e == inside.len());
            converged = it >= 2 && all_small && count_ok;
            prev_inside = Some(inside.len());
            y = pairs.iter().map(|p| p.vector.clone()).collect();
            last = pairs;
            if converged {
                break;
            }
        }
        if expand {
            let new_m = ((cfg.expand_factor * m as f64).ceil() as usize).min(n);
            let mut block: Vec<ComplexVector> = last.into_iter().map(|p| p.vector).collect();
            block.extend(random_block(
                &mut rng,
                new_m - block.len().min(new_m),
                n,
                real,
            ));
            block.truncate(new_m);
            m = new_m;
            y = block;
            continue;
        }
        let mut pairs: Vec<RitzPair> = last
            .into_iter()
            .filter(|p| (select.report)(p.value))
            .collect();
        pairs.sort_by(|a, b| {
            a.value
                .re
                .total_cmp(&b.value.re)
                .then(a.value.im.total_cmp(&b.value.im))
        });
        return Ok(FeastOutput {
            pairs,
            iterations: total_iters,
            converged,
            trace,
        });
    }
}

/// Eigenpairs of the normal operator `op` inside the stadium `region`.
///
/// Ritz values are tracked within margin `0.1r` of the region and all of
/// them are returned; callers apply the exact region test.
pub fn feast_solve(
    op: &dyn SymmetricOperator,
    weight: f64,
    region: &SearchRegion,
    n_poles: usize,
    cfg: &FeastConfig,
) -> Result<FeastOutput> {
    let filter = crate::contour::build_filter(region, n_poles)?;
    let filtered = FilteredOperator::new(&filter, op)?;
    feast_solve_filtered(op, weight, region, &filtered, cfg)
}

pub fn feast_solve_filtered(
    op: &dyn SymmetricOperator,
    weight: f64,
    region: &SearchRegion,
    filtered: &FilteredOperator,
    cfg: &FeastConfig,
) -> Result<FeastOutput> {
    let margin = 0.1 * region.r();
    let sel = |z: Complex64| contains(region, z, margin);
    subspace_iteration(
        op,
        weight,
        filtered,
        Selection {
            working: &sel,
            report: &sel,
            expected: None,
        },
        cfg,
        false,
    )
}

/// Eigenpairs of the real symmetric `l` with eigenvalue in `[a, b]`.
///
/// The interval is cut into pieces holding a bounded number of eigenvalues
/// (counted by inertia); each piece is searched with a circular contour of
/// `n_poles` poles.
pub fn eigs_selfadjoint_interval(
    l: &SymMatrix,
    weight: f64,
    a: f64,
    b: f64,
    n_poles: usize,
    cfg: &FeastConfig,
) -> Result<Vec<RitzPair>> {
    if !(a < b) {
        return Err(Error::invalid(format!(
            "interval needs a < b, got [{a}, {b}]"
        )));
    }
    cfg.validate()?;
    let structure = Structure::analyze(l);
    let count = |x: f64| inertia_with_structure(l, x, &structure);
    const MAX_PER_PIECE: usize = 24;
    let mut stack = vec![(a, b, count(a)?, count(b)?)];
    let mut pieces = Vec::new();
    while let Some((lo, hi, clo, chi)) = stack.pop() {
        let k = chi - clo;
        if k == 0 {
            continue;
        }
        if k > MAX_PER_PIECE && hi - lo > 1e-9 * (1.0 + hi.abs()) {
            let mid = 0.5 * (lo + hi);
            let cm = count(mid)?;
            stack.push((mid, hi, cm, chi));
            stack.push((lo, mid, clo, cm));
        } else {
            pieces.push((lo, hi, k));
        }
    }
    pieces.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut out = Vec::new();
    for (lo, hi, k) in pieces {
        let filter = build_circle_filter(0.5 * (lo + hi), 0.5 * (hi - lo), n_poles)?;
        let filtered = FilteredOperator::with_structure(&filter, l, &structure, true)?;
        let piece_cfg = FeastConfig {
            m: cfg.m.max((1.5 * k as f64).ceil() as usize + 4),
            ..*cfg
        };
        let sel = |z: Complex64| z.re >= lo && z.re < hi;
        let res = subspace_iteration(
            l,
            weight,
            &filtered,
            Selection {
                working: &sel,
                report: &sel,
                expected: Some(k),
            },
            &piece_cfg,
            true,
        )
        .map_err(|e| e.context(format!("interval [{lo}, {hi}]")))?;
        out.extend(res.pairs);
    }
    Ok(out)
}
