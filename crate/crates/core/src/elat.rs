//! The localization driver: search the shifted operator for eigenvalues in
//! the stadium region, refine each candidate back to an eigenpair of `L`,
//! and accept the refined pair when its eigenvector is localized in `R`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analytic1d::{complex_eigs, measures, real_eigs, ComplexPotential};
use crate::contour::{contains, split_region, SearchRegion};
use crate::domain::{shift_operator, DiscreteSpace, IndicatorVector, PiecewisePotential};
use crate::feast::{feast_solve, FeastConfig};
use crate::landscape::solve_landscape;
use crate::localization::{delta_tau, normalize_rotation};
use crate::numerics::vector::{inner, norm};
use crate::numerics::{
    factorize_shifted, inertia_with_structure, orthonormalize, small_dense_eig, ComplexVector,
    ShiftedFactorization, Structure, SymMatrix,
};
use crate::{Error, Result};

/// Empty-search certificate.
pub const EMPTY_CERTIFICATE: &str = "no eigenpairs with λ∈[a,b] and δ ≤ δ*";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElatConfig {
    /// Poles of each stadium filter.
    pub n_poles: usize,
    pub feast: FeastConfig,
    /// Largest aspect ratio of a searched sub-region; `None` searches the
    /// whole region at once.
    pub max_aspect: Option<f64>,
    pub post: PostConfig,
    /// Relative eigenvalue tolerance for merging duplicate candidates.
    pub dedup_tol: f64,
}

impl Default for ElatConfig {
    fn default() -> Self {
        ElatConfig {
            n_poles: 32,
            feast: FeastConfig::default(),
            max_aspect: Some(5.0),
            post: PostConfig::default(),
            dedup_tol: 1e-6,
        }
    }
}

/// Settings of the inverse-iteration refinement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PostConfig {
    /// Residual tolerance, relative to `1 + |λ̃|`.
    pub tol: f64,
    pub block_size: usize,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for PostConfig {
    fn default() -> Self {
        PostConfig {
            tol: 1e-8,
            block_size: 2,
            max_iters: 25,
            seed: 7,
        }
    }
}

impl PostConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=8).contains(&self.block_size) {
            return Err(Error::invalid(format!(
                "block_size must be in 1..=8, got {}",
                self.block_size
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::invalid(format!(
                "pp_tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid(
                "post-processing needs at least one iteration",
            ));
        }
        Ok(())
    }
}

/// A finite-difference problem: grid, Dirichlet operator `L` and the mask of `R`.
#[derive(Debug, Clone)]
pub struct DiscreteProblem {
    pub space: DiscreteSpace,
    pub l: SymMatrix,
    pub mask: IndicatorVector,
}

/// A 1D piecewise-constant problem solved by the transfer-matrix oracle.
#[derive(Debug, Clone)]
pub struct AnalyticProblem {
    pub potential: PiecewisePotential,
    /// Zero-based pieces forming `R`.
    pub region_pieces: Vec<usize>,
}

#[derive(Debug, Clone)]
pub enum Problem {
    Discrete(DiscreteProblem),
    Analytic(AnalyticProblem),
}

impl Problem {
    fn backend(&self) -> &'static str {
        match self {
            Problem::Discrete(_) => "fd",
            Problem::Analytic(_) => "analytic",
        }
    }

    fn weight(&self) -> f64 {
        match self {
            Problem::Discrete(p) => p.space.weight(),
            Problem::Analytic(_) => 1.0,
        }
    }
}

/// An eigenpair of `L_s` found inside the search region.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub mu: Complex64,
    /// Rotation-normalized unit eigenvector; empty for the analytic backend.
    pub phi: ComplexVector,
    pub alpha: f64,
    /// `δ(φ, R)` and `τ(φ, R)`.
    pub delta: f64,
    pub tau: f64,
    /// Index of the sub-region that produced it.
    pub source_region: usize,
    /// Relative Ritz residual (zero for oracle roots).
    pub residual: f64,
    pub converged: bool,
}

/// One refined eigenpair of `L`.
#[derive(Debug, Clone)]
pub struct RefinedPair {
    pub lambda: f64,
    /// Unit (weighted) vector.
    pub psi: Vec<f64>,
    /// `‖Lψ̃ − λ̃ψ̃‖ / (1 + |λ̃|)`.
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct PostProcessed {
    /// Ritz pairs of the final block, nearest to the shift first.
    pub pairs: Vec<RefinedPair>,
    /// Inverse iterations performed; zero when the input already passed.
    pub iterations: usize,
    /// All pairs below tolerance.
    pub converged: bool,
}

impl PostProcessed {
    /// Number of Ritz values within `tol·(1 + |λ̃|)` of the leading one.
    /// Above one, the eigenvector is not determined by the data: any
    /// combination within the cluster has a residual below tolerance.
    pub fn cluster_size(&self, tol: f64) -> usize {
        let lead = self.pairs[0].lambda;
        self.pairs
            .iter()
            .filter(|p| (p.lambda - lead).abs() <= tol * (1.0 + lead.abs()))
            .count()
    }
}

/// Decision for one candidate.
#[derive(Debug, Clone)]
pub struct Outcome {
    /// Index into [`ElatReport::candidates`].
    pub candidate: usize,
    pub lambda: f64,
    /// Refined unit vector; empty for the analytic backend.
    pub psi: Vec<f64>,
    pub delta: f64,
    pub tau: f64,
    pub residual: f64,
    pub iterations: usize,
    pub accepted: bool,
    /// Empty when accepted.
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportParams {
    pub a: f64,
    pub b: f64,
    pub s: f64,
    pub delta_star: f64,
    pub backend: &'static str,
    pub sub_regions: usize,
    pub searched_regions: usize,
}

#[derive(Debug, Clone)]
pub struct ElatReport {
    pub params: ReportParams,
    /// Sorted by `Re μ`.
    pub candidates: Vec<Candidate>,
    /// One per candidate, sorted by `λ̃`.
    pub outcomes: Vec<Outcome>,
    /// Set when no candidate was found.
    pub certificate: Option<String>,
}

impl ElatReport {
    pub fn accepted(&self) -> impl Iterator<Item = &Outcome> {
        self.outcomes.iter().filter(|o| o.accepted)
    }

    pub fn rejected(&self) -> impl Iterator<Item = &Outcome> {
        self.outcomes.iter().filter(|o| !o.accepted)
    }
}

/// Finds every eigenpair `(λ, ψ)` of `L` with `λ` near `[a, b]` and
/// `δ(ψ, R) ≤ δ*`, by way of the eigenvalues of `L_s` in `U(a, b, s, δ*)`.
pub fn localize(
    problem: &Problem,
    a: f64,
    b: f64,
    s: f64,
    delta_star: f64,
    cfg: &ElatConfig,
) -> Result<ElatReport> {
    cfg.post.validate()?;
    let found = find_candidates(problem, a, b, s, delta_star, cfg)?;
    let weight = problem.weight();
    let candidates = found.candidates;
    let params = ReportParams {
        a,
        b,
        s,
        delta_star,
        backend: problem.backend(),
        sub_regions: found.sub_regions,
        searched_regions: found.searched_regions,
    };
    if candidates.is_empty() {
        return Ok(ElatReport {
            params,
            candidates,
            outcomes: Vec::new(),
            certificate: Some(EMPTY_CERTIFICATE.to_string()),
        });
    }
    let mut outcomes = match problem {
        Problem::Discrete(p) => discrete_outcomes(p, &candidates, delta_star, &cfg.post)?,
        Problem::Analytic(p) => analytic_outcomes(p, &candidates, s, delta_star)?,
    };
    outcomes.sort_by(|x, y| {
        x.lambda
            .total_cmp(&y.lambda)
            .then(x.candidate.cmp(&y.candidate))
    });
    mark_duplicates(&mut outcomes, weight, cfg.dedup_tol);
    Ok(ElatReport {
        params,
        candidates,
        outcomes,
        certificate: None,
    })
}

/// Eigenpairs of `L_s` in the search region, before refinement.
#[derive(Debug, Clone)]
pub struct CandidateSet {
    /// Deduplicated, sorted by `Re μ`.
    pub candidates: Vec<Candidate>,
    pub sub_regions: usize,
    /// Sub-regions actually searched; the rest hold no eigenvalue of `L_s`.
    pub searched_regions: usize,
}

/// Searches every sub-region of `U(a, b, s, δ*)` and merges the results.
pub fn find_candidates(
    problem: &Problem,
    a: f64,
    b: f64,
    s: f64,
    delta_star: f64,
    cfg: &ElatConfig,
) -> Result<CandidateSet> {
    let whole = SearchRegion::new(a, b, s, delta_star)?;
    cfg.feast.validate()?;
    let regions = match cfg.max_aspect {
        Some(max_aspect) => split_region(a, b, s, delta_star, max_aspect)?,
        None => vec![whole],
    };
    let (candidates, searched) = match problem {
        Problem::Discrete(p) => discrete_candidates(p, s, &regions, cfg)?,
        Problem::Analytic(p) => analytic_candidates(p, s, &regions)?,
    };
    Ok(CandidateSet {
        candidates: dedup(candidates, problem.weight(), cfg.dedup_tol),
        sub_regions: regions.len(),
        searched_regions: searched,
    })
}

fn discrete_candidates(
    p: &DiscreteProblem,
    s: f64,
    regions: &[SearchRegion],
    cfg: &ElatConfig,
) -> Result<(Vec<Candidate>, usize)> {
    let weight = p.space.weight();
    let op = shift_operator(p.l.clone(), s, p.mask.clone())?;
    let structure = Structure::analyze(&p.l);
    let mut out = Vec::new();
    let mut searched = 0;
    for (k, region) in regions.iter().enumerate() {
        // An eigenvalue μ of L_s lies within s/2 of the spectrum of L in
        // real part, so a sub-region with no eigenvalue of L near it is empty.
        let lo = region.a - region.r() - 0.5 * s;
        let hi = region.b + region.r() + 0.5 * s;
        let count = inertia_with_structure(&p.l, hi, &structure)?
            - inertia_with_structure(&p.l, lo, &structure)?;
        if count == 0 {
            continue;
        }
        searched += 1;
        let found = feast_solve(&op, weight, region, cfg.n_poles, &cfg.feast)
            .map_err(|e| e.context(format!("sub-region {k} [{}, {}]", region.a, region.b)))?;
        for pair in found.pairs {
            if !contains(region, pair.value, 0.0) {
                continue;
            }
            let rotated = normalize_rotation(weight, &pair.vector)?;
            let (delta, tau) = delta_tau(weight, &rotated.phi, &p.mask)?;
            out.push(Candidate {
                mu: pair.value,
                phi: rotated.phi,
                alpha: rotated.alpha,
                delta,
                tau,
                source_region: k,
                residual: pair.residual_rel,
                converged: pair.converged,
            });
        }
    }
    Ok((out, searched))
}

fn analytic_candidates(
    p: &AnalyticProblem,
    s: f64,
    regions: &[SearchRegion],
) -> Result<(Vec<Candidate>, usize)> {
    let shifted = ComplexPotential::shifted(&p.potential, s, &p.region_pieces);
    let mut out = Vec::new();
    for (k, region) in regions.iter().enumerate() {
        let roots = complex_eigs(&p.potential, s, &p.region_pieces, region)
            .map_err(|e| e.context(format!("sub-region {k} [{}, {}]", region.a, region.b)))?;
        for mu in roots {
            let m = measures(&shifted, mu, s, &p.region_pieces)?;
            out.push(Candidate {
                mu,
                phi: Vec::new(),
                alpha: m.alpha,
                delta: m.delta,
                tau: m.tau,
                source_region: k,
                residual: 0.0,
                converged: true,
            });
        }
    }
    Ok((out, regions.len()))
}

fn discrete_outcomes(
    p: &DiscreteProblem,
    candidates: &[Candidate],
    delta_star: f64,
    post: &PostConfig,
) -> Result<Vec<Outcome>> {
    let weight = p.space.weight();
    let u = solve_landscape(&p.l).ok();
    candidates
        .par_iter()
        .enumerate()
        .map(|(k, c)| {
            let phi1: Vec<f64> = c.phi.iter().map(|z| z.re).collect();
            let cfg = PostConfig {
                seed: post.seed.wrapping_add(k as u64),
                ..*post
            };
            let refined = post_process(&p.l, weight, c.mu.re, &phi1, u.as_deref(), &cfg)
                .map_err(|e| e.context(format!("post-processing candidate {}", c.mu)))?;
            let best = &refined.pairs[0];
            let (ok, delta, tau) = accept(weight, &best.psi, &p.mask, delta_star)?;
            let converged = best.residual <= post.tol;
            let cluster = refined.cluster_size(post.tol);
            let reason = if !converged {
                format!("residual {:.3e} above pp_tol", best.residual)
            } else if cluster > 1 {
                format!("unresolved cluster of {cluster} eigenvalues within pp_tol")
            } else if !ok {
                format!("delta {delta:.8} above delta_star")
            } else {
                String::new()
            };
            Ok(Outcome {
                candidate: k,
                lambda: best.lambda,
                psi: best.psi.clone(),
                delta,
                tau,
                residual: best.residual,
                iterations: refined.iterations,
                accepted: ok && converged && cluster == 1,
                reason,
            })
        })
        .collect()
}

fn analytic_outcomes(
    p: &AnalyticProblem,
    candidates: &[Candidate],
    s: f64,
    delta_star: f64,
) -> Result<Vec<Outcome>> {
    let real = ComplexPotential::real(&p.potential);
    candidates
        .iter()
        .enumerate()
        .map(|(k, c)| {
            // |Re μ − λ| ≤ s·δ·τ for the matching eigenvalue of L; fall back
            // to the s/2 bound when rounding leaves the window empty.
            let mu1 = c.mu.re;
            let guard = 1e-9 * (1.0 + mu1.abs());
            let mut lambda = None;
            for half in [s * c.delta * c.tau + guard, 0.5 * s + guard] {
                let near = real_eigs(&p.potential, mu1 - half, mu1 + half)?;
                lambda = near
                    .into_iter()
                    .min_by(|x, y| (x - mu1).abs().total_cmp(&(y - mu1).abs()));
                if lambda.is_some() {
                    break;
                }
            }
            let Some(lambda) = lambda else {
                return Ok(Outcome {
                    candidate: k,
                    lambda: f64::NAN,
                    psi: Vec::new(),
                    delta: f64::NAN,
                    tau: f64::NAN,
                    residual: f64::NAN,
                    iterations: 0,
                    accepted: false,
                    reason: "no eigenvalue of L within s/2".to_string(),
                });
            };
            let m = measures(&real, Complex64::new(lambda, 0.0), 0.0, &p.region_pieces)?;
            let ok = m.delta <= delta_star;
            Ok(Outcome {
                candidate: k,
                lambda,
                psi: Vec::new(),
                delta: m.delta,
                tau: m.tau,
                residual: 0.0,
                iterations: 0,
                accepted: ok,
                reason: if ok {
                    String::new()
                } else {
                    format!("delta {:.8} above delta_star", m.delta)
                },
            })
        })
        .collect()
}

/// Two candidates that refine to the same eigenpair keep only the first
/// as a decision; the later one is rejected as a duplicate.
fn mark_duplicates(outcomes: &mut [Outcome], weight: f64, tol: f64) {
    for j in 1..outcomes.len() {
        for i in 0..j {
            if !outcomes[i].reason.starts_with("duplicate")
                && same_pair(&outcomes[i], &outcomes[j], weight, tol)
            {
                let first = outcomes[i].candidate;
                let o = &mut outcomes[j];
                o.accepted = false;
                o.reason = format!("duplicate of candidate {first}");
                break;
            }
        }
    }
}

fn same_pair(x: &Outcome, y: &Outcome, weight: f64, tol: f64) -> bool {
    if !((x.lambda - y.lambda).abs() <= tol * (1.0 + x.lambda.abs())) {
        return false;
    }
    if x.psi.is_empty() || y.psi.is_empty() {
        return true;
    }
    let dot: f64 = x.psi.iter().zip(&y.psi).map(|(p, q)| p * q).sum::<f64>() * weight;
    dot.abs() >= 0.99
}

/// Merges candidates with close eigenvalues and nearly parallel vectors,
/// keeping the one with the smaller residual; sorted by `Re μ`.
///
/// Candidates without vectors are merged on the eigenvalue alone.
pub fn dedup(candidates: Vec<Candidate>, weight: f64, tol_val: f64) -> Vec<Candidate> {
    let mut kept: Vec<Candidate> = Vec::with_capacity(candidates.len());
    for c in candidates {
        let twin = kept.iter().position(|k| {
            (k.mu - c.mu).norm() <= tol_val * (1.0 + c.mu.norm())
                && (k.phi.is_empty()
                    || c.phi.is_empty()
                    || inner(weight, &k.phi, &c.phi).norm() >= 0.99)
        });
        match twin {
            Some(i) if c.residual < kept[i].residual => kept[i] = c,
            Some(_) => {}
            None => kept.push(c),
        }
    }
    kept.sort_by(|x, y| {
        x.mu.re
            .total_cmp(&y.mu.re)
            .then(x.mu.im.total_cmp(&y.mu.im))
    });
    kept
}

/// Localization test `δ(ψ, R) ≤ δ*`, with the measures.
pub fn accept(
    weight: f64,
    psi: &[f64],
    mask: &IndicatorVector,
    delta_star: f64,
) -> Result<(bool, f64, f64)> {
    let v: ComplexVector = psi.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let (delta, tau) = delta_tau(weight, &v, mask)?;
    Ok((delta <= delta_star, delta, tau))
}

/// Block inverse iteration with the fixed shift `mu1`, started from `phi1`.
///
/// The block holds `phi1` plus `block_size − 1` extra vectors: the part of
/// the landscape function `u` orthogonal to `phi1` when given, then random
/// vectors. Each step solves with the reused factorization of `mu1·I − L`,
/// orthonormalizes and extracts Ritz pairs. The residual of the input is
/// checked first, so an input that already passes returns unchanged.
pub fn post_process(
    l: &SymMatrix,
    weight: f64,
    mu1: f64,
    phi1: &[f64],
    landscape: Option<&[f64]>,
    cfg: &PostConfig,
) -> Result<PostProcessed> {
    cfg.validate()?;
    let n = l.dim();
    if phi1.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: phi1.len(),
        });
    }
    let to_c = |v: &[f64]| -> ComplexVector { v.iter().map(|&x| Complex64::new(x, 0.0)).collect() };
    let start = to_c(phi1);
    let nrm = norm(weight, &start);
    if !(nrm > 0.0) || !nrm.is_finite() {
        return Err(Error::ZeroVector);
    }
    let psi0: Vec<f64> = phi1.iter().map(|x| x / nrm).collect();
    let res0 = residual(l, weight, mu1, &psi0);
    if res0 <= cfg.tol {
        return Ok(PostProcessed {
            pairs: vec![RefinedPair {
                lambda: mu1,
                psi: psi0,
                residual: res0,
            }],
            iterations: 0,
            converged: true,
        });
    }
    let fact = shifted_factor(l, mu1)?;
    let mut block = vec![to_c(&psi0)];
    if cfg.block_size > 1 {
        if let Some(u) = landscape.filter(|u| u.len() == n) {
            let uc = to_c(u);
            let c = inner(weight, &block[0], &uc);
            block.push(uc.iter().zip(&block[0]).map(|(x, p)| x - c * p).collect());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        while block.len() < cfg.block_size {
            block.push(
                (0..n)
                    .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0))
                    .collect(),
            );
        }
    }
    let mut pairs = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iters {
        iterations += 1;
        let solved: Vec<ComplexVector> = block
            .iter()
            .map(|v| {
                fact.solve(v)
                    .into_iter()
                    .map(|z| Complex64::new(z.re, 0.0))
                    .collect()
            })
            .collect();
        let (q, rank) = orthonormalize(weight, solved)?;
        let lq: Vec<ComplexVector> = q
            .iter()
            .map(|v| {
                let mut out = vec![Complex64::new(0.0, 0.0); n];
                l.mul_complex(v, &mut out);
                out
            })
            .collect();
        let h = DMatrix::from_fn(rank, rank, |i, j| {
            Complex64::new(inner(weight, &q[i], &lq[j]).re, 0.0)
        });
        let h = (&h + h.transpose()) * Complex64::new(0.5, 0.0);
        let eig = small_dense_eig(&h)?;
        pairs = eig
            .iter()
            .map(|p| {
                let mut psi = vec![0.0; n];
                for (c, qi) in p.vector.iter().zip(&q) {
                    for (acc, x) in psi.iter_mut().zip(qi) {
                        *acc += (c * x).re;
                    }
                }
                let nv = norm(weight, &to_c(&psi));
                psi.iter_mut().for_each(|x| *x /= nv);
                let lambda = p.value.re;
                RefinedPair {
                    lambda,
                    residual: residual(l, weight, lambda, &psi),
                    psi,
                }
            })
            .collect();
        pairs.sort_by(|x, y| (x.lambda - mu1).abs().total_cmp(&(y.lambda - mu1).abs()));
        block = pairs.iter().map(|p| to_c(&p.psi)).collect();
        if pairs.iter().all(|p| p.residual <= cfg.tol) {
            converged = true;
            break;
        }
    }
    Ok(PostProcessed {
        pairs,
        iterations,
        converged,
    })
}

/// `‖Lψ − λψ‖ / (1 + |λ|)` for a unit vector.
fn residual(l: &SymMatrix, weight: f64, lambda: f64, psi: &[f64]) -> f64 {
    let mut lpsi = vec![0.0; psi.len()];
    l.mul_real(psi, &mut lpsi);
    let sq: f64 = lpsi
        .iter()
        .zip(psi)
        .map(|(a, b)| (a - lambda * b).powi(2))
        .sum();
    (weight * sq).sqrt() / (1.0 + lambda.abs())
}

fn shifted_factor(l: &SymMatrix, mu1: f64) -> Result<ShiftedFactorization> {
    match factorize_shifted(Complex64::new(mu1, 0.0), l) {
        Err(Error::SingularPivot { .. }) => {
            let z = mu1 + 1e-10 * (1.0 + mu1.abs());
            factorize_shifted(Complex64::new(z, 0.0), l)
        }
        other => other,
    }
}
