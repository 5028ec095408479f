//! Acceptance criteria. Each test prints one `criterion NN PASS|FAIL` line
//! with its failing items and notes, then asserts. Run with
//! `cargo test --test acceptance -- --nocapture --test-threads=1` to see
//! the lines in order.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use elat::analytic1d::{
    complex_eigs, count_roots_circle, count_roots_stadium, measures, real_eigs, ComplexPotential,
    RootMeasures,
};
use elat::config::ProblemSpec;
use elat::contour::{build_filter, SearchRegion};
use elat::domain::{region_mask, PiecewisePotential, RegionSpec, ThreeBulb};
use elat::elat::{
    find_candidates, localize, AnalyticProblem, DiscreteProblem, ElatConfig, Problem,
};
use elat::feast::{eigs_selfadjoint_interval, FeastConfig};
use elat::landscape::{
    effective_potential_minima, estimate_eigenvalues, landscape_bound_check, solve_landscape,
};
use elat::localization::{delta_tau, normalize_rotation, residual_identity};
use elat::numerics::inertia_below;

struct Criterion {
    id: usize,
    title: &'static str,
    items: Vec<(bool, String)>,
    notes: Vec<String>,
}

impl Criterion {
    fn new(id: usize, title: &'static str) -> Self {
        Criterion {
            id,
            title,
            items: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, msg: impl Into<String>) {
        self.items.push((ok, msg.into()));
    }

    fn note(&mut self, msg: impl Into<String>) {
        self.notes.push(msg.into());
    }

    fn finish(self) {
        let ok = self.items.iter().all(|(ok, _)| *ok);
        let mut out = format!(
            "criterion {:>2} {} {} ({} checks)\n",
            self.id,
            if ok { "PASS" } else { "FAIL" },
            self.title,
            self.items.len()
        );
        for (_, msg) in self.items.iter().filter(|(ok, _)| !ok) {
            out += &format!("    fail: {msg}\n");
        }
        for n in &self.notes {
            out += &format!("    note: {n}\n");
        }
        print!("{out}");
        assert!(ok, "criterion {} failed", self.id);
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(x: f64, target: f64) -> f64 {
    (x - target).abs() / target.abs()
}

fn nearest<T: Copy>(items: &[T], key: impl Fn(T) -> f64) -> Option<T> {
    items
        .iter()
        .copied()
        .min_by(|x, y| key(*x).total_cmp(&key(*y)))
}

/// Four equal pieces on (0,1) with values 0, 80², 0, 400².
fn four_pieces() -> PiecewisePotential {
    PiecewisePotential::uniform(0.0, 1.0, vec![0.0, 6400.0, 0.0, 160000.0]).unwrap()
}

/// Two zero wells on (0,1/4) and (3/4,1) separated by a barrier of 80².
fn double_well() -> PiecewisePotential {
    PiecewisePotential::new(vec![0.0, 0.25, 0.75, 1.0], vec![0.0, 6400.0, 0.0]).unwrap()
}

/// `V ≡ 0` with a breakpoint at 1/4 so that `R = (0, 1/4)` is a piece.
fn free() -> PiecewisePotential {
    PiecewisePotential::new(vec![0.0, 0.25, 1.0], vec![0.0, 0.0]).unwrap()
}

fn region(a: f64, b: f64, s: f64, d: f64) -> SearchRegion {
    SearchRegion::new(a, b, s, d).unwrap()
}

fn shifted_measures(
    p: &PiecewisePotential,
    s: f64,
    pieces: &[usize],
    mu: Complex64,
) -> RootMeasures {
    measures(&ComplexPotential::shifted(p, s, pieces), mu, s, pieces).unwrap()
}

fn real_measures(p: &PiecewisePotential, pieces: &[usize], lambda: f64) -> RootMeasures {
    measures(&ComplexPotential::real(p), c(lambda, 0.0), 0.0, pieces).unwrap()
}

fn discretize_1d(p: &PiecewisePotential, pieces: &[usize], h: f64) -> DiscreteProblem {
    ProblemSpec::OneD {
        potential: p.clone(),
        region_pieces: pieces.to_vec(),
    }
    .discretize(h)
    .unwrap()
}

/// Rows `λ, δ(ψ), Re μ, Im μ, δ(φ)` at `s = 1` and `Re μ, Im μ` at `s = 100`.
type ReferenceRow = [f64; 7];

const REFERENCE_R3: [ReferenceRow; 6] = [
    [
        140.49323, 0.0324770, 140.49323, 0.99894524, 0.0324770, 140.49441, 99.894539,
    ],
    [
        561.35749, 0.0659934, 561.35749, 0.99564487, 0.0659934, 561.36244, 99.564551,
    ],
    [
        1260.5517, 0.1019069, 1260.5517, 0.98961499, 0.1019069, 1260.5640, 98.961665,
    ],
    [
        2233.8447, 0.1425062, 2233.8447, 0.97969199, 0.1425062, 2233.8708, 97.969580,
    ],
    [
        3472.5421, 0.1928871, 3472.5421, 0.96279456, 0.1928871, 3472.5974, 96.280425,
    ],
    [
        4954.5303, 0.2707494, 4954.5303, 0.92669479, 0.2707494, 4954.6877, 92.674005,
    ],
];

const REFERENCE_R4: [ReferenceRow; 6] = [
    [
        160158.93, 0.0577667, 160158.93, 0.99666301, 0.0577667, 160158.92, 99.667632,
    ],
    [
        160629.92, 0.1092483, 160629.92, 0.98806481, 0.1092483, 160629.94, 98.809982,
    ],
    [
        161389.73, 0.2332336, 161389.73, 0.94560213, 0.2332335, 161390.21, 94.613050,
    ],
    [
        163942.68, 0.2610104, 163942.68, 0.93187361, 0.2610103, 163942.71, 93.203093,
    ],
    [
        167673.57, 0.3716197, 167673.57, 0.86189881, 0.3716197, 167673.93, 86.221341,
    ],
    [
        170192.99, 0.4219290, 170192.99, 0.82197599, 0.4219289, 170192.51, 82.233071,
    ],
];

fn check_reference(crit: &mut Criterion, piece: usize, rows: &[ReferenceRow]) {
    let p = four_pieces();
    let pieces = [piece];
    let reals = real_eigs(&p, 0.0, 220000.0).unwrap();
    let roots1 = complex_eigs(&p, 1.0, &pieces, &region(0.0, 220000.0, 1.0, 0.2)).unwrap();
    let roots100 = complex_eigs(&p, 100.0, &pieces, &region(0.0, 220000.0, 100.0, 0.2)).unwrap();
    crit.check(
        roots1.len() == rows.len(),
        format!("s=1: {} roots, expected {}", roots1.len(), rows.len()),
    );
    crit.check(
        roots100.len() == rows.len(),
        format!("s=100: {} roots, expected {}", roots100.len(), rows.len()),
    );
    for row in rows {
        let lambda = nearest(&reals, |l| (l - row[0]).abs()).unwrap();
        let d = real_measures(&p, &pieces, lambda).delta;
        crit.check(
            rel(lambda, row[0]) <= 1e-6,
            format!("λ {lambda:.8} vs {}", row[0]),
        );
        crit.check(
            (d - row[1]).abs() <= 1e-6,
            format!("δ(ψ) {d:.8} vs {} at λ {}", row[1], row[0]),
        );

        let mu = nearest(&roots1, |m| (m - c(row[2], row[3])).norm()).unwrap();
        let d = shifted_measures(&p, 1.0, &pieces, mu).delta;
        crit.check(
            rel(mu.re, row[2]) <= 1e-6,
            format!("s=1 Re μ {:.8} vs {}", mu.re, row[2]),
        );
        crit.check(
            (mu.im - row[3]).abs() <= 1e-6,
            format!("s=1 Im μ {:.10} vs {}", mu.im, row[3]),
        );
        crit.check(
            (d - row[4]).abs() <= 1e-6,
            format!("s=1 δ(φ) {d:.8} vs {}", row[4]),
        );

        let mu = nearest(&roots100, |m| (m - c(row[5], row[6])).norm()).unwrap();
        crit.check(
            rel(mu.re, row[5]) <= 1e-6,
            format!("s=100 Re μ {:.8} vs {}", mu.re, row[5]),
        );
        crit.check(
            (mu.im - row[6]).abs() <= 1e-4,
            format!("s=100 Im μ {:.8} vs {}", mu.im, row[6]),
        );
    }
}

#[test]
fn criterion_01_four_piece_r3() {
    let mut crit = Criterion::new(1, "four-piece potential, R3 reference values (oracle)");
    check_reference(&mut crit, 2, &REFERENCE_R3);
    crit.finish();
}

#[test]
fn criterion_02_four_piece_r4() {
    let mut crit = Criterion::new(2, "four-piece potential, R4 reference values (oracle)");
    check_reference(&mut crit, 3, &REFERENCE_R4);
    crit.finish();
}

#[test]
fn criterion_03_counts() {
    let mut crit = Criterion::new(3, "eigenvalue and root counts");
    let p = four_pieces();
    let n = real_eigs(&p, 0.0, 220000.0).unwrap().len();
    crit.check(
        n == 130,
        format!("{n} real eigenvalues in [0, 220000], expected 130"),
    );
    let u = region(0.0, 220000.0, 1.0, 0.2);
    let roots = count_roots_stadium(&ComplexPotential::shifted(&p, 1.0, &[2]), &u).unwrap();
    crit.check(
        roots == 6,
        format!("argument-principle count {roots}, expected 6"),
    );
    crit.finish();
}

#[test]
fn criterion_04_large_shift() {
    let mut crit = Criterion::new(4, "free potential, large shift");
    let p = free();
    let s = 1e4;
    let target = c(149.02494, 9991.7736);
    let roots = complex_eigs(&p, s, &[0], &region(0.0, 400.0, s, 0.2)).unwrap();
    match nearest(&roots, |m| (m - target).norm()) {
        Some(mu) => {
            crit.check(
                (mu - target).norm() / target.norm() <= 1e-4,
                format!("μ {mu:.6} vs {target}"),
            );
            let d = shifted_measures(&p, s, &[0], mu).delta;
            crit.check(
                (d - 0.02868).abs() <= 1e-4,
                format!("δ(φ) {d:.6} vs 0.02868"),
            );
            let reals = real_eigs(&p, 0.0, 400.0).unwrap();
            let lam = nearest(&reals, |l| (l - mu.re).abs()).unwrap();
            crit.check(
                rel(lam, (4.0 * PI).powi(2)) <= 1e-12,
                format!("nearest eigenvalue {lam} vs (4π)²"),
            );
        }
        None => crit.check(false, "no root in the search region"),
    }
    crit.finish();
}

#[test]
#[allow(clippy::excessive_precision)]
fn criterion_05_small_shift() {
    let mut crit = Criterion::new(5, "double well, small shift");
    let p = double_well();
    let reals = real_eigs(&p, 0.0, 600.0).unwrap();
    crit.check(
        reals.len() >= 3,
        format!("{} eigenvalues below 600", reals.len()),
    );
    if reals.len() >= 3 {
        crit.check(
            reals[1] - reals[0] <= 1e-11,
            format!("λ₂ − λ₁ = {:e}", reals[1] - reals[0]),
        );
        crit.check(
            rel(reals[2], 572.082899256658465) <= 1e-9,
            format!("λ₃ {:.15} vs 572.082899256658465", reals[2]),
        );
    }
    let roots = complex_eigs(&p, 1.0, &[0], &region(0.0, 600.0, 1.0, 0.2)).unwrap();
    match nearest(&roots, |m| m.re) {
        Some(mu) => {
            let m = shifted_measures(&p, 1.0, &[0], mu);
            crit.check(
                (m.delta - 0.032815726).abs() <= 1e-6,
                format!("δ(φ) {:.9} vs 0.032815726", m.delta),
            );
            crit.check(
                (m.residual_rel - 7.27553e-6).abs() <= 1e-7,
                format!("‖(L−μ₁)φ₁‖/‖φ₁‖ {:.6e} vs 7.27553e-6", m.residual_rel),
            );
            crit.note(format!(
                "μ {:.9}, δ {:.9}, residual {:.6e}, α = ‖Im φ‖ {:.6e}",
                mu, m.delta, m.residual_rel, m.alpha
            ));
        }
        None => crit.check(false, "no shifted root"),
    }
    crit.finish();
}

/// One oracle problem of the theorem and identity suites.
struct OracleCase {
    name: &'static str,
    potential: PiecewisePotential,
    pieces: Vec<usize>,
    s: f64,
    a: f64,
    b: f64,
}

fn oracle_cases() -> Vec<OracleCase> {
    let case = |name, potential, pieces: &[usize], s, a, b| OracleCase {
        name,
        potential,
        pieces: pieces.to_vec(),
        s,
        a,
        b,
    };
    vec![
        case("four-piece R3 s=1", four_pieces(), &[2], 1.0, 0.0, 220000.0),
        case(
            "four-piece R3 s=100",
            four_pieces(),
            &[2],
            100.0,
            0.0,
            220000.0,
        ),
        case("four-piece R4 s=1", four_pieces(), &[3], 1.0, 0.0, 220000.0),
        case(
            "four-piece R4 s=100",
            four_pieces(),
            &[3],
            100.0,
            0.0,
            220000.0,
        ),
        case("free s=1e4", free(), &[0], 1e4, 0.0, 400.0),
        case("double well s=1", double_well(), &[0], 1.0, 0.0, 600.0),
    ]
}

#[test]
fn criterion_06_theorem_suite() {
    let mut crit = Criterion::new(6, "localization theorems on oracle pairs");
    let mut pairs = 0;
    for case in oracle_cases() {
        let OracleCase {
            name,
            potential: p,
            pieces,
            s,
            a,
            b,
        } = case;
        let roots = complex_eigs(&p, s, &pieces, &region(a, b, s, 0.2)).unwrap();
        // Every eigenvalue of L within s of any root lies in this range.
        let reals = real_eigs(&p, 0.0, b + 2.0 * s + 1.0).unwrap();
        let lambda1 = reals[0];
        let slack = |x: f64| 1e-9 * x.abs().max(1.0);
        for &mu in &roots {
            let m = shifted_measures(&p, s, &pieces, mu);
            let (delta, tau) = (m.delta, m.tau);
            let lam = nearest(&reals, |l| (l - mu.re).abs()).unwrap();
            let dist = (mu - c(lam, s)).norm();
            crit.check(
                s * delta * delta <= dist + slack(mu.norm())
                    && dist <= s * delta + slack(mu.norm()),
                format!(
                    "{name}: sδ² ≤ dist(μ, Spec L + is) ≤ sδ fails at μ {mu}: {} {dist} {}",
                    s * delta * delta,
                    s * delta
                ),
            );
            crit.check(
                (mu.re - lam).abs() <= s * delta * tau + slack(mu.re),
                format!(
                    "{name}: |Re μ − λ| = {} > sδτ = {} at μ {mu}",
                    (mu.re - lam).abs(),
                    s * delta * tau
                ),
            );
            crit.check(
                mu.im > 0.0 && mu.im < s && mu.re > lambda1,
                format!("{name}: μ {mu} outside the strip or below λ₁ {lambda1}"),
            );
            pairs += 1;
        }
        // Matched unshifted pairs: λ and a root that are each other's
        // nearest. A root count on the disc of the bound's radius verifies
        // each distance bound directly.
        let shifted = ComplexPotential::shifted(&p, s, &pieces);
        for &mu in &roots {
            let lam = nearest(&reals, |l| (c(l, s) - mu).norm()).unwrap();
            if nearest(&roots, |m| (c(lam, s) - m).norm()) != Some(mu) {
                continue;
            }
            let m = real_measures(&p, &pieces, lam);
            let radius = s * m.delta + slack(lam);
            let n = count_roots_circle(&shifted, c(lam, s), radius).unwrap();
            crit.check(
                n >= 1,
                format!("{name}: no eigenvalue of L_s within sδ(ψ) = {radius} of λ+is at λ {lam}"),
            );
            let radius = s * m.tau + slack(lam);
            let n = count_roots_circle(&shifted, c(lam, 0.0), radius).unwrap();
            crit.check(
                n >= 1,
                format!("{name}: no eigenvalue of L_s within sτ(ψ) = {radius} of λ at λ {lam}"),
            );
            pairs += 1;
        }
    }
    crit.note(format!(
        "{pairs} shifted and matched pairs checked, slack 1e-9·max(1, |value|)"
    ));
    crit.finish();
}

/// Dense `L + i·s·χ_R` of a small discrete problem.
fn dense_shifted(p: &DiscreteProblem, s: f64) -> DMatrix<Complex64> {
    let n = p.l.dim();
    let mut a = DMatrix::from_element(n, n, c(0.0, 0.0));
    for i in 0..n {
        for (j, v) in p.l.row(i) {
            a[(i, j)] += c(v, 0.0);
        }
        a[(i, i)] += c(0.0, s * p.mask.weights()[i]);
    }
    a
}

/// Inverse iteration on the dense matrix from an approximate pair: an
/// eigenpair to working precision, independent of the library's solvers.
fn polish(
    a: &DMatrix<Complex64>,
    mu: Complex64,
    phi: &[Complex64],
    weight: f64,
) -> (Complex64, Vec<Complex64>) {
    let n = a.nrows();
    let mut v = nalgebra::DVector::from_column_slice(phi);
    let mut mu = mu;
    for _ in 0..3 {
        let shifted = a - DMatrix::from_diagonal_element(n, n, mu);
        let x = shifted.lu().solve(&v).expect("shifted matrix is singular");
        v = x.unscale(x.norm());
        let av = a * &v;
        mu = v.dotc(&av) / v.dotc(&v);
    }
    let scale = 1.0 / (weight.sqrt() * v.norm());
    (mu, v.iter().map(|z| z * scale).collect())
}

struct DiscreteCase {
    name: &'static str,
    problem: DiscreteProblem,
    s: f64,
    a: f64,
    b: f64,
}

fn discrete_cases() -> Vec<DiscreteCase> {
    vec![
        DiscreteCase {
            name: "four-piece R3 h=1/200 s=100",
            problem: discretize_1d(&four_pieces(), &[2], 1.0 / 200.0),
            s: 100.0,
            a: 0.0,
            b: 6000.0,
        },
        DiscreteCase {
            name: "free h=1/100 s=1e4",
            problem: discretize_1d(&free(), &[0], 1.0 / 100.0),
            s: 1e4,
            a: 0.0,
            b: 400.0,
        },
    ]
}

#[test]
fn criterion_07_identity_suite() {
    let mut crit = Criterion::new(7, "localization identities");
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut worst_delta, mut worst_sum, mut worst_identity) = (0.0f64, 0.0f64, 0.0f64);

    for case in oracle_cases() {
        let OracleCase {
            name,
            potential: p,
            pieces,
            s,
            a,
            b,
        } = case;
        for mu in complex_eigs(&p, s, &pieces, &region(a, b, s, 0.2)).unwrap() {
            let m = shifted_measures(&p, s, &pieces, mu);
            let err = (m.delta - (1.0 - mu.im / s).sqrt()).abs();
            worst_delta = worst_delta.max(err);
            crit.check(
                err <= 1e-10,
                format!("{name}: δ − sqrt(1 − Im μ/s) = {err:e} at μ {mu}"),
            );
            let sum = (m.delta * m.delta + m.tau * m.tau - 1.0).abs();
            worst_sum = worst_sum.max(sum);
            crit.check(sum <= 1e-12, format!("{name}: δ² + τ² − 1 = {sum:e}"));
        }
    }

    let mut discrete_pairs = 0;
    for case in discrete_cases() {
        let DiscreteCase {
            name,
            problem,
            s,
            a,
            b,
        } = case;
        let w = problem.space.weight();
        let dense = dense_shifted(&problem, s);
        let found = find_candidates(
            &Problem::Discrete(problem.clone()),
            a,
            b,
            s,
            0.2,
            &ElatConfig::default(),
        )
        .unwrap();
        crit.check(
            !found.candidates.is_empty(),
            format!("{name}: no candidates"),
        );
        for cand in &found.candidates {
            let (mu, phi) = polish(&dense, cand.mu, &cand.phi, w);
            discrete_pairs += 1;

            let (delta, tau) = delta_tau(w, &phi, &problem.mask).unwrap();
            let err = (delta - (1.0 - mu.im / s).sqrt()).abs();
            worst_delta = worst_delta.max(err);
            crit.check(
                err <= 1e-10,
                format!("{name}: δ − sqrt(1 − Im μ/s) = {err:e} at μ {mu}"),
            );
            let sum = (delta * delta + tau * tau - 1.0).abs();
            worst_sum = worst_sum.max(sum);
            crit.check(sum <= 1e-12, format!("{name}: δ² + τ² − 1 = {sum:e}"));

            let rot = normalize_rotation(w, &phi).unwrap();
            let (lhs, rhs) = residual_identity(w, &problem.l, &rot.phi, &problem.mask, s).unwrap();
            let err = (lhs - rhs).abs() / lhs.max(rhs);
            worst_identity = worst_identity.max(err);
            crit.check(
                err <= 1e-10,
                format!("{name}: residual identity {lhs:e} vs {rhs:e} (rel {err:e}) at μ {mu}"),
            );

            let im_norm = |theta: f64| {
                let z = Complex64::from_polar(1.0, theta);
                (w * rot.phi.iter().map(|p| (z * p).im.powi(2)).sum::<f64>()).sqrt()
            };
            let beaten = (0..1000)
                .map(|_| rng.gen_range(0.0..2.0 * PI))
                .filter(|&t| im_norm(t) < rot.alpha - 1e-12)
                .count();
            crit.check(
                beaten == 0,
                format!(
                    "{name}: {beaten} of 1000 rotations beat α = {:e}",
                    rot.alpha
                ),
            );
        }
    }
    crit.note(format!(
        "{discrete_pairs} polished discrete pairs; worst δ error {worst_delta:.2e}, δ²+τ² error {worst_sum:.2e}, identity error {worst_identity:.2e}"
    ));
    crit.finish();
}

fn segment_max(a: f64, b: f64, s: f64, delta_star: f64) -> f64 {
    let u = region(a, b, s, delta_star);
    let f = build_filter(&u, 32).unwrap();
    let im = s - 2.0 * u.r();
    (0..400)
        .map(|k| {
            let re = a + (b - a) * k as f64 / 399.0;
            f.eval(c(re, im)).unwrap().norm()
        })
        .fold(0.0, f64::max)
}

#[test]
fn criterion_08_filter_suite() {
    let mut crit = Criterion::new(8, "rational filter on the line Im z = s − 2r");
    let small = 1.0 / 128.0;
    let m1 = segment_max(-4.0, 18.0, 10.0, 0.2);
    crit.check(
        m1 < small,
        format!("U(−4,18,10,1/5): max |f| = {m1:e} ≥ 2⁻⁷"),
    );
    let m2 = segment_max(-4.0, 18.0, 1.0, 0.2);
    crit.check(m2 >= 0.5, format!("U(−4,18,1,1/5): max |f| = {m2:e} < 1/2"));
    let m3 = segment_max(-4.0, -1.8, 1.0, 0.2);
    crit.check(
        m3 < small,
        format!("U(−4,−9/5,1,1/5): max |f| = {m3:e} ≥ 2⁻⁷"),
    );
    crit.note(format!("max |f|: {m1:.3e}, {m2:.3e}, {m3:.3e}"));
    crit.finish();
}

#[test]
fn criterion_09_finite_difference_order() {
    let mut crit = Criterion::new(9, "finite differences converge at second order");
    let p = four_pieces();
    let oracle = complex_eigs(&p, 1.0, &[2], &region(0.0, 6000.0, 1.0, 0.2)).unwrap();
    // Oracle-matched errors and the largest Ritz residual on one grid.
    let errors = |h: f64| -> (Vec<f64>, f64) {
        let problem = Problem::Discrete(discretize_1d(&p, &[2], h));
        let found =
            find_candidates(&problem, 0.0, 6000.0, 1.0, 0.2, &ElatConfig::default()).unwrap();
        let residual = found
            .candidates
            .iter()
            .map(|c| c.residual)
            .fold(0.0, f64::max);
        let errs = oracle
            .iter()
            .map(|mu| {
                found
                    .candidates
                    .iter()
                    .map(|c| (c.mu - mu).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        (errs, residual)
    };
    let ((e1, r1), (e2, r2)) = (errors(1e-3), errors(5e-4));
    crit.check(
        r1 <= 1e-9,
        format!("largest Ritz residual {r1:e} at h = 1/1000"),
    );
    crit.check(
        r2 <= 1e-9,
        format!("largest Ritz residual {r2:e} at h = 1/2000"),
    );
    for (k, mu) in oracle.iter().enumerate() {
        let ratio = e1[k] / e2[k];
        crit.check(
            (3.6..=4.4).contains(&ratio),
            format!(
                "μ {mu:.6}: error {:.3e} → {:.3e}, ratio {ratio:.3}",
                e1[k], e2[k]
            ),
        );
    }
    let ratios: Vec<String> = e1
        .iter()
        .zip(&e2)
        .map(|(x, y)| format!("{:.2}", x / y))
        .collect();
    crit.note(format!(
        "error ratios h=1/1000 → 1/2000: {}",
        ratios.join(", ")
    ));
    let (e3, _) = errors(2.5e-4);
    let ratios: Vec<String> = e2
        .iter()
        .zip(&e3)
        .map(|(x, y)| format!("{:.2}", x / y))
        .collect();
    crit.note(format!(
        "error ratios h=1/2000 → 1/4000: {}",
        ratios.join(", ")
    ));
    crit.finish();
}

#[test]
fn criterion_10_three_bulb() {
    let mut crit = Criterion::new(10, "three-bulb domain at h = 0.05");
    let bulbs = ThreeBulb::default();
    let (left, middle, right) = (
        bulbs.left().unwrap(),
        bulbs.middle().unwrap(),
        bulbs.right().unwrap(),
    );
    let problem = ProblemSpec::TwoD {
        domain: bulbs.domain().unwrap(),
        region: vec![middle],
        background: 0.0,
    }
    .discretize(0.05)
    .unwrap();
    let w = problem.space.weight();

    let mut pairs =
        eigs_selfadjoint_interval(&problem.l, w, 1.0, 33.0, 32, &FeastConfig::default()).unwrap();
    pairs.sort_by(|x, y| x.value.re.total_cmp(&y.value.re));
    let published = [
        1.2297, 2.1714, 3.0528, 3.0842, 4.5029, 4.8706, 5.3051, 5.4827, 6.0910, 6.1682, 7.7167,
        8.0185, 8.3618, 9.3829, 10.029, 10.284,
    ];
    crit.check(
        pairs.len() >= 16,
        format!("{} eigenvalues in [1, 33]", pairs.len()),
    );
    let mut worst = 0.0f64;
    for (pair, &target) in pairs.iter().zip(&published) {
        let e = rel(pair.value.re, target);
        worst = worst.max(e);
        crit.check(
            e <= 0.02,
            format!("eigenvalue {:.5} vs {target}", pair.value.re),
        );
    }
    crit.note(format!(
        "first sixteen eigenvalues within {:.2}% of the published list",
        100.0 * worst
    ));

    let mut counts = [0usize; 3];
    for (k, bulb) in [left, middle, right].into_iter().enumerate() {
        let mask = region_mask(&problem.space, &RegionSpec::Rects(vec![bulb])).unwrap();
        counts[k] = pairs
            .iter()
            .filter(|pair| delta_tau(w, &pair.vector, &mask).unwrap().0 <= 0.25)
            .count();
    }
    crit.check(
        counts[1] == 1,
        format!("middle bulb: {} localized, expected 1", counts[1]),
    );
    crit.check(
        counts[2].abs_diff(9) <= 1,
        format!("right bulb: {} localized, expected 9 ± 1", counts[2]),
    );
    crit.check(
        counts[0].abs_diff(20) <= 2,
        format!("left bulb: {} localized, expected 20 ± 2", counts[0]),
    );
    crit.note(format!(
        "{} eigenvalues in [1, 33]; localized at δ ≤ 1/4: left {}, middle {}, right {}",
        pairs.len(),
        counts[0],
        counts[1],
        counts[2]
    ));

    let report = localize(
        &Problem::Discrete(problem),
        1.0,
        33.0,
        1.0,
        0.25,
        &ElatConfig::default(),
    )
    .unwrap();
    let mus: Vec<Complex64> = report.candidates.iter().map(|c| c.mu).collect();
    crit.check(
        mus.len() == 2,
        format!("{} candidates, expected 2", mus.len()),
    );
    for target in [4.50447, 24.33196] {
        let got = nearest(&mus, |m| (m.re - target).abs()).map_or(f64::NAN, |m| m.re);
        crit.check(
            rel(got, target) <= 1e-2,
            format!("candidate Re μ {got:.5} vs {target}"),
        );
    }
    let accepted: Vec<_> = report.accepted().collect();
    let rejected: Vec<_> = report.rejected().collect();
    crit.check(
        accepted.len() == 1,
        format!("{} accepted, expected 1", accepted.len()),
    );
    crit.check(
        rejected.len() == 1,
        format!("{} rejected, expected 1", rejected.len()),
    );
    if let Some(r) = rejected.first() {
        crit.check(
            (r.delta - 0.64489).abs() <= 0.02,
            format!("rejected δ {:.5} vs 0.64489 ± 0.02", r.delta),
        );
    }
    crit.note(format!(
        "candidates {}; accepted λ {}; rejected (λ, δ) {}",
        mus.iter()
            .map(|m| format!("{m:.5}"))
            .collect::<Vec<_>>()
            .join(", "),
        accepted
            .iter()
            .map(|o| format!("{:.5}", o.lambda))
            .collect::<Vec<_>>()
            .join(", "),
        rejected
            .iter()
            .map(|o| format!("({:.5}, {:.5})", o.lambda, o.delta))
            .collect::<Vec<_>>()
            .join(", ")
    ));
    crit.finish();
}

#[test]
fn criterion_11_landscape() {
    let mut crit = Criterion::new(11, "landscape baseline");
    let p = four_pieces();
    let fine = discretize_1d(&p, &[2], 1.0 / 4000.0);
    let u = solve_landscape(&fine.l).unwrap();
    let minima = effective_potential_minima(&fine.space, &u).unwrap();
    let mut wells: Vec<_> = minima.iter().collect();
    wells.sort_by(|x, y| x.location.0.total_cmp(&y.location.0));
    crit.check(
        wells.len() == 2,
        format!("{} wells, expected 2", wells.len()),
    );
    for (well, (umax, x)) in wells.iter().zip([(0.008652, 0.13155), (0.008819, 0.61972)]) {
        crit.check(
            rel(well.u(), umax) <= 1e-3,
            format!("u max {:.6} vs {umax}", well.u()),
        );
        crit.check(
            (well.location.0 - x).abs() <= 1e-3,
            format!("location {:.5} vs {x}", well.location.0),
        );
    }
    let mut estimates = estimate_eigenvalues(&minima, 1).unwrap();
    estimates.sort_by(f64::total_cmp);
    crit.check(
        estimates.len() == 2,
        format!("{} estimates", estimates.len()),
    );
    for (got, target) in estimates.iter().zip([141.74280, 144.46879]) {
        crit.check(
            rel(*got, target) <= 1e-4,
            format!("estimate {got:.5} vs {target}"),
        );
    }
    crit.note(format!(
        "wells {}; estimates {}",
        wells
            .iter()
            .map(|w| format!("u {:.6} at {:.5}", w.u(), w.location.0))
            .collect::<Vec<_>>()
            .join(", "),
        estimates
            .iter()
            .map(|e| format!("{e:.5}"))
            .collect::<Vec<_>>()
            .join(", ")
    ));

    let mut checked = 0;
    for pieces in [[2usize], [3]] {
        let (a, b) = if pieces[0] == 2 {
            (0.0, 6000.0)
        } else {
            (159000.0, 171000.0)
        };
        let problem = discretize_1d(&p, &pieces, 1.0 / 2000.0);
        let u = solve_landscape(&problem.l).unwrap();
        let report = localize(
            &Problem::Discrete(problem.clone()),
            a,
            b,
            1.0,
            0.2,
            &ElatConfig::default(),
        )
        .unwrap();
        for o in report.accepted() {
            let bound =
                landscape_bound_check(&problem.space, &problem.l, &u, o.lambda, &o.psi).unwrap();
            crit.check(
                bound.holds,
                format!(
                    "bound fails at λ {:.5}: violation {:e} > slack {:e}",
                    o.lambda, bound.max_violation, bound.slack
                ),
            );
            checked += 1;
        }
    }
    crit.check(checked > 0, "no accepted eigenpairs to check");
    crit.note(format!(
        "pointwise bound checked on {checked} accepted eigenpairs at h = 1/2000"
    ));
    crit.finish();
}

#[test]
fn criterion_12_certificate() {
    let mut crit = Criterion::new(12, "empty search certificate");
    let p = four_pieces();
    let fd = discretize_1d(&p, &[1], 1e-3);
    let report = localize(
        &Problem::Discrete(fd.clone()),
        5.0,
        25.0,
        1.0,
        0.05,
        &ElatConfig::default(),
    )
    .unwrap();
    crit.check(
        report.certificate.is_some() && report.candidates.is_empty(),
        format!("finite differences: {} candidates", report.candidates.len()),
    );
    let analytic = Problem::Analytic(AnalyticProblem {
        potential: p.clone(),
        region_pieces: vec![1],
    });
    let cfg = ElatConfig {
        max_aspect: None,
        ..ElatConfig::default()
    };
    let report = localize(&analytic, 5.0, 25.0, 1.0, 0.05, &cfg).unwrap();
    crit.check(
        report.certificate.is_some() && report.candidates.is_empty(),
        format!("oracle: {} candidates", report.candidates.len()),
    );
    let below = inertia_below(&fd.l, 25.0).unwrap();
    crit.check(below == 0, format!("{below} discrete eigenvalues below 25"));
    let sweep = eigs_selfadjoint_interval(
        &fd.l,
        fd.space.weight(),
        5.0,
        25.0,
        32,
        &FeastConfig::default(),
    )
    .unwrap();
    crit.check(
        sweep.is_empty(),
        format!(
            "baseline sweep found {} eigenvalues in [5, 25]",
            sweep.len()
        ),
    );
    let first = real_eigs(&p, 0.0, 1000.0).unwrap()[0];
    crit.check(first > 25.0, format!("λ₁ = {first}"));
    crit.note(format!("λ₁ = {first:.5} > 25"));
    crit.finish();
}
