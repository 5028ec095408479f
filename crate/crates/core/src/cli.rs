//! Command-line front end. Each subcommand reads a TOML configuration,
//! writes its artifacts to the output directory and prints a summary.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use crate::analytic1d::{
    complex_eigs, eigenfunction_samples, measures, real_eigs, ComplexPotential,
};
use crate::config::{load_config, Backend, ProblemSpec, RunConfig};
use crate::contour::{build_filter, SearchRegion};
use crate::domain::Geometry;
use crate::elat::{find_candidates, localize, Problem};
use crate::feast::eigs_selfadjoint_interval;
use crate::landscape::{
    effective_potential_minima, estimate_eigenvalues, level_set_interval, solve_landscape,
    LEVEL_FACTOR,
};
use crate::localization::delta_tau;
use crate::output::{self, num, write_csv};
use crate::{Error, Result};

/// Exit code for bad input (configuration or arguments).
pub const EXIT_VALIDATION: i32 = 2;
/// Exit code for a solver failure.
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "elat",
    version,
    about = "Localized eigenpairs of Schrödinger operators"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Worker threads for candidate refinement (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find localized eigenpairs in [a, b] or certify there are none.
    Localize(RunArgs),
    /// Transfer-matrix roots of the shifted 1D problem, with their measures.
    #[command(name = "oracle1d")]
    Oracle1d(RunArgs),
    /// Eigenvalues of the shifted operator in the search region, unrefined.
    Feast(RunArgs),
    /// Landscape function, effective potential wells and estimates.
    Landscape(RunArgs),
    /// Every eigenpair of L in [a, b], with its localization.
    Baseline(RunArgs),
    /// Modulus of the rational filter on a grid around the search region.
    Filterdump(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// TOML configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, overriding `output.directory`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Random seed, overriding `solver.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl Command {
    fn args(&self) -> &RunArgs {
        match self {
            Command::Localize(a)
            | Command::Oracle1d(a)
            | Command::Feast(a)
            | Command::Landscape(a)
            | Command::Baseline(a)
            | Command::Filterdump(a) => a,
        }
    }
}

/// Runs one subcommand and returns the summary it printed.
pub fn run(cli: &Cli) -> Result<String> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::invalid("--threads must be at least 1"));
        }
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let args = cli.command.args();
    let mut cfg = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.set_seed(seed);
    }
    if let Some(out) = &args.out {
        cfg.output.directory = out.clone();
    }
    std::fs::create_dir_all(&cfg.output.directory)?;
    let summary = match &cli.command {
        Command::Localize(_) => run_localize(&cfg)?,
        Command::Oracle1d(_) => run_oracle(&cfg)?,
        Command::Feast(_) => run_feast(&cfg)?,
        Command::Landscape(_) => run_landscape(&cfg)?,
        Command::Baseline(_) => run_baseline(&cfg)?,
        Command::Filterdump(_) => run_filterdump(&cfg)?,
    };
    output::write_text(&cfg.output.directory.join("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(summary)
}

/// Maps an error onto the process exit code.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_validation() {
        EXIT_VALIDATION
    } else {
        EXIT_SOLVER
    }
}

fn fd_h(cfg: &RunConfig) -> Result<f64> {
    cfg.solver.h.ok_or_else(|| Error::Config {
        location: "solver.h".into(),
        message: "this subcommand needs a grid spacing h".into(),
    })
}

fn sample_points(spec: &ProblemSpec, n: usize) -> Vec<f64> {
    match spec {
        ProblemSpec::OneD { potential, .. } => {
            let (lo, hi) = potential.interval();
            (0..n)
                .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
                .collect()
        }
        ProblemSpec::TwoD { .. } => Vec::new(),
    }
}

fn run_localize(cfg: &RunConfig) -> Result<String> {
    let spec = cfg.require_problem()?;
    let sv = &cfg.solver;
    let problem = match sv.backend {
        Backend::Fd => Problem::Discrete(spec.discretize(fd_h(cfg)?)?),
        Backend::Analytic => Problem::Analytic(spec.analytic()?),
    };
    let report = localize(&problem, sv.a, sv.b, sv.s, sv.delta_star, &sv.elat)?;
    let dir = &cfg.output.directory;
    output::write_report_csv(&dir.join("report.csv"), &report)?;
    if cfg.output.eigenvectors {
        for (k, o) in report.accepted().enumerate() {
            let path = dir.join(format!("eigvec_{k}.csv"));
            match &problem {
                Problem::Discrete(p) => output::write_grid_vector(&path, &p.space, &o.psi)?,
                Problem::Analytic(p) => {
                    let xs = sample_points(spec, cfg.output.samples);
                    let real = ComplexPotential::real(&p.potential);
                    let vals = eigenfunction_samples(&real, Complex64::new(o.lambda, 0.0), &xs)?;
                    output::write_samples(&path, &xs, &vals)?;
                }
            }
        }
    }
    Ok(output::report_summary(&report))
}

fn run_oracle(cfg: &RunConfig) -> Result<String> {
    let spec = cfg.require_problem()?;
    let (potential, pieces) = match spec {
        ProblemSpec::OneD {
            potential,
            region_pieces,
        } => (potential, region_pieces),
        ProblemSpec::TwoD { .. } => {
            return Err(Error::invalid("oracle1d needs a 1D problem"));
        }
    };
    let sv = &cfg.solver;
    let region = SearchRegion::new(sv.a, sv.b, sv.s, sv.delta_star)?;
    let roots = complex_eigs(potential, sv.s, pieces, &region)?;
    let shifted = ComplexPotential::shifted(potential, sv.s, pieces);
    let rows = roots
        .iter()
        .map(|&mu| measures(&shifted, mu, sv.s, pieces))
        .collect::<Result<Vec<_>>>()?;
    let dir = &cfg.output.directory;
    write_csv(
        &dir.join("report.csv"),
        &["re_mu", "im_mu", "delta", "tau", "alpha", "residual"],
        rows.iter().map(|m| {
            vec![
                num(m.mu.re),
                num(m.mu.im),
                num(m.delta),
                num(m.tau),
                num(m.alpha),
                num(m.residual_rel),
            ]
        }),
    )?;
    if cfg.output.eigenvectors {
        let xs = sample_points(spec, cfg.output.samples);
        for (k, m) in rows.iter().enumerate() {
            let vals = eigenfunction_samples(&shifted, m.mu, &xs)?;
            output::write_samples(&dir.join(format!("eigvec_{k}.csv")), &xs, &vals)?;
        }
    }
    let real = ComplexPotential::real(potential);
    let lambdas = real_eigs(potential, sv.a, sv.b)?;
    let real_rows = lambdas
        .iter()
        .map(|&l| measures(&real, Complex64::new(l, 0.0), 0.0, pieces))
        .collect::<Result<Vec<_>>>()?;
    write_csv(
        &dir.join("real_eigs.csv"),
        &["lambda", "delta", "tau"],
        real_rows
            .iter()
            .map(|m| vec![num(m.mu.re), num(m.delta), num(m.tau)]),
    )?;
    let mut s = format!("roots of the shifted problem in U: {}\n", rows.len());
    for m in &rows {
        s += &format!(
            "  mu {} {:+.8e}i  delta {}  alpha {}\n",
            num(m.mu.re),
            m.mu.im,
            num(m.delta),
            num(m.alpha)
        );
    }
    s += &format!("eigenvalues of L in [a, b]: {}\n", real_rows.len());
    let localized = real_rows
        .iter()
        .filter(|m| m.delta <= sv.delta_star)
        .count();
    s += &format!("  with delta <= delta_star: {localized}\n");
    Ok(s)
}

fn run_feast(cfg: &RunConfig) -> Result<String> {
    let spec = cfg.require_problem()?;
    let sv = &cfg.solver;
    let problem = Problem::Discrete(spec.discretize(fd_h(cfg)?)?);
    let found = find_candidates(&problem, sv.a, sv.b, sv.s, sv.delta_star, &sv.elat)?;
    write_csv(
        &cfg.output.directory.join("report.csv"),
        &[
            "re_mu",
            "im_mu",
            "alpha",
            "delta",
            "tau",
            "residual",
            "converged",
            "region",
        ],
        found.candidates.iter().map(|c| {
            vec![
                num(c.mu.re),
                num(c.mu.im),
                num(c.alpha),
                num(c.delta),
                num(c.tau),
                num(c.residual),
                c.converged.to_string(),
                c.source_region.to_string(),
            ]
        }),
    )?;
    let mut s = format!(
        "sub-regions {} ({} searched)\nRitz values in U: {}\n",
        found.sub_regions,
        found.searched_regions,
        found.candidates.len()
    );
    for c in &found.candidates {
        s += &format!(
            "  mu {} {:+.8e}i  delta {}  residual {}{}\n",
            num(c.mu.re),
            c.mu.im,
            num(c.delta),
            num(c.residual),
            if c.converged { "" } else { "  (not converged)" }
        );
    }
    Ok(s)
}

fn run_landscape(cfg: &RunConfig) -> Result<String> {
    let spec = cfg.require_problem()?;
    let p = spec.discretize(fd_h(cfg)?)?;
    let u = solve_landscape(&p.l)?;
    let minima = effective_potential_minima(&p.space, &u)?;
    let estimates = estimate_eigenvalues(&minima, p.space.dim())?;
    let dir = &cfg.output.directory;
    output::write_landscape(&dir.join("landscape.csv"), &p.space, &u)?;
    let one_d = matches!(p.space.geometry(), Geometry::Interval(..));
    let mut rows = Vec::new();
    let mut s = format!("wells of the effective potential: {}\n", minima.len());
    for (m, est) in minima.iter().zip(&estimates) {
        let mut row = vec![
            num(m.location.0),
            num(m.location.1),
            num(m.u()),
            num(m.w),
            num(*est),
        ];
        s += &format!(
            "  at ({}, {})  u {}  W {}  lambda estimate {}",
            num(m.location.0),
            num(m.location.1),
            num(m.u()),
            num(m.w),
            num(*est)
        );
        if one_d {
            let (lo, hi) = level_set_interval(&p.space, &u, m, LEVEL_FACTOR)?;
            row.extend([num(lo), num(hi)]);
            s += &format!("  interval [{}, {}]", num(lo), num(hi));
        }
        s.push('\n');
        rows.push(row);
    }
    let mut header = vec!["x", "y", "u", "W", "lambda_estimate"];
    if one_d {
        header.extend(["interval_lo", "interval_hi"]);
    }
    write_csv(&dir.join("minima.csv"), &header, rows)?;
    Ok(s)
}

fn run_baseline(cfg: &RunConfig) -> Result<String> {
    let spec = cfg.require_problem()?;
    let p = spec.discretize(fd_h(cfg)?)?;
    let sv = &cfg.solver;
    let weight = p.space.weight();
    let pairs =
        eigs_selfadjoint_interval(&p.l, weight, sv.a, sv.b, sv.elat.n_poles, &sv.elat.feast)?;
    let mut rows = Vec::new();
    for q in &pairs {
        let (delta, tau) = delta_tau(weight, &q.vector, &p.mask)?;
        rows.push((q.value.re, delta, tau, q.residual_rel));
    }
    write_csv(
        &cfg.output.directory.join("baseline.csv"),
        &["lambda", "delta", "tau", "residual", "localized"],
        rows.iter().map(|(l, d, t, r)| {
            vec![
                num(*l),
                num(*d),
                num(*t),
                num(*r),
                (*d <= sv.delta_star).to_string(),
            ]
        }),
    )?;
    let localized: Vec<_> = rows.iter().filter(|r| r.1 <= sv.delta_star).collect();
    let mut s = format!(
        "eigenvalues of L in [a, b]: {}\nwith delta <= delta_star: {}\n",
        rows.len(),
        localized.len()
    );
    for (l, d, _, _) in localized {
        s += &format!("  lambda {}  delta {}\n", num(*l), num(*d));
    }
    Ok(s)
}

fn run_filterdump(cfg: &RunConfig) -> Result<String> {
    let sv = &cfg.solver;
    let region = SearchRegion::new(sv.a, sv.b, sv.s, sv.delta_star)?;
    let filter = build_filter(&region, sv.elat.n_poles)?;
    let r = region.r();
    let re = (sv.a - 2.0 * r, sv.b + 2.0 * r);
    let im = (sv.s - 2.0 * r, sv.s + 2.0 * r);
    let grid = filter.grid(re, im, cfg.output.filter_nx, cfg.output.filter_ny);
    let dir = &cfg.output.directory;
    write_csv(
        &dir.join("filter_grid.csv"),
        &["re_z", "im_z", "abs_f"],
        grid.iter().map(|(x, y, v)| vec![num(*x), num(*y), num(*v)]),
    )?;
    write_csv(
        &dir.join("poles.csv"),
        &["re_pole", "im_pole", "re_weight", "im_weight"],
        filter
            .poles
            .iter()
            .zip(&filter.weights)
            .map(|(z, w)| vec![num(z.re), num(z.im), num(w.re), num(w.im)]),
    )?;
    let center = filter.eval(region.center())?.norm();
    Ok(format!(
        "poles {}\nradius r {}\n|f| at the centre {}\ngrid {} x {} over [{}, {}] x [{}, {}]\n",
        filter.len(),
        num(r),
        num(center),
        cfg.output.filter_nx,
        cfg.output.filter_ny,
        num(re.0),
        num(re.1),
        num(im.0),
        num(im.1)
    ))
}
