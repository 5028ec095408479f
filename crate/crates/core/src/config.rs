//! Run configuration: a TOML file with `[problem]`, `[solver]` and
//! `[output]` sections. Unknown keys are rejected, and every validation
//! error names the offending `section.key` with its line number.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::domain::{
    assemble_operator, build_grid_1d, build_grid_2d, region_mask, BulbAlignment,
    PiecewisePotential, Rect, RectPotential, RectUnionDomain, RegionSpec, ThreeBulb,
};
use crate::elat::{AnalyticProblem, DiscreteProblem, ElatConfig, PostConfig};
use crate::feast::FeastConfig;
use crate::{Error, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    problem: Option<RawProblem>,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    dimension: u8,
    interval: Option<[f64; 2]>,
    breakpoints: Option<Vec<f64>>,
    potential: Option<Vec<f64>>,
    region_pieces: Option<Vec<usize>>,
    domain: Option<String>,
    rects: Option<Vec<[f64; 4]>>,
    bridge_length: Option<f64>,
    bridge_width: Option<f64>,
    alignment: Option<String>,
    region: Option<String>,
    region_rects: Option<Vec<[f64; 4]>>,
    background: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    backend: Option<String>,
    h: Option<f64>,
    s: Option<f64>,
    a: Option<f64>,
    b: Option<f64>,
    delta_star: Option<f64>,
    n_poles: Option<usize>,
    m: Option<usize>,
    max_iters: Option<usize>,
    ritz_tol: Option<f64>,
    expand_factor: Option<f64>,
    max_aspect: Option<f64>,
    pp_tol: Option<f64>,
    block_size: Option<usize>,
    pp_max_iters: Option<usize>,
    seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    directory: Option<String>,
    eigenvectors: Option<bool>,
    filter_nx: Option<usize>,
    filter_ny: Option<usize>,
    samples: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Analytic,
    Fd,
}

#[derive(Debug, Clone)]
pub enum ProblemSpec {
    /// Piecewise-constant potential on an interval; `R` is a set of
    /// zero-based pieces.
    OneD {
        potential: PiecewisePotential,
        region_pieces: Vec<usize>,
    },
    /// Union of rectangles with a constant potential; `R` is a union of
    /// rectangles.
    TwoD {
        domain: RectUnionDomain,
        region: Vec<Rect>,
        background: f64,
    },
}

impl ProblemSpec {
    pub fn dimension(&self) -> usize {
        match self {
            ProblemSpec::OneD { .. } => 1,
            ProblemSpec::TwoD { .. } => 2,
        }
    }

    /// Finite-difference grid, operator and region mask at spacing `h`.
    pub fn discretize(&self, h: f64) -> Result<DiscreteProblem> {
        let (space, potential, region) = match self {
            ProblemSpec::OneD {
                potential,
                region_pieces,
            } => {
                let (lo, hi) = potential.interval();
                let space = build_grid_1d(lo, hi, h)?;
                let v = potential.sample(&space);
                (space, v, RegionSpec::from_pieces(potential, region_pieces)?)
            }
            ProblemSpec::TwoD {
                domain,
                region,
                background,
            } => {
                let space = build_grid_2d(domain, h)?;
                let v = RectPotential {
                    background: *background,
                    patches: Vec::new(),
                }
                .sample(&space);
                (space, v, RegionSpec::Rects(region.clone()))
            }
        };
        let l = assemble_operator(&space, &potential)?;
        let mask = region_mask(&space, &region)?;
        Ok(DiscreteProblem { space, l, mask })
    }

    /// The transfer-matrix form of a 1D problem.
    pub fn analytic(&self) -> Result<AnalyticProblem> {
        match self {
            ProblemSpec::OneD {
                potential,
                region_pieces,
            } => Ok(AnalyticProblem {
                potential: potential.clone(),
                region_pieces: region_pieces.clone(),
            }),
            ProblemSpec::TwoD { .. } => {
                Err(Error::invalid("the analytic backend needs a 1D problem"))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverSpec {
    pub backend: Backend,
    pub h: Option<f64>,
    pub s: f64,
    pub a: f64,
    pub b: f64,
    pub delta_star: f64,
    pub elat: ElatConfig,
}

#[derive(Debug, Clone)]
pub struct OutputSpec {
    pub directory: PathBuf,
    /// Write `eigvec_<k>.csv` files.
    pub eigenvectors: bool,
    pub filter_nx: usize,
    pub filter_ny: usize,
    /// Sample points per oracle eigenfunction.
    pub samples: usize,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: Option<ProblemSpec>,
    pub solver: SolverSpec,
    pub output: OutputSpec,
}

impl RunConfig {
    /// The problem block, which every subcommand except `filterdump` needs.
    pub fn require_problem(&self) -> Result<&ProblemSpec> {
        self.problem.as_ref().ok_or_else(|| Error::Config {
            location: "[problem]".into(),
            message: "this subcommand needs a [problem] section".into(),
        })
    }

    /// Overrides every random seed.
    pub fn set_seed(&mut self, seed: u64) {
        self.solver.elat.feast.rng_seed = seed;
        self.solver.elat.post.seed = seed;
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
        location: path.display().to_string(),
        message: format!("cannot read: {e}"),
    })?;
    parse_config(&text)
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let location = e
            .span()
            .map(|sp| format!("line {}", line_of(text, sp.start)))
            .unwrap_or_else(|| "input".to_string());
        Error::Config {
            location,
            message: e.message().to_string(),
        }
    })?;
    let at = |section: &str, key: &str, message: String| Error::Config {
        location: locate(text, section, key),
        message,
    };
    let solver = solver_spec(&raw.solver, &at)?;
    let problem = match &raw.problem {
        Some(p) => Some(problem_spec(p, &at)?),
        None => None,
    };
    if let Some(p) = &problem {
        match (solver.backend, p) {
            (Backend::Analytic, ProblemSpec::TwoD { .. }) => {
                return Err(at(
                    "solver",
                    "backend",
                    "the analytic backend needs a 1D problem".into(),
                ))
            }
            (Backend::Fd, _) if solver.h.is_none() => {
                return Err(at(
                    "solver",
                    "h",
                    "the fd backend needs a grid spacing h".into(),
                ))
            }
            _ => {}
        }
        if let Some(h) = solver.h {
            check_spacing(p, h).map_err(|m| at("solver", "h", m))?;
        }
    }
    let o = &raw.output;
    let output = OutputSpec {
        directory: PathBuf::from(o.directory.clone().unwrap_or_else(|| "elat-out".into())),
        eigenvectors: o.eigenvectors.unwrap_or(true),
        filter_nx: o.filter_nx.unwrap_or(201),
        filter_ny: o.filter_ny.unwrap_or(101),
        samples: o.samples.unwrap_or(1001),
    };
    for (key, v) in [
        ("filter_nx", output.filter_nx),
        ("filter_ny", output.filter_ny),
        ("samples", output.samples),
    ] {
        if v < 2 {
            return Err(at("output", key, format!("must be at least 2, got {v}")));
        }
    }
    Ok(RunConfig {
        problem,
        solver,
        output,
    })
}

fn solver_spec(r: &RawSolver, at: &dyn Fn(&str, &str, String) -> Error) -> Result<SolverSpec> {
    let e = |key: &str, m: String| at("solver", key, m);
    let backend = match r.backend.as_deref().unwrap_or("fd") {
        "fd" => Backend::Fd,
        "analytic" => Backend::Analytic,
        other => {
            return Err(e(
                "backend",
                format!("expected \"fd\" or \"analytic\", got {other:?}"),
            ))
        }
    };
    let s = r.s.unwrap_or(1.0);
    if !(s > 0.0 && s.is_finite()) {
        return Err(e("s", format!("must be positive, got {s}")));
    }
    let a =
        r.a.ok_or_else(|| e("a", "missing interval start a".into()))?;
    let b = r.b.ok_or_else(|| e("b", "missing interval end b".into()))?;
    if !(a < b) {
        return Err(e("b", format!("need a < b, got a = {a}, b = {b}")));
    }
    let delta_star = r.delta_star.unwrap_or(0.2);
    if !(delta_star > 0.0 && delta_star < 0.5) {
        return Err(e(
            "delta_star",
            format!("must lie in (0, 1/2), got {delta_star}"),
        ));
    }
    if let Some(h) = r.h {
        if !(h > 0.0 && h.is_finite()) {
            return Err(e("h", format!("must be positive, got {h}")));
        }
    }
    let n_poles = r.n_poles.unwrap_or(32);
    if n_poles < 8 || !n_poles.is_multiple_of(2) {
        return Err(e(
            "n_poles",
            format!("must be even and at least 8, got {n_poles}"),
        ));
    }
    let defaults = FeastConfig::default();
    let seed = r.seed.unwrap_or(defaults.rng_seed);
    let feast = FeastConfig {
        m: r.m.unwrap_or(defaults.m),
        max_iters: r.max_iters.unwrap_or(defaults.max_iters),
        ritz_tol: r.ritz_tol.unwrap_or(defaults.ritz_tol),
        rng_seed: seed,
        expand_factor: r.expand_factor.unwrap_or(defaults.expand_factor),
    };
    if let Err(err) = feast.validate() {
        let key = if feast.m < 4 {
            "m"
        } else if !(feast.ritz_tol > 0.0) {
            "ritz_tol"
        } else if feast.max_iters == 0 {
            "max_iters"
        } else {
            "expand_factor"
        };
        return Err(e(key, err.to_string()));
    }
    let pp = PostConfig::default();
    let post = PostConfig {
        tol: r.pp_tol.unwrap_or(pp.tol),
        block_size: r.block_size.unwrap_or(pp.block_size),
        max_iters: r.pp_max_iters.unwrap_or(pp.max_iters),
        seed,
    };
    if let Err(err) = post.validate() {
        let key = if !(1..=8).contains(&post.block_size) {
            "block_size"
        } else if !(post.tol > 0.0) {
            "pp_tol"
        } else {
            "pp_max_iters"
        };
        return Err(e(key, err.to_string()));
    }
    // Splitting is the default for the fd backend only; the oracle's
    // argument-principle count copes with long stadia directly.
    let max_aspect = match (r.max_aspect, backend) {
        (Some(x), _) if !(x >= 2.0) => {
            return Err(e("max_aspect", format!("must be at least 2, got {x}")))
        }
        (Some(x), _) => Some(x),
        (None, Backend::Fd) => Some(5.0),
        (None, Backend::Analytic) => None,
    };
    Ok(SolverSpec {
        backend,
        h: r.h,
        s,
        a,
        b,
        delta_star,
        elat: ElatConfig {
            n_poles,
            feast,
            max_aspect,
            post,
            ..ElatConfig::default()
        },
    })
}

fn problem_spec(r: &RawProblem, at: &dyn Fn(&str, &str, String) -> Error) -> Result<ProblemSpec> {
    let e = |key: &str, m: String| at("problem", key, m);
    let only = |present: bool, key: &str, dim: u8| -> Result<()> {
        if present {
            Err(e(key, format!("not used by {dim}D problems")))
        } else {
            Ok(())
        }
    };
    match r.dimension {
        1 => {
            for (present, key) in [
                (r.domain.is_some(), "domain"),
                (r.rects.is_some(), "rects"),
                (r.bridge_length.is_some(), "bridge_length"),
                (r.bridge_width.is_some(), "bridge_width"),
                (r.alignment.is_some(), "alignment"),
                (r.region.is_some(), "region"),
                (r.region_rects.is_some(), "region_rects"),
                (r.background.is_some(), "background"),
            ] {
                only(present, key, 1)?;
            }
            let values = r
                .potential
                .clone()
                .ok_or_else(|| e("potential", "missing piece values".into()))?;
            if let Some(k) = values.iter().position(|v| !(*v >= 0.0 && v.is_finite())) {
                return Err(e(
                    "potential",
                    format!("value {} of piece {} must be nonnegative", values[k], k + 1),
                ));
            }
            let potential = match (&r.breakpoints, r.interval) {
                (Some(_), Some(_)) => {
                    return Err(e(
                        "interval",
                        "give either interval or breakpoints, not both".into(),
                    ))
                }
                (Some(bp), None) => {
                    if bp.len() != values.len() + 1 {
                        return Err(e(
                            "breakpoints",
                            format!(
                                "{} breakpoints for {} pieces; need one more than the pieces",
                                bp.len(),
                                values.len()
                            ),
                        ));
                    }
                    PiecewisePotential::new(bp.clone(), values)
                }
                (None, iv) => {
                    let [lo, hi] = iv.unwrap_or([0.0, 1.0]);
                    PiecewisePotential::uniform(lo, hi, values)
                }
            }
            .map_err(|err| e("potential", err.to_string()))?;
            let pieces = r
                .region_pieces
                .clone()
                .ok_or_else(|| e("region_pieces", "missing region pieces".into()))?;
            if pieces.is_empty() {
                return Err(e(
                    "region_pieces",
                    "R must contain at least one piece".into(),
                ));
            }
            let k = potential.pieces();
            if let Some(bad) = pieces.iter().find(|&&p| p == 0 || p > k) {
                return Err(e(
                    "region_pieces",
                    format!("piece {bad} out of range 1..={k}"),
                ));
            }
            let mut zero_based: Vec<usize> = pieces.iter().map(|p| p - 1).collect();
            zero_based.sort_unstable();
            zero_based.dedup();
            if zero_based.len() == k {
                return Err(e(
                    "region_pieces",
                    "R must be a proper subset of the interval".into(),
                ));
            }
            Ok(ProblemSpec::OneD {
                potential,
                region_pieces: zero_based,
            })
        }
        2 => {
            for (present, key) in [
                (r.interval.is_some(), "interval"),
                (r.breakpoints.is_some(), "breakpoints"),
                (r.potential.is_some(), "potential"),
                (r.region_pieces.is_some(), "region_pieces"),
            ] {
                only(present, key, 2)?;
            }
            let rect = |key: &str, c: &[f64; 4]| {
                Rect::new(c[0], c[1], c[2], c[3]).map_err(|err| e(key, err.to_string()))
            };
            let (domain, layout) = match r.domain.as_deref().unwrap_or("three_bulb") {
                "three_bulb" => {
                    if r.rects.is_some() {
                        return Err(e(
                            "rects",
                            "rects are only used with domain = \"rects\"".into(),
                        ));
                    }
                    let d = ThreeBulb::default();
                    let alignment = match r.alignment.as_deref().unwrap_or("bottom") {
                        "bottom" => BulbAlignment::Bottom,
                        "centered" => BulbAlignment::Centered,
                        other => {
                            return Err(e(
                                "alignment",
                                format!("expected \"bottom\" or \"centered\", got {other:?}"),
                            ))
                        }
                    };
                    let layout = ThreeBulb {
                        bridge_length: r.bridge_length.unwrap_or(d.bridge_length),
                        bridge_width: r.bridge_width.unwrap_or(d.bridge_width),
                        alignment,
                    };
                    let domain = layout
                        .domain()
                        .map_err(|err| e("bridge_width", err.to_string()))?;
                    (domain, Some(layout))
                }
                "rects" => {
                    for (present, key) in [
                        (r.bridge_length.is_some(), "bridge_length"),
                        (r.bridge_width.is_some(), "bridge_width"),
                        (r.alignment.is_some(), "alignment"),
                    ] {
                        if present {
                            return Err(e(key, "only used with domain = \"three_bulb\"".into()));
                        }
                    }
                    let list = r
                        .rects
                        .as_ref()
                        .ok_or_else(|| e("rects", "missing rectangle list".into()))?;
                    let rects = list
                        .iter()
                        .map(|c| rect("rects", c))
                        .collect::<Result<Vec<_>>>()?;
                    (
                        RectUnionDomain::new(rects).map_err(|err| e("rects", err.to_string()))?,
                        None,
                    )
                }
                other => {
                    return Err(e(
                        "domain",
                        format!("expected \"three_bulb\" or \"rects\", got {other:?}"),
                    ))
                }
            };
            let region = match (&r.region, &r.region_rects) {
                (Some(_), Some(_)) => {
                    return Err(e(
                        "region_rects",
                        "give either region or region_rects, not both".into(),
                    ))
                }
                (Some(name), None) => {
                    let layout = layout.ok_or_else(|| {
                        e(
                            "region",
                            "named regions need domain = \"three_bulb\"".into(),
                        )
                    })?;
                    let bulb = match name.as_str() {
                        "left" => layout.left(),
                        "middle" => layout.middle(),
                        "right" => layout.right(),
                        other => {
                            return Err(e(
                                "region",
                                format!(
                                    "expected \"left\", \"middle\" or \"right\", got {other:?}"
                                ),
                            ))
                        }
                    };
                    vec![bulb.map_err(|err| e("region", err.to_string()))?]
                }
                (None, Some(list)) => list
                    .iter()
                    .map(|c| rect("region_rects", c))
                    .collect::<Result<Vec<_>>>()?,
                (None, None) => return Err(e("region", "missing region (or region_rects)".into())),
            };
            let background = r.background.unwrap_or(0.0);
            if !(background >= 0.0 && background.is_finite()) {
                return Err(e(
                    "background",
                    format!("must be nonnegative, got {background}"),
                ));
            }
            Ok(ProblemSpec::TwoD {
                domain,
                region,
                background,
            })
        }
        d => Err(e("dimension", format!("must be 1 or 2, got {d}"))),
    }
}

/// Cheap divisibility checks so a bad `h` fails at parse time.
fn check_spacing(p: &ProblemSpec, h: f64) -> std::result::Result<(), String> {
    let divides = |len: f64| {
        let q = len / h;
        (q - q.round()).abs() <= 1e-9 * q.abs().max(1.0)
    };
    match p {
        ProblemSpec::OneD { potential, .. } => {
            let (lo, hi) = potential.interval();
            if !divides(hi - lo) {
                return Err(format!(
                    "h = {h} does not divide the interval length {}",
                    hi - lo
                ));
            }
            if ((hi - lo) / h).round() < 4.0 {
                return Err(format!("h = {h} leaves fewer than 3 interior nodes"));
            }
        }
        ProblemSpec::TwoD { domain, .. } => {
            for r in &domain.rects {
                for c in [r.x0, r.x1, r.y0, r.y1] {
                    if !divides(c) {
                        return Err(format!(
                            "h = {h} does not divide the rectangle coordinate {c}"
                        ));
                    }
                }
            }
        }
    }
    Ok(())
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// `section.key (line N)`, or `section.key` when the key is absent.
fn locate(text: &str, section: &str, key: &str) -> String {
    let mut current = String::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if let Some(name) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            current = name.trim().to_string();
            continue;
        }
        if current == section {
            if let Some((k, _)) = t.split_once('=') {
                if k.trim() == key {
                    return format!("{section}.{key} (line {})", i + 1);
                }
            }
        }
    }
    format!("{section}.{key}")
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL_1D: &str = r#"
[problem]
dimension = 1
potential = [0.0, 6400.0, 0.0, 160000.0]
region_pieces = [3]

[solver]
backend = "analytic"
a = 0.0
b = 220000.0
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(MINIMAL_1D).unwrap();
        assert_eq!(c.solver.elat.n_poles, 32);
        assert_eq!(c.solver.elat.feast.m, 16);
        assert_eq!(c.solver.elat.feast.rng_seed, 7);
        assert_eq!(c.solver.delta_star, 0.2);
        assert_eq!(c.solver.s, 1.0);
        assert_eq!(c.solver.backend, Backend::Analytic);
        match c.problem.unwrap() {
            ProblemSpec::OneD { region_pieces, .. } => assert_eq!(region_pieces, vec![2]),
            _ => panic!("expected a 1D problem"),
        }
    }

    #[test]
    fn delta_star_out_of_range_names_line() {
        let text = format!("{MINIMAL_1D}delta_star = 0.7\n");
        let err = parse_config(&text).unwrap_err();
        let msg = err.to_string();
        assert!(err.is_validation());
        assert!(msg.contains("solver.delta_star (line 11)"), "{msg}");
    }

    #[test]
    fn misspelled_key_is_rejected() {
        let text = format!("{MINIMAL_1D}npoles = 16\n");
        let msg = parse_config(&text).unwrap_err().to_string();
        assert!(msg.contains("npoles") && msg.contains("line 11"), "{msg}");
    }

    #[test]
    fn fd_needs_dividing_h() {
        let text = MINIMAL_1D.replace("backend = \"analytic\"", "backend = \"fd\"\nh = 0.3");
        let msg = parse_config(&text).unwrap_err().to_string();
        assert!(msg.contains("solver.h") && msg.contains("divide"), "{msg}");
        let text = MINIMAL_1D.replace("backend = \"analytic\"", "backend = \"fd\"");
        assert!(parse_config(&text)
            .unwrap_err()
            .to_string()
            .contains("solver.h"));
    }

    #[test]
    fn region_piece_range_is_checked() {
        let text = MINIMAL_1D.replace("region_pieces = [3]", "region_pieces = [5]");
        let msg = parse_config(&text).unwrap_err().to_string();
        assert!(msg.contains("problem.region_pieces (line 5)"), "{msg}");
    }

    #[test]
    fn three_bulb_config() {
        let text = r#"
[problem]
dimension = 2
domain = "three_bulb"
region = "middle"

[solver]
h = 0.1
a = 1.0
b = 33.0
delta_star = 0.25
"#;
        let c = parse_config(text).unwrap();
        assert_eq!(c.solver.elat.max_aspect, Some(5.0));
        match c.problem.unwrap() {
            ProblemSpec::TwoD { region, .. } => {
                assert_eq!(region[0], ThreeBulb::default().middle().unwrap())
            }
            _ => panic!("expected a 2D problem"),
        }
    }

    #[test]
    fn analytic_rejects_2d() {
        let text = r#"
[problem]
dimension = 2
region = "left"

[solver]
backend = "analytic"
a = 1.0
b = 3.0
"#;
        assert!(parse_config(text)
            .unwrap_err()
            .to_string()
            .contains("solver.backend"));
    }

    #[test]
    fn problem_section_is_optional() {
        let c = parse_config("[solver]\na = -4.0\nb = 18.0\ns = 10.0\n").unwrap();
        assert!(c.problem.is_none());
        assert!(c.require_problem().is_err());
    }
}
