//! C ABI for the `elat` library.
//!
//! Handles are opaque and owned by the caller, who must release them with
//! the matching `*_free` function. Every entry point returns an
//! [`ElatStatus`]; on failure a message is available from
//! [`elat_last_error`] on the same thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use elat::config::ProblemSpec;
use elat::domain::{PiecewisePotential, Rect, RectUnionDomain};
use elat::elat::{localize, ElatConfig, Problem};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElatStatus {
    Ok = 0,
    /// Null pointer, bad length or out-of-range index.
    InvalidArgument = 1,
    /// The library rejected the problem or parameters.
    Validation = 2,
    /// A solver failed.
    Solver = 3,
    /// A Rust panic was caught at the boundary.
    Panic = 4,
}

/// A problem definition: a 1D piecewise-constant potential or a 2D union of
/// rectangles with a constant potential.
pub struct ElatProblem {
    spec: ProblemSpec,
}

/// Result of [`elat_localize`].
pub struct ElatReport {
    inner: elat::elat::ElatReport,
}

/// Search parameters. Obtain defaults from [`elat_params_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ElatParams {
    pub a: f64,
    pub b: f64,
    pub s: f64,
    pub delta_star: f64,
    /// Grid spacing of the finite-difference backend; `0` selects the
    /// transfer-matrix backend (1D only).
    pub h: f64,
    pub n_poles: usize,
    pub subspace_dim: usize,
    /// Largest sub-region aspect ratio; `0` searches the region whole.
    pub max_aspect: f64,
    pub seed: u64,
}

/// One candidate and its decision.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct ElatOutcome {
    pub re_mu: f64,
    pub im_mu: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub delta: f64,
    pub tau: f64,
    pub residual: f64,
    pub accepted: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: ElatStatus, msg: impl Into<String>) -> ElatStatus {
    set_error(msg.into());
    status
}

fn from_error(err: elat::Error) -> ElatStatus {
    let status = if err.is_validation() {
        ElatStatus::Validation
    } else {
        ElatStatus::Solver
    };
    fail(status, err.to_string())
}

/// Runs `f`, converting panics into [`ElatStatus::Panic`].
fn guard(f: impl FnOnce() -> ElatStatus) -> ElatStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(ElatStatus::Panic, format!("panic: {msg}"))
        }
    }
}

/// Borrows `len` items at `p`; a null pointer is accepted only when `len == 0`.
unsafe fn view<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], ElatStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(ElatStatus::InvalidArgument, format!("{what} is null")));
    }
    Ok(slice::from_raw_parts(p, len))
}

fn rects(flat: &[f64], what: &str) -> Result<Vec<Rect>, ElatStatus> {
    if !flat.len().is_multiple_of(4) {
        return Err(fail(
            ElatStatus::InvalidArgument,
            format!("{what} needs 4 numbers per rectangle"),
        ));
    }
    flat.chunks(4)
        .map(|c| Rect::new(c[0], c[1], c[2], c[3]).map_err(from_error))
        .collect()
}

/// Message of the last failure on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn elat_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn elat_version() -> *const c_char {
    static VERSION: &CStr =
        match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
            Ok(v) => v,
            Err(_) => panic!("version string"),
        };
    VERSION.as_ptr()
}

/// Fills `out` with the default parameters for the interval `[a, b]`.
///
/// # Safety
/// `out` must be null or point to writable memory for one `ElatParams`.
#[no_mangle]
pub unsafe extern "C" fn elat_params_default(a: f64, b: f64, out: *mut ElatParams) -> ElatStatus {
    if out.is_null() {
        return fail(ElatStatus::InvalidArgument, "out is null");
    }
    let d = ElatConfig::default();
    *out = ElatParams {
        a,
        b,
        s: 1.0,
        delta_star: 0.2,
        h: 0.0,
        n_poles: d.n_poles,
        subspace_dim: d.feast.m,
        max_aspect: d.max_aspect.unwrap_or(0.0),
        seed: d.feast.rng_seed,
    };
    ElatStatus::Ok
}

/// Creates a 1D problem on `[breakpoints[0], breakpoints[n_pieces]]` with
/// `values[k]` on piece `k`; `region_pieces` lists the pieces of `R`,
/// counted from 1.
///
/// # Safety
/// `breakpoints` must hold `n_pieces + 1` values, `values` `n_pieces` values
/// and `region_pieces` `n_region` values. `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn elat_problem_new_1d(
    breakpoints: *const f64,
    values: *const f64,
    n_pieces: usize,
    region_pieces: *const usize,
    n_region: usize,
    out: *mut *mut ElatProblem,
) -> ElatStatus {
    guard(|| {
        if out.is_null() {
            return fail(ElatStatus::InvalidArgument, "out is null");
        }
        let run = || -> Result<ElatProblem, ElatStatus> {
            if n_pieces == 0 || n_region == 0 {
                return Err(fail(
                    ElatStatus::InvalidArgument,
                    "need at least one piece and one region piece",
                ));
            }
            let bp = view(breakpoints, n_pieces + 1, "breakpoints")?;
            let vals = view(values, n_pieces, "values")?;
            let pieces = view(region_pieces, n_region, "region_pieces")?;
            if let Some(p) = pieces.iter().find(|&&p| p == 0 || p > n_pieces) {
                return Err(fail(
                    ElatStatus::InvalidArgument,
                    format!("region piece {p} out of range 1..={n_pieces}"),
                ));
            }
            let potential =
                PiecewisePotential::new(bp.to_vec(), vals.to_vec()).map_err(from_error)?;
            let mut zero_based: Vec<usize> = pieces.iter().map(|p| p - 1).collect();
            zero_based.sort_unstable();
            zero_based.dedup();
            Ok(ElatProblem {
                spec: ProblemSpec::OneD {
                    potential,
                    region_pieces: zero_based,
                },
            })
        };
        match run() {
            Ok(p) => {
                *out = Box::into_raw(Box::new(p));
                ElatStatus::Ok
            }
            Err(status) => status,
        }
    })
}

/// Creates a 2D problem on a union of rectangles `(x0, x1, y0, y1)` with
/// constant potential `background`; `R` is the union of `region_rects`.
///
/// # Safety
/// `domain_rects` must hold `4 * n_domain` values and `region_rects`
/// `4 * n_region` values. `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn elat_problem_new_2d(
    domain_rects: *const f64,
    n_domain: usize,
    region_rects: *const f64,
    n_region: usize,
    background: f64,
    out: *mut *mut ElatProblem,
) -> ElatStatus {
    guard(|| {
        if out.is_null() {
            return fail(ElatStatus::InvalidArgument, "out is null");
        }
        let run = || -> Result<ElatProblem, ElatStatus> {
            if n_domain == 0 || n_region == 0 {
                return Err(fail(
                    ElatStatus::InvalidArgument,
                    "need at least one domain and one region rectangle",
                ));
            }
            let domain = rects(
                view(domain_rects, 4 * n_domain, "domain_rects")?,
                "domain_rects",
            )?;
            let region = rects(
                view(region_rects, 4 * n_region, "region_rects")?,
                "region_rects",
            )?;
            if !(background >= 0.0 && background.is_finite()) {
                return Err(fail(
                    ElatStatus::Validation,
                    format!("background must be nonnegative, got {background}"),
                ));
            }
            Ok(ElatProblem {
                spec: ProblemSpec::TwoD {
                    domain: RectUnionDomain::new(domain).map_err(from_error)?,
                    region,
                    background,
                },
            })
        };
        match run() {
            Ok(p) => {
                *out = Box::into_raw(Box::new(p));
                ElatStatus::Ok
            }
            Err(status) => status,
        }
    })
}

/// # Safety
/// `problem` must be null or a handle from `elat_problem_new_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn elat_problem_free(problem: *mut ElatProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Finds the localized eigenpairs of `problem` for `params`.
///
/// # Safety
/// `problem` must be a live handle, `params` readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn elat_localize(
    problem: *const ElatProblem,
    params: *const ElatParams,
    out: *mut *mut ElatReport,
) -> ElatStatus {
    guard(|| {
        if problem.is_null() || params.is_null() || out.is_null() {
            return fail(ElatStatus::InvalidArgument, "null argument");
        }
        let spec = &(*problem).spec;
        let p = *params;
        let mut cfg = ElatConfig {
            n_poles: p.n_poles,
            ..ElatConfig::default()
        };
        cfg.feast.m = p.subspace_dim;
        cfg.feast.rng_seed = p.seed;
        cfg.post.seed = p.seed;
        cfg.max_aspect = (p.max_aspect > 0.0).then_some(p.max_aspect);
        let problem = if p.h > 0.0 {
            spec.discretize(p.h).map(Problem::Discrete)
        } else {
            spec.analytic().map(Problem::Analytic)
        };
        match problem.and_then(|pr| localize(&pr, p.a, p.b, p.s, p.delta_star, &cfg)) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(ElatReport { inner }));
                ElatStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `report` must be null or a handle from `elat_localize` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn elat_report_free(report: *mut ElatReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Number of outcomes (one per candidate); `0` for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn elat_report_len(report: *const ElatReport) -> usize {
    report.as_ref().map_or(0, |r| r.inner.outcomes.len())
}

/// True when the search found nothing and certified the interval empty.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn elat_report_is_empty_certificate(report: *const ElatReport) -> bool {
    report
        .as_ref()
        .is_some_and(|r| r.inner.certificate.is_some())
}

/// Copies outcome `k` (in order of refined eigenvalue) into `out`.
///
/// # Safety
/// `report` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn elat_report_outcome(
    report: *const ElatReport,
    k: usize,
    out: *mut ElatOutcome,
) -> ElatStatus {
    guard(|| {
        let Some(r) = report.as_ref() else {
            return fail(ElatStatus::InvalidArgument, "report is null");
        };
        if out.is_null() {
            return fail(ElatStatus::InvalidArgument, "out is null");
        }
        let Some(o) = r.inner.outcomes.get(k) else {
            return fail(
                ElatStatus::InvalidArgument,
                format!("outcome {k} out of range (len {})", r.inner.outcomes.len()),
            );
        };
        let c = &r.inner.candidates[o.candidate];
        *out = ElatOutcome {
            re_mu: c.mu.re,
            im_mu: c.mu.im,
            alpha: c.alpha,
            lambda: o.lambda,
            delta: o.delta,
            tau: o.tau,
            residual: o.residual,
            accepted: o.accepted,
        };
        ElatStatus::Ok
    })
}

/// Copies the refined eigenvector of outcome `k` into `buf`. `*len` is the
/// capacity on entry and the vector length on return; pass a null `buf` to
/// query the length. Transfer-matrix results have length zero.
///
/// # Safety
/// `report` must be a live handle, `len` readable and writable, and `buf`
/// null or writable for `*len` values.
#[no_mangle]
pub unsafe extern "C" fn elat_report_eigenvector(
    report: *const ElatReport,
    k: usize,
    buf: *mut f64,
    len: *mut usize,
) -> ElatStatus {
    guard(|| {
        let Some(r) = report.as_ref() else {
            return fail(ElatStatus::InvalidArgument, "report is null");
        };
        if len.is_null() {
            return fail(ElatStatus::InvalidArgument, "len is null");
        }
        let Some(o) = r.inner.outcomes.get(k) else {
            return fail(
                ElatStatus::InvalidArgument,
                format!("outcome {k} out of range"),
            );
        };
        let cap = *len;
        *len = o.psi.len();
        if buf.is_null() {
            return ElatStatus::Ok;
        }
        if cap < o.psi.len() {
            return fail(
                ElatStatus::InvalidArgument,
                format!("buffer holds {cap} values, need {}", o.psi.len()),
            );
        }
        ptr::copy_nonoverlapping(o.psi.as_ptr(), buf, o.psi.len());
        ElatStatus::Ok
    })
}
