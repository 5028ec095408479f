//! Localized eigenpairs of selfadjoint Schrödinger-type operators.
//!
//! Given a subdomain `R`, an interval `[a, b]` and a tolerance `δ*`, the
//! library finds every eigenpair `(λ, ψ)` of `L = -Δ + V` (Dirichlet) with
//! `λ ∈ [a, b]` and `δ(ψ, R) ≤ δ*`, or certifies that there is none. It does
//! so by searching for eigenvalues of the complex-shifted normal operator
//! `L_s = L + i·s·χ_R` inside a stadium-shaped region below the line
//! `[a, b] + i·s`, then refining each candidate back to an eigenpair of `L`.
//!
//! Module map:
//!
//! * [`domain`]: geometry, finite-difference grids, operator assembly.
//! * [`numerics`]: weighted inner products, shifted factorizations,
//!   orthonormalization and small dense eigensolves.
//! * [`localization`]: `δ`/`τ` measures, rotation normalization, Rayleigh
//!   quotient and residual identities.
//! * [`contour`]: stadium search regions and their trapezoid rational filters.
//! * [`feast`]: filtered subspace iteration for `L_s` and for `L`.
//! * [`analytic1d`]: transfer-matrix oracle for piecewise-constant 1D potentials.
//! * [`elat`]: the localization driver and candidate post-processing.
//! * [`landscape`]: landscape-function baseline.
//! * [`config`] and [`cli`]: run configuration and the command-line front end.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic1d;
pub mod cli;
pub mod config;
pub mod contour;
pub mod domain;
pub mod elat;
pub mod error;
pub mod feast;
pub mod landscape;
pub mod localization;
pub mod numerics;
pub mod output;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
