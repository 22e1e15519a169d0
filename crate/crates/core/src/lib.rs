//! Delta-calculus on bounded time scales, k-point quadrature rules, and the
//! sharp error bounds that control them.
//!
//! A time scale is a closed subset of the reals; this crate models the
//! bounded ones that are finite unions of closed segments, which covers real
//! intervals, integer and h-spaced grids, q-lattices, and arbitrary mixtures
//! of dense and isolated parts. On such a scale the crate provides:
//!
//! - [`timescale`]: jump operators, graininess, density classification, and
//!   the differentiation domain.
//! - [`expr`]: a small closed-form expression language for integrands, with
//!   exact symbolic differentiation.
//! - [`calculus`]: the Delta-derivative, Delta-integrals (of `f` and of
//!   `f` composed with the forward jump), and generalized monomials `h_k`.
//! - [`ostrowski`]: k-point quadrature rules `sum (alpha_{i+1} - alpha_i)
//!   f(x_i)`, the piecewise-linear kernel and its exact residual identity,
//!   the sharp `M * sum h_2` error bound, named rule constructors
//!   (rectangle, trapezoid, midpoint, Simpson, averaged midpoint-trapezoid),
//!   and closed-form bound specializations.
//! - [`verify`]: a seeded randomized harness checking the identity, the
//!   bound, the closed forms, and the sharpness instance, with deterministic
//!   machine-readable reports.
//! - [`cli`]: the `tsquad` command-line front end.
//!
//! All values are immutable after construction and all operations are pure,
//! so everything here is safe to share across threads without
//! synchronization.

pub mod calculus;
pub mod cli;
pub mod error;
pub mod expr;
mod numeric;
pub mod ostrowski;
pub mod timescale;
pub mod verify;

pub use calculus::{
    delta_derivative, delta_integral, delta_integral_sigma, delta_integral_with, monomial_h,
    monomial_h_generic, QuadratureSettings, MONOMIAL_DEPTH_LIMIT,
};
pub use error::{Error, Result};
pub use expr::Expr;
pub use ostrowski::{
    closed_form_bound, error_bound, evaluate_rule, kernel, make_rule, make_rule_snapped,
    montgomery_residual, quadrature, sup_delta_derivative, sup_delta_derivative_with, Partition,
    QuadReport, RuleSpec, SnapAdjustment, SupOptions,
};
pub use timescale::{PointClass, ScaleKind, ScaleSpec, Segment, TimeScale};
pub use verify::{run_verification, SharpnessResult, VerifyConfig, VerifyReport};
