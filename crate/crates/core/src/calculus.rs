//! Delta-calculus on a [`TimeScale`]: the Delta-derivative, Delta-integrals
//! of `f` and of `f` composed with the forward jump, and the generalized
//! monomials `h_k`.
//!
//! Integration decomposes the range into maximal continuous sub-segments
//! (handled by adaptive Gauss-Kronrod quadrature) and right-scattered jump
//! terms `mu(t) * f(t)` (accumulated with error-free transforms, so purely
//! discrete integrals carry no summation noise).

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::numeric::{adaptive_quad, Dd};
use crate::timescale::{Piece, TimeScale};

/// Highest monomial order served by [`monomial_h`]; higher orders would pay
/// nested-quadrature cost for no consumer.
pub const MONOMIAL_DEPTH_LIMIT: u32 = 4;

/// Tolerances and budget for quadrature over continuous sub-segments.
#[derive(Clone, Copy, Debug)]
pub struct QuadratureSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: u32,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_subdivisions: 10_000,
        }
    }
}

/// The Delta-derivative of `f` at `t`: the forward difference quotient over
/// the jump at right-scattered points, the classical derivative at
/// right-dense points.
pub fn delta_derivative(scale: &TimeScale, f: &Expr, t: f64) -> Result<f64> {
    let t = scale.resolve(t)?;
    if !scale.in_kappa(t)? {
        return Err(Error::NotInKappa(t));
    }
    let ops = scale.jump_operators(t)?;
    if ops.mu > 0.0 {
        Ok((f.eval(ops.sigma)? - f.eval(t)?) / ops.mu)
    } else {
        f.diff().eval(t)
    }
}

/// Delta-integral of an arbitrary scale function given by two views:
/// `dense` is integrated classically over each continuous sub-segment, and
/// each right-scattered point `t` contributes `mu(t) * jump(t, sigma(t))`.
/// Endpoints may come in either order; `a > b` negates.
pub fn delta_integral_with<D, J>(
    scale: &TimeScale,
    a: f64,
    b: f64,
    dense: D,
    jump: J,
    settings: &QuadratureSettings,
) -> Result<f64>
where
    D: Fn(f64) -> Result<f64>,
    J: Fn(f64, f64) -> Result<f64>,
{
    let a = scale.resolve(a)?;
    let b = scale.resolve(b)?;
    if a == b {
        return Ok(0.0);
    }
    if a < b {
        integrate_pieces(scale, a, b, &dense, &jump, settings)
    } else {
        integrate_pieces(scale, b, a, &dense, &jump, settings).map(|v| -v)
    }
}

fn integrate_pieces<D, J>(
    scale: &TimeScale,
    a: f64,
    b: f64,
    dense: &D,
    jump: &J,
    settings: &QuadratureSettings,
) -> Result<f64>
where
    D: Fn(f64) -> Result<f64> + ?Sized,
    J: Fn(f64, f64) -> Result<f64> + ?Sized,
{
    let pieces = scale.pieces(a, b);
    let n_dense = pieces
        .iter()
        .filter(|p| matches!(p, Piece::Dense { .. }))
        .count();
    let seg_abs_tol = settings.abs_tol / n_dense.max(1) as f64;
    let mut acc = Dd::ZERO;
    for piece in pieces {
        match piece {
            Piece::Dense { lo, hi } => {
                let v = adaptive_quad(
                    dense,
                    lo,
                    hi,
                    seg_abs_tol,
                    settings.rel_tol,
                    settings.max_subdivisions,
                )?;
                acc = acc.add_f64(v);
            }
            Piece::Jump(jp) => {
                let v = jump(jp.t, jp.sigma)?;
                acc = acc.add(Dd::diff(jp.sigma, jp.t).mul(Dd::from_f64(v)));
            }
        }
    }
    Ok(acc.value())
}

/// The Delta-integral of `f` from `a` to `b`.
pub fn delta_integral(
    scale: &TimeScale,
    f: &Expr,
    a: f64,
    b: f64,
    settings: &QuadratureSettings,
) -> Result<f64> {
    delta_integral_with(scale, a, b, |t| f.eval(t), |t, _| f.eval(t), settings)
}

/// The Delta-integral of `f(sigma(t))` from `a` to `b`. On continuous
/// sub-segments the forward jump is the identity, so the integrand is `f`;
/// at right-scattered points the jump term evaluates `f` at `sigma(t)`.
pub fn delta_integral_sigma(
    scale: &TimeScale,
    f: &Expr,
    a: f64,
    b: f64,
    settings: &QuadratureSettings,
) -> Result<f64> {
    delta_integral_with(scale, a, b, |t| f.eval(t), |_, sigma| f.eval(sigma), settings)
}

/// Generalized monomial `h_k(t, s)`: `h_0 = 1`, `h_{k+1}(t, s)` is the
/// Delta-integral of `h_k(., s)` from `s` to `t`.
///
/// Canonical scale families use their closed forms: `(t-s)^k / k!` on a
/// single real interval, the falling-factorial binomial on unit-integer
/// grids, and the q-factorial product on q-lattices. Everything else goes
/// through the generic recursion, which is exact for `k = 2` (per-segment
/// antiderivatives plus jump terms) and nests integration for `k >= 3`.
pub fn monomial_h(
    scale: &TimeScale,
    k: u32,
    t: f64,
    s: f64,
    settings: &QuadratureSettings,
) -> Result<f64> {
    let (t, s) = check_monomial_args(scale, k, t, s)?;
    match scale.kind() {
        crate::timescale::ScaleKind::Continuous => {
            let factorial: f64 = (1..=k).map(f64::from).product();
            Ok((t - s).powi(k as i32) / factorial)
        }
        crate::timescale::ScaleKind::Integers => Ok(falling_binomial(t - s, k)),
        crate::timescale::ScaleKind::QLattice { q } => Ok(q_monomial(t, s, q, k)),
        _ => monomial_recurse(scale, k, t, s, settings),
    }
}

/// The generic recursion for `h_k`, bypassing the closed-form dispatch.
/// Used to cross-check the canonical families.
pub fn monomial_h_generic(
    scale: &TimeScale,
    k: u32,
    t: f64,
    s: f64,
    settings: &QuadratureSettings,
) -> Result<f64> {
    let (t, s) = check_monomial_args(scale, k, t, s)?;
    monomial_recurse(scale, k, t, s, settings)
}

fn check_monomial_args(scale: &TimeScale, k: u32, t: f64, s: f64) -> Result<(f64, f64)> {
    if k > MONOMIAL_DEPTH_LIMIT {
        return Err(Error::DepthExceeded(k, MONOMIAL_DEPTH_LIMIT));
    }
    Ok((scale.resolve(t)?, scale.resolve(s)?))
}

fn monomial_recurse(
    scale: &TimeScale,
    k: u32,
    t: f64,
    s: f64,
    settings: &QuadratureSettings,
) -> Result<f64> {
    match k {
        0 => Ok(1.0),
        1 => Ok(t - s),
        2 => Ok(h2_exact(scale, t, s)),
        _ => delta_integral_with(
            scale,
            s,
            t,
            |tau| monomial_recurse(scale, k - 1, tau, s, settings),
            |tau, _| monomial_recurse(scale, k - 1, tau, s, settings),
            settings,
        ),
    }
}

/// `h_2(t, s)` from per-segment antiderivatives of the linear integrand plus
/// jump terms, accumulated error-free. Exact on discrete scales.
fn h2_exact(scale: &TimeScale, t: f64, s: f64) -> f64 {
    let (lo, hi, sign) = if t >= s { (s, t, 1.0) } else { (t, s, -1.0) };
    let mut acc = Dd::ZERO;
    for piece in scale.pieces(lo, hi) {
        match piece {
            Piece::Dense { lo: l, hi: h } => {
                let u = Dd::diff(h, s);
                let v = Dd::diff(l, s);
                acc = acc.add(u.mul(u).sub(v.mul(v)).scale(0.5));
            }
            Piece::Jump(jp) => {
                acc = acc.add(Dd::diff(jp.sigma, jp.t).mul(Dd::diff(jp.t, s)));
            }
        }
    }
    sign * acc.value()
}

/// Falling-factorial binomial `C(m, k) = m (m-1) ... (m-k+1) / k!` for a
/// possibly negative integer-valued `m`.
fn falling_binomial(m: f64, k: u32) -> f64 {
    let mut num = 1.0;
    for j in 0..k {
        num *= m - f64::from(j);
    }
    let factorial: f64 = (1..=k).map(f64::from).product();
    num / factorial
}

/// q-lattice monomial: product over `nu < k` of `(t - q^nu s)` divided by the
/// geometric sums `1 + q + ... + q^nu`.
fn q_monomial(t: f64, s: f64, q: f64, k: u32) -> f64 {
    let mut value = 1.0;
    let mut q_pow = 1.0;
    let mut geo = 0.0;
    for _ in 0..k {
        geo += q_pow;
        value *= (t - q_pow * s) / geo;
        q_pow *= q;
    }
    value
}
