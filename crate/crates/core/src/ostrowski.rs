//! k-point quadrature on time scales: the piecewise-linear kernel, the
//! generalized Montgomery identity, the sharp error bound in terms of the
//! quadratic monomial `h_2`, the named rule constructors, and the closed-form
//! bound specializations for the real line and the unit-integer grid.

use serde::{Deserialize, Serialize};

use crate::calculus::{delta_integral_sigma, monomial_h, QuadratureSettings};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::numeric::{adaptive_quad, golden_max, Dd};
use crate::timescale::{Piece, ScaleKind, TimeScale};

/// A division `a = x_0 < x_1 < ... < x_k = b` of scale points, together with
/// the weight points `alpha_0 = a`, `alpha_i in [x_{i-1}, x_i]`,
/// `alpha_{k+1} = b`. The quadrature weights are the consecutive
/// alpha-differences.
#[derive(Clone, Debug)]
pub struct Partition {
    scale: TimeScale,
    xs: Vec<f64>,
    alphas: Vec<f64>,
}

impl Partition {
    pub fn new(scale: TimeScale, xs: Vec<f64>, alphas: Vec<f64>) -> Result<Partition> {
        if xs.len() < 2 {
            return Err(Error::OrderViolation(
                "a partition needs at least the two endpoints".into(),
            ));
        }
        if alphas.len() != xs.len() + 1 {
            return Err(Error::OrderViolation(format!(
                "{} division points need {} weight points, got {}",
                xs.len(),
                xs.len() + 1,
                alphas.len()
            )));
        }
        let resolve = |v: f64, role: &str| -> Result<f64> {
            scale.resolve(v).map_err(|_| Error::MembershipViolation {
                point: v,
                context: role.to_string(),
            })
        };
        let xs: Vec<f64> = xs
            .into_iter()
            .enumerate()
            .map(|(i, v)| resolve(v, &format!("division point x_{i}")))
            .collect::<Result<_>>()?;
        let alphas: Vec<f64> = alphas
            .into_iter()
            .enumerate()
            .map(|(i, v)| resolve(v, &format!("weight point alpha_{i}")))
            .collect::<Result<_>>()?;
        if xs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::OrderViolation(format!(
                "division points must be strictly increasing, got {xs:?}"
            )));
        }
        let k = xs.len() - 1;
        if alphas[0] != xs[0] || alphas[k + 1] != xs[k] {
            return Err(Error::OrderViolation(
                "alpha_0 must equal a and alpha_{k+1} must equal b".into(),
            ));
        }
        for i in 1..=k {
            if alphas[i] < xs[i - 1] || alphas[i] > xs[i] {
                return Err(Error::OrderViolation(format!(
                    "alpha_{i} = {} outside [x_{}, x_{}] = [{}, {}]",
                    alphas[i],
                    i - 1,
                    i,
                    xs[i - 1],
                    xs[i]
                )));
            }
        }
        Ok(Partition { scale, xs, alphas })
    }

    pub fn scale(&self) -> &TimeScale {
        &self.scale
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn a(&self) -> f64 {
        self.xs[0]
    }

    pub fn b(&self) -> f64 {
        self.xs[self.xs.len() - 1]
    }

    pub fn k(&self) -> usize {
        self.xs.len() - 1
    }

    /// The quadrature weights `alpha_{i+1} - alpha_i`, one per division point.
    pub fn weights(&self) -> Vec<f64> {
        self.alphas.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// The Montgomery kernel `K(t, I_k) = t - alpha_{i+1}` on `[x_i, x_{i+1})`,
/// extended at `t = b` by the last branch.
pub fn kernel(p: &Partition, t: f64) -> Result<f64> {
    let (a, b) = (p.a(), p.b());
    if !(a..=b).contains(&t) {
        return Err(Error::OutOfRange(t, a, b));
    }
    let k = p.k();
    let i = p.xs[1..k].partition_point(|x| *x <= t); // branch index in 0..k
    Ok(t - p.alphas[i + 1])
}

/// The rule value `sum_i (alpha_{i+1} - alpha_i) f(x_i)`.
pub fn quadrature(p: &Partition, f: &Expr) -> Result<f64> {
    let values = p
        .xs
        .iter()
        .map(|&x| f.eval(x))
        .collect::<Result<Vec<f64>>>()?;
    Ok(weighted_sum(&p.alphas, &values).value())
}

/// Abel-summed form of `sum_i (alpha_{i+1} - alpha_i) v_i`, accumulated
/// error-free so that telescoping (constant integrands) is exact:
/// `b v_k - a v_0 + sum_j alpha_j (v_{j-1} - v_j)`.
fn weighted_sum(alphas: &[f64], values: &[f64]) -> Dd {
    let k = values.len() - 1;
    let mut acc = Dd::prod(alphas[k + 1], values[k]).sub(Dd::prod(alphas[0], values[0]));
    for j in 1..=k {
        acc = acc.add(Dd::from_f64(alphas[j]).mul(Dd::diff(values[j - 1], values[j])));
    }
    acc
}

/// Residual of the generalized Montgomery identity:
/// `Q - integral of f^sigma - integral of K(., I_k) f^Delta`. A magnitude
/// near zero certifies the identity.
///
/// Discrete contributions are accumulated with error-free transforms; the
/// identity is linear in the evaluated point values of `f`, so on purely
/// discrete scales the residual sits at the double-double noise floor.
pub fn montgomery_residual(p: &Partition, f: &Expr, settings: &QuadratureSettings) -> Result<f64> {
    let scale = &p.scale;
    let values = p
        .xs
        .iter()
        .map(|&x| f.eval(x))
        .collect::<Result<Vec<f64>>>()?;
    let mut acc = weighted_sum(&p.alphas, &values);

    let dense_pieces = |a: f64, b: f64| {
        scale
            .pieces(a, b)
            .iter()
            .filter(|q| matches!(q, Piece::Dense { .. }))
            .count()
    };
    let n_dense = dense_pieces(p.a(), p.b()).max(1);
    let seg_tol = settings.abs_tol / n_dense as f64;

    // subtract the Delta-integral of f(sigma(t))
    for piece in scale.pieces(p.a(), p.b()) {
        match piece {
            Piece::Dense { lo, hi } => {
                let v = adaptive_quad(
                    &|t| f.eval(t),
                    lo,
                    hi,
                    seg_tol,
                    settings.rel_tol,
                    settings.max_subdivisions,
                )?;
                acc = acc.add_f64(-v);
            }
            Piece::Jump(jp) => {
                acc = acc.sub(Dd::diff(jp.sigma, jp.t).mul(Dd::from_f64(f.eval(jp.sigma)?)));
            }
        }
    }

    // subtract the kernel integral, piecewise over [x_i, x_{i+1})
    let df = f.diff();
    for i in 0..p.k() {
        let alpha = p.alphas[i + 1];
        for piece in scale.pieces(p.xs[i], p.xs[i + 1]) {
            match piece {
                Piece::Dense { lo, hi } => {
                    let v = adaptive_quad(
                        &|t| Ok((t - alpha) * df.eval(t)?),
                        lo,
                        hi,
                        seg_tol,
                        settings.rel_tol,
                        settings.max_subdivisions,
                    )?;
                    acc = acc.add_f64(-v);
                }
                Piece::Jump(jp) => {
                    // mu * (t - alpha) * (f(sigma) - f(t)) / mu, with mu cancelled
                    let df_jump = Dd::diff(f.eval(jp.sigma)?, f.eval(jp.t)?);
                    acc = acc.sub(Dd::diff(jp.t, alpha).mul(df_jump));
                }
            }
        }
    }
    Ok(acc.value())
}

/// Controls for the dense-segment supremum search in
/// [`sup_delta_derivative_with`].
#[derive(Clone, Copy, Debug)]
pub struct SupOptions {
    /// Sample grid size per continuous segment.
    pub samples_per_segment: usize,
    /// Multiplicative inflation applied to sampled (dense-segment) maxima.
    /// Exact values from scattered points and constant derivatives are not
    /// inflated.
    pub safety: f64,
}

impl Default for SupOptions {
    fn default() -> Self {
        SupOptions {
            samples_per_segment: 1024,
            safety: 1.0 + 1e-9,
        }
    }
}

/// `sup |f^Delta|` over the differentiation domain intersected with `[a, b)`,
/// with default search options.
pub fn sup_delta_derivative(scale: &TimeScale, f: &Expr, a: f64, b: f64) -> Result<f64> {
    sup_delta_derivative_with(scale, f, a, b, &SupOptions::default())
}

/// `sup |f^Delta|` over the differentiation domain intersected with `[a, b)`.
///
/// Right-scattered points contribute their exact difference quotients. Each
/// continuous sub-segment contributes a sampled maximum of `|f'|` refined by
/// golden-section search around every local peak, then inflated by the
/// safety factor; when the derivative folds to a constant the supremum is
/// exact and no inflation is applied.
pub fn sup_delta_derivative_with(
    scale: &TimeScale,
    f: &Expr,
    a: f64,
    b: f64,
    opts: &SupOptions,
) -> Result<f64> {
    let a = scale.resolve(a)?;
    let b = scale.resolve(b)?;
    if a >= b {
        return Err(Error::OrderViolation(format!(
            "sup needs a < b, got a={a}, b={b}"
        )));
    }
    let mut m: f64 = 0.0;
    let mut dense: Vec<(f64, f64)> = Vec::new();
    for piece in scale.pieces(a, b) {
        match piece {
            Piece::Jump(jp) => {
                let q = (f.eval(jp.sigma)? - f.eval(jp.t)?) / jp.mu;
                m = m.max(q.abs());
            }
            Piece::Dense { lo, hi } => dense.push((lo, hi)),
        }
    }
    if dense.is_empty() {
        return Ok(m);
    }
    if !f.is_smooth() {
        return Err(Error::NotDifferentiable(
            "dense segments need an integrand from the smooth operator subset".into(),
        ));
    }
    let df = f.diff();
    if let Expr::Num(c) = df {
        return Ok(m.max(c.abs()));
    }
    let g = |t: f64| -> Result<f64> { Ok(df.eval(t)?.abs()) };
    let n = opts.samples_per_segment.max(2);
    let mut m_dense: f64 = 0.0;
    for (lo, hi) in dense {
        let step = (hi - lo) / (n - 1) as f64;
        let grid: Vec<f64> = (0..n)
            .map(|j| if j == n - 1 { hi } else { lo + j as f64 * step })
            .collect();
        let vals = grid.iter().map(|&t| g(t)).collect::<Result<Vec<f64>>>()?;
        for j in 0..n {
            let is_peak = (j == 0 || vals[j] >= vals[j - 1]) && (j == n - 1 || vals[j] >= vals[j + 1]);
            if !is_peak {
                continue;
            }
            let bracket_lo = grid[j.saturating_sub(1)];
            let bracket_hi = grid[(j + 1).min(n - 1)];
            m_dense = m_dense.max(golden_max(&g, bracket_lo, bracket_hi)?);
        }
    }
    Ok(m.max(m_dense * opts.safety))
}

/// The sharp bound `M * sum_i [h_2(x_i, alpha_{i+1}) + h_2(x_{i+1}, alpha_{i+1})]`.
pub fn error_bound(p: &Partition, m: f64, settings: &QuadratureSettings) -> Result<f64> {
    if m.is_nan() || m < 0.0 {
        return Err(Error::Domain(format!("M must be nonnegative, got {m}")));
    }
    let mut acc = Dd::ZERO;
    for i in 0..p.k() {
        let alpha = p.alphas[i + 1];
        acc = acc.add_f64(monomial_h(&p.scale, 2, p.xs[i], alpha, settings)?);
        acc = acc.add_f64(monomial_h(&p.scale, 2, p.xs[i + 1], alpha, settings)?);
    }
    Ok(m * acc.value())
}

/// Both sides of the sharp inequality for one rule evaluation.
#[derive(Clone, Debug, Serialize)]
pub struct QuadReport {
    /// The quadrature rule value.
    pub q_value: f64,
    /// The reference Delta-integral of `f(sigma(t))`.
    pub integral_sigma: f64,
    /// `|q_value - integral_sigma|`.
    pub abs_error: f64,
    /// The sharp bound `M * sum h_2` terms.
    pub bound: f64,
    /// The `sup |f^Delta|` used for the bound.
    pub m_used: f64,
    /// `abs_error / bound`, reported as 0 when the bound is 0.
    pub tightness: f64,
}

/// Evaluate a rule end to end: quadrature value, reference integral, actual
/// error, supremum of the Delta-derivative, sharp bound, and tightness.
pub fn evaluate_rule(p: &Partition, f: &Expr, settings: &QuadratureSettings) -> Result<QuadReport> {
    let q_value = quadrature(p, f)?;
    let integral_sigma = delta_integral_sigma(&p.scale, f, p.a(), p.b(), settings)?;
    let abs_error = (q_value - integral_sigma).abs();
    let m_used = sup_delta_derivative(&p.scale, f, p.a(), p.b())?;
    let bound = error_bound(p, m_used, settings)?;
    let tightness = if bound == 0.0 { 0.0 } else { abs_error / bound };
    Ok(QuadReport {
        q_value,
        integral_sigma,
        abs_error,
        bound,
        m_used,
        tightness,
    })
}

/// JSON description of a named quadrature rule.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum RuleSpec {
    /// k = 1 with weight point `alpha`: `(alpha - a) f(a) + (b - alpha) f(b)`.
    Rectangle { alpha: f64 },
    /// `(b - a) f(a)`; rectangle with `alpha = b`.
    LeftRectangle,
    /// `(b - a) f(b)`; rectangle with `alpha = a`.
    RightRectangle,
    /// `(f(a) + f(b))/2 * (b - a)`; rectangle at the midpoint.
    Trapezoid,
    /// k = 2 with division point `x` and weight points `alpha1, alpha2`.
    ThreePoint { x: f64, alpha1: f64, alpha2: f64 },
    /// `(b - a) f(x)`; three-point with `alpha1 = a`, `alpha2 = b`.
    OstrowskiPoint { x: f64 },
    /// `(b - a) f((a+b)/2)`.
    Midpoint,
    /// Simpson weights `(1/6, 2/3, 1/6)(b - a)`; `x` defaults to the midpoint.
    Simpson {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x: Option<f64>,
    },
    /// Averaged midpoint-trapezoid weights `(1/4, 1/2, 1/4)(b - a)`.
    AvgMidTrap,
    /// Explicit division and weight points.
    Custom { xs: Vec<f64>, alphas: Vec<f64> },
}

/// A point relocation performed by [`make_rule_snapped`].
#[derive(Clone, Debug, Serialize)]
pub struct SnapAdjustment {
    pub role: String,
    pub requested: f64,
    pub used: f64,
}

/// Build the partition realizing a named rule over `[a, b]`. Every point the
/// rule requires (weight points, midpoints, sixth-points, quarter-points)
/// must be a member of the scale; nothing is relocated silently.
pub fn make_rule(scale: &TimeScale, a: f64, b: f64, rule: &RuleSpec) -> Result<Partition> {
    let (p, _) = build_rule(scale, a, b, rule, false)?;
    Ok(p)
}

/// Like [`make_rule`], but relocates each required point to the nearest
/// scale point, reporting every adjustment made.
pub fn make_rule_snapped(
    scale: &TimeScale,
    a: f64,
    b: f64,
    rule: &RuleSpec,
) -> Result<(Partition, Vec<SnapAdjustment>)> {
    build_rule(scale, a, b, rule, true)
}

fn build_rule(
    scale: &TimeScale,
    a: f64,
    b: f64,
    rule: &RuleSpec,
    snap: bool,
) -> Result<(Partition, Vec<SnapAdjustment>)> {
    let mut snaps = Vec::new();
    let mut require = |point: f64, role: &str| -> Result<f64> {
        if snap {
            let used = scale.nearest(point);
            if used != point {
                snaps.push(SnapAdjustment {
                    role: role.to_string(),
                    requested: point,
                    used,
                });
            }
            Ok(used)
        } else {
            scale.resolve(point).map_err(|_| Error::MembershipViolation {
                point,
                context: role.to_string(),
            })
        }
    };
    let a = require(a, "endpoint a")?;
    let b = require(b, "endpoint b")?;
    if a >= b {
        return Err(Error::OrderViolation(format!(
            "rule needs a < b, got a={a}, b={b}"
        )));
    }
    let mid = 0.5 * (a + b);
    let (xs, alphas) = match *rule {
        RuleSpec::Rectangle { alpha } => {
            let alpha = require(alpha, "rectangle weight point alpha")?;
            (vec![a, b], vec![a, alpha, b])
        }
        RuleSpec::LeftRectangle => (vec![a, b], vec![a, b, b]),
        RuleSpec::RightRectangle => (vec![a, b], vec![a, a, b]),
        RuleSpec::Trapezoid => {
            let alpha = require(mid, "trapezoid midpoint (a+b)/2")?;
            (vec![a, b], vec![a, alpha, b])
        }
        RuleSpec::ThreePoint { x, alpha1, alpha2 } => {
            let x = require(x, "division point x")?;
            let alpha1 = require(alpha1, "weight point alpha1")?;
            let alpha2 = require(alpha2, "weight point alpha2")?;
            (vec![a, x, b], vec![a, alpha1, alpha2, b])
        }
        RuleSpec::OstrowskiPoint { x } => {
            let x = require(x, "evaluation point x")?;
            ostrowski_point_partition(a, b, x)
        }
        RuleSpec::Midpoint => {
            let x = require(mid, "midpoint (a+b)/2")?;
            ostrowski_point_partition(a, b, x)
        }
        RuleSpec::Simpson { x } => {
            let alpha1 = require((5.0 * a + b) / 6.0, "Simpson sixth-point (5a+b)/6")?;
            let alpha2 = require((a + 5.0 * b) / 6.0, "Simpson sixth-point (a+5b)/6")?;
            let x = require(x.unwrap_or(mid), "Simpson evaluation point x")?;
            (vec![a, x, b], vec![a, alpha1, alpha2, b])
        }
        RuleSpec::AvgMidTrap => {
            let alpha1 = require((3.0 * a + b) / 4.0, "quarter-point (3a+b)/4")?;
            let alpha2 = require((a + 3.0 * b) / 4.0, "quarter-point (a+3b)/4")?;
            let x = require(mid, "midpoint (a+b)/2")?;
            (vec![a, x, b], vec![a, alpha1, alpha2, b])
        }
        RuleSpec::Custom { ref xs, ref alphas } => (xs.clone(), alphas.clone()),
    };
    let partition = Partition::new(scale.clone(), xs, alphas)?;
    Ok((partition, snaps))
}

/// The evaluation-point rule `(b - a) f(x)` as a partition. Interior `x`
/// uses the three-point form with `alpha1 = a`, `alpha2 = b`; at `x = a` or
/// `x = b` it degenerates to the matching rectangle rule, which carries the
/// same quadrature value and the same bound.
fn ostrowski_point_partition(a: f64, b: f64, x: f64) -> (Vec<f64>, Vec<f64>) {
    if x == a {
        (vec![a, b], vec![a, b, b])
    } else if x == b {
        (vec![a, b], vec![a, a, b])
    } else {
        (vec![a, x, b], vec![a, a, b, b])
    }
}

/// The bound of [`error_bound`] in closed form, available on single-interval
/// continuous scales and on unit-integer grids. Agrees with the generic
/// `h_2` sum on its domain.
pub fn closed_form_bound(p: &Partition, m: f64) -> Result<f64> {
    if m.is_nan() || m < 0.0 {
        return Err(Error::Domain(format!("M must be nonnegative, got {m}")));
    }
    let integer_grid = match p.scale.kind() {
        ScaleKind::Continuous => false,
        ScaleKind::Integers => true,
        _ => {
            return Err(Error::WrongScaleKind(
                "single-interval continuous or unit-integer".into(),
            ))
        }
    };
    let mut sum = 0.0;
    for i in 0..p.k() {
        let (x0, x1) = (p.xs[i], p.xs[i + 1]);
        let alpha = p.alphas[i + 1];
        let gap = x1 - x0;
        let off = alpha - 0.5 * (x0 + x1);
        sum += 0.25 * gap * gap + off * off;
        if integer_grid {
            sum += off;
        }
    }
    Ok(m * sum)
}
