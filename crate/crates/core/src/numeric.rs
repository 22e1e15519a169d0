//! Low-level numerical kernels: compensated (double-double) accumulation,
//! 15-point Gauss-Kronrod panels with adaptive bisection, Neumaier summation,
//! and golden-section maximization.
//!
//! The double-double helpers exist because the Montgomery identity and the
//! discrete Delta-integrals are checked at absolute tolerances near machine
//! precision; accumulating jump terms with error-free transforms keeps those
//! residuals at the noise floor instead of a few ulps of the largest
//! intermediate.

use crate::error::{Error, Result};

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    /// Error-free difference of two doubles.
    #[inline]
    pub fn diff(a: f64, b: f64) -> Dd {
        let (s, e) = two_sum(a, -b);
        Dd { hi: s, lo: e }
    }

    /// Error-free product of two doubles.
    #[inline]
    pub fn prod(a: f64, b: f64) -> Dd {
        let (p, e) = two_prod(a, b);
        Dd { hi: p, lo: e }
    }

    #[inline]
    pub fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s2, e2) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s2, e2 + f);
        Dd { hi, lo }
    }

    #[inline]
    pub fn add_f64(self, x: f64) -> Dd {
        self.add(Dd::from_f64(x))
    }

    #[inline]
    pub fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    #[inline]
    pub fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    #[inline]
    pub fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn scale(self, x: f64) -> Dd {
        self.mul(Dd::from_f64(x))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.hi + self.lo
    }
}

/// Compensated summation; error independent of the condition of the sum.
pub(crate) fn neumaier_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

// 15-point Kronrod abscissae on [-1, 1] (positive half) and weights, with the
// embedded 7-point Gauss weights; the classic QUADPACK dqk15 pair.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One G7-K15 panel over [lo, hi]: returns the K15 value and |K15 - G7|.
fn gk15<F>(f: &F, lo: f64, hi: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64> + ?Sized,
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center)?;
    let mut resk = WGK[7] * fc;
    let mut resg = WG[3] * fc;
    for (j, (&x, &wk)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let fsum = f(center - dx)? + f(center + dx)?;
        resk += wk * fsum;
        if j % 2 == 1 {
            resg += WG[j / 2] * fsum;
        }
    }
    Ok((resk * half, (resk - resg).abs() * half))
}

struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    err: f64,
    splittable: bool,
}

/// Adaptive integration of `f` over [lo, hi]: bisect the worst panel until
/// the summed error estimate meets `max(abs_tol, rel_tol * |integral|)`.
pub(crate) fn adaptive_quad<F>(
    f: &F,
    lo: f64,
    hi: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_subdivisions: u32,
) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + ?Sized,
{
    if lo == hi {
        return Ok(0.0);
    }
    let width_floor = |a: f64, b: f64| (b - a).abs() <= 8.0 * f64::EPSILON * (a.abs() + b.abs() + 1.0);
    let (value, err) = gk15(f, lo, hi)?;
    let mut panels = vec![Panel {
        lo,
        hi,
        value,
        err,
        splittable: !width_floor(lo, hi),
    }];
    let mut subdivisions = 0u32;
    loop {
        let total: f64 = neumaier_sum(panels.iter().map(|p| p.value));
        let total_err: f64 = panels.iter().map(|p| p.err).sum();
        if total_err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        let worst = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| p.splittable)
            .max_by(|a, b| a.1.err.total_cmp(&b.1.err))
            .map(|(i, _)| i);
        let Some(i) = worst else {
            // nothing left to split; accept what we have
            return Ok(total);
        };
        if subdivisions >= max_subdivisions {
            return Err(Error::QuadratureFailure(max_subdivisions));
        }
        subdivisions += 1;
        let Panel { lo: a, hi: b, .. } = panels.swap_remove(i);
        let mid = 0.5 * (a + b);
        for (l, r) in [(a, mid), (mid, b)] {
            let (value, err) = gk15(f, l, r)?;
            panels.push(Panel {
                lo: l,
                hi: r,
                value,
                err,
                splittable: !width_floor(l, r),
            });
        }
    }
}

/// Golden-section search for the maximum of `g` over [a, b].
/// Returns the best value seen (including the bracket endpoints).
pub(crate) fn golden_max<F>(g: &F, a: f64, b: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + ?Sized,
{
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let mut best = g(a)?.max(g(b)?);
    if b <= a {
        return Ok(best);
    }
    let (mut a, mut b) = (a, b);
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let mut gc = g(c)?;
    let mut gd = g(d)?;
    let tol = 1e-12 * (1.0 + a.abs() + b.abs());
    for _ in 0..200 {
        best = best.max(gc.max(gd));
        if b - a <= tol {
            break;
        }
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - INVPHI * (b - a);
            gc = g(c)?;
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + INVPHI * (b - a);
            gd = g(d)?;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dd_products_are_error_free() {
        let a = 0.1 + 0.2; // inexact
        let p = Dd::prod(a, a);
        // hi*hi loses bits; hi+lo must recover them
        assert_ne!(p.lo, 0.0);
        assert_eq!(p.value(), a * a);
    }

    #[test]
    fn dd_cancellation() {
        // (x + 1) - x - 1 accumulated in dd is exactly zero
        let x = 1e15;
        let r = Dd::ZERO.add_f64(x + 1.0).add_f64(-x).add_f64(-1.0);
        assert_eq!(r.value(), 0.0);
    }

    #[test]
    fn gk15_exact_on_low_degree_polynomials() {
        let f = |t: f64| Ok(t * t * t - 2.0 * t + 1.0);
        let (v, e) = gk15(&f, 0.0, 2.0).unwrap();
        assert!((v - (4.0 - 4.0 + 2.0)).abs() < 1e-13);
        assert!(e < 1e-12);
    }

    #[test]
    fn adaptive_handles_oscillation() {
        let f = |t: f64| Ok((10.0 * t).sin());
        let v = adaptive_quad(&f, 0.0, 1.0, 1e-12, 1e-12, 10_000).unwrap();
        let exact = (1.0 - (10.0f64).cos()) / 10.0;
        assert!((v - exact).abs() < 1e-11);
    }

    #[test]
    fn adaptive_reports_failure() {
        // step discontinuity with an impossible budget
        let f = |t: f64| Ok(if t < 0.3 { 0.0 } else { 1.0 });
        let r = adaptive_quad(&f, 0.0, 1.0, 1e-15, 0.0, 3);
        assert!(matches!(r, Err(Error::QuadratureFailure(3))));
    }

    #[test]
    fn golden_finds_interior_peak() {
        let g = |t: f64| Ok(-(t - 0.37).powi(2) + 2.0);
        let m = golden_max(&g, 0.0, 1.0).unwrap();
        assert!((m - 2.0).abs() < 1e-12);
    }

    #[test]
    fn neumaier_recovers_lost_bits() {
        let s = neumaier_sum([1e16, 1.0, -1e16]);
        assert_eq!(s, 1.0);
    }
}
