//! Bounded time scales and their point topology.
//!
//! A [`TimeScale`] is a finite ordered union of disjoint closed segments of
//! the real line; a degenerate segment encodes an isolated point. This covers
//! every scale the quadrature machinery needs (real intervals, integer and
//! h-spaced grids, q-lattices, and arbitrary mixtures) while keeping the jump
//! operators and Delta-integration exactly computable.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default absolute tolerance used when matching user-supplied floating
/// values against scale points.
pub const DEFAULT_MEMBERSHIP_TOL: f64 = 1e-12;

/// A closed segment `[left, right]`; `left == right` is an isolated point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub left: f64,
    pub right: f64,
}

impl Segment {
    #[inline]
    pub fn is_point(&self) -> bool {
        self.left == self.right
    }
}

/// Structural family of a scale. `Continuous` and `Integers` are detected
/// from the segment list; grid and lattice kinds are tagged by their
/// constructors so closed-form monomials can dispatch on them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScaleKind {
    /// A single non-degenerate real interval.
    Continuous,
    /// Unit-spaced integer points.
    Integers,
    /// Points `k*h` for consecutive integers `k`.
    HGrid { h: f64 },
    /// Points `q^k`, `q > 1`, for consecutive exponents `k`.
    QLattice { q: f64 },
    General,
}

/// Density classification of a point, as reported by [`TimeScale::classify`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PointClass {
    pub right_dense: bool,
    pub right_scattered: bool,
    pub left_dense: bool,
    pub left_scattered: bool,
}

impl PointClass {
    pub fn is_isolated(&self) -> bool {
        self.right_scattered && self.left_scattered
    }

    pub fn is_dense(&self) -> bool {
        self.right_dense && self.left_dense
    }
}

/// The four jump quantities at a point: forward jump, backward jump, and the
/// two graininess values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JumpOperators {
    pub sigma: f64,
    pub rho: f64,
    pub mu: f64,
    pub nu: f64,
}

/// A right-scattered point together with its forward jump.
#[derive(Clone, Copy, Debug)]
pub(crate) struct JumpPoint {
    pub t: f64,
    pub sigma: f64,
    pub mu: f64,
}

/// One piece of the decomposition of `[a, b]` intersected with a scale:
/// either a continuous sub-segment or a right-scattered jump.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Piece {
    Dense { lo: f64, hi: f64 },
    Jump(JumpPoint),
}

/// JSON description of a scale, accepted by the CLI and [`TimeScale::from_spec`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScaleSpec {
    Continuous { a: f64, b: f64 },
    Integers { a: f64, b: f64 },
    Hgrid { a: f64, b: f64, h: f64 },
    Qlattice { q: f64, m: u32, n: u32 },
    Segments { segments: Vec<(f64, f64)> },
}

/// A bounded time scale: a nonempty, strictly separated, ordered sequence of
/// closed segments holding at least two points. Immutable after construction;
/// every operation is pure.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeScale {
    segments: Vec<Segment>,
    kind: ScaleKind,
    membership_tol: f64,
}

impl TimeScale {
    /// The real interval `[a, b]`.
    pub fn continuous(a: f64, b: f64) -> Result<TimeScale> {
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(Error::MalformedSpec(format!(
                "continuous scale needs finite a < b, got a={a}, b={b}"
            )));
        }
        Self::normalize(vec![Segment { left: a, right: b }], ScaleKind::Continuous)
    }

    /// The integers contained in `[a, b]`.
    pub fn integers(a: f64, b: f64) -> Result<TimeScale> {
        Self::h_grid_impl(a, b, 1.0)
    }

    /// The multiples of `h` contained in `[a, b]`.
    pub fn h_grid(a: f64, b: f64, h: f64) -> Result<TimeScale> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::MalformedSpec(format!("grid step must be > 0, got h={h}")));
        }
        Self::h_grid_impl(a, b, h)
    }

    fn h_grid_impl(a: f64, b: f64, h: f64) -> Result<TimeScale> {
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(Error::MalformedSpec(format!(
                "grid scale needs finite a < b, got a={a}, b={b}"
            )));
        }
        let snap = |r: f64| {
            let rr = r.round();
            if (r - rr).abs() <= 1e-9 * (1.0 + r.abs()) {
                rr
            } else {
                r
            }
        };
        let k_min = snap(a / h).ceil() as i64;
        let k_max = snap(b / h).floor() as i64;
        if k_min > k_max {
            return Err(Error::EmptyScale(format!(
                "no multiples of {h} inside [{a}, {b}]"
            )));
        }
        let segments = (k_min..=k_max)
            .map(|k| {
                let x = k as f64 * h;
                Segment { left: x, right: x }
            })
            .collect();
        Self::normalize(segments, ScaleKind::HGrid { h })
    }

    /// The q-lattice `{q^m, q^{m+1}, ..., q^n}` with `q > 1`.
    pub fn q_lattice(q: f64, m: u32, n: u32) -> Result<TimeScale> {
        if !(q.is_finite() && q > 1.0) {
            return Err(Error::MalformedSpec(format!("q-lattice needs q > 1, got q={q}")));
        }
        if m >= n {
            return Err(Error::MalformedSpec(format!(
                "q-lattice needs m < n, got m={m}, n={n}"
            )));
        }
        let segments = (m..=n)
            .map(|k| {
                let x = q.powi(k as i32);
                Segment { left: x, right: x }
            })
            .collect();
        Self::normalize(segments, ScaleKind::QLattice { q })
    }

    /// An explicit segment list; segments are sorted and touching segments
    /// merged. Overlaps are rejected.
    pub fn from_segments<I>(segments: I) -> Result<TimeScale>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let segments = segments
            .into_iter()
            .map(|(left, right)| Segment { left, right })
            .collect();
        Self::normalize(segments, ScaleKind::General)
    }

    /// Build from a parsed [`ScaleSpec`].
    pub fn from_spec(spec: &ScaleSpec) -> Result<TimeScale> {
        match *spec {
            ScaleSpec::Continuous { a, b } => Self::continuous(a, b),
            ScaleSpec::Integers { a, b } => Self::integers(a, b),
            ScaleSpec::Hgrid { a, b, h } => Self::h_grid(a, b, h),
            ScaleSpec::Qlattice { q, m, n } => Self::q_lattice(q, m, n),
            ScaleSpec::Segments { ref segments } => Self::from_segments(segments.iter().copied()),
        }
    }

    fn normalize(mut segments: Vec<Segment>, declared: ScaleKind) -> Result<TimeScale> {
        if segments.is_empty() {
            return Err(Error::EmptyScale("no segments given".into()));
        }
        for s in &segments {
            if !(s.left.is_finite() && s.right.is_finite()) || s.left > s.right {
                return Err(Error::MalformedSpec(format!(
                    "bad segment [{}, {}]",
                    s.left, s.right
                )));
            }
        }
        segments.sort_by(|a, b| a.left.total_cmp(&b.left));
        let mut merged: Vec<Segment> = Vec::with_capacity(segments.len());
        for s in segments {
            match merged.last_mut() {
                Some(last) if s.left < last.right => {
                    return Err(Error::MalformedSpec(format!(
                        "segment [{}, {}] overlaps [{}, {}]",
                        s.left, s.right, last.left, last.right
                    )));
                }
                Some(last) if s.left == last.right => last.right = s.right,
                _ => merged.push(s),
            }
        }
        let min = merged[0].left;
        let max = merged[merged.len() - 1].right;
        if min == max {
            return Err(Error::MalformedSpec(
                "scale must contain at least two points".into(),
            ));
        }
        let kind = match declared {
            ScaleKind::General => Self::detect_kind(&merged),
            // an h-grid that lands on unit-spaced integers is the integer grid
            ScaleKind::HGrid { .. } => match Self::detect_kind(&merged) {
                ScaleKind::Integers => ScaleKind::Integers,
                _ => declared,
            },
            k => k,
        };
        Ok(TimeScale {
            segments: merged,
            kind,
            membership_tol: DEFAULT_MEMBERSHIP_TOL,
        })
    }

    fn detect_kind(segments: &[Segment]) -> ScaleKind {
        if segments.len() == 1 && !segments[0].is_point() {
            return ScaleKind::Continuous;
        }
        let unit_integers = segments.iter().all(|s| s.is_point() && s.left.fract() == 0.0)
            && segments.windows(2).all(|w| w[1].left - w[0].left == 1.0);
        if unit_integers {
            ScaleKind::Integers
        } else {
            ScaleKind::General
        }
    }

    /// Replace the membership tolerance used when resolving user-supplied
    /// floating values to scale points.
    pub fn with_membership_tol(mut self, tol: f64) -> TimeScale {
        self.membership_tol = tol.max(0.0);
        self
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn kind(&self) -> ScaleKind {
        self.kind
    }

    pub fn min(&self) -> f64 {
        self.segments[0].left
    }

    pub fn max(&self) -> f64 {
        self.segments[self.segments.len() - 1].right
    }

    /// True when every segment is an isolated point.
    pub fn is_discrete(&self) -> bool {
        self.segments.iter().all(Segment::is_point)
    }

    /// Index of the segment containing `t`, for exact members only.
    fn segment_index(&self, t: f64) -> Option<usize> {
        let idx = self.segments.partition_point(|s| s.left <= t);
        (idx > 0 && t <= self.segments[idx - 1].right).then(|| idx - 1)
    }

    /// Exact membership test (no tolerance).
    pub fn contains(&self, t: f64) -> bool {
        t.is_finite() && self.segment_index(t).is_some()
    }

    /// The scale point nearest to `t` (ties resolve downward).
    pub fn nearest(&self, t: f64) -> f64 {
        if self.contains(t) {
            return t;
        }
        if t <= self.min() {
            return self.min();
        }
        if t >= self.max() {
            return self.max();
        }
        // t lies in a gap between two segments
        let idx = self.segments.partition_point(|s| s.left <= t);
        let below = self.segments[idx - 1].right;
        let above = self.segments[idx].left;
        if t - below <= above - t {
            below
        } else {
            above
        }
    }

    /// Snap `t` to a member of the scale: exact members pass through, other
    /// values snap to the nearest point within the membership tolerance.
    pub fn resolve(&self, t: f64) -> Result<f64> {
        if !t.is_finite() {
            return Err(Error::NotInScale(t));
        }
        if self.contains(t) {
            return Ok(t);
        }
        let p = self.nearest(t);
        if (p - t).abs() <= self.membership_tol {
            Ok(p)
        } else {
            Err(Error::NotInScale(t))
        }
    }

    /// Forward jump: the nearest scale point strictly above `t`, with
    /// `sigma(max) = max`.
    pub fn sigma(&self, t: f64) -> Result<f64> {
        let t = self.resolve(t)?;
        let i = self.segment_index(t).expect("resolved point");
        if t < self.segments[i].right {
            Ok(t)
        } else if i + 1 < self.segments.len() {
            Ok(self.segments[i + 1].left)
        } else {
            Ok(t)
        }
    }

    /// Backward jump: the nearest scale point strictly below `t`, with
    /// `rho(min) = min`.
    pub fn rho(&self, t: f64) -> Result<f64> {
        let t = self.resolve(t)?;
        let i = self.segment_index(t).expect("resolved point");
        if t > self.segments[i].left {
            Ok(t)
        } else if i > 0 {
            Ok(self.segments[i - 1].right)
        } else {
            Ok(t)
        }
    }

    /// All four jump quantities at `t`.
    pub fn jump_operators(&self, t: f64) -> Result<JumpOperators> {
        let t = self.resolve(t)?;
        let sigma = self.sigma(t)?;
        let rho = self.rho(t)?;
        Ok(JumpOperators {
            sigma,
            rho,
            mu: sigma - t,
            nu: t - rho,
        })
    }

    /// Graininess `mu(t) = sigma(t) - t`.
    pub fn mu(&self, t: f64) -> Result<f64> {
        let t = self.resolve(t)?;
        Ok(self.sigma(t)? - t)
    }

    /// Density classification. The maximum reports as right-dense and the
    /// minimum as left-dense, matching the fixed-point convention for the
    /// jump operators at the extremes.
    pub fn classify(&self, t: f64) -> Result<PointClass> {
        let t = self.resolve(t)?;
        let ops = self.jump_operators(t)?;
        Ok(PointClass {
            right_dense: ops.sigma == t,
            right_scattered: ops.sigma > t,
            left_dense: ops.rho == t,
            left_scattered: ops.rho < t,
        })
    }

    /// Whether `t` belongs to the differentiation domain: false exactly when
    /// `t` is a left-scattered maximum.
    pub fn in_kappa(&self, t: f64) -> Result<bool> {
        let t = self.resolve(t)?;
        Ok(!(t == self.max() && self.rho(t)? < t))
    }

    /// Decompose `[a, b]` (resolved members, `a <= b`) into continuous
    /// sub-segments and right-scattered jumps, in increasing order. Jump
    /// points are those in `[a, b)`.
    pub(crate) fn pieces(&self, a: f64, b: f64) -> Vec<Piece> {
        debug_assert!(a <= b);
        let mut out = Vec::new();
        if a == b {
            return out;
        }
        for (i, s) in self.segments.iter().enumerate() {
            if s.right < a || s.left > b {
                continue;
            }
            let lo = s.left.max(a);
            let hi = s.right.min(b);
            if lo < hi {
                out.push(Piece::Dense { lo, hi });
            }
            if s.right >= a && s.right < b {
                // the right endpoint jumps to the next segment
                let sigma = self.segments[i + 1].left;
                out.push(Piece::Jump(JumpPoint {
                    t: s.right,
                    sigma,
                    mu: sigma - s.right,
                }));
            }
        }
        out
    }

    /// Short human-readable description, used in verification reports.
    pub fn description(&self) -> String {
        match self.kind {
            ScaleKind::Continuous => format!("continuous [{}, {}]", self.min(), self.max()),
            ScaleKind::Integers => format!("integers [{}, {}]", self.min(), self.max()),
            ScaleKind::HGrid { h } => format!("h-grid h={} [{}, {}]", h, self.min(), self.max()),
            ScaleKind::QLattice { q } => {
                format!("q-lattice q={} [{}, {}]", q, self.min(), self.max())
            }
            ScaleKind::General => {
                let parts: Vec<String> = self
                    .segments
                    .iter()
                    .map(|s| {
                        if s.is_point() {
                            format!("{{{}}}", s.left)
                        } else {
                            format!("[{}, {}]", s.left, s.right)
                        }
                    })
                    .collect();
                format!("segments {}", parts.join(" u "))
            }
        }
    }
}
