//! Shared domain types: diffusion specifications, simulated paths, hitting
//! records and Monte Carlo estimates.

use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::expr::{CoeffExpr, EvalError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("interval requires lower < upper, got [{lower}, {upper}]")]
    EmptyInterval { lower: f64, upper: f64 },
    #[error("{0} is outside the open interval")]
    OutsideInterval(f64),
    #[error("diffusion coefficient must be positive, a({y}) = {value}")]
    NonPositiveDiffusion { y: f64, value: f64 },
    #[error("coefficient `{which}` failed at y = {y}: {source}")]
    Coefficient {
        which: &'static str,
        y: f64,
        #[source]
        source: EvalError,
    },
    #[error("path has no samples")]
    EmptyPath,
}

/// Possibly unbounded interval `[lower, upper]`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    lower: f64,
    upper: f64,
}

impl Interval {
    pub fn new(lower: f64, upper: f64) -> Result<Interval, ModelError> {
        if lower.is_nan() || upper.is_nan() || lower >= upper {
            return Err(ModelError::EmptyInterval { lower, upper });
        }
        Ok(Interval { lower, upper })
    }

    pub fn positive_half_line() -> Interval {
        Interval { lower: 0.0, upper: f64::INFINITY }
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn contains_open(&self, y: f64) -> bool {
        y > self.lower && y < self.upper
    }

    pub fn contains_closed(&self, y: f64) -> bool {
        y >= self.lower && y <= self.upper
    }
}

pub type CoeffFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A drift or diffusion coefficient: either a parsed expression or a native
/// function handle (used for built-in families and transformed drifts).
#[derive(Clone)]
pub enum Coefficient {
    Expr(CoeffExpr),
    Func { name: String, f: CoeffFn },
}

impl Coefficient {
    pub fn func(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Coefficient::Func { name: name.into(), f: Arc::new(f) }
    }

    pub fn constant(c: f64) -> Self {
        Coefficient::func(format!("{c}"), move |_| c)
    }

    #[inline]
    pub fn eval(&self, y: f64) -> Result<f64, EvalError> {
        match self {
            Coefficient::Expr(e) => e.eval(y),
            Coefficient::Func { f, .. } => {
                let v = f(y);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(EvalError::NonFinite { value: v })
                }
            }
        }
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Expr(e) => write!(f, "Expr({})", e.source()),
            Coefficient::Func { name, .. } => write!(f, "Func({name})"),
        }
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Expr(e) => f.write_str(e.source()),
            Coefficient::Func { name, .. } => f.write_str(name),
        }
    }
}

impl From<CoeffExpr> for Coefficient {
    fn from(e: CoeffExpr) -> Self {
        Coefficient::Expr(e)
    }
}

/// Generator `L φ = b φ' + ½ a φ''` on `[l, r]`, absorbed at the boundary.
#[derive(Debug, Clone)]
pub struct DiffusionSpec {
    pub interval: Interval,
    pub drift: Coefficient,
    pub diffusion: Coefficient,
    pub label: String,
}

impl DiffusionSpec {
    pub fn new(
        interval: Interval,
        drift: impl Into<Coefficient>,
        diffusion: impl Into<Coefficient>,
        label: impl Into<String>,
    ) -> Self {
        DiffusionSpec {
            interval,
            drift: drift.into(),
            diffusion: diffusion.into(),
            label: label.into(),
        }
    }

    /// Brownian motion on `(0, ∞)`, absorbed at 0.
    pub fn brownian() -> Self {
        DiffusionSpec::new(
            Interval::positive_half_line(),
            Coefficient::constant(0.0),
            Coefficient::constant(1.0),
            "bm",
        )
    }

    /// Driftless geometric Brownian motion, `a(y) = y²`.
    pub fn geometric_brownian() -> Self {
        DiffusionSpec::new(
            Interval::positive_half_line(),
            Coefficient::constant(0.0),
            Coefficient::func("y^2", |y| y * y),
            "gbm",
        )
    }

    /// Geometric Brownian motion with unit drift, `b(y) = y`, `a(y) = y²`.
    pub fn geometric_brownian_unit_drift() -> Self {
        DiffusionSpec::new(
            Interval::positive_half_line(),
            Coefficient::func("y", |y| y),
            Coefficient::func("y^2", |y| y * y),
            "gbm+drift",
        )
    }

    /// Three-dimensional Bessel process, `b(y) = 1/y`, `a = 1`.
    pub fn bessel3() -> Self {
        DiffusionSpec::new(
            Interval::positive_half_line(),
            Coefficient::func("1/y", |y| 1.0 / y),
            Coefficient::constant(1.0),
            "bessel3",
        )
    }

    pub fn with_interval(mut self, interval: Interval) -> Self {
        self.interval = interval;
        self
    }

    /// Same dynamics, absorbed at `lower` and `upper` (clipped to the
    /// original interval).
    pub fn restricted(&self, lower: f64, upper: f64) -> Result<Self, ModelError> {
        let interval = Interval::new(
            lower.max(self.interval.lower),
            upper.min(self.interval.upper),
        )?;
        Ok(DiffusionSpec { interval, ..self.clone() })
    }

    #[inline]
    pub fn drift_at(&self, y: f64) -> Result<f64, ModelError> {
        self.drift
            .eval(y)
            .map_err(|source| ModelError::Coefficient { which: "drift", y, source })
    }

    #[inline]
    pub fn diffusion_at(&self, y: f64) -> Result<f64, ModelError> {
        let a = self
            .diffusion
            .eval(y)
            .map_err(|source| ModelError::Coefficient { which: "diffusion", y, source })?;
        if a <= 0.0 {
            return Err(ModelError::NonPositiveDiffusion { y, value: a });
        }
        Ok(a)
    }
}

/// First passage time of a level, or `Never` within the simulated window.
///
/// `Never` stands in for both "beyond infinity" and "not before the
/// horizon"; a finite simulation cannot tell them apart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HittingTime {
    At(f64),
    Never,
}

impl HittingTime {
    pub fn time(self) -> Option<f64> {
        match self {
            HittingTime::At(t) => Some(t),
            HittingTime::Never => None,
        }
    }

    /// `self ≤ other` in the order where `Never` exceeds every finite time.
    pub fn not_after(self, other: HittingTime) -> bool {
        match (self, other) {
            (HittingTime::At(a), HittingTime::At(b)) => a <= b,
            (HittingTime::At(_), HittingTime::Never) => true,
            (HittingTime::Never, HittingTime::At(_)) => false,
            (HittingTime::Never, HittingTime::Never) => true,
        }
    }
}

impl Serialize for HittingTime {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            HittingTime::At(t) => s.serialize_f64(*t),
            HittingTime::Never => s.serialize_str("never"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HittingRecord {
    pub level: f64,
    pub time: HittingTime,
}

impl HittingRecord {
    pub fn crossed(&self) -> bool {
        matches!(self.time, HittingTime::At(_))
    }
}

/// How a simulated path stopped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Exit {
    /// Frozen at a boundary point of the interval.
    Absorbed(f64),
    /// Exceeded the divergence cap, the finite stand-in for reaching ∞.
    Diverged(f64),
    /// Reached the horizon first.
    Horizon,
}

/// One simulated trajectory on a fixed time grid.
///
/// `times`/`values` may be a subsample of the simulation grid; they always
/// include time 0 and the stopping time. `integral` is accumulated over the
/// full grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Trapezoidal `∫ X dt` up to the stopping time.
    pub integral: f64,
    pub exit: Exit,
    pub hits: Vec<HittingRecord>,
    /// Both interval ends signalled a crossing in the same step; the upper
    /// one was taken.
    pub tied: bool,
    pub seed_index: u64,
}

impl PathSample {
    /// Path whose recorded points are the whole grid.
    pub fn from_grid(times: Vec<f64>, values: Vec<f64>, exit: Exit, seed_index: u64) -> PathSample {
        let mut integral = 0.0;
        for i in 1..values.len() {
            integral += 0.5 * (values[i] + values[i - 1]) * (times[i] - times[i - 1]);
        }
        PathSample { times, values, integral, exit, hits: vec![], tied: false, seed_index }
    }

    pub fn absorbed_at(&self) -> Option<f64> {
        match self.exit {
            Exit::Absorbed(b) => Some(b),
            _ => None,
        }
    }

    pub fn diverged(&self) -> bool {
        matches!(self.exit, Exit::Diverged(_))
    }

    pub fn truncated(&self) -> bool {
        self.exit == Exit::Horizon
    }

    /// Time at which the path stopped (absorption, divergence or horizon).
    pub fn stop_time(&self) -> f64 {
        *self.times.last().expect("nonempty path")
    }

    pub fn hit(&self, level: f64) -> Option<&HittingRecord> {
        self.hits.iter().find(|h| h.level == level)
    }

    /// Value of the stopped path at time `t`: the last grid value at or
    /// before `t`. `None` when the path was cut at the horizon before `t`.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        let last = self.stop_time();
        if t > last + 1e-12 * last.max(1.0) {
            return if self.truncated() { None } else { self.values.last().copied() };
        }
        let idx = self.times.partition_point(|&s| s <= t + 1e-12 * s.max(1.0));
        Some(self.values[idx.saturating_sub(1)])
    }

    /// `∫ X dt` over the simulated window divided by its length.
    pub fn time_average(&self) -> f64 {
        let dur = self.stop_time();
        if dur == 0.0 {
            return self.values[0];
        }
        self.integral / dur
    }
}

/// Finite-horizon proxy for `X_∞`: the absorbing boundary if absorbed,
/// otherwise the last simulated value. Check `path.truncated()` to see
/// whether the proxy is exact.
pub fn terminal_value(path: &PathSample) -> Result<f64, ModelError> {
    if let Some(b) = path.absorbed_at() {
        return Ok(b);
    }
    path.values.last().copied().ok_or(ModelError::EmptyPath)
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n: usize,
}

impl McEstimate {
    /// Sample mean and standard error of the mean. Panics on an empty slice.
    pub fn from_samples(xs: &[f64]) -> McEstimate {
        assert!(!xs.is_empty(), "estimate from empty sample");
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        McEstimate { value: mean, stderr: (var / n as f64).sqrt(), n }
    }

    pub fn binomial(successes: usize, n: usize) -> McEstimate {
        assert!(n > 0, "estimate from empty sample");
        let p = successes as f64 / n as f64;
        McEstimate { value: p, stderr: (p * (1.0 - p) / n as f64).sqrt(), n }
    }

    /// `|value − target| ≤ k · stderr`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.stderr
    }

    /// Distance to `target` in units of standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        if self.stderr == 0.0 {
            if self.value == target {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.value - target) / self.stderr
        }
    }
}
