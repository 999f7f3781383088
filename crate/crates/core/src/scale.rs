//! Scale functions of one-dimensional diffusions.
//!
//! The scale function solves `b s' + ½ a s'' = 0`, so
//! `s'(y) = exp(−∫_{y0}^{y} 2b/a)` and `s(y) = ∫_{y0}^{y} s'`. Both
//! integrals are computed panel by panel with adaptive Simpson on a grid
//! that is geometric towards finite boundaries. Boundary limits are found
//! by stepping geometrically past the grid ends until the increments either
//! die out (finite limit) or keep growing past a threshold (infinite limit).

use std::fmt;
use std::io::{self, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{DiffusionSpec, Interval, ModelError};
use crate::quad::{adaptive_simpson, KahanSum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    /// `s(l) = 0`
    L,
    /// `s(r) = 0`
    R,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BoundaryClass {
    /// `s(l)` finite, `s(r) = ∞`: the lower end is reached almost surely.
    HitsLOnly,
    /// `s(l) = −∞`, `s(r)` finite.
    HitsROnly,
    /// Both limits finite: exits through either end with positive probability.
    HitsBoth,
}

impl fmt::Display for BoundaryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryClass::HitsLOnly => "HITS_L_ONLY",
            BoundaryClass::HitsROnly => "HITS_R_ONLY",
            BoundaryClass::HitsBoth => "HITS_BOTH",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScaleError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(
        "boundary limit at {side:?} end undecided after {steps} extension steps \
         (partial sum {partial_sum}, last increment {last_increment})"
    )]
    NonConvergence { side: Side, steps: usize, partial_sum: f64, last_increment: f64 },
    #[error("normalization {requested:?} needs a finite limit, got s(l) = {lower}, s(r) = {upper}")]
    NormalizationUnavailable { requested: Normalization, lower: f64, upper: f64 },
    #[error("both scale limits infinite (s(l) = {lower}, s(r) = {upper}); unsupported")]
    Unsupported { lower: f64, upper: f64 },
    #[error("scale function not strictly increasing near y = {0}")]
    NotIncreasing(f64),
}

#[derive(Debug, Clone)]
pub struct GridConfig {
    pub y_min: f64,
    pub y_max: f64,
    pub points: usize,
    /// `None` picks `L` when `s(l)` is finite, otherwise `R`.
    pub normalization: Option<Normalization>,
    /// Relative tolerance per quadrature panel.
    pub panel_tol: f64,
    /// Partial sums beyond this (with non-decreasing increment ratios) mean
    /// the limit is infinite.
    pub divergence_threshold: f64,
    /// Tail increments below this fraction of the running value mean the
    /// limit is finite.
    pub convergence_tol: f64,
    /// Geometric factor of the boundary extension.
    pub extension_factor: f64,
    pub max_extension_steps: usize,
    /// Consecutive increment ratios ≥ 1 after which the limit is declared
    /// infinite even below `divergence_threshold` (catches logarithmic growth).
    pub stall_steps: usize,
}

impl GridConfig {
    /// Grid over most of `interval`, geometric towards finite ends.
    pub fn for_interval(interval: Interval, anchor: f64) -> GridConfig {
        let (l, r) = (interval.lower(), interval.upper());
        let span = anchor.abs().max(1.0);
        let y_min = if l.is_finite() { l + 1e-6 * (anchor - l) } else { anchor - 100.0 * span };
        let y_max = if r.is_finite() { r - 1e-6 * (r - anchor) } else { anchor + 100.0 * span };
        GridConfig { y_min, y_max, ..GridConfig::default() }
    }

    pub fn with_range(mut self, y_min: f64, y_max: f64) -> Self {
        self.y_min = y_min;
        self.y_max = y_max;
        self
    }

    pub fn with_normalization(mut self, n: Normalization) -> Self {
        self.normalization = Some(n);
        self
    }
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            y_min: 1e-3,
            y_max: 1e3,
            points: 2001,
            normalization: None,
            panel_tol: 1e-10,
            divergence_threshold: 1e8,
            convergence_tol: 1e-10,
            extension_factor: 2.0,
            max_extension_steps: 2000,
            stall_steps: 60,
        }
    }
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub(crate) struct ClosedForm {
    pub(crate) name: String,
    pub(crate) s: RealFn,
    pub(crate) sp: RealFn,
    pub(crate) spp: RealFn,
}

/// Grid-backed, strictly increasing scale function.
///
/// Between grid points `s` and `s'` are cubic Hermite interpolants (using
/// `s'` and `s''` as slopes). Past the grid ends `s` is continued linearly
/// and `s'` held constant. A closed-form scale bypasses interpolation.
#[derive(Clone)]
pub struct ScaleFunction {
    grid: Vec<f64>,
    s: Vec<f64>,
    sp: Vec<f64>,
    spp: Vec<f64>,
    normalization: Normalization,
    lower_limit: f64,
    upper_limit: f64,
    closed: Option<ClosedForm>,
}

impl fmt::Debug for ScaleFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScaleFunction")
            .field("points", &self.grid.len())
            .field("range", &(self.grid[0], self.grid[self.grid.len() - 1]))
            .field("normalization", &self.normalization)
            .field("limits", &(self.lower_limit, self.upper_limit))
            .field("closed_form", &self.closed.as_ref().map(|c| c.name.as_str()))
            .finish()
    }
}

impl ScaleFunction {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.s
    }

    pub fn derivative(&self) -> &[f64] {
        &self.sp
    }

    pub fn second_derivative(&self) -> &[f64] {
        &self.spp
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    /// `(s(l+), s(r−))`, possibly infinite.
    pub fn boundary_limits(&self) -> (f64, f64) {
        (self.lower_limit, self.upper_limit)
    }

    pub fn is_closed_form(&self) -> bool {
        self.closed.is_some()
    }

    /// Scale with known closed form, tabulated on `grid`.
    pub fn closed_form(
        name: impl Into<String>,
        grid: Vec<f64>,
        s: impl Fn(f64) -> f64 + Send + Sync + 'static,
        sp: impl Fn(f64) -> f64 + Send + Sync + 'static,
        spp: impl Fn(f64) -> f64 + Send + Sync + 'static,
        normalization: Normalization,
        limits: (f64, f64),
    ) -> Result<ScaleFunction, ScaleError> {
        let closed = ClosedForm { name: name.into(), s: Arc::new(s), sp: Arc::new(sp), spp: Arc::new(spp) };
        ScaleFunction::from_parts(grid, normalization, limits, closed)
    }

    pub(crate) fn from_parts(
        grid: Vec<f64>,
        normalization: Normalization,
        limits: (f64, f64),
        closed: ClosedForm,
    ) -> Result<ScaleFunction, ScaleError> {
        check_grid(&grid)?;
        let s = grid.iter().map(|&y| (closed.s)(y)).collect();
        let sp = grid.iter().map(|&y| (closed.sp)(y)).collect();
        let spp = grid.iter().map(|&y| (closed.spp)(y)).collect();
        let out = ScaleFunction {
            grid,
            s,
            sp,
            spp,
            normalization,
            lower_limit: limits.0,
            upper_limit: limits.1,
            closed: Some(closed),
        };
        out.check_monotone()?;
        Ok(out)
    }

    pub(crate) fn closed(&self) -> Option<&ClosedForm> {
        self.closed.as_ref()
    }

    pub(crate) fn from_tables(
        grid: Vec<f64>,
        s: Vec<f64>,
        sp: Vec<f64>,
        spp: Vec<f64>,
        normalization: Normalization,
        limits: (f64, f64),
    ) -> Result<ScaleFunction, ScaleError> {
        check_grid(&grid)?;
        let out = ScaleFunction {
            grid,
            s,
            sp,
            spp,
            normalization,
            lower_limit: limits.0,
            upper_limit: limits.1,
            closed: None,
        };
        out.check_monotone()?;
        Ok(out)
    }

    fn check_monotone(&self) -> Result<(), ScaleError> {
        for i in 0..self.grid.len() {
            let bad_slope = !(self.sp[i] > 0.0 && self.sp[i].is_finite());
            let bad_step = i > 0 && !(self.s[i] > self.s[i - 1]);
            if bad_slope || bad_step || !self.s[i].is_finite() {
                return Err(ScaleError::NotIncreasing(self.grid[i]));
            }
        }
        Ok(())
    }

    /// `(s(y), s'(y))`.
    #[inline]
    pub fn eval(&self, y: f64) -> (f64, f64) {
        if let Some(c) = &self.closed {
            return ((c.s)(y), (c.sp)(y));
        }
        let g = &self.grid;
        let n = g.len();
        if y <= g[0] {
            return (self.s[0] + self.sp[0] * (y - g[0]), self.sp[0]);
        }
        if y >= g[n - 1] {
            return (self.s[n - 1] + self.sp[n - 1] * (y - g[n - 1]), self.sp[n - 1]);
        }
        let i = g.partition_point(|&x| x <= y) - 1;
        let h = g[i + 1] - g[i];
        let t = (y - g[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let s = h00 * self.s[i] + h10 * h * self.sp[i] + h01 * self.s[i + 1] + h11 * h * self.sp[i + 1];
        let sp = h00 * self.sp[i] + h10 * h * self.spp[i] + h01 * self.sp[i + 1] + h11 * h * self.spp[i + 1];
        (s, sp)
    }

    pub fn value(&self, y: f64) -> f64 {
        self.eval(y).0
    }

    pub fn classify(&self) -> Result<BoundaryClass, ScaleError> {
        classify_boundaries(self)
    }

    /// CSV with header `y,s,s_prime`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "y,s,s_prime")?;
        for i in 0..self.grid.len() {
            writeln!(w, "{},{},{}", self.grid[i], self.s[i], self.sp[i])?;
        }
        Ok(())
    }
}

fn check_grid(grid: &[f64]) -> Result<(), ScaleError> {
    if grid.len() < 2 {
        return Err(ScaleError::InvalidGrid("need at least two points".into()));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) || grid.iter().any(|y| !y.is_finite()) {
        return Err(ScaleError::InvalidGrid("grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

/// Classification from the two limits alone.
pub fn classify_limits(lower: f64, upper: f64) -> Result<BoundaryClass, ScaleError> {
    match (lower.is_finite(), upper.is_finite()) {
        (true, false) => Ok(BoundaryClass::HitsLOnly),
        (false, true) => Ok(BoundaryClass::HitsROnly),
        (true, true) => Ok(BoundaryClass::HitsBoth),
        (false, false) => Err(ScaleError::Unsupported { lower, upper }),
    }
}

pub fn classify_boundaries(s: &ScaleFunction) -> Result<BoundaryClass, ScaleError> {
    classify_limits(s.lower_limit, s.upper_limit)
}

/// Point spacing: uniform in `u`, mapped so that grid points crowd towards
/// finite boundaries.
struct GridMap {
    l: f64,
    r: f64,
}

impl GridMap {
    fn to_u(&self, y: f64) -> f64 {
        match (self.l.is_finite(), self.r.is_finite()) {
            (true, false) => (y - self.l).ln(),
            (false, true) => -(self.r - y).ln(),
            (true, true) => {
                let p = (y - self.l) / (self.r - self.l);
                (p / (1.0 - p)).ln()
            }
            (false, false) => y,
        }
    }

    fn to_y(&self, u: f64) -> f64 {
        match (self.l.is_finite(), self.r.is_finite()) {
            (true, false) => self.l + u.exp(),
            (false, true) => self.r - (-u).exp(),
            (true, true) => self.l + (self.r - self.l) / (1.0 + (-u).exp()),
            (false, false) => u,
        }
    }
}

fn build_grid(interval: Interval, cfg: &GridConfig, anchor: f64) -> Result<Vec<f64>, ScaleError> {
    let (y_min, y_max) = (cfg.y_min, cfg.y_max);
    if !(interval.contains_open(y_min) && interval.contains_open(y_max) && y_min < y_max) {
        return Err(ScaleError::InvalidGrid(format!(
            "[{y_min}, {y_max}] must lie inside ({}, {})",
            interval.lower(),
            interval.upper()
        )));
    }
    if !(y_min..=y_max).contains(&anchor) {
        return Err(ScaleError::InvalidGrid(format!("anchor {anchor} outside [{y_min}, {y_max}]")));
    }
    if cfg.points < 2 {
        return Err(ScaleError::InvalidGrid("need at least two points".into()));
    }
    let map = GridMap { l: interval.lower(), r: interval.upper() };
    let (u0, u1) = (map.to_u(y_min), map.to_u(y_max));
    let n = cfg.points;
    let mut grid: Vec<f64> = (0..n)
        .map(|i| match i {
            0 => y_min,
            _ if i == n - 1 => y_max,
            _ => map.to_y(u0 + (u1 - u0) * i as f64 / (n - 1) as f64),
        })
        .collect();
    grid.push(anchor);
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs().max(1e-300));
    // the anchor must survive deduplication exactly
    if let Some(g) = grid.iter_mut().find(|g| (**g - anchor).abs() <= 1e-14 * anchor.abs().max(1e-300)) {
        *g = anchor;
    }
    check_grid(&grid)?;
    Ok(grid)
}

struct Integrator<'a> {
    spec: &'a DiffusionSpec,
    tol: f64,
}

impl Integrator<'_> {
    /// `2b/a` at `y`.
    fn log_slope(&self, y: f64) -> Result<f64, ModelError> {
        let b = self.spec.drift_at(y)?;
        let a = self.spec.diffusion_at(y)?;
        Ok(2.0 * b / a)
    }

    fn integral_log_slope(&self, from: f64, to: f64) -> Result<f64, ModelError> {
        adaptive_simpson(&mut |v| self.log_slope(v), from, to, self.tol, 1e-300)
    }

    /// `(∫_{from}^{to} 2b/a, ∫_{from}^{to} s')` with `s'(from) = exp(−i_from)`.
    fn panel(&self, from: f64, to: f64, i_from: f64) -> Result<(f64, f64), ModelError> {
        let di = self.integral_log_slope(from, to)?;
        let ds = adaptive_simpson(
            &mut |u| Ok::<_, ModelError>((-(i_from + self.integral_log_slope(from, u)?)).exp()),
            from,
            to,
            self.tol,
            1e-300,
        )?;
        Ok((di, ds))
    }
}

pub fn compute_scale(spec: &DiffusionSpec, anchor: f64, cfg: &GridConfig) -> Result<ScaleFunction, ScaleError> {
    let grid = build_grid(spec.interval, cfg, anchor)?;
    let quad = Integrator { spec, tol: cfg.panel_tol };
    let n = grid.len();
    let k0 = grid.iter().position(|&g| g == anchor).expect("anchor on grid");

    // I(y) = ∫_{anchor}^{y} 2b/a and s(y) relative to s(anchor) = 0
    let mut integral = vec![0.0; n];
    let mut s = vec![0.0; n];
    let (mut acc_i, mut acc_s) = (KahanSum::default(), KahanSum::default());
    for k in k0..n - 1 {
        let (di, ds) = quad.panel(grid[k], grid[k + 1], acc_i.value())?;
        acc_i.add(di);
        acc_s.add(ds);
        integral[k + 1] = acc_i.value();
        s[k + 1] = acc_s.value();
    }
    let (mut acc_i, mut acc_s) = (KahanSum::default(), KahanSum::default());
    for k in (1..=k0).rev() {
        let (di, ds) = quad.panel(grid[k], grid[k - 1], acc_i.value())?;
        acc_i.add(di);
        acc_s.add(ds);
        integral[k - 1] = acc_i.value();
        s[k - 1] = acc_s.value();
    }
    let sp: Vec<f64> = integral.iter().map(|i| (-i).exp()).collect();
    let mut spp = Vec::with_capacity(n);
    for (k, &y) in grid.iter().enumerate() {
        spp.push(-quad.log_slope(y)? * sp[k]);
    }

    let lower = extend_to_boundary(&quad, cfg, Side::Lower, grid[0], integral[0], s[0])?;
    let upper = extend_to_boundary(&quad, cfg, Side::Upper, grid[n - 1], integral[n - 1], s[n - 1])?;

    let normalization = match cfg.normalization {
        Some(n) => n,
        None if lower.is_finite() => Normalization::L,
        None if upper.is_finite() => Normalization::R,
        None => return Err(ScaleError::Unsupported { lower, upper }),
    };
    let shift = match normalization {
        Normalization::L => lower,
        Normalization::R => upper,
    };
    if !shift.is_finite() {
        return Err(ScaleError::NormalizationUnavailable { requested: normalization, lower, upper });
    }
    for v in &mut s {
        *v -= shift;
    }
    let limits = match normalization {
        Normalization::L => (0.0, upper - shift),
        Normalization::R => (lower - shift, 0.0),
    };
    ScaleFunction::from_tables(grid, s, sp, spp, normalization, limits)
}

/// Limit of `s` (relative to the anchor) beyond one grid end.
fn extend_to_boundary(
    quad: &Integrator<'_>,
    cfg: &GridConfig,
    side: Side,
    start: f64,
    start_integral: f64,
    start_s: f64,
) -> Result<f64, ScaleError> {
    let boundary = match side {
        Side::Lower => quad.spec.interval.lower(),
        Side::Upper => quad.spec.interval.upper(),
    };
    let sign = match side {
        Side::Lower => -1.0,
        Side::Upper => 1.0,
    };
    let factor = cfg.extension_factor;
    let mut p = start;
    let mut integral = start_integral;
    let mut running = KahanSum::default();
    running.add(start_s);
    let mut prev_incr: Option<f64> = None;
    let mut prev_ratio: Option<f64> = None;
    let mut stalled = 0usize;
    let mut last_incr = 0.0;

    for _ in 0..cfg.max_extension_steps {
        let q = if boundary.is_finite() {
            boundary + (p - boundary) / factor
        } else {
            p + sign * p.abs().max(1.0) * (factor - 1.0)
        };
        if q == p || (boundary.is_finite() && q == boundary) || !q.is_finite() {
            break;
        }
        let (di, ds) = quad.panel(p, q, integral)?;
        let incr = ds.abs();
        if incr.is_infinite() || (integral + di) == f64::NEG_INFINITY {
            return Ok(sign * f64::INFINITY);
        }
        if incr.is_nan() {
            break;
        }
        integral += di;
        running.add(ds);
        last_incr = incr;
        p = q;
        let value = running.value();

        let ratio = prev_incr.map(|pi| if pi > 0.0 { incr / pi } else { f64::INFINITY });
        if incr <= cfg.convergence_tol * value.abs().max(f64::MIN_POSITIVE) {
            // geometric tail estimate from the last increment ratio
            let tail = match ratio {
                Some(rho) if rho < 1.0 => incr * rho / (1.0 - rho),
                _ => 0.0,
            };
            return Ok(value + sign * tail);
        }
        if let Some(rho) = ratio {
            let non_decreasing = prev_ratio.is_none_or(|pr| rho >= pr * (1.0 - 1e-9));
            if value.abs() > cfg.divergence_threshold && non_decreasing {
                return Ok(sign * f64::INFINITY);
            }
            stalled = if rho >= 1.0 - 1e-9 { stalled + 1 } else { 0 };
            if stalled >= cfg.stall_steps {
                return Ok(sign * f64::INFINITY);
            }
        }
        prev_ratio = ratio;
        prev_incr = Some(incr);
    }
    Err(ScaleError::NonConvergence {
        side,
        steps: cfg.max_extension_steps,
        partial_sum: running.value(),
        last_increment: last_incr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use crate::model::Coefficient;

    fn bm_on(l: f64, r: f64) -> DiffusionSpec {
        DiffusionSpec::brownian().with_interval(Interval::new(l, r).unwrap())
    }

    #[test]
    fn brownian_scale_is_identity() {
        let spec = DiffusionSpec::brownian();
        let cfg = GridConfig::for_interval(spec.interval, 1.0)
            .with_range(1e-4, 10.0)
            .with_normalization(Normalization::L);
        let s = compute_scale(&spec, 1.0, &cfg).unwrap();
        for (y, v) in s.grid().iter().zip(s.values()) {
            assert!((v - y).abs() <= 1e-12, "s({y}) = {v}");
        }
        assert!(s.derivative().iter().all(|&d| d == 1.0));
        assert_eq!(s.boundary_limits().0, 0.0);
        assert_eq!(s.boundary_limits().1, f64::INFINITY);
        assert_eq!(s.classify().unwrap(), BoundaryClass::HitsLOnly);
    }

    #[test]
    fn bessel3_scale_is_minus_reciprocal() {
        let spec = DiffusionSpec::bessel3();
        let cfg = GridConfig::for_interval(spec.interval, 1.0)
            .with_range(1e-2, 100.0)
            .with_normalization(Normalization::R);
        let s = compute_scale(&spec, 1.0, &cfg).unwrap();
        for (y, v) in s.grid().iter().zip(s.values()) {
            let exact = -1.0 / y;
            assert!((v - exact).abs() <= 1e-8 * exact.abs(), "s({y}) = {v}");
        }
        let (lo, hi) = s.boundary_limits();
        assert_eq!(lo, f64::NEG_INFINITY);
        assert_eq!(hi, 0.0);
        assert_eq!(s.classify().unwrap(), BoundaryClass::HitsROnly);
        // interpolation between nodes
        let (v, d) = s.eval(3.3);
        assert!((v + 1.0 / 3.3).abs() < 1e-9);
        assert!((d - 1.0 / (3.3 * 3.3)).abs() < 1e-9);
    }

    #[test]
    fn gbm_scale_is_identity() {
        let spec = DiffusionSpec::geometric_brownian();
        let cfg = GridConfig::for_interval(spec.interval, 1.0)
            .with_range(0.1, 10.0)
            .with_normalization(Normalization::L);
        let s = compute_scale(&spec, 1.0, &cfg).unwrap();
        for (y, v) in s.grid().iter().zip(s.values()) {
            assert!((v - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn bm_on_unit_interval_hits_both() {
        let spec = bm_on(0.0, 1.0);
        let cfg = GridConfig::for_interval(spec.interval, 0.5);
        let s = compute_scale(&spec, 0.5, &cfg).unwrap();
        assert_eq!(s.normalization(), Normalization::L);
        let (lo, hi) = s.boundary_limits();
        assert!(lo == 0.0 && (hi - 1.0).abs() < 1e-12);
        assert_eq!(s.classify().unwrap(), BoundaryClass::HitsBoth);
    }

    #[test]
    fn parsed_drift_matches_closed_form() {
        // b = -y, a = 1 on (0, ∞): s'(y) = exp(y² − 1) with anchor 1
        let spec = DiffusionSpec::new(
            Interval::positive_half_line(),
            Coefficient::Expr(parse_expr("-y").unwrap()),
            Coefficient::Expr(parse_expr("1").unwrap()),
            "ou",
        );
        let cfg = GridConfig::for_interval(spec.interval, 1.0).with_range(1e-3, 4.0);
        let s = compute_scale(&spec, 1.0, &cfg).unwrap();
        for (y, d) in s.grid().iter().zip(s.derivative()) {
            let exact = (y * y - 1.0).exp();
            assert!((d - exact).abs() <= 1e-9 * exact, "s'({y})");
        }
        assert_eq!(s.classify().unwrap(), BoundaryClass::HitsLOnly);
    }

    #[test]
    fn both_infinite_is_unsupported() {
        let spec = DiffusionSpec::brownian()
            .with_interval(Interval::new(f64::NEG_INFINITY, f64::INFINITY).unwrap());
        let cfg = GridConfig::for_interval(spec.interval, 0.0);
        assert!(matches!(compute_scale(&spec, 0.0, &cfg), Err(ScaleError::Unsupported { .. })));
    }

    #[test]
    fn wrong_normalization_rejected() {
        let spec = DiffusionSpec::brownian();
        let cfg = GridConfig::for_interval(spec.interval, 1.0).with_normalization(Normalization::R);
        assert!(matches!(
            compute_scale(&spec, 1.0, &cfg),
            Err(ScaleError::NormalizationUnavailable { .. })
        ));
    }

    #[test]
    fn non_positive_diffusion_rejected() {
        let spec = DiffusionSpec::new(
            Interval::positive_half_line(),
            Coefficient::constant(0.0),
            Coefficient::Expr(parse_expr("y - 2").unwrap()),
            "bad",
        );
        let cfg = GridConfig::for_interval(spec.interval, 3.0).with_range(1.0, 5.0);
        assert!(matches!(
            compute_scale(&spec, 3.0, &cfg),
            Err(ScaleError::Model(ModelError::NonPositiveDiffusion { .. }))
        ));
    }

    #[test]
    fn logarithmic_divergence_is_detected() {
        // b = 1/(2y), a = 1: s' = 1/y, s = log y, infinite at both ends
        let spec = DiffusionSpec::new(
            Interval::positive_half_line(),
            Coefficient::func("1/(2y)", |y| 0.5 / y),
            Coefficient::constant(1.0),
            "log-scale",
        );
        let cfg = GridConfig::for_interval(spec.interval, 1.0);
        let r = compute_scale(&spec, 1.0, &cfg);
        assert!(matches!(r, Err(ScaleError::Unsupported { .. })), "{r:?}");
    }

    #[test]
    fn csv_export() {
        let spec = bm_on(0.0, 1.0);
        let cfg = GridConfig { points: 3, ..GridConfig::for_interval(spec.interval, 0.5) };
        let s = compute_scale(&spec, 0.5, &cfg).unwrap();
        let mut out = Vec::new();
        s.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("y,s,s_prime\n"));
        assert_eq!(text.lines().count(), 1 + s.grid().len());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn classification_is_affine_invariant(
                lo in prop_oneof![Just(f64::NEG_INFINITY), -10.0f64..0.0],
                hi in prop_oneof![Just(f64::INFINITY), 0.1f64..10.0],
                c in 0.01f64..100.0,
                d in -50.0f64..50.0,
            ) {
                let base = classify_limits(lo, hi);
                let moved = classify_limits(c * lo + d, c * hi + d);
                prop_assert_eq!(base, moved);
            }

            #[test]
            fn scale_is_strictly_increasing_at_any_resolution(
                points in 3usize..400,
                mu in -2.0f64..2.0,
            ) {
                // constant drift μ, unit diffusion on (0, 5)
                let spec = DiffusionSpec::new(
                    Interval::new(0.0, 5.0).unwrap(),
                    Coefficient::constant(mu),
                    Coefficient::constant(1.0),
                    "drifted",
                );
                let cfg = GridConfig { points, ..GridConfig::for_interval(spec.interval, 1.0) };
                let s = compute_scale(&spec, 1.0, &cfg).unwrap();
                prop_assert!(s.values().windows(2).all(|w| w[0] < w[1]));
                prop_assert!(s.derivative().iter().all(|&d| d > 0.0));
                prop_assert_eq!(s.classify().unwrap(), BoundaryClass::HitsBoth);
                // closed form: s(y) = (1 − e^{−2μy}) / (2μ) e^{2μ}, up to the anchor factor
                let exact = |y: f64| if mu.abs() < 1e-12 { y } else {
                    (1.0 - (-2.0 * mu * y).exp()) / (2.0 * mu) * (2.0 * mu).exp()
                };
                for (y, v) in s.grid().iter().zip(s.values()) {
                    prop_assert!((v - exact(*y)).abs() <= 1e-8 * exact(5.0).abs().max(1.0));
                }
            }
        }
    }
}
