//! h-transforms of diffusions by their scale function.
//!
//! Changing measure with density `s(Y)/s(y)` keeps the diffusion
//! coefficient and adds the drift `a s'/s`. With `s(l) = 0` (upward
//! conditioning) the extra drift is positive; with `s(r) = 0` (downward) it
//! is negative. Generators are applied with central finite differences.

use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::expr::{CoeffExpr, EvalError};
use crate::model::{Coefficient, DiffusionSpec, ModelError};
use crate::scale::{ClosedForm, Normalization, ScaleError, ScaleFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Direction {
    /// Scale normalized with `s(l) = 0`, `s > 0`.
    Upward,
    /// Scale normalized with `s(r) = 0`, `s < 0`.
    Downward,
}

impl Direction {
    pub fn for_normalization(n: Normalization) -> Direction {
        match n {
            Normalization::L => Direction::Upward,
            Normalization::R => Direction::Downward,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransformError {
    #[error("{direction:?} transform needs normalization {expected:?}, scale has {actual:?}")]
    NormalizationMismatch { direction: Direction, expected: Normalization, actual: Normalization },
    #[error("scale has the wrong sign for a {direction:?} transform at y = {y} (s = {s})")]
    SignMismatch { direction: Direction, y: f64, s: f64 },
    #[error("scale vanishes at interior grid point y = {0}")]
    VanishingScale(f64),
    #[error("added drift has the wrong sign at y = {y}: {drift}")]
    DriftSign { y: f64, drift: f64 },
    #[error("stencil y ± h = {y} ± {h} leaves the open interval")]
    StencilOutside { y: f64, h: f64 },
    #[error("function evaluation failed at {y}: {source}")]
    Eval {
        y: f64,
        #[source]
        source: EvalError,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Scale(#[from] ScaleError),
}

/// Base dynamics, the scale used, and the transformed dynamics.
#[derive(Debug, Clone)]
pub struct TransformedSpec {
    pub base: DiffusionSpec,
    pub scale: Arc<ScaleFunction>,
    pub direction: Direction,
    pub result: DiffusionSpec,
}

impl TransformedSpec {
    /// `a(y) s'(y) / s(y)`.
    pub fn added_drift(&self, y: f64) -> Result<f64, TransformError> {
        added_drift(&self.base, &self.scale, y)
    }
}

fn added_drift(spec: &DiffusionSpec, s: &ScaleFunction, y: f64) -> Result<f64, TransformError> {
    let a = spec.diffusion_at(y)?;
    let (sv, sp) = s.eval(y);
    Ok(a * sp / sv)
}

pub fn transform(
    spec: &DiffusionSpec,
    s: &ScaleFunction,
    direction: Direction,
) -> Result<TransformedSpec, TransformError> {
    let expected = match direction {
        Direction::Upward => Normalization::L,
        Direction::Downward => Normalization::R,
    };
    if s.normalization() != expected {
        return Err(TransformError::NormalizationMismatch {
            direction,
            expected,
            actual: s.normalization(),
        });
    }
    let sign = match direction {
        Direction::Upward => 1.0,
        Direction::Downward => -1.0,
    };
    for (&y, &v) in s.grid().iter().zip(s.values()) {
        if v == 0.0 {
            return Err(TransformError::VanishingScale(y));
        }
        if v * sign < 0.0 {
            return Err(TransformError::SignMismatch { direction, y, s: v });
        }
        if spec.interval.contains_open(y) {
            let drift = added_drift(spec, s, y)?;
            if !(drift * sign > 0.0) {
                return Err(TransformError::DriftSign { y, drift });
            }
        }
    }

    let scale = Arc::new(s.clone());
    let (b, a, sc) = (spec.drift.clone(), spec.diffusion.clone(), Arc::clone(&scale));
    let drift = Coefficient::func(format!("({}) + a s'/s", spec.drift), move |y| {
        let (Ok(bv), Ok(av)) = (b.eval(y), a.eval(y)) else {
            return f64::NAN;
        };
        let (sv, sp) = sc.eval(y);
        bv + av * sp / sv
    });
    let arrow = match direction {
        Direction::Upward => "up",
        Direction::Downward => "down",
    };
    let result = DiffusionSpec {
        interval: spec.interval,
        drift,
        diffusion: spec.diffusion.clone(),
        label: format!("{}^{}", spec.label, arrow),
    };
    Ok(TransformedSpec { base: spec.clone(), scale, direction, result })
}

/// `b(y) D_c φ + ½ a(y) D² φ` with step `h`.
pub fn apply_generator_fn<E>(
    spec: &DiffusionSpec,
    phi: impl Fn(f64) -> Result<f64, E>,
    y: f64,
    h: f64,
) -> Result<f64, TransformError>
where
    E: Into<EvalError>,
{
    if !(spec.interval.contains_open(y - h) && spec.interval.contains_open(y + h)) || !(h > 0.0) {
        return Err(TransformError::StencilOutside { y, h });
    }
    let at = |x: f64| phi(x).map_err(|e| TransformError::Eval { y: x, source: e.into() });
    let (fm, f0, fp) = (at(y - h)?, at(y)?, at(y + h)?);
    let b = spec.drift_at(y)?;
    let a = spec.diffusion_at(y)?;
    let d1 = (fp - fm) / (2.0 * h);
    let d2 = (fp - 2.0 * f0 + fm) / (h * h);
    Ok(b * d1 + 0.5 * a * d2)
}

pub fn apply_generator(spec: &DiffusionSpec, phi: &CoeffExpr, y: f64, h: f64) -> Result<f64, TransformError> {
    apply_generator_fn(spec, |x| phi.eval(x), y, h)
}

/// Default difference step: `1e-4` of the grid span.
pub fn default_step(grid: &[f64]) -> f64 {
    1e-4 * (grid[grid.len() - 1] - grid[0])
}

/// `|(1/s) L[s φ](y) − L^s φ(y)|` at one point.
pub fn generator_identity_error(
    spec: &DiffusionSpec,
    transformed: &TransformedSpec,
    phi: &(impl Fn(f64) -> Result<f64, EvalError> + ?Sized),
    y: f64,
    h: f64,
) -> Result<f64, TransformError> {
    let s = &transformed.scale;
    let lhs = apply_generator_fn(spec, |x| phi(x).map(|v| s.value(x) * v), y, h)? / s.value(y);
    let rhs = apply_generator_fn(&transformed.result, phi, y, h)?;
    Ok((lhs - rhs).abs())
}

/// Max over `grid` of the generator identity error, transforming in the
/// direction implied by the scale's normalization.
pub fn check_generator_identity(
    spec: &DiffusionSpec,
    s: &ScaleFunction,
    phi: &CoeffExpr,
    grid: &[f64],
    h: f64,
) -> Result<f64, TransformError> {
    let t = transform(spec, s, Direction::for_normalization(s.normalization()))?;
    let f = |x: f64| phi.eval(x);
    let mut worst: f64 = 0.0;
    for &y in grid {
        worst = worst.max(generator_identity_error(spec, &t, &f, y, h)?);
    }
    Ok(worst)
}

/// `E(h) / E(h/2)` for the generator identity error at `y`; about 4 for a
/// second-order stencil when the error does not vanish identically.
pub fn identity_convergence_ratio(
    spec: &DiffusionSpec,
    s: &ScaleFunction,
    phi: &CoeffExpr,
    y: f64,
    h: f64,
) -> Result<f64, TransformError> {
    let t = transform(spec, s, Direction::for_normalization(s.normalization()))?;
    let f = |x: f64| phi.eval(x);
    let coarse = generator_identity_error(spec, &t, &f, y, h)?;
    let fine = generator_identity_error(spec, &t, &f, y, 0.5 * h)?;
    Ok(coarse / fine)
}

/// Scale of the upward-transformed diffusion: `s̃ = −1/s`.
///
/// `s̃(l) = −∞`. When `s(r) = ∞` the result satisfies `s̃(r) = 0`; when
/// `s(r)` is finite, `s̃(r) = −1/s(r)` is finite but nonzero.
pub fn downward_scale(s: &ScaleFunction) -> Result<ScaleFunction, TransformError> {
    if s.normalization() != Normalization::L {
        return Err(TransformError::NormalizationMismatch {
            direction: Direction::Downward,
            expected: Normalization::L,
            actual: s.normalization(),
        });
    }
    for (&y, &v) in s.grid().iter().zip(s.values()) {
        if !(v > 0.0) {
            return Err(TransformError::SignMismatch { direction: Direction::Upward, y, s: v });
        }
    }
    let (_, upper) = s.boundary_limits();
    let limits = (f64::NEG_INFINITY, if upper.is_infinite() { 0.0 } else { -1.0 / upper });
    let grid = s.grid().to_vec();

    if let Some(c) = s.closed() {
        let (f, fp, fpp) = (Arc::clone(&c.s), Arc::clone(&c.sp), Arc::clone(&c.spp));
        let (f1, f2, fp2) = (Arc::clone(&f), Arc::clone(&f), Arc::clone(&fp));
        let closed = ClosedForm {
            name: format!("-1/({})", c.name),
            s: Arc::new(move |y| -1.0 / f(y)),
            sp: Arc::new(move |y| fp(y) / (f1(y) * f1(y))),
            spp: Arc::new(move |y| {
                let (v, d, dd) = (f2(y), fp2(y), fpp(y));
                dd / (v * v) - 2.0 * d * d / (v * v * v)
            }),
        };
        return Ok(ScaleFunction::from_parts(grid, Normalization::R, limits, closed)?);
    }

    let mut st = Vec::with_capacity(grid.len());
    let mut stp = Vec::with_capacity(grid.len());
    let mut stpp = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let (v, d, dd) = (s.values()[i], s.derivative()[i], s.second_derivative()[i]);
        st.push(-1.0 / v);
        stp.push(d / (v * v));
        stpp.push(dd / (v * v) - 2.0 * d * d / (v * v * v));
    }
    Ok(ScaleFunction::from_tables(grid, st, stp, stpp, Normalization::R, limits)?)
}

/// `s(y) = y` on `grid`, for driftless specs with `l = 0`.
pub fn identity_scale(grid: Vec<f64>, upper_limit: f64) -> Result<ScaleFunction, ScaleError> {
    ScaleFunction::closed_form("y", grid, |y| y, |_| 1.0, |_| 0.0, Normalization::L, (0.0, upper_limit))
}
