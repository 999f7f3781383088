//! Empirical distribution functions and two-sample Kolmogorov–Smirnov.

use serde::Serialize;
use thiserror::Error;

/// Asymptotic two-sample KS coefficient at the 1% level.
pub const KS_COEFF_1PCT: f64 = 1.628;

/// Minimum per-side sample size accepted by the KS routines.
pub const KS_MIN_SAMPLES: usize = 50;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("sample too small for KS: n1 = {n1}, n2 = {n2} (need {KS_MIN_SAMPLES} each)")]
    InsufficientSamples { n1: usize, n2: usize },
    #[error("weights must be nonnegative, finite and not all zero")]
    DegenerateWeights,
    #[error("{0} samples but {1} weights")]
    LengthMismatch(usize, usize),
    #[error("sample contains NaN")]
    NaN,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    #[serde(rename = "stat")]
    pub statistic: f64,
    pub n1: usize,
    pub n2: usize,
    pub critical_1pct: f64,
    pub pass: bool,
}

impl KsResult {
    fn new(statistic: f64, n1: usize, n2: usize) -> KsResult {
        let critical_1pct = critical_1pct(n1, n2);
        KsResult { statistic, n1, n2, critical_1pct, pass: statistic < critical_1pct }
    }
}

pub fn critical_1pct(n1: usize, n2: usize) -> f64 {
    let (n1, n2) = (n1 as f64, n2 as f64);
    KS_COEFF_1PCT * ((n1 + n2) / (n1 * n2)).sqrt()
}

fn sorted(xs: &[f64]) -> Result<Vec<f64>, StatsError> {
    if xs.iter().any(|x| x.is_nan()) {
        return Err(StatsError::NaN);
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Right-continuous step function with jumps `w_i / Σw` at the samples.
#[derive(Debug, Clone)]
pub struct WeightedEcdf {
    points: Vec<f64>,
    cumulative: Vec<f64>,
    total: f64,
    ess: f64,
}

impl WeightedEcdf {
    pub fn eval(&self, x: f64) -> f64 {
        let k = self.points.partition_point(|&p| p <= x);
        if k == 0 {
            0.0
        } else {
            (self.cumulative[k - 1] / self.total).min(1.0)
        }
    }

    pub fn total_weight(&self) -> f64 {
        self.total
    }

    pub fn ess(&self) -> f64 {
        self.ess
    }

    /// Distinct jump locations, ascending.
    pub fn support(&self) -> &[f64] {
        &self.points
    }
}

/// Effective sample size `(Σw)² / Σw²`.
pub fn effective_sample_size(ws: &[f64]) -> f64 {
    let s: f64 = ws.iter().sum();
    let s2: f64 = ws.iter().map(|w| w * w).sum();
    if s2 == 0.0 {
        0.0
    } else {
        s * s / s2
    }
}

pub fn weighted_ecdf(xs: &[f64], ws: &[f64]) -> Result<WeightedEcdf, StatsError> {
    if xs.len() != ws.len() {
        return Err(StatsError::LengthMismatch(xs.len(), ws.len()));
    }
    if ws.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(StatsError::DegenerateWeights);
    }
    if xs.iter().any(|x| x.is_nan()) {
        return Err(StatsError::NaN);
    }
    let mut pairs: Vec<(f64, f64)> =
        xs.iter().copied().zip(ws.iter().copied()).filter(|&(_, w)| w > 0.0).collect();
    if pairs.is_empty() {
        return Err(StatsError::DegenerateWeights);
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut points = Vec::with_capacity(pairs.len());
    let mut cumulative = Vec::with_capacity(pairs.len());
    let mut acc = 0.0;
    for (x, w) in pairs {
        acc += w;
        if points.last() == Some(&x) {
            *cumulative.last_mut().unwrap() = acc;
        } else {
            points.push(x);
            cumulative.push(acc);
        }
    }
    Ok(WeightedEcdf { points, cumulative, total: acc, ess: effective_sample_size(ws) })
}

pub fn ecdf(xs: &[f64]) -> Result<WeightedEcdf, StatsError> {
    weighted_ecdf(xs, &vec![1.0; xs.len()])
}

/// `sup_x |F(x) − G(x)|` for two step functions; evaluated on the union of
/// jump points, which is where the supremum is attained.
fn sup_distance(f: &WeightedEcdf, g: &WeightedEcdf) -> f64 {
    let (a, b) = (f.support(), g.support());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(&p), Some(&q)) => p.min(q),
            (Some(&p), None) => p,
            (None, Some(&q)) => q,
            (None, None) => unreachable!(),
        };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        let fx = if i == 0 { 0.0 } else { f.cumulative[i - 1] / f.total };
        let gx = if j == 0 { 0.0 } else { g.cumulative[j - 1] / g.total };
        d = d.max((fx - gx).abs());
    }
    d.min(1.0)
}

pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> Result<KsResult, StatsError> {
    if xs.len() < KS_MIN_SAMPLES || ys.len() < KS_MIN_SAMPLES {
        return Err(StatsError::InsufficientSamples { n1: xs.len(), n2: ys.len() });
    }
    // Unit-weight path kept separate from the weighted one so that the
    // statistic is an exact multiple of 1/lcm(n1, n2).
    let (a, b) = (sorted(xs)?, sorted(ys)?);
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n1 - j as f64 / n2).abs());
    }
    Ok(KsResult::new(d, a.len(), b.len()))
}

/// KS distance between the ECDF of `xs` and the weighted ECDF of
/// `(ys, ws)`. The weighted side enters the critical value through its
/// effective sample size, rounded down.
pub fn ks_weighted(xs: &[f64], ys: &[f64], ws: &[f64]) -> Result<KsResult, StatsError> {
    let f = ecdf(xs)?;
    let g = weighted_ecdf(ys, ws)?;
    let n2 = g.ess().floor() as usize;
    if xs.len() < KS_MIN_SAMPLES || n2 < KS_MIN_SAMPLES {
        return Err(StatsError::InsufficientSamples { n1: xs.len(), n2 });
    }
    Ok(KsResult::new(sup_distance(&f, &g), xs.len(), n2))
}
