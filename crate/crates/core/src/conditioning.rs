//! Conditioning on level hits: rejection, importance weighting and direct
//! simulation of the transformed dynamics.
//!
//! Processes are taken in local-martingale coordinates. Upward conditioning
//! of `X` (from `x0`, absorbed at `l`) on `{T_a ≤ T_l}` weights a path by
//! `(X_τ − l)/(x0 − l)` with `τ = T_a ∧ T_l`; downward conditioning of the
//! transformed process on `{T_level ≤ T_M}` weights by `x0 / X_τ`, where the
//! cap `M` stands in for infinity.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::htransform::{identity_scale, transform, Direction, TransformError};
use crate::model::{DiffusionSpec, Exit, Interval, McEstimate, ModelError, PathSample};
use crate::simulate::{simulate_map, Recording, SimConfig, SimError};
use crate::stats::{effective_sample_size, ks_two_sample, ks_weighted, KsResult, StatsError};

/// Largest tolerated share of horizon-truncated paths.
pub const MAX_TRUNCATED_FRACTION: f64 = 0.01;
/// Smallest sample for the measure-identity scenarios.
pub const MIN_IDENTITY_SAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConditioningError {
    #[error("{truncated} of {n} paths met neither level before the horizon; need a longer horizon")]
    NeedLongerHorizon { truncated: usize, n: usize },
    #[error("need at least {min} paths, got {n}")]
    InsufficientSamples { n: usize, min: usize },
    #[error("no path was accepted")]
    AcceptanceStarvation,
    #[error("invalid level: {0}")]
    InvalidLevel(String),
    #[error("cannot compare two weighted reports")]
    BothWeighted,
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Mode {
    Rejection,
    Weighted,
    Direct,
}

/// Standard stopped-path functionals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Functional {
    /// `X_{t ∧ stop}`.
    ValueAt { t: f64 },
    /// Time average of `X` up to the stopping time.
    TimeAverage,
    StopTime,
    /// Last value (the boundary when absorbed).
    Terminal,
}

impl Functional {
    /// NaN when the path was truncated before `t`.
    pub fn eval(&self, p: &PathSample) -> f64 {
        match *self {
            Functional::ValueAt { t } => p.value_at(t).unwrap_or(f64::NAN),
            Functional::TimeAverage => p.time_average(),
            Functional::StopTime => p.stop_time(),
            Functional::Terminal => *p.values.last().unwrap_or(&f64::NAN),
        }
    }

    /// Recording that keeps enough grid points to evaluate the functional.
    pub fn recording(&self, dt: f64) -> Recording {
        match *self {
            Functional::ValueAt { t } => {
                let k = (t / dt).round();
                if k >= 1.0 && ((k * dt - t).abs() <= 1e-9 * t.max(1.0)) {
                    Recording::Stride(k as usize)
                } else {
                    Recording::Full
                }
            }
            _ => Recording::Endpoints,
        }
    }
}

/// Per-path weights and functional values for one conditioning mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditioningReport {
    pub mode: Mode,
    pub n_total: usize,
    pub n_accepted: usize,
    pub n_truncated: usize,
    pub n_ties: usize,
    /// Aligned with `functional_samples`; rejection weights are 0 or 1.
    pub weights: Vec<f64>,
    pub ess: f64,
    pub functional_samples: Vec<f64>,
    pub comparison: Option<KsResult>,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    mode: Mode,
    n_total: usize,
    n_accepted: usize,
    n_truncated: usize,
    n_ties: usize,
    acceptance: f64,
    ess: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    ks: Option<&'a KsResult>,
}

impl ConditioningReport {
    fn new(mode: Mode, outcomes: &[Outcome], weights: Vec<f64>, accepted: usize) -> ConditioningReport {
        ConditioningReport {
            mode,
            n_total: outcomes.len(),
            n_accepted: accepted,
            n_truncated: outcomes.iter().filter(|o| o.exit == Exit::Horizon).count(),
            n_ties: outcomes.iter().filter(|o| o.tied).count(),
            ess: effective_sample_size(&weights),
            weights,
            functional_samples: outcomes.iter().map(|o| o.value).collect(),
            comparison: None,
        }
    }

    /// Unconditioned sample: every path counts with weight 1.
    pub fn direct(paths: &[PathSample], functional: impl Fn(&PathSample) -> f64) -> ConditioningReport {
        let outcomes: Vec<Outcome> = paths.iter().map(|p| Outcome::of(p, &functional)).collect();
        let n = outcomes.len();
        ConditioningReport::new(Mode::Direct, &outcomes, vec![1.0; n], n)
    }

    pub fn acceptance(&self) -> McEstimate {
        McEstimate::binomial(self.n_accepted, self.n_total)
    }

    /// Mean weight with its standard error.
    pub fn mean_weight(&self) -> McEstimate {
        McEstimate::from_samples(&self.weights)
    }

    /// Functional values with positive weight.
    pub fn accepted_samples(&self) -> Vec<f64> {
        self.functional_samples
            .iter()
            .zip(&self.weights)
            .filter(|(_, &w)| w > 0.0)
            .map(|(&x, _)| x)
            .collect()
    }

    /// Self-normalized weighted mean of the functional.
    pub fn weighted_mean(&self) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for (&x, &w) in self.functional_samples.iter().zip(&self.weights) {
            if w > 0.0 {
                num += w * x;
                den += w;
            }
        }
        num / den
    }

    fn is_uniform(&self) -> bool {
        self.mode != Mode::Weighted
    }

    /// Two-sample KS against `other`; stored in `self.comparison`.
    pub fn compare(&mut self, other: &ConditioningReport) -> Result<KsResult, ConditioningError> {
        let ks = match (self.is_uniform(), other.is_uniform()) {
            (true, true) => ks_two_sample(&self.accepted_samples(), &other.accepted_samples())?,
            (true, false) => ks_weighted(&self.accepted_samples(), &other.functional_samples, &other.weights)?,
            (false, true) => ks_weighted(&other.accepted_samples(), &self.functional_samples, &self.weights)?,
            (false, false) => return Err(ConditioningError::BothWeighted),
        };
        self.comparison = Some(ks);
        Ok(ks)
    }

    /// `{mode, n_total, n_accepted, ess, ks: {stat, critical_1pct, pass}}`
    /// plus truncation and tie counts.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(ReportJson {
            mode: self.mode,
            n_total: self.n_total,
            n_accepted: self.n_accepted,
            n_truncated: self.n_truncated,
            n_ties: self.n_ties,
            acceptance: self.n_accepted as f64 / self.n_total.max(1) as f64,
            ess: self.ess,
            ks: self.comparison.as_ref(),
        })
        .expect("report serializes")
    }
}

#[derive(Debug, Clone, Copy)]
struct Outcome {
    exit: Exit,
    last: f64,
    tied: bool,
    value: f64,
}

impl Outcome {
    fn of(p: &PathSample, f: impl Fn(&PathSample) -> f64) -> Outcome {
        Outcome { exit: p.exit, last: *p.values.last().expect("nonempty path"), tied: p.tied, value: f(p) }
    }
}

fn check_truncation(outcomes: &[Outcome]) -> Result<(), ConditioningError> {
    let truncated = outcomes.iter().filter(|o| o.exit == Exit::Horizon).count();
    if truncated as f64 > MAX_TRUNCATED_FRACTION * outcomes.len() as f64 {
        return Err(ConditioningError::NeedLongerHorizon { truncated, n: outcomes.len() });
    }
    Ok(())
}

/// A path that is already stopped at `x0` at time 0.
fn frozen_path(x0: f64, index: u64) -> PathSample {
    PathSample::from_grid(vec![0.0], vec![x0], Exit::Absorbed(x0), index)
}

fn simulate_outcomes<F>(spec: &DiffusionSpec, x0: f64, cfg: &SimConfig, f: &F) -> Result<Vec<Outcome>, ConditioningError>
where
    F: Fn(&PathSample) -> f64 + Sync,
{
    Ok(simulate_map(spec, x0, cfg, |p| Outcome::of(&p, f))?)
}

/// Condition `X` (local-martingale coordinates, finite lower end `l`) on
/// reaching `a` before `l`. Returns the rejection and weighted reports.
pub fn condition_upward<F>(
    spec: &DiffusionSpec,
    x0: f64,
    a: f64,
    functional: F,
    cfg: &SimConfig,
) -> Result<(ConditioningReport, ConditioningReport), ConditioningError>
where
    F: Fn(&PathSample) -> f64 + Sync,
{
    let l = spec.interval.lower();
    if !l.is_finite() {
        return Err(ConditioningError::InvalidLevel("upward conditioning needs a finite lower end".into()));
    }
    if !(a >= x0 && spec.interval.contains_closed(a) && a.is_finite()) {
        return Err(ConditioningError::InvalidLevel(format!("need x0 <= a inside the interval, got a = {a}")));
    }
    let outcomes: Vec<Outcome> = if a == x0 {
        (0..cfg.n_paths as u64).map(|i| Outcome::of(&frozen_path(x0, i), &functional)).collect()
    } else {
        let restricted = spec.restricted(l, a)?;
        let cfg = SimConfig { watch_levels: vec![l, a], divergence_cap: f64::INFINITY, ..cfg.clone() };
        let out = simulate_outcomes(&restricted, x0, &cfg, &functional)?;
        check_truncation(&out)?;
        out
    };
    let hit = |o: &Outcome| o.exit == Exit::Absorbed(a);
    let accepted = outcomes.iter().filter(|o| hit(o)).count();
    if accepted == 0 {
        return Err(ConditioningError::AcceptanceStarvation);
    }
    let rejection_w = outcomes.iter().map(|o| if hit(o) { 1.0 } else { 0.0 }).collect();
    let weighted_w = outcomes.iter().map(|o| (o.last - l) / (x0 - l)).collect();
    Ok((
        ConditioningReport::new(Mode::Rejection, &outcomes, rejection_w, accepted),
        ConditioningReport::new(Mode::Weighted, &outcomes, weighted_w, accepted),
    ))
}

/// Condition the transformed dynamics (local-martingale coordinates) on
/// reaching `level < x0` before the cap `cfg.divergence_cap`.
pub fn condition_downward<F>(
    spec: &DiffusionSpec,
    x0: f64,
    level: f64,
    functional: F,
    cfg: &SimConfig,
) -> Result<(ConditioningReport, ConditioningReport), ConditioningError>
where
    F: Fn(&PathSample) -> f64 + Sync,
{
    if !(level > 0.0 && level <= x0 && spec.interval.contains_closed(level)) {
        return Err(ConditioningError::InvalidLevel(format!("need 0 < level <= x0, got {level}")));
    }
    let top = spec.interval.upper().min(cfg.divergence_cap);
    if !(x0 < top) {
        return Err(ConditioningError::InvalidLevel(format!("x0 = {x0} is not below the cap {top}")));
    }
    let outcomes: Vec<Outcome> = if level == x0 {
        (0..cfg.n_paths as u64).map(|i| Outcome::of(&frozen_path(x0, i), &functional)).collect()
    } else {
        let restricted = spec.restricted(level, top)?;
        let cfg = SimConfig { watch_levels: vec![level, top], ..cfg.clone() };
        let out = simulate_outcomes(&restricted, x0, &cfg, &functional)?;
        check_truncation(&out)?;
        out
    };
    let hit = |o: &Outcome| o.exit == Exit::Absorbed(level);
    let accepted = outcomes.iter().filter(|o| hit(o)).count();
    if accepted == 0 {
        return Err(ConditioningError::AcceptanceStarvation);
    }
    let rejection_w = outcomes.iter().map(|o| if hit(o) { 1.0 } else { 0.0 }).collect();
    let weighted_w = outcomes.iter().map(|o| x0 / o.last).collect();
    Ok((
        ConditioningReport::new(Mode::Rejection, &outcomes, rejection_w, accepted),
        ConditioningReport::new(Mode::Weighted, &outcomes, weighted_w, accepted),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum IdentityScenario {
    /// BM from 1 absorbed at {0, 2}; the conditioned law is the transform.
    StoppedBmPositiveB,
    /// Driftless GBM from 1; the transform is a different law.
    GbmBPositiveNotUi,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub scenario: IdentityScenario,
    /// Rejection (or plain) sample under the base dynamics.
    pub conditioned: ConditioningReport,
    /// Direct sample of the transformed dynamics.
    pub transformed: ConditioningReport,
    /// Acceptance fraction of the conditioning event.
    pub acceptance: McEstimate,
    pub ks: KsResult,
    /// The scenario expects the two laws to differ.
    pub expect_differ: bool,
    pub pass: bool,
}

/// Compare conditioning with the h-transform for one of two scenarios.
pub fn verify_identity_of_measures(
    scenario: IdentityScenario,
    cfg: &SimConfig,
) -> Result<IdentityReport, ConditioningError> {
    if cfg.n_paths < MIN_IDENTITY_SAMPLES {
        return Err(ConditioningError::InsufficientSamples { n: cfg.n_paths, min: MIN_IDENTITY_SAMPLES });
    }
    match scenario {
        IdentityScenario::StoppedBmPositiveB => {
            let f = Functional::TimeAverage;
            let base = DiffusionSpec::brownian().with_interval(Interval::new(0.0, 2.0)?);
            let (rejection, _) = condition_upward(&base, 1.0, 2.0, |p| f.eval(p), cfg)?;
            let s = identity_scale(vec![0.1, 1.0, 1.9], 2.0).map_err(TransformError::from)?;
            let q = transform(&base, &s, Direction::Upward)?;
            let qcfg = SimConfig {
                watch_levels: vec![2.0],
                divergence_cap: f64::INFINITY,
                recording: Recording::Endpoints,
                ..cfg.clone()
            };
            let paths: Vec<PathSample> = simulate_map(&q.result, 1.0, &qcfg, |p| p)?;
            let mut transformed = ConditioningReport::direct(&paths, |p| f.eval(p));
            transformed.n_accepted = paths.iter().filter(|p| p.absorbed_at() == Some(2.0)).count();
            let mut conditioned = rejection;
            let ks = conditioned.compare(&transformed)?;
            transformed.comparison = Some(ks);
            Ok(IdentityReport {
                scenario,
                acceptance: conditioned.acceptance(),
                conditioned,
                transformed,
                ks,
                expect_differ: false,
                pass: ks.pass,
            })
        }
        IdentityScenario::GbmBPositiveNotUi => {
            let f = Functional::Terminal;
            let pcfg = SimConfig {
                horizon: 1.0,
                watch_levels: vec![],
                divergence_cap: f64::INFINITY,
                recording: Recording::Endpoints,
                ..cfg.clone()
            };
            let base = DiffusionSpec::geometric_brownian();
            let p_paths: Vec<PathSample> = simulate_map(&base, 1.0, &pcfg, |p| p)?;
            let s = identity_scale(vec![0.1, 1.0, 10.0], f64::INFINITY).map_err(TransformError::from)?;
            let q = transform(&base, &s, Direction::Upward)?;
            let q_paths: Vec<PathSample> = simulate_map(&q.result, 1.0, &pcfg, |p| p)?;
            let mut conditioned = ConditioningReport::direct(&p_paths, |p| f.eval(p));
            let mut transformed = ConditioningReport::direct(&q_paths, |p| f.eval(p));
            let ks = conditioned.compare(&transformed)?;
            transformed.comparison = Some(ks);
            Ok(IdentityReport {
                scenario,
                acceptance: conditioned.acceptance(),
                conditioned,
                transformed,
                ks,
                expect_differ: true,
                pass: !ks.pass,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReciprocalReport {
    pub band: (f64, f64),
    pub t: f64,
    /// Mean of `1/X` at `t ∧ T_ε ∧ T_M`.
    pub mean_inverse: McEstimate,
    pub target: f64,
    pub z: f64,
    pub pass: bool,
}

/// Optional stopping check for `1/X` under the transformed dynamics, with
/// the path stopped on leaving the band `[eps, m]`.
pub fn verify_local_martingality_of_reciprocal(
    spec: &DiffusionSpec,
    x0: f64,
    band: (f64, f64),
    t: f64,
    cfg: &SimConfig,
) -> Result<ReciprocalReport, ConditioningError> {
    let (eps, m) = band;
    if !(eps <= x0 && x0 <= m && eps > 0.0) {
        return Err(ConditioningError::InvalidLevel(format!("band [{eps}, {m}] must contain x0 = {x0}")));
    }
    let mean_inverse = if eps == x0 || m == x0 {
        McEstimate { value: 1.0 / x0, stderr: 0.0, n: cfg.n_paths }
    } else {
        let restricted = spec.restricted(eps, m)?;
        let cfg = SimConfig {
            horizon: t,
            watch_levels: vec![eps, m],
            divergence_cap: f64::INFINITY,
            recording: Recording::Endpoints,
            ..cfg.clone()
        };
        let inv = simulate_map(&restricted, x0, &cfg, |p| 1.0 / p.values.last().expect("nonempty path"))?;
        McEstimate::from_samples(&inv)
    };
    let target = 1.0 / x0;
    let z = mean_inverse.z_score(target);
    Ok(ReciprocalReport { band, t, mean_inverse, target, z, pass: z.abs() <= 4.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivergencePoint {
    pub horizon: f64,
    /// Fraction of paths that exceeded the level by `horizon`.
    pub fraction: McEstimate,
}

/// Fraction of paths exceeding `level` before each horizon; one batch of
/// paths is run to the largest horizon.
pub fn divergence_profile(
    spec: &DiffusionSpec,
    x0: f64,
    level: f64,
    horizons: &[f64],
    cfg: &SimConfig,
) -> Result<Vec<DivergencePoint>, ConditioningError> {
    let h_max = horizons.iter().copied().fold(f64::NAN, f64::max);
    if !(h_max > 0.0) || !(level > x0) {
        return Err(ConditioningError::InvalidLevel(format!("need level > x0 and positive horizons, got {level}")));
    }
    let cfg = SimConfig {
        horizon: h_max,
        divergence_cap: level,
        watch_levels: vec![],
        recording: Recording::Endpoints,
        ..cfg.clone()
    };
    let times: Vec<Option<f64>> = simulate_map(spec, x0, &cfg, |p| p.diverged().then(|| p.stop_time()))?;
    Ok(horizons
        .iter()
        .map(|&h| {
            let k = times.iter().filter(|t| t.is_some_and(|t| t <= h + 1e-12 * h)).count();
            DivergencePoint { horizon: h, fraction: McEstimate::binomial(k, times.len()) }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize, seed: u64) -> SimConfig {
        SimConfig::new(1e-2, 30.0, n, seed).with_recording(Recording::Stride(25))
    }

    #[test]
    fn upward_brownian_level_two() {
        let bm = DiffusionSpec::brownian();
        let f = Functional::ValueAt { t: 0.25 };
        let (rej, wtd) = condition_upward(&bm, 1.0, 2.0, |p| f.eval(p), &cfg(8000, 1)).unwrap();
        assert!(rej.acceptance().within(0.5, 4.0), "{:?}", rej.acceptance());
        assert!(wtd.mean_weight().within(1.0, 4.0), "{:?}", wtd.mean_weight());
        // the weight is 2 on acceptance and 0 elsewhere: same estimator
        assert!((rej.weighted_mean() - wtd.weighted_mean()).abs() < 1e-12);
        assert_eq!(rej.accepted_samples(), wtd.accepted_samples());
        assert_eq!(rej.ess, rej.n_accepted as f64);
        assert!((wtd.ess - rej.ess).abs() < 1e-6 * rej.ess);
    }

    #[test]
    fn trivial_levels_accept_everything() {
        let bm = DiffusionSpec::brownian();
        let (rej, wtd) = condition_upward(&bm, 1.0, 1.0, |p| p.stop_time(), &cfg(100, 0)).unwrap();
        assert_eq!(rej.n_accepted, 100);
        assert!(wtd.weights.iter().all(|&w| w == 1.0));
        let (rej, _) = condition_downward(&DiffusionSpec::bessel3(), 1.0, 1.0, |p| p.stop_time(), &cfg(50, 0)).unwrap();
        assert_eq!(rej.acceptance().value, 1.0);
    }

    #[test]
    fn short_horizon_is_reported() {
        let bm = DiffusionSpec::brownian();
        let short = SimConfig::new(1e-2, 0.5, 500, 3);
        let r = condition_upward(&bm, 1.0, 2.0, |p| p.stop_time(), &short);
        assert!(matches!(r, Err(ConditioningError::NeedLongerHorizon { .. })), "{r:?}");
    }

    #[test]
    fn downward_bessel_acceptance() {
        let cap = 10.0;
        let exact = (1.0 - 1.0 / cap) / (2.0 - 1.0 / cap);
        let c = SimConfig::new(1e-2, 400.0, 4000, 5).with_cap(cap).with_recording(Recording::Endpoints);
        let (rej, wtd) = condition_downward(&DiffusionSpec::bessel3(), 1.0, 0.5, |p| p.stop_time(), &c).unwrap();
        assert!(rej.acceptance().within(exact, 4.0), "{:?} vs {exact}", rej.acceptance());
        assert!(wtd.mean_weight().within(1.0, 4.0), "{:?}", wtd.mean_weight());
        let json = wtd.to_json();
        assert_eq!(json["mode"], "WEIGHTED");
        assert_eq!(json["n_total"], 4000);
        assert!(json.get("ks").is_none());
    }

    #[test]
    fn consistency_across_levels() {
        // T_2 is F_{T_2}-measurable, and conditioning on T_3 ≤ T_0 restricts
        // to the same law on F_{T_2}
        let bm = DiffusionSpec::brownian();
        let f = |p: &PathSample| p.hit(2.0).and_then(|h| h.time.time()).unwrap_or(f64::NAN);
        let c = SimConfig::new(1e-2, 60.0, 6000, 9).with_recording(Recording::Endpoints);
        let (r2, _) = condition_upward(&bm, 1.0, 2.0, f, &c).unwrap();
        let c3 = SimConfig { seed: 10, n_paths: 9000, ..c.clone() };
        let bm3 = bm.clone();
        let paths = simulate_map(
            &bm3.restricted(0.0, 3.0).unwrap(),
            1.0,
            &SimConfig { watch_levels: vec![0.0, 2.0, 3.0], ..c3 },
            |p| p,
        )
        .unwrap();
        let reached3: Vec<f64> = paths.iter().filter(|p| p.absorbed_at() == Some(3.0)).map(f).collect();
        let ks = ks_two_sample(&r2.accepted_samples(), &reached3).unwrap();
        assert!(ks.pass, "{ks:?}");
    }

    #[test]
    fn reciprocal_band_degenerate_and_bessel() {
        let bes = DiffusionSpec::bessel3();
        let r = verify_local_martingality_of_reciprocal(&bes, 2.0, (2.0, 2.0), 1.0, &cfg(10, 0)).unwrap();
        assert_eq!(r.mean_inverse.value, 0.5);
        assert!(r.pass);
        let c = SimConfig::new(1e-3, 1.0, 3000, 4);
        let r = verify_local_martingality_of_reciprocal(&bes, 1.0, (0.1, 10.0), 1.0, &c).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn divergence_fraction_grows() {
        let c = SimConfig::new(1e-2, 1.0, 500, 6);
        let prof = divergence_profile(&DiffusionSpec::bessel3(), 1.0, 5.0, &[1.0, 5.0, 20.0, 60.0], &c).unwrap();
        for w in prof.windows(2) {
            assert!(w[0].fraction.value <= w[1].fraction.value);
        }
        assert!(prof[3].fraction.value > 0.95, "{prof:?}");
    }

    #[test]
    fn identity_scenarios_need_samples() {
        let r = verify_identity_of_measures(IdentityScenario::GbmBPositiveNotUi, &cfg(10, 0));
        assert!(matches!(r, Err(ConditioningError::InsufficientSamples { .. })));
    }

    #[test]
    fn functional_recording() {
        assert_eq!(Functional::ValueAt { t: 0.25 }.recording(1e-2), Recording::Stride(25));
        assert_eq!(Functional::ValueAt { t: 0.255 }.recording(1e-2), Recording::Full);
        assert_eq!(Functional::TimeAverage.recording(1e-2), Recording::Endpoints);
    }
}
