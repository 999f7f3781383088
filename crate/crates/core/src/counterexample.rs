//! Two approximating sequences for the same null event that induce
//! different conditional laws.
//!
//! `X` is Brownian motion from 1 absorbed at 0 and
//!
//! ```text
//! X̃_t = 2X_t − 1        for t ≤ T_{3/4}
//! X̃_t = X_t/2 + 1/8     for T_{3/4} < t ≤ T_{1/4}
//! X̃_t = X_t             afterwards
//! ```
//!
//! `X̃` is again a martingale from 1 that hits 0 exactly when `X` does, yet
//! conditioning on `{T̃_a ≤ T_0}` differs from weighting by `X_{T̃_a ∧ T_0}`.

use std::io::{self, Write};

use serde::Serialize;
use thiserror::Error;

use crate::model::{DiffusionSpec, Exit, HittingTime, McEstimate, PathSample};
use crate::simulate::{simulate_map, Recording, SimConfig, SimError};
use crate::stats::{ks_weighted, KsResult, StatsError};

pub const UPPER_SWITCH: f64 = 0.75;
pub const LOWER_SWITCH: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CounterexampleError {
    #[error("base path has no hitting record for level {0}")]
    MissingHits(f64),
    #[error("level a must exceed 1, got {0}")]
    InvalidLevel(f64),
    #[error("no path reached the level")]
    AcceptanceStarvation,
    #[error("{truncated} of {n} paths were cut at the horizon; need a longer horizon")]
    NeedLongerHorizon { truncated: usize, n: usize },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// `X̃` at time `t` from `X_t` and the switch times.
#[inline]
pub fn tilde_value(x: f64, t: f64, t_upper: HittingTime, t_lower: HittingTime) -> f64 {
    if HittingTime::At(t).not_after(t_upper) {
        return 2.0 * x - 1.0;
    }
    if HittingTime::At(t).not_after(t_lower) {
        x / 2.0 + 0.125
    } else {
        x
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TildePath {
    pub base: PathSample,
    /// `X̃` at each recorded time of `base`.
    pub tilde_values: Vec<f64>,
}

impl TildePath {
    /// Index of the first recorded point with `X̃ ≥ level`.
    pub fn first_at_or_above(&self, level: f64) -> Option<usize> {
        self.tilde_values.iter().position(|&v| v >= level)
    }

    pub fn absorbed_at_zero(&self) -> bool {
        self.base.exit == Exit::Absorbed(0.0)
    }
}

fn switch_times(path: &PathSample) -> Result<(HittingTime, HittingTime), CounterexampleError> {
    let up = path.hit(UPPER_SWITCH).ok_or(CounterexampleError::MissingHits(UPPER_SWITCH))?.time;
    let low = path.hit(LOWER_SWITCH).ok_or(CounterexampleError::MissingHits(LOWER_SWITCH))?.time;
    // a path passes 3/4 before 1/4
    let low = match (up, low) {
        (HittingTime::At(u), HittingTime::At(l)) if l < u => HittingTime::At(u),
        _ => low,
    };
    Ok((up, low))
}

/// `X̃` along a base path that watched the levels 3/4 and 1/4.
pub fn build_tilde(path: PathSample) -> Result<TildePath, CounterexampleError> {
    let (up, low) = switch_times(&path)?;
    let tilde_values = path.times.iter().zip(&path.values).map(|(&t, &x)| tilde_value(x, t, up, low)).collect();
    Ok(TildePath { base: path, tilde_values })
}

/// CSV `t,x,x_tilde`.
pub fn write_tilde_csv<W: Write>(path: &TildePath, mut w: W) -> io::Result<()> {
    writeln!(w, "t,x,x_tilde")?;
    for ((t, x), xt) in path.base.times.iter().zip(&path.base.values).zip(&path.tilde_values) {
        writeln!(w, "{t:?},{x:?},{xt:?}")?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CounterexampleConfig {
    /// Conditioning level for `X̃`, above 1.
    pub a: f64,
    /// Time for the martingale check of `X̃`.
    pub check_time: f64,
}

impl Default for CounterexampleConfig {
    fn default() -> Self {
        CounterexampleConfig { a: 2.0, check_time: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct PathSummary {
    accepted: bool,
    truncated: bool,
    /// `X` and `X̃` at `T̃_a ∧ T_0`.
    x_stop: f64,
    tilde_stop: f64,
    /// `T̃_a ∧ T_0`.
    stop_time: f64,
    /// `X̃` at `check_time ∧ T̃_a ∧ T_0`.
    tilde_check: f64,
    zero_hit_consistent: bool,
}

fn summarize(path: PathSample, cc: &CounterexampleConfig) -> Result<PathSummary, CounterexampleError> {
    let truncated = path.truncated();
    let absorbed_zero = path.absorbed_at() == Some(0.0);
    let tp = build_tilde(path)?;
    let hit = tp.first_at_or_above(cc.a);
    let last = tp.base.values.len() - 1;
    let idx = hit.unwrap_or(last);
    let stop_time = tp.base.times[idx];
    let check_idx = tp.base.times.partition_point(|&t| t <= cc.check_time + 1e-12).saturating_sub(1).min(idx);
    let tilde_zero = tp.tilde_values[last] == 0.0;
    Ok(PathSummary {
        accepted: hit.is_some(),
        truncated: truncated && hit.is_none(),
        x_stop: tp.base.values[idx],
        tilde_stop: tp.tilde_values[idx],
        stop_time,
        tilde_check: tp.tilde_values[check_idx],
        zero_hit_consistent: hit.is_some() || absorbed_zero == tilde_zero,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleReport {
    pub a: f64,
    pub n_total: usize,
    pub n_accepted: usize,
    pub n_truncated: usize,
    /// Frequency of `X̃ ≠ X` at `T̃_a ∧ T_0`.
    pub differ_frequency: McEstimate,
    /// KS between `T̃_a` under `{T̃_a ≤ T_0}` and under weights `X_{T̃_a ∧ T_0}`.
    pub ks: KsResult,
    /// Mean of `X̃` at `check_time ∧ T̃_a ∧ T_0`.
    pub martingale_mean: McEstimate,
    /// Paths where "X̃ ends at 0" and "X absorbed at 0" disagree.
    pub zero_hit_mismatches: usize,
}

impl CounterexampleReport {
    pub fn measures_differ(&self) -> bool {
        !self.ks.pass
    }
}

/// Simulate `X` on `(0, 2a − 1/4)`, past which `X̃ ≥ a` in every regime,
/// and compare the two conditionings through the functional `T̃_a`.
pub fn compare_conditionings(
    cc: &CounterexampleConfig,
    cfg: &SimConfig,
) -> Result<CounterexampleReport, CounterexampleError> {
    if !(cc.a > 1.0 && cc.a.is_finite()) {
        return Err(CounterexampleError::InvalidLevel(cc.a));
    }
    let top = 2.0 * cc.a - 0.25;
    let spec = DiffusionSpec::brownian().restricted(0.0, top).map_err(SimError::Precondition)?;
    let cfg = SimConfig {
        watch_levels: vec![0.0, LOWER_SWITCH, UPPER_SWITCH, top],
        divergence_cap: f64::INFINITY,
        recording: Recording::Full,
        ..cfg.clone()
    };
    let rows: Vec<Result<PathSummary, CounterexampleError>> = simulate_map(&spec, 1.0, &cfg, |p| summarize(p, cc))?;
    let rows: Vec<PathSummary> = rows.into_iter().collect::<Result<_, _>>()?;
    let n = rows.len();
    let truncated = rows.iter().filter(|r| r.truncated).count();
    if truncated as f64 > 0.01 * n as f64 {
        return Err(CounterexampleError::NeedLongerHorizon { truncated, n });
    }
    let accepted: Vec<&PathSummary> = rows.iter().filter(|r| r.accepted).collect();
    if accepted.is_empty() {
        return Err(CounterexampleError::AcceptanceStarvation);
    }
    let rejection: Vec<f64> = accepted.iter().map(|r| r.stop_time).collect();
    let times: Vec<f64> = rows.iter().map(|r| r.stop_time).collect();
    let weights: Vec<f64> = rows.iter().map(|r| if r.truncated { 0.0 } else { r.x_stop }).collect();
    let ks = ks_weighted(&rejection, &times, &weights)?;
    let differ = rows.iter().filter(|r| r.x_stop != r.tilde_stop).count();
    let checks: Vec<f64> = rows.iter().map(|r| r.tilde_check).collect();
    Ok(CounterexampleReport {
        a: cc.a,
        n_total: n,
        n_accepted: accepted.len(),
        n_truncated: truncated,
        differ_frequency: McEstimate::binomial(differ, n),
        ks,
        martingale_mean: McEstimate::from_samples(&checks),
        zero_hit_mismatches: rows.iter().filter(|r| !r.zero_hit_consistent).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::HittingRecord;

    fn path(values: &[f64], up: HittingTime, low: HittingTime) -> PathSample {
        let times = (0..values.len()).map(|i| i as f64).collect();
        let mut p = PathSample::from_grid(times, values.to_vec(), Exit::Horizon, 0);
        p.hits = vec![HittingRecord { level: UPPER_SWITCH, time: up }, HittingRecord { level: LOWER_SWITCH, time: low }];
        p
    }

    #[test]
    fn first_regime_only() {
        let tp = build_tilde(path(&[1.0, 1.2, 0.8], HittingTime::Never, HittingTime::Never)).unwrap();
        assert_eq!(tp.tilde_values[0], 1.0);
        assert!((tp.tilde_values[1] - 1.4).abs() < 1e-15);
        assert!((tp.tilde_values[2] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn regimes_join_continuously() {
        let (up, low) = (HittingTime::At(1.0), HittingTime::At(3.0));
        // at the switch instants both branch formulas agree
        assert_eq!(tilde_value(0.75, 1.0, up, low), 0.5);
        assert_eq!(0.75 / 2.0 + 0.125, 0.5);
        assert_eq!(tilde_value(0.25, 3.0, up, low), 0.25);
        assert_eq!(tilde_value(0.25, 3.5, up, low), 0.25);
        let tp = build_tilde(path(&[1.0, 0.75, 0.5, 0.25, 0.1], up, low)).unwrap();
        assert_eq!(tp.tilde_values, vec![1.0, 0.5, 0.375, 0.25, 0.1]);
    }

    #[test]
    fn missing_records_are_errors() {
        let mut p = path(&[1.0, 0.9], HittingTime::Never, HittingTime::Never);
        p.hits.pop();
        assert_eq!(build_tilde(p), Err(CounterexampleError::MissingHits(LOWER_SWITCH)));
    }

    #[test]
    fn tilde_is_continuous_on_simulated_paths() {
        let spec = DiffusionSpec::brownian();
        let cfg = SimConfig::new(1e-4, 3.0, 20, 3).with_levels(&[0.0, LOWER_SWITCH, UPPER_SWITCH]);
        for p in crate::simulate::simulate_paths(&spec, 1.0, &cfg).unwrap() {
            let tp = build_tilde(p).unwrap();
            assert_eq!(tp.tilde_values[0], 1.0);
            let max_jump = tp.tilde_values.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
            // twice the BM increment plus the switch mismatch, both O(√dt)
            assert!(max_jump < 0.12, "{max_jump}");
            if tp.absorbed_at_zero() {
                assert_eq!(*tp.tilde_values.last().unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn small_run_shows_the_difference() {
        let cfg = SimConfig::new(1e-3, 40.0, 2000, 21);
        let r = compare_conditionings(&CounterexampleConfig::default(), &cfg).unwrap();
        assert!(r.differ_frequency.value > 0.1, "{r:?}");
        assert!(r.measures_differ(), "{r:?}");
        assert_eq!(r.zero_hit_mismatches, 0);
        assert!(compare_conditionings(&CounterexampleConfig { a: 1.0, check_time: 1.0 }, &cfg).is_err());
    }
}
