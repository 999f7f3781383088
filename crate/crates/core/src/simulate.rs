//! Euler–Maruyama path simulation with absorbing boundaries.
//!
//! Paths live on the fixed grid `k·dt` (the last step is shortened to land
//! on the horizon). A proposal that jumps past a finite boundary by more
//! than `boundary_clamp` is refined by Brownian-bridge halving of the step's
//! Gaussian increment, up to `max_halvings` levels, after which the path is
//! absorbed. Watch levels (a boundary counts when listed) additionally get a
//! Brownian-bridge crossing test per step when `bridge_correction` is on.
//!
//! Random draws come from [`PathRng`] at counter `(step, lane)`, where the
//! lane encodes the node of the halving tree, so a path depends only on
//! `(seed, path_index)`.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{DiffusionSpec, Exit, HittingRecord, HittingTime, McEstimate, ModelError, PathSample};
use crate::rng::PathRng;

/// Upper bound on watch levels; each needs one bridge uniform per node.
pub const MAX_WATCH_LEVELS: usize = 14;
const LANES_PER_NODE: u32 = 8;
const MAX_HALVINGS_LIMIT: u32 = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("start {x0} is outside the open interval ({lower}, {upper})")]
    StartOutside { x0: f64, lower: f64, upper: f64 },
    #[error("precondition failed at the start point: {0}")]
    Precondition(ModelError),
    #[error("path {path} failed at t = {t}, y = {y}: {source}")]
    Coefficient {
        path: u64,
        t: f64,
        y: f64,
        #[source]
        source: ModelError,
    },
    #[error("path {path} produced a non-finite value at t = {t} (from y = {y})")]
    NonFinite { path: u64, t: f64, y: f64 },
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

/// Which grid points a [`PathSample`] keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Recording {
    Full,
    /// Every `k`-th grid point.
    Stride(usize),
    /// Start and stop only.
    Endpoints,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub dt: f64,
    pub horizon: f64,
    /// Exceeding this level stops the path as diverged.
    pub divergence_cap: f64,
    pub bridge_correction: bool,
    pub watch_levels: Vec<f64>,
    pub seed: u64,
    pub n_paths: usize,
    /// Overshoot past a boundary tolerated without refining the step.
    pub boundary_clamp: f64,
    pub max_halvings: u32,
    pub recording: Recording,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: 1e-3,
            horizon: 10.0,
            divergence_cap: 1e6,
            bridge_correction: true,
            watch_levels: Vec::new(),
            seed: 0,
            n_paths: 1000,
            boundary_clamp: 0.0,
            max_halvings: MAX_HALVINGS_LIMIT,
            recording: Recording::Full,
        }
    }
}

impl SimConfig {
    pub fn new(dt: f64, horizon: f64, n_paths: usize, seed: u64) -> SimConfig {
        SimConfig { dt, horizon, n_paths, seed, ..SimConfig::default() }
    }

    pub fn with_levels(mut self, levels: &[f64]) -> Self {
        self.watch_levels = levels.to_vec();
        self
    }

    pub fn with_cap(mut self, cap: f64) -> Self {
        self.divergence_cap = cap;
        self
    }

    pub fn with_bridge(mut self, on: bool) -> Self {
        self.bridge_correction = on;
        self
    }

    pub fn with_recording(mut self, recording: Recording) -> Self {
        self.recording = recording;
        self
    }

    pub fn n_steps(&self) -> u32 {
        (self.horizon / self.dt - 1e-9).ceil() as u32
    }

    pub fn validate(&self, spec: &DiffusionSpec) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidConfig(m));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.dt < self.horizon && self.horizon.is_finite()) {
            return bad(format!("need dt < horizon, got dt = {}, horizon = {}", self.dt, self.horizon));
        }
        if self.horizon / self.dt > u32::MAX as f64 - 1.0 {
            return bad("too many steps".into());
        }
        if !(self.divergence_cap > spec.interval.lower()) {
            return bad(format!("divergence cap {} is below the interval", self.divergence_cap));
        }
        if self.n_paths == 0 {
            return bad("n_paths must be positive".into());
        }
        if !(self.boundary_clamp >= 0.0) {
            return bad("boundary_clamp must be nonnegative".into());
        }
        if self.max_halvings > MAX_HALVINGS_LIMIT {
            return bad(format!("max_halvings is at most {MAX_HALVINGS_LIMIT}"));
        }
        if self.watch_levels.len() > MAX_WATCH_LEVELS {
            return bad(format!("at most {MAX_WATCH_LEVELS} watch levels"));
        }
        if let Recording::Stride(0) = self.recording {
            return bad("recording stride must be positive".into());
        }
        for &l in &self.watch_levels {
            if !spec.interval.contains_closed(l) || !l.is_finite() {
                return bad(format!("watch level {l} outside the interval"));
            }
        }
        Ok(())
    }
}

/// Probability that a Brownian bridge from `y0` to `y1` over time `h` with
/// variance rate `a` touches `level`; 1 if the endpoints straddle it.
#[inline]
pub fn bridge_crossing_probability(level: f64, y0: f64, y1: f64, a: f64, h: f64) -> f64 {
    let prod = (level - y0) * (level - y1);
    if prod <= 0.0 {
        1.0
    } else {
        (-2.0 * prod / (a * h)).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum State {
    Inside(f64),
    Lower,
    Upper,
    Diverged(f64),
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    state: State,
    levels: u16,
    tied: bool,
}

struct Stepper<'a> {
    spec: &'a DiffusionSpec,
    cfg: &'a SimConfig,
    rng: PathRng,
    path: u64,
    lower: f64,
    upper: f64,
    /// Index of the watch level sitting on each boundary, if any.
    lower_watch: Option<usize>,
    upper_watch: Option<usize>,
}

impl Stepper<'_> {
    fn coeffs(&self, y: f64, t: f64) -> Result<(f64, f64), SimError> {
        let err = |source| SimError::Coefficient { path: self.path, t, y, source };
        let b = self.spec.drift_at(y).map_err(err)?;
        let a = self.spec.diffusion_at(y).map_err(err)?;
        Ok((b, a))
    }

    #[inline]
    fn uniform(&self, step: u32, node: u32, level: usize) -> f64 {
        let lane = node * LANES_PER_NODE + 1 + (level / 2) as u32;
        self.rng.uniforms(step, lane)[level % 2]
    }

    #[inline]
    #[allow(clippy::too_many_arguments)]
    fn bridge(&self, step: u32, node: u32, level: usize, y0: f64, y1: f64, a: f64, h: f64) -> bool {
        let l = self.cfg.watch_levels[level];
        let p = bridge_crossing_probability(l, y0, y1, a, h);
        p >= 1.0 || (p > 0.0 && self.uniform(step, node, level) < p)
    }

    fn overshoots(&self, y1: f64) -> bool {
        let c = self.cfg.boundary_clamp;
        y1 < self.lower - c || y1 > self.upper + c
    }

    #[allow(clippy::too_many_arguments)]
    fn segment(
        &self,
        step: u32,
        node: u32,
        depth: u32,
        y0: f64,
        t: f64,
        h: f64,
        dw: f64,
        done: u16,
    ) -> Result<Segment, SimError> {
        let (b, a) = self.coeffs(y0, t)?;
        let y1 = y0 + b * h + a.sqrt() * dw;
        if !y1.is_finite() {
            return Err(SimError::NonFinite { path: self.path, t: t + h, y: y0 });
        }
        if self.overshoots(y1) && depth < self.cfg.max_halvings {
            let z = self.rng.normal(step, node * LANES_PER_NODE);
            let dw1 = 0.5 * dw + 0.5 * h.sqrt() * z;
            let left = self.segment(step, 2 * node, depth + 1, y0, t, 0.5 * h, dw1, done)?;
            let State::Inside(ym) = left.state else {
                return Ok(left);
            };
            let right =
                self.segment(step, 2 * node + 1, depth + 1, ym, t + 0.5 * h, 0.5 * h, dw - dw1, done | left.levels)?;
            return Ok(Segment { state: right.state, levels: left.levels | right.levels, tied: right.tied });
        }
        Ok(self.leaf(step, node, y0, y1, a, h, done))
    }

    #[allow(clippy::too_many_arguments)]
    fn leaf(&self, step: u32, node: u32, y0: f64, y1: f64, a: f64, h: f64, done: u16) -> Segment {
        let bridge = self.cfg.bridge_correction;
        let lower_sig = y1 <= self.lower
            || (bridge && self.lower_watch.is_some_and(|i| self.bridge(step, node, i, y0, y1, a, h)));
        let upper_sig = y1 >= self.upper
            || (bridge && self.upper_watch.is_some_and(|i| self.bridge(step, node, i, y0, y1, a, h)));
        let (state, end) = if upper_sig {
            (State::Upper, self.upper)
        } else if lower_sig {
            (State::Lower, self.lower)
        } else if y1 >= self.cfg.divergence_cap {
            (State::Diverged(y1), y1)
        } else {
            (State::Inside(y1), y1)
        };
        let mut levels = 0u16;
        for (i, &l) in self.cfg.watch_levels.iter().enumerate() {
            if done & (1 << i) != 0 {
                continue;
            }
            let direct = (y0 - l) * (end - l) <= 0.0;
            let interior = Some(i) != self.lower_watch && Some(i) != self.upper_watch;
            if direct || (bridge && interior && matches!(state, State::Inside(_)) && self.bridge(step, node, i, y0, y1, a, h))
            {
                levels |= 1 << i;
            }
        }
        Segment { state, levels, tied: upper_sig && lower_sig }
    }
}

/// Simulate one path. Draws depend only on `(cfg.seed, path_index)`.
pub fn simulate_path(spec: &DiffusionSpec, x0: f64, cfg: &SimConfig, path_index: u64) -> Result<PathSample, SimError> {
    cfg.validate(spec)?;
    check_start(spec, x0)?;
    run_path(spec, x0, cfg, path_index)
}

fn check_start(spec: &DiffusionSpec, x0: f64) -> Result<(), SimError> {
    let iv = spec.interval;
    if !iv.contains_open(x0) {
        return Err(SimError::StartOutside { x0, lower: iv.lower(), upper: iv.upper() });
    }
    spec.drift_at(x0).map_err(SimError::Precondition)?;
    spec.diffusion_at(x0).map_err(SimError::Precondition)?;
    Ok(())
}

fn run_path(spec: &DiffusionSpec, x0: f64, cfg: &SimConfig, path_index: u64) -> Result<PathSample, SimError> {
    let (lower, upper) = (spec.interval.lower(), spec.interval.upper());
    let find = |b: f64| cfg.watch_levels.iter().position(|&l| l == b && b.is_finite());
    let st = Stepper {
        spec,
        cfg,
        rng: PathRng::new(cfg.seed, path_index),
        path: path_index,
        lower,
        upper,
        lower_watch: find(lower),
        upper_watch: find(upper),
    };

    let mut hits: Vec<HittingRecord> =
        cfg.watch_levels.iter().map(|&level| HittingRecord { level, time: HittingTime::Never }).collect();
    let mut done = 0u16;
    for (i, h) in hits.iter_mut().enumerate() {
        if h.level == x0 {
            h.time = HittingTime::At(0.0);
            done |= 1 << i;
        }
    }

    let n = cfg.n_steps();
    let mut times = vec![0.0];
    let mut values = vec![x0];
    let mut integral = 0.0;
    let mut tied = false;
    let mut y = x0;
    let mut t = 0.0;
    let mut exit = Exit::Horizon;

    if x0 >= cfg.divergence_cap {
        exit = Exit::Diverged(x0);
    }
    let mut k = 0u32;
    while exit == Exit::Horizon && k < n {
        let t_next = if k + 1 == n { cfg.horizon } else { (k + 1) as f64 * cfg.dt };
        let h = t_next - t;
        let dw = h.sqrt() * st.rng.normal(k, 0);
        let seg = st.segment(k, 1, 0, y, t, h, dw, done)?;
        let end = match seg.state {
            State::Inside(v) | State::Diverged(v) => v,
            State::Lower => lower,
            State::Upper => upper,
        };
        integral += 0.5 * (y + end) * h;
        for (i, rec) in hits.iter_mut().enumerate() {
            if seg.levels & (1 << i) != 0 {
                rec.time = HittingTime::At(t_next);
            }
        }
        done |= seg.levels;
        tied |= seg.tied;
        exit = match seg.state {
            State::Inside(_) => Exit::Horizon,
            State::Lower => Exit::Absorbed(lower),
            State::Upper => Exit::Absorbed(upper),
            State::Diverged(v) => Exit::Diverged(v),
        };
        y = end;
        t = t_next;
        k += 1;
        let keep = match cfg.recording {
            Recording::Full => true,
            Recording::Stride(s) => (k as usize).is_multiple_of(s),
            Recording::Endpoints => false,
        };
        if keep || exit != Exit::Horizon || k == n {
            times.push(t);
            values.push(y);
        }
    }
    Ok(PathSample { times, values, integral, exit, hits, tied, seed_index: path_index })
}

/// Run `f` inside a dedicated pool of `threads` workers (rayon's global
/// pool when `None`).
pub fn with_thread_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, SimError> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| SimError::ThreadPool(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Simulate `cfg.n_paths` paths and map each through `f`, in path order.
/// On failure the error of the lowest failing path index is returned.
pub fn simulate_map<T, F>(spec: &DiffusionSpec, x0: f64, cfg: &SimConfig, f: F) -> Result<Vec<T>, SimError>
where
    T: Send,
    F: Fn(PathSample) -> T + Sync,
{
    cfg.validate(spec)?;
    check_start(spec, x0)?;
    let results: Vec<Result<T, SimError>> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| run_path(spec, x0, cfg, i).map(&f))
        .collect();
    results.into_iter().collect()
}

pub fn simulate_paths(spec: &DiffusionSpec, x0: f64, cfg: &SimConfig) -> Result<Vec<PathSample>, SimError> {
    simulate_map(spec, x0, cfg, |p| p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HittingEstimate {
    /// Fraction of all paths whose first exit is at the upper level.
    pub estimate: McEstimate,
    pub n_up: usize,
    pub n_down: usize,
    /// Paths that met neither level before the horizon or the cap.
    pub n_neither: usize,
    pub n_ties: usize,
}

/// Probability that `up` is reached before `down`, from `x0`.
pub fn estimate_hitting_prob(
    spec: &DiffusionSpec,
    x0: f64,
    up: f64,
    down: f64,
    cfg: &SimConfig,
) -> Result<HittingEstimate, SimError> {
    if !(down < up) {
        return Err(SimError::InvalidConfig(format!("need down < up, got {down} and {up}")));
    }
    let n = cfg.n_paths;
    let certain = |n_up, n_down| HittingEstimate {
        estimate: McEstimate { value: if n_up > 0 { 1.0 } else { 0.0 }, stderr: 0.0, n },
        n_up,
        n_down,
        n_neither: 0,
        n_ties: 0,
    };
    if x0 >= up {
        return Ok(certain(n, 0));
    }
    if x0 <= down {
        return Ok(certain(0, n));
    }
    let restricted = spec.restricted(down, up).map_err(SimError::Precondition)?;
    let levels: Vec<f64> =
        [down, up].into_iter().filter(|l| restricted.interval.contains_closed(*l) && l.is_finite()).collect();
    let cfg = SimConfig { watch_levels: levels, recording: Recording::Endpoints, ..cfg.clone() };
    let upper = restricted.interval.upper();
    let outcomes = simulate_map(&restricted, x0, &cfg, |p| (p.exit, p.tied))?;
    let (mut n_up, mut n_down, mut n_ties) = (0, 0, 0);
    for (exit, tied) in outcomes {
        match exit {
            Exit::Absorbed(b) if b == upper => n_up += 1,
            Exit::Absorbed(_) => n_down += 1,
            _ => {}
        }
        n_ties += tied as usize;
    }
    Ok(HittingEstimate {
        estimate: McEstimate::binomial(n_up, n),
        n_up,
        n_down,
        n_neither: n - n_up - n_down,
        n_ties,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelCount {
    pub level: f64,
    pub count: usize,
}

/// JSON-friendly summary of a batch of paths.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimSummary {
    pub n: usize,
    pub hits: Vec<LevelCount>,
    pub absorbed: Vec<LevelCount>,
    pub diverged: usize,
    pub truncated: usize,
    pub ties: usize,
}

pub fn summarize(paths: &[PathSample], cfg: &SimConfig) -> SimSummary {
    let hits = cfg
        .watch_levels
        .iter()
        .map(|&level| LevelCount {
            level,
            count: paths.iter().filter(|p| p.hit(level).is_some_and(HittingRecord::crossed)).count(),
        })
        .collect();
    let mut absorbed: Vec<LevelCount> = Vec::new();
    for b in paths.iter().filter_map(PathSample::absorbed_at) {
        match absorbed.iter_mut().find(|c| c.level == b) {
            Some(c) => c.count += 1,
            None => absorbed.push(LevelCount { level: b, count: 1 }),
        }
    }
    absorbed.sort_by(|x, y| x.level.total_cmp(&y.level));
    SimSummary {
        n: paths.len(),
        hits,
        absorbed,
        diverged: paths.iter().filter(|p| p.diverged()).count(),
        truncated: paths.iter().filter(|p| p.truncated()).count(),
        ties: paths.iter().filter(|p| p.tied).count(),
    }
}

/// Long-format CSV `path,t,x` of the recorded points.
pub fn write_paths_csv<W: Write>(paths: &[PathSample], mut w: W) -> io::Result<()> {
    writeln!(w, "path,t,x")?;
    for p in paths {
        for (t, x) in p.times.iter().zip(&p.values) {
            writeln!(w, "{},{:?},{:?}", p.seed_index, t, x)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Coefficient, Interval};

    fn bm_cfg(n: usize) -> SimConfig {
        SimConfig::new(1e-2, 50.0, n, 11).with_recording(Recording::Endpoints)
    }

    #[test]
    fn config_validation() {
        let bm = DiffusionSpec::brownian();
        assert!(SimConfig::new(1.0, 1.0, 10, 0).validate(&bm).is_err());
        assert!(SimConfig::new(0.0, 1.0, 10, 0).validate(&bm).is_err());
        assert!(SimConfig::new(0.1, 1.0, 0, 0).validate(&bm).is_err());
        assert!(SimConfig::new(0.1, 1.0, 1, 0).with_levels(&[-1.0]).validate(&bm).is_err());
        assert!(SimConfig::new(0.1, 1.0, 1, 0).with_levels(&[0.0, 2.0]).validate(&bm).is_ok());
        assert!(SimConfig::new(0.1, 1.0, 1, 0).with_levels(&[1.0; 15]).validate(&bm).is_err());
    }

    #[test]
    fn zero_diffusion_is_a_precondition_error() {
        let flat = DiffusionSpec::new(
            Interval::positive_half_line(),
            Coefficient::constant(0.0),
            Coefficient::constant(0.0),
            "flat",
        );
        let r = simulate_path(&flat, 1.0, &SimConfig::new(0.1, 1.0, 1, 0), 0);
        assert!(matches!(r, Err(SimError::Precondition(ModelError::NonPositiveDiffusion { .. }))));
        let r = simulate_path(&DiffusionSpec::brownian(), -1.0, &SimConfig::new(0.1, 1.0, 1, 0), 0);
        assert!(matches!(r, Err(SimError::StartOutside { .. })));
    }

    #[test]
    fn coefficient_failure_reports_position() {
        // log(y - 1) fails once the path drops to 1
        let spec = DiffusionSpec::new(
            Interval::positive_half_line(),
            Coefficient::Expr("log(y - 1)".parse().unwrap()),
            Coefficient::constant(1.0),
            "bad",
        );
        let cfg = SimConfig::new(1e-2, 100.0, 1, 3);
        match simulate_path(&spec, 1.5, &cfg, 0) {
            Err(SimError::Coefficient { y, t, .. }) => assert!(y <= 1.0 && t > 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn path_is_a_function_of_seed_and_index() {
        let bm = DiffusionSpec::brownian();
        let cfg = SimConfig::new(1e-2, 5.0, 1, 99).with_levels(&[0.5, 2.0]);
        let a = simulate_path(&bm, 1.0, &cfg, 17).unwrap();
        let b = simulate_path(&bm, 1.0, &cfg, 17).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, simulate_path(&bm, 1.0, &cfg, 18).unwrap());
        let one = with_thread_pool(Some(1), || simulate_paths(&bm, 1.0, &cfg.clone().with_cap(3.0))).unwrap();
        let three = with_thread_pool(Some(3), || simulate_paths(&bm, 1.0, &cfg.clone().with_cap(3.0))).unwrap();
        assert_eq!(one.unwrap(), three.unwrap());
    }

    #[test]
    fn absorbed_paths_are_frozen_at_the_boundary() {
        let bm = DiffusionSpec::brownian().restricted(0.0, 2.0).unwrap();
        let cfg = SimConfig::new(1e-2, 20.0, 200, 5).with_levels(&[0.0, 2.0, 1.5]);
        for p in simulate_paths(&bm, 1.0, &cfg).unwrap() {
            let b = p.absorbed_at().expect("absorbed well before the horizon");
            assert_eq!(*p.values.last().unwrap(), b);
            assert!(p.values.iter().all(|v| (0.0..=2.0).contains(v)));
            let t = p.hit(b).unwrap().time.time().unwrap();
            assert_eq!(t, p.stop_time());
            if b == 2.0 {
                assert!(p.hit(1.5).unwrap().time.not_after(HittingTime::At(t)));
            }
        }
    }

    #[test]
    fn hitting_probability_brownian() {
        let bm = DiffusionSpec::brownian();
        let est = estimate_hitting_prob(&bm, 1.0, 2.0, 0.0, &bm_cfg(20_000)).unwrap();
        assert!(est.estimate.within(0.5, 4.0), "{est:?}");
        assert_eq!(est.n_neither, 0);
        let est = estimate_hitting_prob(&bm, 1.0, 4.0, 0.0, &bm_cfg(20_000)).unwrap();
        assert!(est.estimate.within(0.25, 4.0), "{est:?}");
        let sure = estimate_hitting_prob(&bm, 1.0, 1.0, 0.0, &bm_cfg(10)).unwrap();
        assert_eq!(sure.estimate.value, 1.0);
        assert_eq!(sure.estimate.stderr, 0.0);
    }

    #[test]
    fn hitting_probability_bessel() {
        // exit of (1/2, 10) at the top, from s̃ = −1/y
        let cap = 10.0;
        let exact = 1.0 - (1.0 - 1.0 / cap) / (2.0 - 1.0 / cap);
        let cfg = SimConfig::new(1e-2, 500.0, 4000, 2).with_cap(cap);
        let est = estimate_hitting_prob(&DiffusionSpec::bessel3(), 1.0, cap, 0.5, &cfg).unwrap();
        assert!(est.estimate.within(exact, 4.0), "{est:?} vs {exact}");
    }

    #[test]
    fn bessel_is_not_absorbed_at_zero() {
        let cfg = SimConfig::new(1e-2, 5.0, 2000, 8).with_recording(Recording::Endpoints);
        let paths = simulate_paths(&DiffusionSpec::bessel3(), 0.2, &cfg).unwrap();
        assert!(paths.iter().all(|p| p.truncated()));
    }

    #[test]
    fn recording_modes_keep_endpoints_and_integral() {
        let bm = DiffusionSpec::brownian();
        let base = SimConfig::new(1e-2, 1.0, 1, 4);
        let full = simulate_path(&bm, 5.0, &base, 0).unwrap();
        assert_eq!(full.times.len(), 101);
        assert!((full.stop_time() - 1.0).abs() < 1e-15);
        let stride = simulate_path(&bm, 5.0, &base.clone().with_recording(Recording::Stride(25)), 0).unwrap();
        assert_eq!(stride.times.len(), 5);
        assert_eq!(stride.value_at(0.5), full.value_at(0.5));
        let ends = simulate_path(&bm, 5.0, &base.clone().with_recording(Recording::Endpoints), 0).unwrap();
        assert_eq!(ends.values, vec![5.0, *full.values.last().unwrap()]);
        assert_eq!(ends.integral, full.integral);
        let mut csv = Vec::new();
        write_paths_csv(&[stride], &mut csv).unwrap();
        assert!(String::from_utf8(csv).unwrap().starts_with("path,t,x\n0,0.0,5.0\n"));
    }

    #[test]
    fn divergence_cap_stops_paths() {
        let gbm1 = DiffusionSpec::geometric_brownian_unit_drift();
        let cfg = SimConfig::new(1e-2, 100.0, 100, 1).with_cap(10.0).with_recording(Recording::Endpoints);
        let paths = simulate_paths(&gbm1, 1.0, &cfg).unwrap();
        assert!(paths.iter().all(|p| p.diverged() && p.values.last().unwrap() >= &10.0));
        let s = summarize(&paths, &cfg);
        assert_eq!((s.n, s.diverged, s.truncated), (100, 100, 0));
    }

    #[test]
    fn bridge_probability() {
        assert_eq!(bridge_crossing_probability(0.0, 1.0, -1.0, 1.0, 1.0), 1.0);
        let p = bridge_crossing_probability(0.0, 0.1, 0.2, 1.0, 0.01);
        assert!((p - (-4.0f64).exp()).abs() < 1e-15);
    }
}
