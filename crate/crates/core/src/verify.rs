//! Named verification scenarios with PASS/FAIL checks.
//!
//! Each scenario returns a typed result (raw estimates and test statistics)
//! and converts it to a [`ScenarioReport`] whose checks use `sigma`
//! standard errors for Monte Carlo tolerances.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::conditioning::{
    condition_downward, condition_upward, divergence_profile, verify_identity_of_measures,
    verify_local_martingality_of_reciprocal, ConditioningReport, DivergencePoint, Functional, IdentityReport,
    IdentityScenario, ReciprocalReport,
};
use crate::counterexample::{compare_conditionings, CounterexampleConfig, CounterexampleReport};
use crate::expr::parse_expr;
use crate::htransform::{
    check_generator_identity, default_step, downward_scale, identity_convergence_ratio, identity_scale, transform,
    Direction,
};
use crate::jumpwalk::{
    discrete_generator, reciprocal_step_ratio, simulate_walks, verify_generator_limit, walk_vs_bessel, GeneratorError,
    JumpWalkSpec, Measure, WalkComparison,
};
use crate::model::{Coefficient, DiffusionSpec, Interval, McEstimate};
use crate::scale::{compute_scale, GridConfig, Normalization, ScaleFunction};
use crate::simulate::{estimate_hitting_prob, simulate_map, HittingEstimate, Recording, SimConfig};
use crate::stats::{ks_two_sample, ks_weighted, KsResult};
use crate::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    BmBessel,
    BesselBm,
    Gbm,
    StoppedBm,
    Counterexample,
    Jumpwalk,
    Roundtrip,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::BmBessel,
        Scenario::BesselBm,
        Scenario::Gbm,
        Scenario::StoppedBm,
        Scenario::Counterexample,
        Scenario::Jumpwalk,
        Scenario::Roundtrip,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::BmBessel => "bm-bessel",
            Scenario::BesselBm => "bessel-bm",
            Scenario::Gbm => "gbm",
            Scenario::StoppedBm => "stopped-bm",
            Scenario::Counterexample => "counterexample",
            Scenario::Jumpwalk => "jumpwalk",
            Scenario::Roundtrip => "roundtrip",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| format!("unknown scenario `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Overrides every Monte Carlo sample size of the scenario.
    pub n: Option<usize>,
    /// Standard errors allowed by Monte Carlo checks.
    pub sigma: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { seed: 20_240_601, n: None, sigma: 4.0 }
    }
}

impl VerifyConfig {
    fn n_or(&self, default: usize) -> usize {
        self.n.unwrap_or(default)
    }

    /// Seed for the `k`-th independent sample of a scenario.
    fn seed(&self, k: u64) -> u64 {
        self.seed.wrapping_add(k.wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    /// Target or bound the value is judged against.
    pub target: f64,
    pub rule: String,
}

impl Check {
    pub fn within(name: &str, est: McEstimate, target: f64, sigma: f64) -> Check {
        Check {
            name: name.into(),
            pass: est.within(target, sigma),
            value: est.value,
            target,
            rule: format!("within {sigma} stderr ({:.3e})", sigma * est.stderr),
        }
    }

    pub fn ks_below(name: &str, ks: &KsResult, factor: f64) -> Check {
        let bound = factor * ks.critical_1pct;
        Check {
            name: name.into(),
            pass: ks.statistic < bound,
            value: ks.statistic,
            target: bound,
            rule: if factor == 1.0 { "below 1% critical value".into() } else { format!("below {factor} x 1% critical value") },
        }
    }

    pub fn ks_above(name: &str, ks: &KsResult) -> Check {
        Check {
            name: name.into(),
            pass: ks.statistic > ks.critical_1pct,
            value: ks.statistic,
            target: ks.critical_1pct,
            rule: "above 1% critical value".into(),
        }
    }

    pub fn at_most(name: &str, value: f64, bound: f64) -> Check {
        Check { name: name.into(), pass: value <= bound, value, target: bound, rule: "at most".into() }
    }

    pub fn at_least(name: &str, value: f64, bound: f64) -> Check {
        Check { name: name.into(), pass: value >= bound, value, target: bound, rule: "at least".into() }
    }

    pub fn greater(name: &str, value: f64, bound: f64) -> Check {
        Check { name: name.into(), pass: value > bound, value, target: bound, rule: "greater than".into() }
    }

    pub fn in_range(name: &str, value: f64, lo: f64, hi: f64) -> Check {
        Check {
            name: name.into(),
            pass: (lo..=hi).contains(&value),
            value,
            target: 0.5 * (lo + hi),
            rule: format!("in [{lo}, {hi}]"),
        }
    }

    pub fn equal(name: &str, value: f64, target: f64) -> Check {
        Check { name: name.into(), pass: value == target, value, target, rule: "exactly equal".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub schema: u32,
    pub scenario: String,
    pub seed: u64,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub data: serde_json::Value,
}

impl ScenarioReport {
    fn new(scenario: Scenario, cfg: &VerifyConfig, checks: Vec<Check>, data: impl Serialize) -> ScenarioReport {
        ScenarioReport {
            schema: SCHEMA_VERSION,
            scenario: scenario.name().into(),
            seed: cfg.seed,
            pass: checks.iter().all(|c| c.pass),
            checks,
            data: serde_json::to_value(data).expect("scenario data serializes"),
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Compact JSON view of a conditioning report.
fn report_json(r: &ConditioningReport) -> serde_json::Value {
    r.to_json()
}

// ---------------------------------------------------------------- bm-bessel

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BmBessel {
    pub hit_2: HittingEstimate,
    pub hit_4: HittingEstimate,
    /// Accepted `X_{0.25 ∧ T_2}` under rejection vs Bessel(3) stopped at 2.
    pub n_accepted: usize,
    pub n_bessel: usize,
    pub ks: KsResult,
}

pub fn bm_bessel(cfg: &VerifyConfig) -> Result<BmBessel, Error> {
    let bm = DiffusionSpec::brownian();
    let n_hit = cfg.n_or(100_000);
    let hit_cfg = SimConfig::new(1e-2, 200.0, n_hit, cfg.seed(1));
    let hit_2 = estimate_hitting_prob(&bm, 1.0, 2.0, 0.0, &hit_cfg)?;
    let hit_4 = estimate_hitting_prob(&bm, 1.0, 4.0, 0.0, &SimConfig { seed: cfg.seed(2), ..hit_cfg })?;

    let n = cfg.n_or(10_000);
    let f = Functional::ValueAt { t: 0.25 };
    let dt = 1e-3;
    let up_cfg = SimConfig::new(dt, 40.0, 2 * n, cfg.seed(3)).with_recording(f.recording(dt));
    let (rejection, _) = condition_upward(&bm, 1.0, 2.0, |p| f.eval(p), &up_cfg)?;
    let bessel = DiffusionSpec::bessel3().restricted(0.0, 2.0)?;
    let direct_cfg = SimConfig::new(dt, 0.25, n, cfg.seed(4)).with_levels(&[2.0]).with_recording(Recording::Endpoints);
    let direct = simulate_map(&bessel, 1.0, &direct_cfg, |p| f.eval(&p))?;
    let accepted = rejection.accepted_samples();
    let ks = ks_two_sample(&accepted, &direct)?;
    Ok(BmBessel { hit_2, hit_4, n_accepted: accepted.len(), n_bessel: direct.len(), ks })
}

impl BmBessel {
    pub fn checks(&self, sigma: f64) -> Vec<Check> {
        vec![
            Check::within("hitting_2_before_0", self.hit_2.estimate, 0.5, sigma),
            Check::within("hitting_4_before_0", self.hit_4.estimate, 0.25, sigma),
            Check::ks_below("upward_conditioned_vs_bessel3", &self.ks, 1.0),
        ]
    }
}

// ---------------------------------------------------------------- bessel-bm

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BesselBm {
    pub cap: f64,
    pub acceptance: McEstimate,
    pub mean_weight: McEstimate,
    pub weighted: serde_json::Value,
    /// Weighted `X_{0.1 ∧ T_{1/2}}` vs BM stopped at 1/2.
    pub ks: KsResult,
    pub reciprocal: ReciprocalReport,
    pub divergence: Vec<DivergencePoint>,
}

pub fn bessel_bm(cfg: &VerifyConfig) -> Result<BesselBm, Error> {
    let n = cfg.n_or(10_000);
    let bessel = DiffusionSpec::bessel3();
    let f = Functional::ValueAt { t: 0.1 };
    let dt = 1e-2;
    let cap = 40.0;
    let down_cfg = SimConfig::new(dt, 3000.0, n, cfg.seed(1)).with_cap(cap).with_recording(f.recording(dt));
    let (rejection, weighted) = condition_downward(&bessel, 1.0, 0.5, |p| f.eval(p), &down_cfg)?;

    let bm = DiffusionSpec::brownian().restricted(0.5, f64::INFINITY)?;
    let bm_cfg = SimConfig::new(dt, 0.1, n, cfg.seed(2)).with_levels(&[0.5]).with_recording(Recording::Endpoints);
    let direct = simulate_map(&bm, 1.0, &bm_cfg, |p| f.eval(&p))?;
    let ks = ks_weighted(&direct, &weighted.functional_samples, &weighted.weights)?;

    let rec_cfg = SimConfig::new(1e-3, 1.0, n, cfg.seed(3));
    let reciprocal = verify_local_martingality_of_reciprocal(&bessel, 1.0, (0.1, 10.0), 1.0, &rec_cfg)?;
    let div_cfg = SimConfig::new(1e-2, 200.0, n, cfg.seed(4));
    let divergence = divergence_profile(&bessel, 1.0, 10.0, &[25.0, 50.0, 100.0, 200.0], &div_cfg)?;
    Ok(BesselBm {
        cap,
        acceptance: rejection.acceptance(),
        mean_weight: weighted.mean_weight(),
        weighted: report_json(&weighted),
        ks,
        reciprocal,
        divergence,
    })
}

impl BesselBm {
    pub fn divergence_at_200(&self) -> f64 {
        self.divergence.last().map_or(f64::NAN, |d| d.fraction.value)
    }

    pub fn checks(&self, sigma: f64) -> Vec<Check> {
        let monotone = self.divergence.windows(2).all(|w| w[0].fraction.value <= w[1].fraction.value);
        vec![
            Check::within("downward_acceptance", self.acceptance, 0.5, sigma),
            Check::ks_below("downward_conditioned_vs_bm", &self.ks, 1.0),
            Check::within("reciprocal_mean_in_band", self.reciprocal.mean_inverse, 1.0, sigma),
            Check::at_least("divergence_fraction_by_200", self.divergence_at_200(), 0.95),
            Check::equal("divergence_fraction_monotone", monotone as u8 as f64, 1.0),
        ]
    }
}

// ---------------------------------------------------------------------- gbm

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gbm {
    /// `sup |drift(y) − y|` of the transformed drift on the scale grid.
    pub drift_error: f64,
    pub mean_log_x1: McEstimate,
    pub identity: IdentityReportSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReportSummary {
    pub acceptance: McEstimate,
    pub ks: KsResult,
    pub conditioned: serde_json::Value,
    pub transformed: serde_json::Value,
}

impl From<&IdentityReport> for IdentityReportSummary {
    fn from(r: &IdentityReport) -> Self {
        IdentityReportSummary {
            acceptance: r.acceptance,
            ks: r.ks,
            conditioned: report_json(&r.conditioned),
            transformed: report_json(&r.transformed),
        }
    }
}

fn gbm_scale() -> Result<ScaleFunction, Error> {
    let gbm = DiffusionSpec::geometric_brownian();
    let grid = GridConfig::for_interval(gbm.interval, 1.0).with_range(0.1, 10.0).with_normalization(Normalization::L);
    Ok(compute_scale(&gbm, 1.0, &grid)?)
}

pub fn gbm(cfg: &VerifyConfig) -> Result<Gbm, Error> {
    let n = cfg.n_or(10_000);
    let base = DiffusionSpec::geometric_brownian();
    let s = gbm_scale()?;
    let q = transform(&base, &s, Direction::Upward)?;
    let mut drift_error: f64 = 0.0;
    for &y in s.grid() {
        drift_error = drift_error.max((q.result.drift_at(y)? - y).abs());
    }
    let sim = SimConfig::new(1e-3, 1.0, n, cfg.seed(1)).with_cap(f64::INFINITY).with_recording(Recording::Endpoints);
    let logs = simulate_map(&q.result, 1.0, &sim, |p| p.values.last().expect("nonempty path").ln())?;
    let identity = verify_identity_of_measures(
        IdentityScenario::GbmBPositiveNotUi,
        &SimConfig::new(1e-3, 1.0, n, cfg.seed(2)),
    )?;
    Ok(Gbm { drift_error, mean_log_x1: McEstimate::from_samples(&logs), identity: (&identity).into() })
}

impl Gbm {
    pub fn checks(&self, sigma: f64) -> Vec<Check> {
        vec![
            Check::at_most("transformed_drift_is_y", self.drift_error, 1e-6),
            Check::within("mean_log_x1_under_q", self.mean_log_x1, 0.5, sigma),
            Check::ks_above("p_and_q_differ", &self.identity.ks),
        ]
    }
}

// --------------------------------------------------------------- stopped-bm

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StoppedBm {
    pub identity: IdentityReportSummary,
}

pub fn stopped_bm(cfg: &VerifyConfig) -> Result<StoppedBm, Error> {
    let n = cfg.n_or(10_000);
    let sim = SimConfig::new(1e-3, 40.0, n, cfg.seed(1));
    let r = verify_identity_of_measures(IdentityScenario::StoppedBmPositiveB, &sim)?;
    Ok(StoppedBm { identity: (&r).into() })
}

impl StoppedBm {
    pub fn checks(&self, sigma: f64) -> Vec<Check> {
        vec![
            Check::within("acceptance_is_b", self.identity.acceptance, 0.5, sigma),
            Check::ks_below("conditioned_vs_transformed", &self.identity.ks, 1.0),
        ]
    }
}

// ----------------------------------------------------------- counterexample

pub fn counterexample(cfg: &VerifyConfig) -> Result<CounterexampleReport, Error> {
    let n = cfg.n_or(10_000);
    let sim = SimConfig::new(1e-4, 40.0, n, cfg.seed(1));
    Ok(compare_conditionings(&CounterexampleConfig::default(), &sim)?)
}

pub fn counterexample_checks(r: &CounterexampleReport, sigma: f64) -> Vec<Check> {
    vec![
        Check::greater("tilde_differs_at_stop", r.differ_frequency.value, 0.1),
        Check::ks_above("conditionings_differ", &r.ks),
        Check::within("tilde_martingale_mean", r.martingale_mean, 1.0, sigma),
        Check::equal("zero_hit_mismatches", r.zero_hit_mismatches as f64, 0.0),
    ]
}

// ----------------------------------------------------------------- jumpwalk

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Jumpwalk {
    /// Max `|discrete generator of y² − 3|` over the lattice points tried.
    pub square_error: f64,
    pub sin_errors: Vec<GeneratorError>,
    pub sin_ratio: f64,
    /// Lattice points `x ≥ 2/N` where `E[1/X_next] ≠ 1/x` as rationals.
    pub reciprocal_mismatches: usize,
    /// `E[1/X_next]` at `x = 1/N` for `N = 4`.
    pub reciprocal_at_floor: f64,
    pub q_steps: u64,
    pub q_zero_hits: usize,
    pub walk_vs_bessel: WalkComparison,
}

pub fn jumpwalk(cfg: &VerifyConfig) -> Result<Jumpwalk, Error> {
    let square = parse_expr("y^2")?;
    let mut square_error: f64 = 0.0;
    let mut reciprocal_mismatches = 0;
    for n in [4u64, 10, 50, 100] {
        let spec = JumpWalkSpec::new(n, Measure::Q, 1.0)?;
        for k in 2..=(5 * n) {
            let x = k as f64 / n as f64;
            square_error = square_error.max((discrete_generator(&spec, &square, x)? - 3.0).abs());
            if reciprocal_step_ratio(&spec, x)? != num_rational::Ratio::new(n, k) {
                reciprocal_mismatches += 1;
            }
        }
    }
    let sin_errors = verify_generator_limit(&parse_expr("sin(y)")?, 1.0, &[10, 20])?;
    let sin_ratio = sin_errors[0].error / sin_errors[1].error;
    let floor = JumpWalkSpec::new(4, Measure::Q, 0.25)?;
    let reciprocal_at_floor = crate::jumpwalk::verify_reciprocal_supermartingale(&floor, 0.25)?;

    // 1000 walks of 1000 steps from the floor state
    let q10 = JumpWalkSpec::new(10, Measure::Q, 0.1)?;
    let (walks, steps) = (1000usize, 1000u64);
    let q_zero_hits = simulate_walks(&q10, steps, walks, cfg.seed(1)).iter().filter(|w| w.k_min == 0).count();

    let n = cfg.n_or(10_000);
    let wcfg = SimConfig::new(1e-3, 1.0, n, cfg.seed(2));
    let walk_vs_bessel = walk_vs_bessel(50, 1.0, &wcfg)?;
    Ok(Jumpwalk {
        square_error,
        sin_errors,
        sin_ratio,
        reciprocal_mismatches,
        reciprocal_at_floor,
        q_steps: walks as u64 * steps,
        q_zero_hits,
        walk_vs_bessel,
    })
}

impl Jumpwalk {
    pub fn checks(&self) -> Vec<Check> {
        vec![
            Check::at_most("generator_of_square_is_3", self.square_error, 1e-9),
            Check::in_range("sin_error_ratio_10_20", self.sin_ratio, 3.0, 5.0),
            Check::equal("reciprocal_step_mismatches", self.reciprocal_mismatches as f64, 0.0),
            Check::equal("reciprocal_step_at_floor", self.reciprocal_at_floor, 2.0),
            Check::equal("q_walk_zero_hits", self.q_zero_hits as f64, 0.0),
            Check::ks_below("walk_vs_bessel_n50", &self.walk_vs_bessel.ks, 2.0),
        ]
    }
}

// ---------------------------------------------------------------- roundtrip

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityError {
    pub spec: String,
    pub phi: String,
    pub max_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftError {
    pub spec: String,
    pub sup_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Roundtrip {
    pub identity_errors: Vec<IdentityError>,
    /// `E(h)/E(h/2)` for the identity on BM with unit drift, where the
    /// error does not vanish identically.
    pub convergence_ratio: f64,
    pub drift_errors: Vec<DriftError>,
}

/// `[lo, hi]` with `n` evenly spaced points.
fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

pub fn roundtrip(_cfg: &VerifyConfig) -> Result<Roundtrip, Error> {
    let grid = linspace(0.2, 5.0, 97);
    let h = default_step(&grid);
    let s = identity_scale(grid.clone(), f64::INFINITY)?;
    let mut identity_errors = Vec::new();
    for spec in [DiffusionSpec::brownian(), DiffusionSpec::geometric_brownian()] {
        for phi in ["y^2", "log(y)"] {
            let max_error = check_generator_identity(&spec, &s, &parse_expr(phi)?, &grid, h)?;
            identity_errors.push(IdentityError { spec: spec.label.clone(), phi: phi.into(), max_error });
        }
    }

    let drifted = DiffusionSpec::new(
        Interval::positive_half_line(),
        Coefficient::constant(1.0),
        Coefficient::constant(1.0),
        "bm+drift",
    );
    let curved = ScaleFunction::closed_form(
        "(1-exp(-2y))/2",
        linspace(0.1, 5.0, 50),
        |y| 0.5 * (1.0 - (-2.0 * y).exp()),
        |y| (-2.0 * y).exp(),
        |y| -2.0 * (-2.0 * y).exp(),
        Normalization::L,
        (0.0, 0.5),
    )?;
    let convergence_ratio = identity_convergence_ratio(&drifted, &curved, &parse_expr("log(y)")?, 1.0, 1e-2)?;

    let mut drift_errors = Vec::new();
    let custom = DiffusionSpec::new(
        Interval::positive_half_line(),
        Coefficient::Expr(parse_expr("-y")?),
        Coefficient::Expr(parse_expr("1 + y^2")?),
        "custom",
    );
    for base in [DiffusionSpec::brownian(), DiffusionSpec::geometric_brownian(), custom] {
        let gc = GridConfig::for_interval(base.interval, 1.0).with_range(1e-2, 10.0).with_normalization(Normalization::L);
        let s = compute_scale(&base, 1.0, &gc)?;
        let up = transform(&base, &s, Direction::Upward)?;
        let down = transform(&up.result, &downward_scale(&s)?, Direction::Downward)?;
        let mut sup: f64 = 0.0;
        for y in linspace(0.2, 5.0, 241) {
            sup = sup.max((down.result.drift_at(y)? - base.drift_at(y)?).abs());
        }
        drift_errors.push(DriftError { spec: base.label.clone(), sup_error: sup });
    }
    Ok(Roundtrip { identity_errors, convergence_ratio, drift_errors })
}

impl Roundtrip {
    pub fn checks(&self) -> Vec<Check> {
        let mut out: Vec<Check> = self
            .identity_errors
            .iter()
            .map(|e| Check::at_most(&format!("generator_identity_{}_{}", e.spec, e.phi), e.max_error, 1e-5))
            .collect();
        out.push(Check::in_range("identity_error_ratio_h_h2", self.convergence_ratio, 3.5, 4.5));
        out.extend(
            self.drift_errors.iter().map(|e| Check::at_most(&format!("roundtrip_drift_{}", e.spec), e.sup_error, 1e-6)),
        );
        out
    }
}

/// Run one scenario and collect its checks.
pub fn run_scenario(scenario: Scenario, cfg: &VerifyConfig) -> Result<ScenarioReport, Error> {
    let k = cfg.sigma;
    Ok(match scenario {
        Scenario::BmBessel => {
            let r = bm_bessel(cfg)?;
            ScenarioReport::new(scenario, cfg, r.checks(k), r)
        }
        Scenario::BesselBm => {
            let r = bessel_bm(cfg)?;
            ScenarioReport::new(scenario, cfg, r.checks(k), r)
        }
        Scenario::Gbm => {
            let r = gbm(cfg)?;
            ScenarioReport::new(scenario, cfg, r.checks(k), r)
        }
        Scenario::StoppedBm => {
            let r = stopped_bm(cfg)?;
            ScenarioReport::new(scenario, cfg, r.checks(k), r)
        }
        Scenario::Counterexample => {
            let r = counterexample(cfg)?;
            ScenarioReport::new(scenario, cfg, counterexample_checks(&r, k), r)
        }
        Scenario::Jumpwalk => {
            let r = jumpwalk(cfg)?;
            ScenarioReport::new(scenario, cfg, r.checks(), r)
        }
        Scenario::Roundtrip => {
            let r = roundtrip(cfg)?;
            ScenarioReport::new(scenario, cfg, r.checks(), r)
        }
    })
}
