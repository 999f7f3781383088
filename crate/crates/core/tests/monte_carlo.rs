//! Monte Carlo examples that need larger samples than the unit tests.

use condflow_core::conditioning::condition_upward;
use condflow_core::jumpwalk::{walk_vs_diffusion, JumpWalkSpec, Measure};
use condflow_core::simulate::{simulate_paths, summarize, SimConfig};
use condflow_core::stats::{critical_1pct, weighted_ecdf};
use condflow_core::{DiffusionSpec, Exit, Functional, McEstimate, Recording};

fn upper_first(spec: &DiffusionSpec, up: f64, cfg: &SimConfig) -> McEstimate {
    let restricted = spec.restricted(0.0, up).unwrap();
    let paths = simulate_paths(&restricted, 1.0, cfg).unwrap();
    let summary = summarize(&paths, cfg);
    assert_eq!(summary.truncated, 0);
    let hits = paths.iter().filter(|p| p.exit == Exit::Absorbed(up)).count();
    McEstimate::binomial(hits, paths.len())
}

#[test]
fn brownian_two_before_zero_within_three_stderr() {
    let cfg = SimConfig::new(1e-2, 200.0, 100_000, 11).with_levels(&[0.0, 2.0]).with_recording(Recording::Endpoints);
    let est = upper_first(&DiffusionSpec::brownian(), 2.0, &cfg);
    assert!(est.within(0.5, 3.0), "{est:?}");
}

#[test]
fn bridge_correction_removes_missed_crossings() {
    let bm = DiffusionSpec::brownian();
    let base = SimConfig::new(0.05, 400.0, 40_000, 12).with_levels(&[0.0, 4.0]).with_recording(Recording::Endpoints);
    let with = upper_first(&bm, 4.0, &base);
    let without = upper_first(&bm, 4.0, &base.clone().with_bridge(false));
    // coarse steps overshoot both levels unseen, which favours the far level
    assert!(without.z_score(0.25) > 4.0, "{without:?}");
    assert!(with.within(0.25, 4.0), "{with:?}");
}

#[test]
fn upward_weighting_equals_rejection_exactly() {
    let f = Functional::ValueAt { t: 0.25 };
    let cfg = SimConfig::new(1e-3, 40.0, 4000, 13).with_recording(f.recording(1e-3));
    let (rejection, weighted) = condition_upward(&DiffusionSpec::brownian(), 1.0, 2.0, |p| f.eval(p), &cfg).unwrap();
    let r = weighted_ecdf(&rejection.functional_samples, &rejection.weights).unwrap();
    let w = weighted_ecdf(&weighted.functional_samples, &weighted.weights).unwrap();
    for &x in &rejection.functional_samples {
        assert!((r.eval(x) - w.eval(x)).abs() <= 1e-12, "at {x}");
    }
    // the weight is a on acceptance, 0 otherwise: mean weight ≈ 1
    assert!(weighted.mean_weight().within(1.0, 4.0), "{:?}", weighted.mean_weight());
    assert!(rejection.acceptance().within(0.5, 4.0));
}

#[test]
fn p_walk_matches_stopped_brownian_motion() {
    let spec = JumpWalkSpec::new(50, Measure::P, 1.0).unwrap();
    let cfg = SimConfig::new(1e-3, 1.0, 10_000, 14);
    let cmp = walk_vs_diffusion(&spec, 1.0, &cfg).unwrap();
    assert!(cmp.pass, "{cmp:?}");
}

#[test]
fn coarse_walk_is_rejected_at_the_strict_threshold() {
    let cfg = SimConfig::new(1e-3, 1.0, 10_000, 15);
    let cmp = condflow_core::jumpwalk::walk_vs_bessel(5, 1.0, &cfg).unwrap();
    assert!(cmp.ks.statistic > critical_1pct(cmp.ks.n1, cmp.ks.n2), "{cmp:?}");
}
