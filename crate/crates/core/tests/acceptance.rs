//! End-to-end acceptance criteria. Each criterion prints one PASS/FAIL line;
//! the process exits non-zero if any criterion fails.
//!
//! Verdicts are recomputed here from raw estimates and sample sizes rather
//! than taken from the scenario checks.

use condflow_core::simulate::with_thread_pool;
use condflow_core::stats::KsResult;
use condflow_core::verify::{self, run_scenario, Scenario, VerifyConfig};
use condflow_core::McEstimate;

const SIGMA: f64 = 4.0;

/// Two-sample KS 1% critical value.
fn critical(n1: usize, n2: usize) -> f64 {
    1.628 * ((n1 + n2) as f64 / (n1 as f64 * n2 as f64)).sqrt()
}

fn ks_below(ks: &KsResult, factor: f64) -> bool {
    ks.statistic < factor * critical(ks.n1, ks.n2)
}

fn ks_above(ks: &KsResult) -> bool {
    ks.statistic > critical(ks.n1, ks.n2)
}

/// `|p̂ − p| ≤ k·sqrt(p(1−p)/n)`.
fn binomial_ok(est: &McEstimate, p: f64) -> bool {
    (est.value - p).abs() <= SIGMA * (p * (1.0 - p) / est.n as f64).sqrt()
}

fn mean_ok(est: &McEstimate, target: f64) -> bool {
    est.stderr > 0.0 && (est.value - target).abs() <= SIGMA * est.stderr
}

struct Ledger {
    failed: Vec<String>,
}

impl Ledger {
    fn record(&mut self, id: u32, name: &str, pass: bool, detail: String) {
        println!("{} criterion {id:>2} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failed.push(format!("{id} {name}"));
        }
    }
}

fn config() -> VerifyConfig {
    VerifyConfig::default()
}

fn main() {
    let cfg = config();
    let mut ledger = Ledger { failed: Vec::new() };

    let bb = verify::bm_bessel(&cfg).expect("bm-bessel runs");
    assert!(bb.hit_2.estimate.n >= 100_000);
    ledger.record(
        1,
        "hitting identity",
        binomial_ok(&bb.hit_2.estimate, 0.5) && binomial_ok(&bb.hit_4.estimate, 0.25),
        format!("P(2 before 0) = {:.5}, P(4 before 0) = {:.5}", bb.hit_2.estimate.value, bb.hit_4.estimate.value),
    );
    ledger.record(
        2,
        "upward conditioning vs Bessel(3)",
        bb.n_accepted >= 9_000 && bb.n_bessel >= 10_000 && ks_below(&bb.ks, 1.0),
        format!("KS {:.5} vs {:.5} (n = {}, {})", bb.ks.statistic, critical(bb.ks.n1, bb.ks.n2), bb.ks.n1, bb.ks.n2),
    );

    let bessel = verify::bessel_bm(&cfg).expect("bessel-bm runs");
    ledger.record(
        3,
        "downward conditioning round trip",
        binomial_ok(&bessel.acceptance, 0.5) && ks_below(&bessel.ks, 1.0),
        format!(
            "acceptance {:.4}, weighted KS {:.5} vs {:.5}",
            bessel.acceptance.value,
            bessel.ks.statistic,
            critical(bessel.ks.n1, bessel.ks.n2)
        ),
    );

    let gbm = verify::gbm(&cfg).expect("gbm runs");
    ledger.record(
        4,
        "GBM unit drift",
        gbm.drift_error <= 1e-6 && mean_ok(&gbm.mean_log_x1, 0.5),
        format!("drift error {:.2e}, E_Q[log X_1] = {:.4} ± {:.4}", gbm.drift_error, gbm.mean_log_x1.value, gbm.mean_log_x1.stderr),
    );

    let stopped = verify::stopped_bm(&cfg).expect("stopped-bm runs");
    let id = &stopped.identity;
    ledger.record(
        5,
        "stopped BM identity of measures",
        binomial_ok(&id.acceptance, 0.5) && ks_below(&id.ks, 1.0),
        format!("acceptance {:.4}, KS {:.5} vs {:.5}", id.acceptance.value, id.ks.statistic, critical(id.ks.n1, id.ks.n2)),
    );

    let g = &gbm.identity;
    ledger.record(
        6,
        "GBM measures differ",
        ks_above(&g.ks),
        format!("KS {:.5} vs {:.5}", g.ks.statistic, critical(g.ks.n1, g.ks.n2)),
    );

    let rt = verify::roundtrip(&cfg).expect("roundtrip runs");
    let worst_identity = rt.identity_errors.iter().map(|e| e.max_error).fold(0.0, f64::max);
    let phis: Vec<&str> = rt.identity_errors.iter().map(|e| e.phi.as_str()).collect();
    ledger.record(
        7,
        "generator identity",
        rt.identity_errors.len() == 4
            && phis.contains(&"y^2")
            && phis.contains(&"log(y)")
            && worst_identity <= 1e-5
            && (3.5..=4.5).contains(&rt.convergence_ratio),
        format!("max error {worst_identity:.2e}, ratio E(h)/E(h/2) = {:.4}", rt.convergence_ratio),
    );
    let worst_drift = rt.drift_errors.iter().map(|e| e.sup_error).fold(0.0, f64::max);
    ledger.record(
        8,
        "round-trip drift",
        rt.drift_errors.len() >= 2 && worst_drift <= 1e-6,
        format!("sup error {worst_drift:.2e} over {} specs", rt.drift_errors.len()),
    );

    ledger.record(
        9,
        "reciprocal local martingale",
        bessel.reciprocal.band == (0.1, 10.0)
            && bessel.reciprocal.t == 1.0
            && mean_ok(&bessel.reciprocal.mean_inverse, 1.0)
            && bessel.divergence.last().is_some_and(|d| d.horizon == 200.0)
            && bessel.divergence_at_200() >= 0.95,
        format!(
            "E[1/X] = {:.4} ± {:.4}, diverged by 200: {:.4}",
            bessel.reciprocal.mean_inverse.value,
            bessel.reciprocal.mean_inverse.stderr,
            bessel.divergence_at_200()
        ),
    );

    let ce = verify::counterexample(&cfg).expect("counterexample runs");
    ledger.record(
        10,
        "counterexample",
        ce.differ_frequency.value > 0.1
            && ks_above(&ce.ks)
            && mean_ok(&ce.martingale_mean, 1.0)
            && ce.zero_hit_mismatches == 0,
        format!(
            "P(X~ != X) = {:.4}, KS {:.4} vs {:.4}, E[X~] = {:.4} ± {:.4}",
            ce.differ_frequency.value,
            ce.ks.statistic,
            critical(ce.ks.n1, ce.ks.n2),
            ce.martingale_mean.value,
            ce.martingale_mean.stderr
        ),
    );

    let jw = verify::jumpwalk(&cfg).expect("jumpwalk runs");
    ledger.record(
        11,
        "jump walk",
        jw.square_error <= 1e-9
            && (3.0..=5.0).contains(&jw.sin_ratio)
            && jw.reciprocal_mismatches == 0
            && jw.reciprocal_at_floor == 2.0
            && jw.q_steps >= 1_000_000
            && jw.q_zero_hits == 0
            && jw.walk_vs_bessel.n == 50
            && ks_below(&jw.walk_vs_bessel.ks, 2.0),
        format!(
            "x^2 error {:.1e}, sin ratio {:.3}, walk KS {:.4} vs 2 x {:.4}",
            jw.square_error,
            jw.sin_ratio,
            jw.walk_vs_bessel.ks.statistic,
            critical(jw.walk_vs_bessel.ks.n1, jw.walk_vs_bessel.ks.n2)
        ),
    );

    let run = |threads| {
        with_thread_pool(Some(threads), || {
            let r = run_scenario(Scenario::StoppedBm, &cfg).expect("scenario runs");
            serde_json::to_string_pretty(&r).expect("report serializes")
        })
        .expect("thread pool")
    };
    let (one, three) = (run(1), run(3));
    ledger.record(
        12,
        "determinism across thread counts",
        one == three && one.contains("\"schema\": 1"),
        format!("{} bytes, identical = {}", one.len(), one == three),
    );

    if !ledger.failed.is_empty() {
        eprintln!("failed criteria: {:?}", ledger.failed);
        std::process::exit(1);
    }
    println!("all 12 criteria passed");
}
