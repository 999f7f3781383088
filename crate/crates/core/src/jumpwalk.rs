//! Lattice walk with steps ±1/N every 1/N² time units, absorbed at 0, and
//! its h-transform by `X` itself.
//!
//! Under `P` the walk steps up or down with probability ½. Under `Q` the
//! step kernel is tilted by `X_next / X_now`, so from `x = k/N`
//! `p_up = (k+1)/(2k)` and `p_down = (k−1)/(2k)`; the walk can no longer
//! reach 0. Probabilities are exact rationals in the lattice index. Test
//! functions are expressions in the variable `y`.

use std::io::{self, Write};

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{CoeffExpr, EvalError};
use crate::model::{DiffusionSpec, McEstimate};
use crate::rng::PathRng;
use crate::simulate::{simulate_map, Recording, SimConfig, SimError};
use crate::stats::{critical_1pct, ks_two_sample, KsResult, StatsError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JumpWalkError {
    #[error("lattice size N must be positive")]
    ZeroN,
    #[error("{0} is not a positive lattice point")]
    NotPositive(f64),
    #[error("state 0 is absorbing and has no step distribution")]
    Absorbed,
    #[error("evaluation at {x} failed: {source}")]
    Eval {
        x: f64,
        #[source]
        source: EvalError,
    },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Measure {
    P,
    Q,
}

/// Walk on `{k/N}` started at `k0/N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct JumpWalkSpec {
    pub n: u64,
    pub measure: Measure,
    pub k0: u64,
}

impl JumpWalkSpec {
    /// `x0` is rounded to the nearest lattice point, which must be positive.
    pub fn new(n: u64, measure: Measure, x0: f64) -> Result<JumpWalkSpec, JumpWalkError> {
        if n == 0 {
            return Err(JumpWalkError::ZeroN);
        }
        let k0 = lattice_index(n, x0)?;
        Ok(JumpWalkSpec { n, measure, k0 })
    }

    pub fn dt(&self) -> f64 {
        1.0 / (self.n * self.n) as f64
    }

    pub fn x0(&self) -> f64 {
        self.k0 as f64 / self.n as f64
    }

    /// Exact `(p_up, p_down)` at lattice index `k ≥ 1`.
    pub fn step_ratio(&self, k: u64) -> Result<(Ratio<u64>, Ratio<u64>), JumpWalkError> {
        if k == 0 {
            return Err(JumpWalkError::Absorbed);
        }
        Ok(match self.measure {
            Measure::P => (Ratio::new(1, 2), Ratio::new(1, 2)),
            Measure::Q => (Ratio::new(k + 1, 2 * k), Ratio::new(k - 1, 2 * k)),
        })
    }
}

/// Nearest lattice index of `x`, which must be positive.
pub fn lattice_index(n: u64, x: f64) -> Result<u64, JumpWalkError> {
    let k = (x * n as f64).round();
    if !(k >= 1.0 && k.is_finite()) {
        return Err(JumpWalkError::NotPositive(x));
    }
    Ok(k as u64)
}

fn to_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `(p_up, p_down)` at `x` (rounded to the lattice).
pub fn step_distribution(spec: &JumpWalkSpec, x: f64) -> Result<(f64, f64), JumpWalkError> {
    let (up, down) = spec.step_ratio(lattice_index(spec.n, x)?)?;
    Ok((to_f64(up), to_f64(down)))
}

/// `N² (E[f(X_{1/N²}) | X_0 = x] − f(x))`.
pub fn discrete_generator(spec: &JumpWalkSpec, f: &CoeffExpr, x: f64) -> Result<f64, JumpWalkError> {
    let k = lattice_index(spec.n, x)?;
    let (up, down) = spec.step_ratio(k)?;
    let n = spec.n as f64;
    let at = |j: u64| {
        let y = j as f64 / n;
        f.eval(y).map_err(|source| JumpWalkError::Eval { x: y, source })
    };
    let f0 = at(k)?;
    let mut change = to_f64(up) * (at(k + 1)? - f0);
    if *down.numer() > 0 {
        change += to_f64(down) * (at(k - 1)? - f0);
    }
    Ok(n * n * change)
}

/// `½ f''(x) + f'(x)/x` with five-point central differences.
pub fn bessel_generator(f: &CoeffExpr, x: f64) -> Result<f64, JumpWalkError> {
    let h = 1e-2;
    let at = |y: f64| f.eval(y).map_err(|source| JumpWalkError::Eval { x: y, source });
    let (fm2, fm1, f0, fp1, fp2) = (at(x - 2.0 * h)?, at(x - h)?, at(x)?, at(x + h)?, at(x + 2.0 * h)?);
    let d1 = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
    let d2 = (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * h * h);
    Ok(0.5 * d2 + d1 / x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeneratorError {
    pub n: u64,
    /// `x` rounded to the `1/N` lattice.
    pub x: f64,
    pub discrete: f64,
    pub limit: f64,
    pub error: f64,
}

/// Discrete `Q` generator against its diffusion limit, for each `N`.
pub fn verify_generator_limit(f: &CoeffExpr, x: f64, ns: &[u64]) -> Result<Vec<GeneratorError>, JumpWalkError> {
    ns.iter()
        .map(|&n| {
            let spec = JumpWalkSpec::new(n, Measure::Q, x)?;
            let xl = spec.x0();
            let discrete = discrete_generator(&spec, f, xl)?;
            let limit = bessel_generator(f, xl)?;
            Ok(GeneratorError { n, x: xl, discrete, limit, error: (discrete - limit).abs() })
        })
        .collect()
}

/// CSV `n,x,discrete,limit,error`.
pub fn write_generator_csv<W: Write>(rows: &[GeneratorError], mut w: W) -> io::Result<()> {
    writeln!(w, "n,x,discrete,limit,error")?;
    for r in rows {
        writeln!(w, "{},{:?},{:?},{:?},{:?}", r.n, r.x, r.discrete, r.limit, r.error)?;
    }
    Ok(())
}

/// One-step `E[1/X_{1/N²} | X_0 = x]` as an exact rational.
pub fn reciprocal_step_ratio(spec: &JumpWalkSpec, x: f64) -> Result<Ratio<u64>, JumpWalkError> {
    let k = lattice_index(spec.n, x)?;
    let (up, down) = spec.step_ratio(k)?;
    let inv = |j: u64| Ratio::new(spec.n, j);
    let mut e = up * inv(k + 1);
    if *down.numer() > 0 {
        e += down * inv(k - 1);
    }
    Ok(e)
}

/// One-step expectation of `1/X`: `1/x` for `x ≥ 2/N`, `N/2` at `x = 1/N`.
pub fn verify_reciprocal_supermartingale(spec: &JumpWalkSpec, x: f64) -> Result<f64, JumpWalkError> {
    Ok(to_f64(reciprocal_step_ratio(spec, x)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WalkPath {
    /// Lattice index after the last step (0 once absorbed).
    pub k_final: u64,
    pub k_min: u64,
    pub steps: u64,
}

impl WalkPath {
    pub fn value(&self, n: u64) -> f64 {
        self.k_final as f64 / n as f64
    }
}

/// `steps` steps of one walk; path `index` of stream `seed`.
pub fn simulate_walk(spec: &JumpWalkSpec, steps: u64, seed: u64, index: u64) -> WalkPath {
    let rng = PathRng::new(seed, index);
    let mut k = spec.k0;
    let mut k_min = k;
    for i in 0..steps {
        if k == 0 {
            break;
        }
        let u = rng.uniforms((i / 2) as u32, (i >> 33) as u32)[(i % 2) as usize];
        // u < p_up  ⇔  2k·u < k + 1 under Q
        let up = match spec.measure {
            Measure::P => u < 0.5,
            Measure::Q => 2.0 * k as f64 * u < (k + 1) as f64,
        };
        k = if up { k + 1 } else { k - 1 };
        k_min = k_min.min(k);
    }
    WalkPath { k_final: k, k_min, steps }
}

pub fn simulate_walks(spec: &JumpWalkSpec, steps: u64, n_paths: usize, seed: u64) -> Vec<WalkPath> {
    (0..n_paths as u64).into_par_iter().map(|i| simulate_walk(spec, steps, seed, i)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WalkComparison {
    pub n: u64,
    pub t: f64,
    pub ks: KsResult,
    /// Loosened acceptance threshold, twice the 1% critical value.
    pub threshold: f64,
    pub pass: bool,
}

/// KS between the walk at time `t` and its diffusion limit at `t`:
/// Bessel(3) for `Q`, Brownian motion absorbed at 0 for `P`.
/// `cfg` supplies the diffusion sample size, step and seed.
pub fn walk_vs_diffusion(spec: &JumpWalkSpec, t: f64, cfg: &SimConfig) -> Result<WalkComparison, JumpWalkError> {
    let steps = (t * (spec.n * spec.n) as f64).floor() as u64;
    let walks = simulate_walks(spec, steps, cfg.n_paths, cfg.seed ^ 0x5741_4c4b);
    let xs: Vec<f64> = walks.iter().map(|w| w.value(spec.n)).collect();
    let limit = match spec.measure {
        Measure::Q => DiffusionSpec::bessel3(),
        Measure::P => DiffusionSpec::brownian(),
    };
    let dcfg = SimConfig {
        horizon: t,
        watch_levels: vec![],
        divergence_cap: f64::INFINITY,
        recording: Recording::Endpoints,
        ..cfg.clone()
    };
    let ys = simulate_map(&limit, spec.x0(), &dcfg, |p| *p.values.last().expect("nonempty path"))?;
    let ks = ks_two_sample(&xs, &ys)?;
    let threshold = 2.0 * critical_1pct(ks.n1, ks.n2);
    Ok(WalkComparison { n: spec.n, t, ks, threshold, pass: ks.statistic < threshold })
}

/// `walk_vs_diffusion` for the `Q` walk from 1 against Bessel(3).
pub fn walk_vs_bessel(n: u64, t: f64, cfg: &SimConfig) -> Result<WalkComparison, JumpWalkError> {
    walk_vs_diffusion(&JumpWalkSpec::new(n, Measure::Q, 1.0)?, t, cfg)
}

/// Mean of the walk value after `steps` steps.
pub fn mean_value(spec: &JumpWalkSpec, steps: u64, n_paths: usize, seed: u64) -> McEstimate {
    let xs: Vec<f64> = simulate_walks(spec, steps, n_paths, seed).iter().map(|w| w.value(spec.n)).collect();
    McEstimate::from_samples(&xs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use proptest::prelude::*;

    fn q(n: u64) -> JumpWalkSpec {
        JumpWalkSpec::new(n, Measure::Q, 1.0).unwrap()
    }

    #[test]
    fn step_distribution_examples() {
        assert_eq!(step_distribution(&q(4), 1.0).unwrap(), (0.625, 0.375));
        assert_eq!(step_distribution(&q(4), 0.25).unwrap(), (1.0, 0.0));
        let p = JumpWalkSpec::new(7, Measure::P, 3.0).unwrap();
        assert_eq!(step_distribution(&p, 0.5).unwrap(), (0.5, 0.5));
        assert_eq!(step_distribution(&p, 0.0), Err(JumpWalkError::NotPositive(0.0)));
        assert_eq!(JumpWalkSpec::new(0, Measure::P, 1.0), Err(JumpWalkError::ZeroN));
    }

    #[test]
    fn generator_examples() {
        let (sq, lin, one) = (parse_expr("y^2").unwrap(), parse_expr("y").unwrap(), parse_expr("7").unwrap());
        for n in [3u64, 10, 50, 400] {
            let s = q(n);
            for k in [2u64, 3, 17, 1000] {
                let x = k as f64 / n as f64;
                assert!((discrete_generator(&s, &sq, x).unwrap() - 3.0).abs() <= 1e-9);
                assert!((discrete_generator(&s, &lin, x).unwrap() - 1.0 / x).abs() <= 1e-9);
                assert_eq!(discrete_generator(&s, &one, x).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn generator_limit() {
        let rows = verify_generator_limit(&parse_expr("y^2").unwrap(), 1.0, &[5, 10, 20, 80]).unwrap();
        assert!(rows.iter().all(|r| r.error <= 1e-9), "{rows:?}");
        let rows = verify_generator_limit(&parse_expr("y").unwrap(), 0.7, &[10, 20]).unwrap();
        assert!(rows.iter().all(|r| r.error <= 1e-9), "{rows:?}");
        let rows = verify_generator_limit(&parse_expr("sin(y)").unwrap(), 1.0, &[10, 20]).unwrap();
        let ratio = rows[0].error / rows[1].error;
        assert!((3.0..=5.0).contains(&ratio), "{rows:?}");
        let mut csv = Vec::new();
        write_generator_csv(&rows, &mut csv).unwrap();
        assert!(String::from_utf8(csv).unwrap().starts_with("n,x,discrete,limit,error\n10,1.0,"));
    }

    #[test]
    fn reciprocal_one_step() {
        let s = q(4);
        assert_eq!(reciprocal_step_ratio(&s, 0.5).unwrap(), Ratio::from_integer(2));
        assert_eq!(verify_reciprocal_supermartingale(&s, 0.5).unwrap(), 2.0);
        assert_eq!(verify_reciprocal_supermartingale(&s, 0.25).unwrap(), 2.0);
        for k in 2..200u64 {
            let x = k as f64 / 4.0;
            assert_eq!(reciprocal_step_ratio(&s, x).unwrap(), Ratio::new(4, k));
        }
    }

    #[test]
    fn q_walk_stays_positive_and_reciprocal_drops() {
        let s = JumpWalkSpec::new(10, Measure::Q, 0.1).unwrap();
        let walks = simulate_walks(&s, 2000, 500, 3);
        assert!(walks.iter().all(|w| w.k_min >= 1));
        let from_one = simulate_walks(&q(10), 100, 10_000, 4);
        let inv: Vec<f64> = from_one.iter().map(|w| 1.0 / w.value(10)).collect();
        assert!(McEstimate::from_samples(&inv).value <= 1.0);
    }

    #[test]
    fn p_walk_is_a_martingale() {
        let p = JumpWalkSpec::new(10, Measure::P, 1.0).unwrap();
        for steps in [10u64, 100, 400] {
            let m = mean_value(&p, steps, 20_000, 8);
            assert!(m.within(1.0, 4.0), "{steps}: {m:?}");
        }
    }

    #[test]
    fn walks_are_reproducible() {
        let s = q(20);
        let a = crate::simulate::with_thread_pool(Some(1), || simulate_walks(&s, 300, 64, 1)).unwrap();
        let b = crate::simulate::with_thread_pool(Some(3), || simulate_walks(&s, 300, 64, 1)).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn kernels_are_normalized_and_tilted(n in 1u64..500, k in 1u64..10_000) {
            let x = k as f64 / n as f64;
            let qs = JumpWalkSpec::new(n, Measure::Q, x).unwrap();
            let ps = JumpWalkSpec::new(n, Measure::P, x).unwrap();
            let (qu, qd) = qs.step_ratio(k).unwrap();
            let (pu, pd) = ps.step_ratio(k).unwrap();
            prop_assert_eq!(qu + qd, Ratio::from_integer(1));
            prop_assert_eq!(pu + pd, Ratio::from_integer(1));
            // Q kernel = P kernel × X_next / X_now
            prop_assert_eq!(qu, pu * Ratio::new(k + 1, k));
            prop_assert_eq!(qd, pd * Ratio::new(k - 1, k));
        }
    }
}
