use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use condflow_core::conditioning::{condition_downward, condition_upward};
use condflow_core::htransform::transform;
use condflow_core::simulate::{estimate_hitting_prob, simulate_paths, summarize, write_paths_csv};
use condflow_core::verify::{run_scenario, Scenario, ScenarioReport, SCHEMA_VERSION};
use condflow_core::{compute_scale, ConditioningReport, Direction, ScaleFunction, VerifyConfig};
use serde_json::{json, Value};

use crate::config::{DirectionName, RunConfig};
use crate::error::CliError;

pub const DEFAULT_SEED: u64 = 20_240_601;

/// Options shared by all subcommands.
pub struct Ctx<'a> {
    pub config: &'a RunConfig,
    pub seed: u64,
    pub n: Option<usize>,
    pub out: Option<&'a Path>,
}

/// JSON number, or a string for non-finite values.
fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn write_out(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<(), CliError> {
    let err = |source| CliError::Output { path: path.display().to_string(), source };
    let mut w = BufWriter::new(File::create(path).map_err(err)?);
    f(&mut w).and_then(|_| w.flush()).map_err(err)
}

fn scale_for(ctx: &Ctx, direction: Option<Direction>) -> Result<(condflow_core::DiffusionSpec, ScaleFunction), CliError> {
    let spec = ctx.config.diffusion()?;
    let anchor = ctx.config.scale.anchor.unwrap_or(ctx.config.x0);
    let s = compute_scale(&spec, anchor, &ctx.config.grid_config(&spec, direction))?;
    Ok((spec, s))
}

pub fn scale(ctx: &Ctx) -> Result<Value, CliError> {
    let (spec, s) = scale_for(ctx, None)?;
    let class = s.classify()?;
    if let Some(path) = ctx.out {
        write_out(path, |w| s.write_csv(w))?;
    }
    let (lower, upper) = s.boundary_limits();
    Ok(json!({
        "schema": SCHEMA_VERSION,
        "command": "scale",
        "spec": spec.label,
        "normalization": s.normalization(),
        "limits": { "lower": num(lower), "upper": num(upper) },
        "classification": class.to_string(),
        "points": s.grid().len(),
    }))
}

pub fn transform_cmd(ctx: &Ctx) -> Result<Value, CliError> {
    let wanted = ctx.config.transform.direction.map(Direction::from);
    let (spec, s) = scale_for(ctx, wanted)?;
    let direction = wanted.unwrap_or_else(|| Direction::for_normalization(s.normalization()));
    let t = transform(&spec, &s, direction)?;
    let mut rows = Vec::with_capacity(s.grid().len());
    for &y in s.grid() {
        if let (Ok(b), Ok(a), Ok(added), Ok(drift)) =
            (spec.drift_at(y), spec.diffusion_at(y), t.added_drift(y), t.result.drift_at(y))
        {
            rows.push([y, b, a, added, drift]);
        }
    }
    if let Some(path) = ctx.out {
        write_out(path, |w| {
            writeln!(w, "y,b,a,added_drift,drift")?;
            for r in &rows {
                writeln!(w, "{:?},{:?},{:?},{:?},{:?}", r[0], r[1], r[2], r[3], r[4])?;
            }
            Ok(())
        })?;
    }
    let x0 = ctx.config.x0;
    Ok(json!({
        "schema": SCHEMA_VERSION,
        "command": "transform",
        "spec": spec.label,
        "direction": direction,
        "normalization": s.normalization(),
        "result": t.result.label,
        "x0": x0,
        "drift_at_x0": num(t.result.drift_at(x0).unwrap_or(f64::NAN)),
        "rows": rows.len(),
    }))
}

pub fn simulate(ctx: &Ctx) -> Result<Value, CliError> {
    let spec = ctx.config.diffusion()?;
    let cfg = ctx.config.sim_config(ctx.seed, ctx.n);
    let paths = simulate_paths(&spec, ctx.config.x0, &cfg)?;
    if let Some(path) = ctx.out {
        write_out(path, |w| write_paths_csv(&paths, w))?;
    }
    Ok(json!({
        "schema": SCHEMA_VERSION,
        "command": "simulate",
        "spec": spec.label,
        "x0": ctx.config.x0,
        "seed": ctx.seed,
        "dt": cfg.dt,
        "horizon": cfg.horizon,
        "summary": summarize(&paths, &cfg),
    }))
}

pub fn hitting(ctx: &Ctx) -> Result<Value, CliError> {
    let spec = ctx.config.diffusion()?;
    let Some(h) = &ctx.config.hitting else {
        return Err(CliError::Config("missing [hitting] section".into()));
    };
    let down = h.down.unwrap_or(spec.interval.lower());
    let cfg = ctx.config.sim_config(ctx.seed, ctx.n);
    let est = estimate_hitting_prob(&spec, ctx.config.x0, h.up, down, &cfg)?;
    Ok(json!({
        "schema": SCHEMA_VERSION,
        "command": "hitting",
        "spec": spec.label,
        "x0": ctx.config.x0,
        "up": h.up,
        "down": num(down),
        "seed": ctx.seed,
        "result": est,
    }))
}

fn samples_csv(w: &mut impl Write, rejection: &ConditioningReport, weighted: &ConditioningReport) -> std::io::Result<()> {
    writeln!(w, "path,value,rejection_weight,weight")?;
    for (i, x) in rejection.functional_samples.iter().enumerate() {
        writeln!(w, "{i},{x:?},{:?},{:?}", rejection.weights[i], weighted.weights[i])?;
    }
    Ok(())
}

pub fn condition(ctx: &Ctx) -> Result<Value, CliError> {
    let spec = ctx.config.diffusion()?;
    let Some(c) = &ctx.config.condition else {
        return Err(CliError::Config("missing [condition] section".into()));
    };
    let x0 = ctx.config.x0;
    let mut cfg = ctx.config.sim_config(ctx.seed, ctx.n);
    if ctx.config.sim.recording.is_none() {
        cfg.recording = c.functional.recording(cfg.dt);
    }
    let f = c.functional;
    let (mut rejection, weighted) = match c.direction {
        DirectionName::Upward => condition_upward(&spec, x0, c.level, |p| f.eval(p), &cfg)?,
        DirectionName::Downward => {
            cfg.divergence_cap = c.cap.or(ctx.config.sim.divergence_cap).unwrap_or(40.0 * x0);
            condition_downward(&spec, x0, c.level, |p| f.eval(p), &cfg)?
        }
    };
    // NaN functional values (truncated paths) are left out of the comparison
    let keep: Vec<usize> = (0..rejection.functional_samples.len())
        .filter(|&i| !rejection.functional_samples[i].is_nan())
        .collect();
    let pick = |r: &ConditioningReport| {
        let mut r = r.clone();
        r.functional_samples = keep.iter().map(|&i| r.functional_samples[i]).collect();
        r.weights = keep.iter().map(|&i| r.weights[i]).collect();
        r
    };
    let ks = pick(&rejection).compare(&pick(&weighted)).ok();
    rejection.comparison = ks;
    if let Some(path) = ctx.out {
        write_out(path, |w| samples_csv(w, &rejection, &weighted))?;
    }
    Ok(json!({
        "schema": SCHEMA_VERSION,
        "command": "condition",
        "spec": spec.label,
        "x0": x0,
        "direction": c.direction_label(),
        "level": c.level,
        "functional": f,
        "seed": ctx.seed,
        "cap": num(cfg.divergence_cap),
        "acceptance": rejection.acceptance(),
        "mean_weight": weighted.mean_weight(),
        "rejection": rejection.to_json(),
        "weighted": weighted.to_json(),
    }))
}

/// Scenario reports and the overall verdict.
pub fn verify(ctx: &Ctx, which: &str) -> Result<(Vec<ScenarioReport>, bool), CliError> {
    let scenarios: Vec<Scenario> = if which == "all" {
        Scenario::ALL.to_vec()
    } else {
        vec![which.parse().map_err(CliError::Config)?]
    };
    let v = &ctx.config.verify;
    let cfg = VerifyConfig { seed: ctx.seed, n: ctx.n.or(v.n), sigma: v.sigma.unwrap_or(4.0) };
    let mut reports = Vec::new();
    for s in scenarios {
        reports.push(run_scenario(s, &cfg)?);
    }
    let pass = reports.iter().all(|r| r.pass);
    Ok((reports, pass))
}

impl crate::config::ConditionSection {
    fn direction_label(&self) -> &'static str {
        match self.direction {
            DirectionName::Upward => "upward",
            DirectionName::Downward => "downward",
        }
    }
}
