//! TOML run configuration.
//!
//! Every section is optional; an empty file describes Brownian motion from 1
//! with the library's default simulation settings.

use std::path::Path;

use condflow_core::expr::parse_expr;
use condflow_core::scale::GridConfig;
use condflow_core::{
    Coefficient, DiffusionSpec, Direction, Functional, Interval, Normalization, Recording, SimConfig,
};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    #[serde(default = "one")]
    pub x0: f64,
    #[serde(default)]
    pub spec: SpecSection,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default)]
    pub scale: ScaleSection,
    #[serde(default)]
    pub transform: TransformSection,
    pub hitting: Option<HittingSection>,
    pub condition: Option<ConditionSection>,
    #[serde(default)]
    pub verify: VerifySection,
}

fn one() -> f64 {
    1.0
}

impl Default for RunConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config is valid")
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    #[default]
    Bm,
    Gbm,
    Bessel3,
    Custom,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecSection {
    #[serde(default)]
    pub family: Family,
    /// Drift expression (custom only).
    pub b: Option<String>,
    /// Diffusion expression (custom only).
    pub a: Option<String>,
    pub l: Option<f64>,
    pub r: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub dt: Option<f64>,
    pub horizon: Option<f64>,
    pub n_paths: Option<usize>,
    pub divergence_cap: Option<f64>,
    pub bridge_correction: Option<bool>,
    pub watch_levels: Option<Vec<f64>>,
    pub boundary_clamp: Option<f64>,
    pub max_halvings: Option<u32>,
    pub recording: Option<Recording>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleSection {
    pub y_min: Option<f64>,
    pub y_max: Option<f64>,
    pub points: Option<usize>,
    pub normalization: Option<Normalization>,
    pub anchor: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionName {
    Upward,
    Downward,
}

impl From<DirectionName> for Direction {
    fn from(d: DirectionName) -> Direction {
        match d {
            DirectionName::Upward => Direction::Upward,
            DirectionName::Downward => Direction::Downward,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformSection {
    pub direction: Option<DirectionName>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HittingSection {
    pub up: f64,
    /// Defaults to the lower end of the interval.
    pub down: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionSection {
    pub direction: DirectionName,
    pub level: f64,
    #[serde(default = "terminal")]
    pub functional: Functional,
    /// Cap standing in for the upper end in downward conditioning.
    pub cap: Option<f64>,
}

fn terminal() -> Functional {
    Functional::Terminal
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub n: Option<usize>,
    pub sigma: Option<f64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        RunConfig::parse(&text)
    }

    pub fn parse(text: &str) -> Result<RunConfig, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.diffusion()?;
        Ok(cfg)
    }

    /// The configured diffusion, checked to evaluate inside its interval.
    pub fn diffusion(&self) -> Result<DiffusionSpec, CliError> {
        let s = &self.spec;
        let named = |spec: DiffusionSpec| -> Result<DiffusionSpec, CliError> {
            if s.a.is_some() || s.b.is_some() {
                return Err(CliError::Config("`a` and `b` are only allowed with family = \"custom\"".into()));
            }
            let l = s.l.unwrap_or(spec.interval.lower());
            let r = s.r.unwrap_or(spec.interval.upper());
            Ok(spec.with_interval(Interval::new(l, r).map_err(|e| CliError::Config(e.to_string()))?))
        };
        let spec = match s.family {
            Family::Bm => named(DiffusionSpec::brownian())?,
            Family::Gbm => named(DiffusionSpec::geometric_brownian())?,
            Family::Bessel3 => named(DiffusionSpec::bessel3())?,
            Family::Custom => {
                let (Some(b), Some(a)) = (&s.b, &s.a) else {
                    return Err(CliError::Config("custom spec needs both `b` and `a`".into()));
                };
                let parse = |src: &str| parse_expr(src).map_err(|e| CliError::Config(format!("`{src}`: {e}")));
                let interval = Interval::new(s.l.unwrap_or(0.0), s.r.unwrap_or(f64::INFINITY))
                    .map_err(|e| CliError::Config(e.to_string()))?;
                DiffusionSpec::new(interval, Coefficient::Expr(parse(b)?), Coefficient::Expr(parse(a)?), "custom")
            }
        };
        let mid = 0.5 * (spec.interval.lower().max(-10.0) + spec.interval.upper().min(10.0));
        spec.drift_at(mid).map_err(|e| CliError::Config(format!("drift at {mid}: {e}")))?;
        spec.diffusion_at(mid).map_err(|e| CliError::Config(format!("diffusion at {mid}: {e}")))?;
        Ok(spec)
    }

    pub fn sim_config(&self, seed: u64, n: Option<usize>) -> SimConfig {
        let d = SimConfig::default();
        let s = &self.sim;
        SimConfig {
            dt: s.dt.unwrap_or(d.dt),
            horizon: s.horizon.unwrap_or(d.horizon),
            n_paths: n.or(s.n_paths).unwrap_or(d.n_paths),
            divergence_cap: s.divergence_cap.unwrap_or(d.divergence_cap),
            bridge_correction: s.bridge_correction.unwrap_or(d.bridge_correction),
            watch_levels: s.watch_levels.clone().unwrap_or_default(),
            seed,
            boundary_clamp: s.boundary_clamp.unwrap_or(d.boundary_clamp),
            max_halvings: s.max_halvings.unwrap_or(d.max_halvings),
            recording: s.recording.unwrap_or(d.recording),
        }
    }

    /// Grid config for the scale function, normalized for `direction` when
    /// the config does not fix the normalization.
    pub fn grid_config(&self, spec: &DiffusionSpec, direction: Option<Direction>) -> GridConfig {
        let sc = &self.scale;
        let mut g = GridConfig::for_interval(spec.interval, sc.anchor.unwrap_or(self.x0));
        if let Some(y) = sc.y_min {
            g.y_min = y;
        }
        if let Some(y) = sc.y_max {
            g.y_max = y;
        }
        if let Some(p) = sc.points {
            g.points = p;
        }
        g.normalization = sc.normalization.or(direction.map(|d| match d {
            Direction::Upward => Normalization::L,
            Direction::Downward => Normalization::R,
        }));
        g
    }
}
