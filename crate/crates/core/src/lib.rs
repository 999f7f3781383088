//! One-dimensional diffusions conditioned to hit a level, via h-transforms
//! with the scale function, checked against Monte Carlo conditioning.
//!
//! The modules build on each other: [`expr`] parses coefficient strings,
//! [`scale`] solves for the scale function, [`htransform`] adds the drift
//! `a s'/s`, [`simulate`] runs Euler–Maruyama paths, and [`conditioning`],
//! [`counterexample`] and [`jumpwalk`] compare the two sides statistically.
//! [`verify`] bundles named scenarios with PASS/FAIL checks.

// `!(x > y)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use thiserror::Error;

pub mod conditioning;
pub mod counterexample;
pub mod expr;
pub mod htransform;
pub mod jumpwalk;
pub mod model;
pub mod quad;
pub mod rng;
pub mod scale;
pub mod simulate;
pub mod stats;
pub mod verify;

pub use conditioning::{ConditioningError, ConditioningReport, Functional, Mode};
pub use counterexample::{CounterexampleError, CounterexampleReport};
pub use expr::{parse_expr, CoeffExpr, EvalError, ParseError};
pub use htransform::{transform, Direction, TransformError, TransformedSpec};
pub use jumpwalk::{JumpWalkError, JumpWalkSpec, Measure};
pub use model::{Coefficient, DiffusionSpec, Exit, HittingRecord, HittingTime, Interval, McEstimate, ModelError, PathSample};
pub use scale::{compute_scale, BoundaryClass, GridConfig, Normalization, ScaleError, ScaleFunction};
pub use simulate::{Recording, SimConfig, SimError};
pub use stats::{KsResult, StatsError};
pub use verify::{Scenario, ScenarioReport, VerifyConfig};

/// Any error raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Scale(#[from] ScaleError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Conditioning(#[from] ConditioningError),
    #[error(transparent)]
    Counterexample(#[from] CounterexampleError),
    #[error(transparent)]
    JumpWalk(#[from] JumpWalkError),
}

fn sim_input_error(e: &SimError) -> bool {
    matches!(e, SimError::InvalidConfig(_) | SimError::StartOutside { .. } | SimError::Precondition(_))
}

impl Error {
    /// True for failures of the numerics (non-finite values, insufficient
    /// samples, failed transforms) rather than invalid input.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::Parse(_) | Error::Model(_) => false,
            Error::Transform(TransformError::NormalizationMismatch { .. }) => false,
            Error::Sim(e)
            | Error::Conditioning(ConditioningError::Sim(e))
            | Error::Counterexample(CounterexampleError::Sim(e))
            | Error::JumpWalk(JumpWalkError::Sim(e)) => !sim_input_error(e),
            Error::Conditioning(ConditioningError::InvalidLevel(_) | ConditioningError::BothWeighted)
            | Error::Counterexample(CounterexampleError::InvalidLevel(_))
            | Error::JumpWalk(JumpWalkError::ZeroN | JumpWalkError::NotPositive(_)) => false,
            _ => true,
        }
    }
}
