//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("amplitude budget exceeded: sum of |coefficients| = {got:.4} > {limit}")]
    AmplitudeBudget { got: f64, limit: f64 },

    #[error("point ({x:.3}, {y:.3}) outside the sampled region (halfwidth {halfwidth})")]
    OutsideRegion { x: f64, y: f64, halfwidth: f64 },

    #[error("requested radius {radius:.2} exceeds the sampled region (halfwidth {halfwidth})")]
    RegionTooSmall { radius: f64, halfwidth: f64 },

    #[error("integration step {step:e} too large (maximum {max:e})")]
    StepTooLarge { step: f64, max: f64 },

    #[error("integration horizon {requested:.1} exceeds the configured limit {limit:.1}")]
    HorizonExceeded { requested: f64, limit: f64 },

    #[error("path span {got:.2} too short (need at least {need:.2})")]
    SpanTooShort { got: f64, need: f64 },

    #[error("polyline needs at least {need} points, got {got}")]
    TooFewPoints { got: usize, need: usize },

    #[error("series too short: {0}")]
    SeriesTooShort(String),

    #[error("numerical instability: {0}")]
    Unstable(String),
}

pub type Result<T> = std::result::Result<T, Error>;
