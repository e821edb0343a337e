use alloc::boxed::Box;
use alloc::string::String;

use crate::geometry::{Geometry, MilnorMetric};
use crate::integrator::Trajectory;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid metric ({a}, {b}, {c}): components must be finite and positive")]
    InvalidMetric { a: f64, b: f64, c: f64 },

    #[error("unsupported geometry `{0}`")]
    UnknownGeometry(String),

    #[error("unsupported flow sign `{0}`")]
    UnknownSign(String),

    #[error("{what} is not defined for {geometry}")]
    NotApplicable { what: &'static str, geometry: Geometry },

    #[error("the raised Einstein tensor is singular (some sectional curvature vanishes)")]
    SingularTensor,

    #[error("t = {t} is outside the domain of the {family} solution")]
    OutOfDomain { family: &'static str, t: f64 },

    #[error("initial data does not belong to the {family} family")]
    NotInFamily { family: &'static str },

    #[error("vector field is not finite at t = {t}")]
    NumericalFailure { t: f64, last: MilnorMetric },

    #[error("invalid integrator controls: {0}")]
    InvalidControls(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),

    #[error("fit window holds {found} samples, at least {needed} are required")]
    InsufficientSamples { needed: usize, found: usize },

    #[error("the trajectory does not blow up (terminated with {0:?})")]
    NoBlowUp(crate::integrator::Termination),

    #[error("bracket endpoints classify as {lo} and {hi}; expected Q2 below and Q1 above")]
    Bracket { lo: crate::sl2::Regime, hi: crate::sl2::Regime },

    #[error("classification at a = {a} is undetermined; raise the step budget or tighten tolerances")]
    Inconclusive { a: f64 },

    #[error("classification failed: {reason}")]
    Classification { reason: Box<Error>, partial: Box<Trajectory> },
}
