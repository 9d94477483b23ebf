use thiserror::Error;

use crate::spacetime::PhasePoint;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("TM potential singular at x⁺ = 0")]
    TmSingular,

    #[error("on light cone: |p₋ - A₋| = {gap:.3e} at x⁺ = {time}")]
    OnLightCone { gap: f64, time: f64 },

    #[error("omega imaginary: F₀/(2p₋) = {ratio} must be positive")]
    OmegaImaginary { ratio: f64 },

    #[error("epsilon zero: the transverse invariants need ε ≠ 0")]
    EpsilonZero,

    #[error("quadrature pole: denominator changes sign near s = {at}")]
    QuadraturePole { at: f64 },

    #[error("zero longitudinal momentum")]
    ZeroLongitudinalMomentum,

    #[error("singular launch time: closed-form orbit cannot start at x⁺ = 0")]
    SingularLaunchTime,

    #[error("quadrature did not converge: estimated error {error:.3e}")]
    QuadratureNotConverged { error: f64 },

    #[error("not a symmetry: |L_ξ F| = {residual:.3e} on the integration path")]
    NotASymmetry { residual: f64 },

    #[error("path-dependent gauge term: routes differ by {difference:.3e}")]
    PathDependent { difference: f64 },

    #[error("insufficient samples: {given} points give at most {rows} independent constraints")]
    InsufficientSamples { given: usize, rows: usize },

    #[error("step underflow at time {} (step {step:.3e})", last.time)]
    StepUnderflow { last: PhasePoint, step: f64 },

    #[error("domain boundary reached at time {}: {reason}", last.time)]
    DomainBoundary { last: PhasePoint, reason: String },

    #[error("no closed form available for {system}")]
    NoClosedForm { system: String },

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
