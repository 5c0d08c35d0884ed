use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("spectral parameter {z} is within {dist:.3e} of a pole")]
    PoleProximity { z: String, dist: f64 },

    #[error("coincident coordinates at ({i}, {j}): kernel argument {gap:.3e}")]
    Collision { i: usize, j: usize, gap: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("collision approach at t = {time}: minimal gap {min_gap:.3e}")]
    CollisionAbort { time: f64, min_gap: f64 },

    #[error("step size underflow at t = {time}: h = {step:.3e}")]
    StepUnderflow { time: f64, step: f64 },

    #[error("ill-conditioned sample set: condition estimate {0:.3e}")]
    IllConditioned(f64),

    #[error("eigenvalue collision: gap {0:.3e}")]
    EigenvalueCollision(f64),

    #[error("spectrum outside the admissible cone: {0}")]
    SpectrumCone(String),

    #[error("tau function vanishes near x+ = {x_plus}, x- = {x_minus} (|tau_{index}| = {modulus:.3e})")]
    TauZero {
        index: usize,
        x_plus: f64,
        x_minus: f64,
        modulus: f64,
    },

    #[error("exponent overflow: |exponent| = {0:.3e}")]
    Overflow(f64),

    #[error("flow validation failed: residual {residual:.3e} exceeds {tolerance:.3e}")]
    FlowValidation { residual: f64, tolerance: f64 },

    #[error("finite-difference step {0:e} underflows")]
    StepTooSmall(f64),

    #[error("observable belongs to {expected} but point is in {got}")]
    SpaceMismatch { expected: String, got: String },
}

pub type Result<T> = std::result::Result<T, Error>;
