use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("pump schedule does not cover t = {t}")]
    PumpOutOfDomain { t: f64 },

    #[error("pump amplitude {amplitude} is negative at t = {t}")]
    NegativePumpAmplitude { t: f64, amplitude: f64 },

    #[error("coefficient `{name}` is not finite at t = {t}")]
    NonFiniteCoefficient { name: &'static str, t: f64 },

    #[error("kinetic coefficient vanishes at t = {t} (a = {a:e})")]
    KineticDegenerate { t: f64, a: f64 },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("step budget exhausted at t = {t}")]
    MaxStepsExceeded { t: f64 },

    #[error("Wronskian residual {residual:e} exceeds gate {limit:e}")]
    ToleranceNotMet { residual: f64, limit: f64 },

    #[error("t = {t} lies outside the solved range [{t_min}, {t_max}]")]
    OutOfSolvedRange { t: f64, t_min: f64, t_max: f64 },

    #[error("caustic at t = {t}: mu0 = {mu0:e}")]
    CausticEncountered { t: f64, mu0: f64 },

    #[error("propagation time must be positive, got {t}")]
    TimeNotPositive { t: f64 },

    #[error("grid under-resolved: {0}")]
    GridUnderResolved(String),

    #[error("initial field has not decayed at the grid edge (relative amplitude {relative:e})")]
    TailNotDecayed { relative: f64 },

    #[error("Gaussian integral does not converge (Re p = {re_p:e})")]
    NonConvergentIntegral { re_p: f64 },

    #[error("invariant constant must be positive, got {c0}")]
    InvalidInvariantConstant { c0: f64 },

    #[error("Fourier truncation order {n} is below the minimum of 4")]
    TruncationTooSmall { n: usize },

    #[error("banded solve hit a zero pivot in row {row}")]
    LinearSolveFailure { row: usize },

    #[error("boundary contamination at t = {t}: edge amplitude {amplitude:e}")]
    BoundaryContamination { t: f64, amplitude: f64 },

    #[error("wave fields live on different grids")]
    GridMismatch,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),
}
