use num_complex::Complex64;
use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("root iteration did not reach residual target (worst residual {worst_residual:e})")]
    NonConvergence { worst_residual: f64 },

    #[error("argument tracking met |F| ~ 0 near {at}; perturb the contour")]
    CurveThroughZero { at: Complex64 },

    #[error("{count} zero(s) failed +-1 winding certification")]
    SingularZeroDetected { count: usize },

    #[error("harmonic polynomial is not regular: {0}")]
    NotRegular(String),

    #[error("polynomial has empty support")]
    EmptySupport,

    #[error("coefficient {index} of {part} has imaginary part {imag:e}")]
    NotRealCoefficients {
        part: &'static str,
        index: usize,
        imag: f64,
    },

    #[error("construction linear system is singular (min pivot ratio {pivot_ratio:e})")]
    SingularSystem { pivot_ratio: f64 },

    #[error("lemniscate trace stalled near {at} (step {step:e})")]
    TraceStall { at: Complex64, step: f64 },

    #[error("cannot pair lemniscate branches at critical point {at}")]
    SaddleUnresolved { at: Complex64 },

    #[error("f' vanishes at {at}")]
    CriticalPoint { at: Complex64 },

    #[error("argument step {step:.3} rad exceeds pi/2 at theta = {theta:.6}")]
    BranchJump { theta: f64, step: f64 },

    #[error("point {at} is not on the lemniscate (|f| = {modulus})")]
    NotOnLemniscate { at: Complex64, modulus: f64 },

    #[error("point {at} is not a critical point of f (|f'| = {derivative:e})")]
    NotCritical { at: Complex64, derivative: f64 },

    #[error("hypothesis failed: {0}")]
    AssumptionFailed(String),

    #[error("no two-zero certificate found: {0}")]
    NotFound(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
