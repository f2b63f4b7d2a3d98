use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GlppError {
    #[error("sum of sqrt(mu0) cannot be certified finite: {0}")]
    DivergentSqrtSum(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("conditioning event has mass {0:e}, below 1e-300")]
    TailUnderflow(f64),
    #[error("empty scan grid")]
    EmptyGrid,
    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),
    #[error("L = {l} exceeds the enumeration cap {cap}")]
    CapExceeded { l: usize, cap: usize },
    #[error("state space too large: {0}")]
    StateSpaceTooLarge(String),
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
    #[error("event budget exceeded at time {time}: {events} events")]
    EventBudgetExceeded { time: f64, events: u64 },
    #[error("not materialized: {0}")]
    NotMaterialized(String),
    #[error("parity violation at ({x}, {y})")]
    ParityViolation { x: i64, y: i64 },
    #[error("front left the {n}x{n} box before time {until}")]
    BoxExhausted { n: usize, until: u64 },
    #[error("truncation bound {bound:e} exceeds tolerance {tol:e}")]
    TruncationNotConverged { bound: f64, tol: f64 },
    #[error("stationary leaked mass {0:e} exceeds 1e-8")]
    ExcessLeak(f64),
    #[error("no convergence after {iters} iterations (residual {residual:e})")]
    NoConvergence { iters: usize, residual: f64 },
    #[error("support mismatch: {0}")]
    SupportMismatch(String),
    #[error("invalid bridge: {0}")]
    InvalidBridge(String),
    #[error("certificate failed: {0}")]
    CertificateFailed(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, GlppError>;
