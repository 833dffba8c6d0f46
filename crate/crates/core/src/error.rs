use thiserror::Error;

/// Failures raised by the numerical routines.
///
/// Variants split into input problems (bad configuration, unsupported
/// data) and numerical contract violations (a computed quantity missed
/// its tolerance). [`Error::is_contract_violation`] tells them apart.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid vortex configuration: {0}")]
    InvalidConfiguration(String),

    #[error("invalid phase: {0}")]
    InvalidPhase(String),

    #[error("point {x:.6e} + {y:.6e}i is outside the domain of evaluation: {reason}")]
    Domain { x: f64, y: f64, reason: &'static str },

    #[error("phase increment {step:.4} exceeds the resolvable bound; refine sampling (cell {cell})")]
    Unresolved { cell: usize, step: f64 },

    #[error("boundary datum incompatible with vortex charges: flux defect {defect:.3e}")]
    Incompatible { defect: f64 },

    #[error("degree mismatch: boundary datum has degree {found}, expected {expected}")]
    DegreeMismatch { expected: i64, found: i64 },

    #[error("test function does not vanish on the boundary (max trace {max_trace:.3e})")]
    NonZeroTrace { max_trace: f64 },

    #[error("level {level} is not regular ({reason}); try {suggestion}")]
    NonRegularLevel { level: f64, suggestion: f64, reason: &'static str },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("{quantity} = {value:.6e} exceeds tolerance {tolerance:.1e}")]
    Contract { quantity: &'static str, value: f64, tolerance: f64 },
}

impl Error {
    /// True when the error reports a computed quantity out of tolerance,
    /// as opposed to invalid input.
    pub fn is_contract_violation(&self) -> bool {
        matches!(self, Error::Contract { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
