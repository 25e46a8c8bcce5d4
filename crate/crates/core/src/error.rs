use thiserror::Error;

/// Errors raised by the numerical modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("value {value} lies outside the evaluation domain [{min}, {max}]")]
    Domain { value: f64, min: f64, max: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("ordering violated: {0}")]
    Ordering(String),

    #[error("step size underflow at x = {x} (step {step:e})")]
    Stiffness { x: f64, step: f64 },

    #[error("solver became unstable at step {step} (t = {t})")]
    Stability { step: usize, t: f64 },

    #[error("decay fit window selection failed: {0}")]
    WindowSelection(String),

    #[error("truncation: {0}")]
    Truncation(String),

    #[error("shift not yet defined at t = {t}: left/right states are not separated enough")]
    NotYetValid { t: f64 },

    #[error("bisection bracket failure: {0}")]
    Bracket(String),

    #[error("unsupported model: {0}")]
    Unsupported(String),

    #[error("arity: {0}")]
    Arity(String),

    #[error("invalid parameter: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, LabError>;
