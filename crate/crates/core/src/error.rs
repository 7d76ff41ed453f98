use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("domain error in `{subtree}` at x = {x}: {reason}")]
    Domain {
        reason: &'static str,
        subtree: String,
        x: f64,
    },
    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("syntax error: {0}")]
    Syntax(#[from] ParseError),
    #[error("missing required key `{0}`")]
    MissingKey(&'static str),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AsympError {
    #[error("forms live in different endpoint frames")]
    FrameMismatch,
    #[error("exponential factors are not comparable at leading order")]
    IncompatibleExponentials,
    #[error("no leading-order antiderivative: {0}")]
    NotIntegrableAtLeadingOrder(String),
    #[error("result leaves the exp-power-log algebra: {0}")]
    OutsideAlgebra(String),
    #[error("leading terms cancel; lower-order behaviour unknown")]
    Cancellation,
    #[error("invalid asymptotic form: {0}")]
    InvalidForm(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("integrand failed at x = {x}: {source}")]
    Evaluation { x: f64, source: EvalError },
    #[error("invalid integration range ({lo}, {hi})")]
    InvalidRange { lo: f64, hi: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("log Z overflowed on path {path}")]
    Overflow { path: u64 },
    #[error("coefficient evaluation failed on path {path}: {source}")]
    Evaluation { path: u64, source: EvalError },
    #[error("refusing to simulate: {0}")]
    Refused(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifyError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Spec(#[from] SpecError),
}
