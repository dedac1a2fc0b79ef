use std::fmt;

use thiserror::Error;

use crate::expr::ExprError;

/// An expression could not be evaluated at a point.
#[derive(Clone, Debug, PartialEq, Error)]
#[error("{what}")]
pub struct EvalError {
    pub what: String,
}

impl EvalError {
    pub fn new(what: String) -> Self {
        EvalError { what }
    }
}

/// Syntax error with the byte offset of the offending token.
#[derive(Clone, Debug, PartialEq, Error)]
pub struct ParseError {
    pub offset: usize,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "parse error at offset {}: expected one of [{}], found {}",
            self.offset,
            self.expected.join(", "),
            self.found
        )
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {point:?} is not strictly inside the chart box")]
    Domain { point: Vec<f64> },
    #[error("evaluation failed at {point:?}: {source}")]
    Eval {
        point: Vec<f64>,
        #[source]
        source: EvalError,
    },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("valence mismatch: expected {expected}, got {got}")]
    ValenceMismatch { expected: String, got: String },
    #[error("singular Jacobian at {point:?} (condition number {cond:e})")]
    SingularJacobian { point: Vec<f64>, cond: f64 },
    #[error("{path}: {source}")]
    Expr {
        path: String,
        #[source]
        source: ExprError,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("precondition violated: {condition} at index {index:?}, residual {residual:e}")]
    PreconditionViolated { condition: String, index: Vec<usize>, residual: f64 },
    #[error("1-form K_{j}K_{l} dA is not closed (residual {residual:e})", j = .pair.0 + 1, l = .pair.1 + 1)]
    NotClosed { pair: (usize, usize), residual: f64 },
    #[error("adaptive quadrature did not converge within {levels} halvings")]
    QuadratureStall { levels: usize },
    #[error("the 1-forms dA_m do not form a basis at {point:?} (condition number {cond:e})")]
    DegenerateFrame { point: Vec<f64>, cond: f64 },
    #[error("no Lenard chain generator: {0}")]
    NoGenerator(String),
    #[error("frame integration failed: {0}")]
    FrameIntegrationFailure(String),
    #[error("zero denominator in conformal fit at {point:?}")]
    ZeroDenominator { point: Vec<f64> },
    #[error("singular metric at {point:?} (condition number {cond:e})")]
    SingularMetric { point: Vec<f64>, cond: f64 },
    #[error("CFL condition violated: dt*max|K|/dx = {ratio} > 0.5")]
    CflViolation { ratio: f64 },
    #[error("gradient blow-up at t = {time}")]
    Blowup { time: f64 },
    #[error("solution left the chart box at t = {time}")]
    ChartExit { time: f64 },
    #[error("unknown scenario or file '{0}'")]
    UnknownScenario(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
