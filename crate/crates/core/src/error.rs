use std::fmt;

use crate::model::Diagnostic;
use crate::prob::ProbError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Syntax(#[from] SyntaxError),
    #[error("invalid model: {}", join_diagnostics(.0))]
    Validation(Vec<Diagnostic>),
    #[error("invalid event name {0:?}")]
    InvalidName(String),
    #[error("unknown path {0}")]
    UnknownPath(String),
    #[error("conditioning event has probability 0; the conditional is undefined")]
    ZeroCondition,
    #[error("depth {0} exceeds the supported maximum")]
    DepthExceeded(usize),
    #[error("chord split needs 0 < p < 1, got {0}")]
    Domain(String),
    #[error("chord solver could not reach tolerance {tol:e} (residual {residual:e})")]
    Tolerance { tol: f64, residual: f64 },
    #[error("layout does not match tree: {0}")]
    LayoutMismatch(String),
    #[error("condition never occurred in {0} samples")]
    NoConditionHits(u64),
    #[error("invalid style: {0}")]
    Style(String),
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn join_diagnostics(d: &[Diagnostic]) -> String {
    d.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ")
}

/// Parse failure with a 1-based position.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub expected: String,
}

impl SyntaxError {
    pub fn new(line: usize, column: usize, expected: impl Into<String>) -> Self {
        SyntaxError {
            line,
            column,
            expected: expected.into(),
        }
    }
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "syntax error at line {}, column {}: {}",
            self.line, self.column, self.expected
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
