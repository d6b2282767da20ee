use std::fmt;

use thiserror::Error;

/// One of the strict inequalities a mixture instance must satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Constraint {
    Q1Positive,
    Q1BelowMu1,
    Mu1BelowMu2,
    Mu2BelowQ2,
    X1BelowX2,
    Finite,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Constraint::Q1Positive => "0 < q1",
            Constraint::Q1BelowMu1 => "q1 < mu1",
            Constraint::Mu1BelowMu2 => "mu1 < mu2",
            Constraint::Mu2BelowQ2 => "mu2 < q2",
            Constraint::X1BelowX2 => "x1 < x2",
            Constraint::Finite => "all parameters finite",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("ordering violation: {0} does not hold (required: 0 < q1 < mu1 < mu2 < q2, x1 < x2)")]
    OrderingViolation(Constraint),
    #[error("division by zero in {0}")]
    DivisionByZero(&'static str),
    #[error("invariants are complex: discriminant {0:e} < 0")]
    ComplexRoots(f64),
    #[error("degenerate leading coefficient: 1 + u1 + u2 = {0:e}")]
    DegenerateLeadingCoefficient(f64),
    #[error("coincident invariants R1 = {r1}, R2 = {r2}")]
    CoincidentInvariants { r1: f64, r2: f64 },
    #[error("adaptive quadrature did not reach tolerance on [{a}, {b}]")]
    QuadratureFailure { a: f64, b: f64 },
    #[error("{what}: argument {value} outside [{lo}, {hi}]")]
    DomainError {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("ODE integration failed: {0}")]
    IntegrationFailure(String),
    #[error("isochrone endpoint mismatch: expected {expected}, reached {reached}")]
    EndpointMismatch { expected: f64, reached: f64 },
    #[error("no root in [{lo}, {hi}]")]
    NoRootInInterval { lo: f64, hi: f64 },
    #[error("parametrization not strictly monotone near parameter {at}")]
    NonMonotoneParametrization { at: f64 },
    #[error("shock state left [{lo}, {hi}] with value {value} at t = {beta}")]
    DomainExit {
        value: f64,
        beta: f64,
        lo: f64,
        hi: f64,
    },
    #[error("unexpected event ordering: {0}")]
    UnexpectedOrdering(String),
    #[error("no zone covers x in [{lo}, {hi}]")]
    PhaseGap { lo: f64, hi: f64 },
    #[error("level-line drift {drift:e} exceeds bound at t* = {t_star}")]
    LevelDrift { drift: f64, t_star: f64 },
    #[error("fold detected: level line reverses orientation near x = {at} (a shock)")]
    FoldDetected { at: f64 },
    #[error("CFL violated: dt = {dt:e} exceeds limit {limit:e}")]
    CflViolation { dt: f64, limit: f64 },
    #[error("non-physical state in cell {cell}: 1 + s = {one_plus_s:e}")]
    NonPhysicalState { cell: usize, one_plus_s: f64 },
    #[error("x-ranges do not overlap")]
    DomainMismatch,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
