//! Error type shared by all solver modules.

use crate::expr::{EvalError, ParseError};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{quantity} = {value} is outside the domain from {min} to {max}")]
    OutOfDomain {
        quantity: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("dyadic level {level} exceeds the maximum supported level {max}")]
    LevelTooLarge { level: u32, max: u32 },

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("evaluating the scalar field on cell {cell}: {source}")]
    ScalarProjection { cell: usize, source: Box<Error> },

    #[error("evaluating the kernel on cell pair ({s_cell}, {t_cell}): {source}")]
    KernelProjection {
        s_cell: usize,
        t_cell: usize,
        source: Box<Error>,
    },

    #[error("a Brownian path is required but none was supplied")]
    PathRequired,

    #[error("t = {t} is not a grid multiple of the path step {step}")]
    OffGrid { t: f64, step: f64 },

    #[error("path with {points} points cannot resolve the half-cells of an m = {m} basis")]
    GridMismatch { points: usize, m: usize },

    #[error("path horizon {path} does not match the expected horizon {expected}")]
    HorizonMismatch { expected: f64, path: f64 },

    #[error("singular linear system: pivot {pivot:e} at index {index}")]
    SingularSystem { index: usize, pivot: f64 },

    #[error("linear solve residual {residual:e} exceeds the bound {bound:e}")]
    ResidualTooLarge { residual: f64, bound: f64 },

    #[error(
        "fixed-point iteration did not converge within {iterations} iterations \
         (last change {last_delta:e})"
    )]
    NoConvergence { iterations: usize, last_delta: f64 },

    #[error("problem `{problem}` has no exact solution; error statistics require one")]
    MissingExact { problem: String },

    #[error("{n} trial(s) cannot produce a standard deviation; at least 2 are required")]
    TooFewTrials { n: usize },

    #[error("no resolution levels were requested")]
    NoLevels,

    #[error("trial {trial} failed: {source}")]
    TrialFailed { trial: usize, source: Box<Error> },

    #[error("unknown problem `{name}`; available: {available}")]
    UnknownProblem { name: String, available: String },

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Eval(#[from] EvalError),
}
