use thiserror::Error;

use crate::model::ScaledResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("{what}[{index}] = {value} is not a finite positive number")]
    NonPositiveInput {
        what: &'static str,
        index: usize,
        value: f64,
    },

    #[error("shape mismatch in {context}: expected {expected}, found {found}")]
    ShapeMismatch {
        context: &'static str,
        expected: String,
        found: String,
    },

    #[error("inconsistent marginals: |sum(R) - sum(C)| = {defect:e} exceeds tolerance")]
    InconsistentMarginals { defect: f64 },

    #[error(
        "iteration did not converge after {} sweeps (max marginal residual {:e})",
        .partial.iterations,
        .partial.max_marginal_residual
    )]
    NotConverged { partial: Box<ScaledResult> },

    #[error("scaled result carries no tracked factors")]
    FactorsUnavailable,

    #[error("gauge parameter must be finite and positive, got {0}")]
    NonPositiveLambda(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("wrong shape for {solver}: got {rows}x{cols}")]
    WrongShape {
        solver: &'static str,
        rows: usize,
        cols: usize,
    },

    #[error("negative discriminant {0:e}")]
    NegativeDiscriminant(f64),

    #[error("selected root is not positive (minus branch {minus}, plus branch {plus})")]
    NonPositiveRoot { minus: f64, plus: f64 },

    #[error("matrix is singular or nearly so (|det| = {det:e}, alpha = {alpha:e})")]
    NearSingular { det: f64, alpha: f64 },

    #[error("no closed form for {rows}x{cols} matrices")]
    UnsupportedShape { rows: usize, cols: usize },

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("ideal is not zero-dimensional in {0}")]
    NotZeroDimensional(String),

    #[error("ideal is the unit ideal (empty variety)")]
    UnitIdeal,

    #[error("no value assigned to unknown {0}")]
    MissingAssignment(String),

    #[error("unknown or unusable variable {0}")]
    InvalidVariable(String),

    #[error("cannot parse {0:?} as a decimal number")]
    InvalidDecimal(String),
}
