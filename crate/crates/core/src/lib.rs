//! Limits of alternating row and column scaling of positive matrices.
//!
//! Given a positive `n x m` matrix `A` and positive targets `R`, `C` with
//! `sum(R) = sum(C)`, alternately rescaling rows and columns converges to
//! `S = D1 A D2` with row sums `R` and column sums `C`. This crate computes
//! `S` three ways:
//!
//! * [`iterative::sinkhorn_iterate`] for any shape;
//! * [`closedform`] for `1 x n`, `n x 1` and `2 x 2`, where the limit is
//!   explicit (a square root appears for `2 x 2`);
//! * [`algebra`], which builds the marginal equations over `Q`, computes a lex
//!   Gröbner basis and reports the degree of the algebraic number a limit
//!   coordinate is.
//!
//! ```
//! use sinkhorn_limit::{closed_form_2x2, validate_instance, Marginals, PositiveMatrix};
//!
//! let a = PositiveMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]])?;
//! let m = Marginals::new(vec![1.0, 1.0], vec![1.0, 1.0])?;
//! let inst = validate_instance(a, m, 1e-9)?;
//! let s = closed_form_2x2(&inst)?;
//! let r2 = s.factors.as_ref().unwrap().row_factors()[1];
//! assert!((r2 - 0.112372).abs() < 1e-6);
//! # Ok::<(), sinkhorn_limit::Error>(())
//! ```

pub mod algebra;
pub mod closedform;
pub mod error;
pub mod iterative;
pub mod model;
pub mod sampling;

pub use closedform::{
    closed_form_1xn, closed_form_2x2, closed_form_2x2_singular, closed_form_2x2_with_threshold, closed_form_dispatch,
    closed_form_nx1, DEFAULT_SINGULARITY_THRESHOLD,
};
pub use error::{Error, Result};
pub use iterative::{
    extract_factors, gauge_transform, sinkhorn_iterate, ConvergenceMetric, GaugeFix, GaugeKind, IterationConfig,
};
pub use model::{
    apply_scaling, residuals, transpose_instance, validate_instance, Grid, Marginals, Method, PositiveMatrix,
    Residuals, ScaledResult, ScalingPair, ValidatedInstance, DEFAULT_CONSISTENCY_TOL,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/instances.md")]
    mod instances {}
    #[doc = include_str!("../../../book/src/iteration.md")]
    mod iteration {}
    #[doc = include_str!("../../../book/src/closed-forms.md")]
    mod closed_forms {}
    #[doc = include_str!("../../../book/src/algebra.md")]
    mod algebra {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
