//! Exact-rational polynomial algebra for the scaling equations.
//!
//! Numeric data are substituted before any basis is computed, so the ideals
//! live in at most `n + m - 1` unknowns with rational coefficients.

pub mod groebner;
pub mod ideal;
pub mod poly;
pub mod rational;

/// Arbitrary-precision rational, always in lowest terms with positive denominator.
pub type Rational = num_rational::BigRational;

pub use groebner::{
    buchberger, buchberger_with_limits, normal_form, reduce, s_polynomial, GroebnerBasis, GroebnerLimits,
};
pub use ideal::{
    build_scaling_ideal, build_scaling_ideal_ordered, default_gauge, degree_bound, elimination_degree, observe_degree,
    verify_solution_on_variety, DegreeObservation, RationalInstance, RationalSampler, VarietyReport,
};
pub use poly::{var_order, Monomial, Polynomial, VarOrder};
pub use rational::{parse_decimal, to_f64};
