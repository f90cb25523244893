//! The scaling ideal of an exact-rational instance and what can be read off
//! its lex Gröbner basis.
//!
//! For an `n x m` instance the unknowns are `r1..rn, c1..cm` with one of them
//! pinned to 1 by the gauge. The generators are the `n + m` marginal
//! equations `sum_j a_ij r_i c_j - R_i` and `sum_i a_ij r_i c_j - C_j`.

use std::collections::HashMap;

use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::groebner::{buchberger_with_limits, GroebnerBasis, GroebnerLimits};
use super::poly::{var_order, Monomial, Polynomial, VarOrder};
use super::rational::{binomial, is_positive, random_small_rational, to_f64};
use super::Rational;
use crate::error::{Error, Result};
use crate::iterative::{GaugeFix, GaugeKind};
use crate::model::{Marginals, PositiveMatrix};

/// Exact data for one instance. Consistency is not required: inconsistent
/// data is how the unit ideal is produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalInstance {
    rows: usize,
    cols: usize,
    entries: Vec<Rational>,
    row_targets: Vec<Rational>,
    col_targets: Vec<Rational>,
    gauge: GaugeFix,
}

impl RationalInstance {
    pub fn new(
        rows: usize,
        cols: usize,
        entries: Vec<Rational>,
        row_targets: Vec<Rational>,
        col_targets: Vec<Rational>,
        gauge: GaugeFix,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                context: "rational matrix",
                expected: format!("{rows}x{cols} nonempty"),
                found: format!("{} entries", entries.len()),
            });
        }
        if row_targets.len() != rows || col_targets.len() != cols {
            return Err(Error::ShapeMismatch {
                context: "rational marginals",
                expected: format!("{rows} + {cols}"),
                found: format!("{} + {}", row_targets.len(), col_targets.len()),
            });
        }
        for (what, values) in [
            ("matrix", &entries),
            ("row_targets", &row_targets),
            ("col_targets", &col_targets),
        ] {
            if let Some(index) = values.iter().position(|q| !is_positive(q)) {
                return Err(Error::NonPositiveInput {
                    what,
                    index,
                    value: to_f64(&values[index]),
                });
            }
        }
        gauge.check(rows, cols)?;
        Ok(Self {
            rows,
            cols,
            entries,
            row_targets,
            col_targets,
            gauge,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn gauge(&self) -> GaugeFix {
        self.gauge
    }

    pub fn entry(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i * self.cols + j]
    }

    pub fn row_targets(&self) -> &[Rational] {
        &self.row_targets
    }

    pub fn col_targets(&self) -> &[Rational] {
        &self.col_targets
    }

    pub fn is_consistent(&self) -> bool {
        let r: Rational = self.row_targets.iter().sum();
        let c: Rational = self.col_targets.iter().sum();
        r == c
    }

    pub fn with_gauge(&self, gauge: GaugeFix) -> Result<Self> {
        gauge.check(self.rows, self.cols)?;
        Ok(Self { gauge, ..self.clone() })
    }

    /// Default unknown order `r1 > .. > rn > c1 > .. > cm`, gauge-fixed one omitted.
    pub fn unknowns(&self) -> Vec<String> {
        let rows = (0..self.rows)
            .filter(|&i| self.gauge != GaugeFix::row(i))
            .map(|i| format!("r{}", i + 1));
        let cols = (0..self.cols)
            .filter(|&j| self.gauge != GaugeFix::col(j))
            .map(|j| format!("c{}", j + 1));
        rows.chain(cols).collect()
    }

    /// Nearest-double counterpart.
    pub fn to_float(&self) -> Result<(PositiveMatrix, Marginals)> {
        let conv = |v: &[Rational]| v.iter().map(to_f64).collect::<Vec<_>>();
        Ok((
            PositiveMatrix::new(self.rows, self.cols, conv(&self.entries))?,
            Marginals::new(conv(&self.row_targets), conv(&self.col_targets))?,
        ))
    }
}

/// The marginal equations over the default unknown order.
pub fn build_scaling_ideal(instance: &RationalInstance) -> Vec<Polynomial> {
    build_scaling_ideal_ordered(instance, &instance.unknowns()).expect("default order is valid")
}

/// The marginal equations over a caller-chosen lex order of the unknowns.
pub fn build_scaling_ideal_ordered<S: AsRef<str>>(instance: &RationalInstance, order: &[S]) -> Result<Vec<Polynomial>> {
    let mut expected = instance.unknowns();
    let mut given: Vec<String> = order.iter().map(|s| s.as_ref().to_string()).collect();
    let vars: VarOrder = var_order(&given);
    expected.sort();
    given.sort();
    if expected != given {
        return Err(Error::InvalidVariable(format!(
            "order {:?} is not a permutation of {:?}",
            vars, expected
        )));
    }
    let position = |name: String| vars.iter().position(|v| *v == name);
    let row_var: Vec<Option<usize>> = (0..instance.rows).map(|i| position(format!("r{}", i + 1))).collect();
    let col_var: Vec<Option<usize>> = (0..instance.cols).map(|j| position(format!("c{}", j + 1))).collect();
    let nvars = vars.len();

    // monomial of r_i c_j with pinned factors dropped
    let cell = |i: usize, j: usize| {
        let mut e = vec![0u32; nvars];
        if let Some(k) = row_var[i] {
            e[k] += 1;
        }
        if let Some(k) = col_var[j] {
            e[k] += 1;
        }
        Monomial::from_exponents(e)
    };

    let mut polys = Vec::with_capacity(instance.rows + instance.cols);
    for i in 0..instance.rows {
        let terms = (0..instance.cols).map(|j| (cell(i, j), instance.entry(i, j).clone()));
        let mut p = Polynomial::from_terms(&vars, terms);
        p.add_term(Monomial::one(nvars), -instance.row_targets[i].clone());
        polys.push(p);
    }
    for j in 0..instance.cols {
        let terms = (0..instance.rows).map(|i| (cell(i, j), instance.entry(i, j).clone()));
        let mut p = Polynomial::from_terms(&vars, terms);
        p.add_term(Monomial::one(nvars), -instance.col_targets[j].clone());
        polys.push(p);
    }
    Ok(polys)
}

/// Degree of the univariate basis element in `variable`, which must be the
/// last (smallest) variable of the lex order.
pub fn elimination_degree(basis: &GroebnerBasis, variable: &str) -> Result<usize> {
    if basis.is_unit() {
        return Err(Error::UnitIdeal);
    }
    let vars = basis.vars();
    let index = vars
        .iter()
        .position(|v| v == variable)
        .ok_or_else(|| Error::InvalidVariable(variable.to_string()))?;
    if index + 1 != vars.len() {
        return Err(Error::InvalidVariable(format!(
            "{variable} is not the last variable of {vars:?}"
        )));
    }
    basis
        .polynomials()
        .iter()
        .find(|p| !p.is_zero() && p.is_univariate_in(index))
        .map(|p| p.degree_in(index) as usize)
        .ok_or_else(|| Error::NotZeroDimensional(variable.to_string()))
}

/// `binom(n + m - 2, n - 1)`.
pub fn degree_bound(rows: usize, cols: usize) -> u64 {
    binomial((rows + cols - 2) as u64, (rows - 1) as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarietyReport {
    /// `|p(x)|` for each polynomial, in input order.
    pub values: Vec<f64>,
    pub max_abs_value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Evaluates every polynomial at a floating-point assignment.
pub fn verify_solution_on_variety(
    polys: &[Polynomial],
    assignment: &HashMap<String, f64>,
    tol: f64,
) -> Result<VarietyReport> {
    let mut values = Vec::with_capacity(polys.len());
    for p in polys {
        let point = p
            .vars()
            .iter()
            .map(|v| {
                assignment
                    .get(v)
                    .copied()
                    .ok_or_else(|| Error::MissingAssignment(v.clone()))
            })
            .collect::<Result<Vec<f64>>>()?;
        values.push(p.evaluate_f64(&point).abs());
    }
    let max_abs_value = values.iter().copied().fold(0.0, f64::max);
    Ok(VarietyReport {
        passed: max_abs_value <= tol,
        values,
        max_abs_value,
        tolerance: tol,
    })
}

/// Outcome of one exact elimination run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeObservation {
    pub rows: usize,
    pub cols: usize,
    pub variable: String,
    pub degree: usize,
    pub bound: u64,
    pub basis_size: usize,
}

/// Builds the ideal, computes its basis and reads off the degree of the last unknown.
pub fn observe_degree(instance: &RationalInstance, limits: &GroebnerLimits) -> Result<DegreeObservation> {
    let gens = build_scaling_ideal(instance);
    let basis = buchberger_with_limits(&gens, limits)?;
    let variable = basis.vars().last().cloned().ok_or(Error::UnitIdeal)?;
    let degree = elimination_degree(&basis, &variable)?;
    let (rows, cols) = instance.shape();
    Ok(DegreeObservation {
        rows,
        cols,
        variable,
        degree,
        bound: degree_bound(rows, cols),
        basis_size: basis.len(),
    })
}

/// Seeded source of random exact instances; numerators and denominators are
/// uniform on `1..=100`.
#[derive(Debug, Clone)]
pub struct RationalSampler {
    rng: ChaCha8Rng,
}

impl RationalSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rational(&mut self) -> Rational {
        random_small_rational(&mut self.rng)
    }

    fn draw(&mut self, k: usize) -> Vec<Rational> {
        (0..k).map(|_| self.rational()).collect()
    }

    /// Column targets rescaled so that `sum(C) = sum(R)` exactly.
    pub fn consistent(&mut self, rows: usize, cols: usize, gauge: GaugeFix) -> Result<RationalInstance> {
        let entries = self.draw(rows * cols);
        let row_targets = self.draw(rows);
        let mut col_targets = self.draw(cols);
        let r: Rational = row_targets.iter().sum();
        let c: Rational = col_targets.iter().sum();
        let k = r / c;
        for t in &mut col_targets {
            *t *= &k;
        }
        RationalInstance::new(rows, cols, entries, row_targets, col_targets, gauge)
    }

    /// A consistent draw with the first column target doubled.
    pub fn inconsistent(&mut self, rows: usize, cols: usize, gauge: GaugeFix) -> Result<RationalInstance> {
        let mut inst = self.consistent(rows, cols, gauge)?;
        inst.col_targets[0] *= Rational::from_integer(2.into());
        debug_assert!(!inst.is_consistent());
        Ok(inst)
    }

    /// Rank-one matrix `a_ij = u_i v_j` with consistent marginals.
    pub fn singular(&mut self, rows: usize, cols: usize, gauge: GaugeFix) -> Result<RationalInstance> {
        let u = self.draw(rows);
        let v = self.draw(cols);
        let base = self.consistent(rows, cols, gauge)?;
        let entries = (0..rows * cols).map(|k| &u[k / cols] * &v[k % cols]).collect();
        RationalInstance::new(rows, cols, entries, base.row_targets, base.col_targets, gauge)
    }
}

/// Gauge used when none is given: the last column factor.
pub fn default_gauge(_rows: usize, cols: usize) -> GaugeFix {
    GaugeFix {
        kind: GaugeKind::UnitColFactor,
        index: cols - 1,
    }
}

/// Exact rational point with every generator vanishing, if `values` satisfy them.
pub fn vanishes_at(polys: &[Polynomial], values: &[Rational]) -> bool {
    polys.iter().all(|p| p.evaluate(values).is_zero())
}

/// Convenience: `Rational` from a small fraction.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}
