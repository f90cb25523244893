//! Generalized Sinkhorn-Knopp (RAS / iterative proportional fitting).
//!
//! Each sweep rescales every row to its target sum, then every column. The
//! scaled matrix is always kept in factored form `r_i * a_ij * c_j`, so the
//! accumulated [`ScalingPair`] reproduces the returned matrix exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{apply_scaling, residuals, Grid, Method, ScaledResult, ScalingPair, ValidatedInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceMetric {
    /// Frobenius norm of the difference between consecutive sweeps.
    SuccessiveFrobenius,
    /// [`crate::model::Residuals::scaled_max`] of the current iterate.
    MaxMarginalResidual,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub convergence_metric: ConvergenceMetric,
    pub track_factors: bool,
}

impl Default for IterationConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            max_iterations: 1000,
            convergence_metric: ConvergenceMetric::SuccessiveFrobenius,
            track_factors: false,
        }
    }
}

impl IterationConfig {
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_max_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    pub fn with_metric(mut self, metric: ConvergenceMetric) -> Self {
        self.convergence_metric = metric;
        self
    }

    pub fn tracking_factors(mut self) -> Self {
        self.track_factors = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaugeKind {
    UnitRowFactor,
    UnitColFactor,
}

/// Pins one factor to 1, removing the `(λ r, c / λ)` freedom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GaugeFix {
    pub kind: GaugeKind,
    pub index: usize,
}

impl GaugeFix {
    pub fn row(index: usize) -> Self {
        Self {
            kind: GaugeKind::UnitRowFactor,
            index,
        }
    }

    pub fn col(index: usize) -> Self {
        Self {
            kind: GaugeKind::UnitColFactor,
            index,
        }
    }

    /// `c_m = 1`.
    pub fn last_col(cols: usize) -> Self {
        Self::col(cols - 1)
    }

    pub fn check(&self, rows: usize, cols: usize) -> Result<()> {
        let bound = match self.kind {
            GaugeKind::UnitRowFactor => rows,
            GaugeKind::UnitColFactor => cols,
        };
        if self.index >= bound {
            return Err(Error::InvalidConfig(format!(
                "gauge index {} out of range for {rows}x{cols}",
                self.index
            )));
        }
        Ok(())
    }
}

fn frobenius_gap(prev: &[f64], current: &[f64]) -> f64 {
    prev.iter()
        .zip(current)
        .map(|(p, c)| (c - p) * (c - p))
        .sum::<f64>()
        .sqrt()
}

/// Runs the generalized Sinkhorn-Knopp iteration.
///
/// A run counts as converged only when the chosen metric is below the
/// tolerance *and* the scaled marginal residual is too, so
/// `converged` always implies `max_marginal_residual <= tolerance`.
/// Exhausting `max_iterations` yields [`Error::NotConverged`] carrying the
/// last iterate.
pub fn sinkhorn_iterate(instance: &ValidatedInstance, config: &IterationConfig) -> Result<ScaledResult> {
    config.validate()?;
    let a = instance.matrix();
    let marginals = instance.marginals();
    let (n, m) = a.shape();
    let mut factors = ScalingPair::identity(n, m);
    let mut current = a.as_grid().clone();
    let mut residual = f64::INFINITY;

    for sweep in 1..=config.max_iterations {
        let prev = current.clone();

        let row_sums = current.row_sums();
        let mut r = factors.row_factors().to_vec();
        for ((ri, target), sum) in r.iter_mut().zip(marginals.row_targets()).zip(&row_sums) {
            *ri *= target / sum;
        }
        factors = ScalingPair::new(r, factors.col_factors().to_vec())?;
        current = apply_scaling(a, &factors)?;

        let col_sums = current.col_sums();
        let mut c = factors.col_factors().to_vec();
        for ((cj, target), sum) in c.iter_mut().zip(marginals.col_targets()).zip(&col_sums) {
            *cj *= target / sum;
        }
        factors = ScalingPair::new(factors.row_factors().to_vec(), c)?;
        current = apply_scaling(a, &factors)?;

        residual = residuals(&current, marginals)?.scaled_max(marginals);
        let metric = match config.convergence_metric {
            ConvergenceMetric::SuccessiveFrobenius => frobenius_gap(prev.as_slice(), current.as_slice()),
            ConvergenceMetric::MaxMarginalResidual => residual,
        };
        if metric < config.tolerance && residual <= config.tolerance {
            return Ok(finish(current, factors, sweep, residual, true, config));
        }
    }

    Err(Error::NotConverged {
        partial: Box::new(finish(current, factors, config.max_iterations, residual, false, config)),
    })
}

fn finish(
    matrix: Grid,
    factors: ScalingPair,
    iterations: usize,
    residual: f64,
    converged: bool,
    config: &IterationConfig,
) -> ScaledResult {
    ScaledResult {
        matrix,
        factors: config.track_factors.then_some(factors),
        iterations,
        max_marginal_residual: residual,
        converged,
        method: Method::Iterative,
    }
}

/// Rescales the tracked factors of `result` so the gauge-fixed factor is 1.
pub fn extract_factors(instance: &ValidatedInstance, result: &ScaledResult, gauge: GaugeFix) -> Result<ScalingPair> {
    let (n, m) = instance.shape();
    gauge.check(n, m)?;
    let factors = result.factors.as_ref().ok_or(Error::FactorsUnavailable)?;
    if factors.row_factors().len() != n || factors.col_factors().len() != m {
        return Err(Error::ShapeMismatch {
            context: "tracked factors",
            expected: format!("{n}x{m}"),
            found: format!("{}x{}", factors.row_factors().len(), factors.col_factors().len()),
        });
    }
    let lambda = match gauge.kind {
        GaugeKind::UnitRowFactor => 1.0 / factors.row_factors()[gauge.index],
        GaugeKind::UnitColFactor => factors.col_factors()[gauge.index],
    };
    let mut fixed = gauge_transform(factors, lambda)?;
    // λ r_k or c_k / λ is within an ulp of 1; make it exact.
    match gauge.kind {
        GaugeKind::UnitRowFactor => fixed.row_factors[gauge.index] = 1.0,
        GaugeKind::UnitColFactor => fixed.col_factors[gauge.index] = 1.0,
    }
    Ok(fixed)
}

/// `(λ r, c / λ)`.
pub fn gauge_transform(factors: &ScalingPair, lambda: f64) -> Result<ScalingPair> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::NonPositiveLambda(lambda));
    }
    ScalingPair::new(
        factors.row_factors().iter().map(|r| r * lambda).collect(),
        factors.col_factors().iter().map(|c| c / lambda).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{max_ulps, validate_instance, Marginals, PositiveMatrix};

    fn instance(rows: &[[f64; 2]], r: &[f64], c: &[f64]) -> ValidatedInstance {
        validate_instance(
            PositiveMatrix::from_rows(rows).unwrap(),
            Marginals::new(r.to_vec(), c.to_vec()).unwrap(),
            1e-12,
        )
        .unwrap()
    }

    #[test]
    fn rank_one_gives_uniform_limit() {
        let inst = instance(&[[2.0, 4.0], [3.0, 6.0]], &[1.0, 1.0], &[1.0, 1.0]);
        let out = sinkhorn_iterate(&inst, &IterationConfig::default()).unwrap();
        assert!(out.converged);
        for &s in out.matrix.as_slice() {
            assert!((s - 0.5).abs() < 1e-9, "{s}");
        }
    }

    #[test]
    fn nathanson_2x2() {
        let inst = instance(&[[1.0, 2.0], [3.0, 4.0]], &[1.0, 1.0], &[1.0, 1.0]);
        let out = sinkhorn_iterate(&inst, &IterationConfig::default()).unwrap();
        let d = 2.0 + 6f64.sqrt();
        let expect = [2.0 / d, 6f64.sqrt() / d, 6f64.sqrt() / d, 2.0 / d];
        for (s, e) in out.matrix.as_slice().iter().zip(expect) {
            assert!((s - e).abs() < 1e-8, "{s} vs {e}");
        }
    }

    #[test]
    fn arbitrary_sums_example_converges() {
        let inst = instance(
            &[[1.0, 2.0], [400.0, 9999.0 / 17.0]],
            &[1.0 / 3.0, 16.0 / 17.0],
            &[0.5, 79.0 / 102.0],
        );
        let out = sinkhorn_iterate(&inst, &IterationConfig::default()).unwrap();
        let res = residuals(&out.matrix, inst.marginals()).unwrap();
        assert!(res.max_abs() <= 1e-9, "{res:?}");
    }

    #[test]
    fn exhausted_budget_returns_partial_state() {
        let inst = instance(&[[1.0, 2.0], [3.0, 4.0]], &[1.0, 1.0], &[1.0, 1.0]);
        let cfg = IterationConfig::default().with_max_iterations(1).with_tolerance(1e-15);
        match sinkhorn_iterate(&inst, &cfg) {
            Err(Error::NotConverged { partial }) => {
                assert_eq!(partial.iterations, 1);
                assert!(!partial.converged);
                assert!(partial.max_marginal_residual > 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn config_validation() {
        let inst = instance(&[[1.0, 2.0], [3.0, 4.0]], &[1.0, 1.0], &[1.0, 1.0]);
        let bad = IterationConfig::default().with_tolerance(0.0);
        assert!(matches!(sinkhorn_iterate(&inst, &bad), Err(Error::InvalidConfig(_))));
        let bad = IterationConfig::default().with_max_iterations(0);
        assert!(matches!(sinkhorn_iterate(&inst, &bad), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn tracked_factors_reproduce_matrix() {
        let inst = instance(&[[1.0, 2.0], [3.0, 4.0]], &[0.7, 1.3], &[1.1, 0.9]);
        let out = sinkhorn_iterate(&inst, &IterationConfig::default().tracking_factors()).unwrap();
        let f = out.factors.as_ref().unwrap();
        assert_eq!(apply_scaling(inst.matrix(), f).unwrap(), out.matrix);
    }

    #[test]
    fn already_balanced_needs_no_scaling() {
        let inst = instance(&[[0.5, 0.5], [0.5, 0.5]], &[1.0, 1.0], &[1.0, 1.0]);
        let out = sinkhorn_iterate(&inst, &IterationConfig::default().tracking_factors()).unwrap();
        for gauge in [GaugeFix::row(0), GaugeFix::row(1), GaugeFix::col(0), GaugeFix::col(1)] {
            let f = extract_factors(&inst, &out, gauge).unwrap();
            assert_eq!(f, ScalingPair::identity(2, 2));
        }
    }

    #[test]
    fn gauge_fixed_r2_matches_reference_value() {
        let inst = instance(&[[1.0, 2.0], [3.0, 4.0]], &[1.0, 1.0], &[1.0, 1.0]);
        let cfg = IterationConfig::default().tracking_factors().with_tolerance(1e-12);
        let out = sinkhorn_iterate(&inst, &cfg).unwrap();
        let f = extract_factors(&inst, &out, GaugeFix::col(1)).unwrap();
        assert_eq!(f.col_factors()[1], 1.0);
        assert!((f.row_factors()[1] - 0.112372).abs() < 1e-6, "{:?}", f);

        let g = extract_factors(&inst, &out, GaugeFix::row(0)).unwrap();
        let lambda = g.row_factors()[1] / f.row_factors()[1];
        for (x, y) in g.row_factors().iter().zip(f.row_factors()) {
            assert!((x / y - lambda).abs() < 1e-12);
        }
        let sf = apply_scaling(inst.matrix(), &f).unwrap();
        let sg = apply_scaling(inst.matrix(), &g).unwrap();
        assert!(max_ulps(&sf, &sg) <= 8);
    }

    #[test]
    fn extract_without_tracking_fails() {
        let inst = instance(&[[1.0, 2.0], [3.0, 4.0]], &[1.0, 1.0], &[1.0, 1.0]);
        let out = sinkhorn_iterate(&inst, &IterationConfig::default()).unwrap();
        assert!(matches!(
            extract_factors(&inst, &out, GaugeFix::col(1)),
            Err(Error::FactorsUnavailable)
        ));
        let out = sinkhorn_iterate(&inst, &IterationConfig::default().tracking_factors()).unwrap();
        assert!(extract_factors(&inst, &out, GaugeFix::col(2)).is_err());
    }

    #[test]
    fn gauge_transform_examples() {
        let f = ScalingPair::identity(2, 2);
        let g = gauge_transform(&f, 2.0).unwrap();
        assert_eq!(g.row_factors(), &[2.0, 2.0]);
        assert_eq!(g.col_factors(), &[0.5, 0.5]);

        let f = ScalingPair::new(vec![0.3, 1.7, 2.9], vec![0.11, 5.0]).unwrap();
        for k in [-8, -1, 1, 3, 10] {
            let lambda = 2f64.powi(k);
            let back = gauge_transform(&gauge_transform(&f, lambda).unwrap(), 1.0 / lambda).unwrap();
            assert_eq!(back, f);
        }
        for bad in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(gauge_transform(&f, bad), Err(Error::NonPositiveLambda(_))));
        }
    }
}
