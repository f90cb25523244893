//! Domain types shared by every solver: the positive input matrix, target
//! marginals, diagonal scaling factors and the scaled result, together with
//! the identities that tie them together (entrywise scaling, marginal
//! residuals and transposition).
//!
//! All types are immutable once built. A [`ValidatedInstance`] can only be
//! obtained through [`validate_instance`], so solvers never see a matrix whose
//! shape disagrees with its marginals or whose marginals violate the
//! consistency condition `sum(R) = sum(C)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used when no explicit consistency tolerance is given.
pub const DEFAULT_CONSISTENCY_TOL: f64 = 1e-9;

fn check_positive(what: &'static str, values: &[f64]) -> Result<()> {
    for (index, &value) in values.iter().enumerate() {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::NonPositiveInput { what, index, value });
        }
    }
    Ok(())
}

/// Dense row-major grid of reals. Used for scaled matrices and arbitrary
/// candidates handed to [`residuals`]; entries are not required to be positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Grid {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                context: "grid entries",
                expected: format!("{}", rows * cols),
                found: format!("{}", data.len()),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let (n, m, data) = flatten_rows(rows)?;
        Self::new(n, m, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    pub fn transpose(&self) -> Grid {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j));
            }
        }
        Grid {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.data.chunks(self.cols).map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        for row in self.data.chunks(self.cols) {
            for (s, v) in sums.iter_mut().zip(row) {
                *s += v;
            }
        }
        sums
    }

    /// Largest entrywise absolute difference. Panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &Grid) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn flatten_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<(usize, usize, Vec<f64>)> {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.as_ref().len());
    let mut data = Vec::with_capacity(n * m);
    for row in rows {
        let row = row.as_ref();
        if row.len() != m {
            return Err(Error::ShapeMismatch {
                context: "matrix rows",
                expected: format!("{m} columns"),
                found: format!("{} columns", row.len()),
            });
        }
        data.extend_from_slice(row);
    }
    Ok((n, m, data))
}

/// The input matrix `A`: at least 1x1, every entry finite and strictly positive.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositiveMatrix {
    grid: Grid,
}

impl PositiveMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::ShapeMismatch {
                context: "matrix dimensions",
                expected: "at least 1x1".into(),
                found: format!("{rows}x{cols}"),
            });
        }
        let grid = Grid::new(rows, cols, entries)?;
        check_positive("matrix", &grid.data)?;
        Ok(Self { grid })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let (n, m, data) = flatten_rows(rows)?;
        Self::new(n, m, data)
    }

    pub fn rows(&self) -> usize {
        self.grid.rows
    }

    pub fn cols(&self) -> usize {
        self.grid.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.grid.rows, self.grid.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.grid.get(i, j)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.grid.row(i)
    }

    pub fn entries(&self) -> &[f64] {
        &self.grid.data
    }

    pub fn as_grid(&self) -> &Grid {
        &self.grid
    }

    pub fn transpose(&self) -> PositiveMatrix {
        PositiveMatrix {
            grid: self.grid.transpose(),
        }
    }

    /// `mu * A`; fails if `mu` is not finite and positive or the product
    /// leaves the positive normal range.
    pub fn scaled(&self, mu: f64) -> Result<PositiveMatrix> {
        let data = self.grid.data.iter().map(|a| a * mu).collect();
        PositiveMatrix::new(self.rows(), self.cols(), data)
    }
}

/// Target row sums `R` and column sums `C`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Marginals {
    row_targets: Vec<f64>,
    col_targets: Vec<f64>,
}

impl Marginals {
    pub fn new(row_targets: Vec<f64>, col_targets: Vec<f64>) -> Result<Self> {
        if row_targets.is_empty() || col_targets.is_empty() {
            return Err(Error::ShapeMismatch {
                context: "marginals",
                expected: "nonempty target vectors".into(),
                found: format!("{} rows, {} cols", row_targets.len(), col_targets.len()),
            });
        }
        check_positive("row_targets", &row_targets)?;
        check_positive("col_targets", &col_targets)?;
        Ok(Self {
            row_targets,
            col_targets,
        })
    }

    pub fn row_targets(&self) -> &[f64] {
        &self.row_targets
    }

    pub fn col_targets(&self) -> &[f64] {
        &self.col_targets
    }

    pub fn row_total(&self) -> f64 {
        self.row_targets.iter().sum()
    }

    pub fn col_total(&self) -> f64 {
        self.col_targets.iter().sum()
    }

    /// `|sum(R) - sum(C)|`.
    pub fn consistency_defect(&self) -> f64 {
        (self.row_total() - self.col_total()).abs()
    }

    /// Defect at most `tol * max(sum(R), sum(C))`.
    pub fn is_consistent(&self, tol: f64) -> bool {
        self.consistency_defect() <= tol * self.row_total().max(self.col_total())
    }

    pub fn transpose(&self) -> Marginals {
        Marginals {
            row_targets: self.col_targets.clone(),
            col_targets: self.row_targets.clone(),
        }
    }
}

/// Diagonal factors `(r, c)` with `S = diag(r) A diag(c)`.
///
/// `(r, c)` and `(λ r, c / λ)` describe the same scaling for every `λ > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingPair {
    pub(crate) row_factors: Vec<f64>,
    pub(crate) col_factors: Vec<f64>,
}

impl ScalingPair {
    pub fn new(row_factors: Vec<f64>, col_factors: Vec<f64>) -> Result<Self> {
        check_positive("row_factors", &row_factors)?;
        check_positive("col_factors", &col_factors)?;
        Ok(Self {
            row_factors,
            col_factors,
        })
    }

    pub fn identity(rows: usize, cols: usize) -> Self {
        Self {
            row_factors: vec![1.0; rows],
            col_factors: vec![1.0; cols],
        }
    }

    pub fn row_factors(&self) -> &[f64] {
        &self.row_factors
    }

    pub fn col_factors(&self) -> &[f64] {
        &self.col_factors
    }

    pub fn transpose(&self) -> ScalingPair {
        ScalingPair {
            row_factors: self.col_factors.clone(),
            col_factors: self.row_factors.clone(),
        }
    }
}

/// Which route produced a [`ScaledResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Iterative,
    #[serde(rename = "closed_form_1xn")]
    ClosedForm1xN,
    #[serde(rename = "closed_form_2x2")]
    ClosedForm2x2,
    #[serde(rename = "closed_form_2x2_singular")]
    ClosedForm2x2Singular,
    TransposedDelegate,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Iterative => "iterative",
            Method::ClosedForm1xN => "closed_form_1xn",
            Method::ClosedForm2x2 => "closed_form_2x2",
            Method::ClosedForm2x2Singular => "closed_form_2x2_singular",
            Method::TransposedDelegate => "transposed_delegate",
        }
    }
}

/// The limit matrix `S` with diagnostics.
///
/// `max_marginal_residual` is `max |residual_k| / max(1, target_k)` over all
/// row and column marginals (see [`Residuals::scaled_max`]).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaledResult {
    pub matrix: Grid,
    pub factors: Option<ScalingPair>,
    pub iterations: usize,
    pub max_marginal_residual: f64,
    pub converged: bool,
    pub method: Method,
}

impl ScaledResult {
    /// Builds a direct (non-iterative) result, computing its residual.
    pub(crate) fn direct(
        matrix: Grid,
        factors: Option<ScalingPair>,
        marginals: &Marginals,
        method: Method,
    ) -> Result<Self> {
        let max_marginal_residual = residuals(&matrix, marginals)?.scaled_max(marginals);
        Ok(Self {
            matrix,
            factors,
            iterations: 0,
            max_marginal_residual,
            converged: true,
            method,
        })
    }

    pub fn transpose(&self, method: Method) -> ScaledResult {
        ScaledResult {
            matrix: self.matrix.transpose(),
            factors: self.factors.as_ref().map(ScalingPair::transpose),
            iterations: self.iterations,
            max_marginal_residual: self.max_marginal_residual,
            converged: self.converged,
            method,
        }
    }
}

/// A matrix with marginals of matching shape that satisfy the consistency
/// condition. The only input the solvers accept.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedInstance {
    matrix: PositiveMatrix,
    marginals: Marginals,
}

impl ValidatedInstance {
    pub fn matrix(&self) -> &PositiveMatrix {
        &self.matrix
    }

    pub fn marginals(&self) -> &Marginals {
        &self.marginals
    }

    pub fn shape(&self) -> (usize, usize) {
        self.matrix.shape()
    }

    /// Same marginals with `A` replaced by `mu * A`.
    pub fn with_scaled_matrix(&self, mu: f64) -> Result<ValidatedInstance> {
        Ok(ValidatedInstance {
            matrix: self.matrix.scaled(mu)?,
            marginals: self.marginals.clone(),
        })
    }
}

pub fn validate_instance(
    matrix: PositiveMatrix,
    marginals: Marginals,
    consistency_tol: f64,
) -> Result<ValidatedInstance> {
    if consistency_tol.is_nan() || consistency_tol < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "consistency tolerance must be nonnegative, got {consistency_tol}"
        )));
    }
    check_marginal_shape(&matrix, &marginals)?;
    if !marginals.is_consistent(consistency_tol) {
        return Err(Error::InconsistentMarginals {
            defect: marginals.consistency_defect(),
        });
    }
    Ok(ValidatedInstance { matrix, marginals })
}

fn check_marginal_shape(matrix: &PositiveMatrix, marginals: &Marginals) -> Result<()> {
    if marginals.row_targets.len() != matrix.rows() {
        return Err(Error::ShapeMismatch {
            context: "row targets",
            expected: matrix.rows().to_string(),
            found: marginals.row_targets.len().to_string(),
        });
    }
    if marginals.col_targets.len() != matrix.cols() {
        return Err(Error::ShapeMismatch {
            context: "column targets",
            expected: matrix.cols().to_string(),
            found: marginals.col_targets.len().to_string(),
        });
    }
    Ok(())
}

/// `S[i][j] = r_i * a_ij * c_j`, evaluated as `(r_i * a_ij) * c_j`.
pub fn apply_scaling(matrix: &PositiveMatrix, factors: &ScalingPair) -> Result<Grid> {
    if factors.row_factors.len() != matrix.rows() || factors.col_factors.len() != matrix.cols() {
        return Err(Error::ShapeMismatch {
            context: "scaling factors",
            expected: format!("{}x{}", matrix.rows(), matrix.cols()),
            found: format!("{}x{}", factors.row_factors.len(), factors.col_factors.len()),
        });
    }
    let mut data = Vec::with_capacity(matrix.entries().len());
    for (i, &r) in factors.row_factors.iter().enumerate() {
        for (&a, &c) in matrix.row(i).iter().zip(&factors.col_factors) {
            data.push(r * a * c);
        }
    }
    Grid::new(matrix.rows(), matrix.cols(), data)
}

/// Signed marginal defects of a candidate matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Residuals {
    pub rows: Vec<f64>,
    pub cols: Vec<f64>,
}

impl Residuals {
    pub fn max_abs(&self) -> f64 {
        self.rows.iter().chain(&self.cols).map(|r| r.abs()).fold(0.0, f64::max)
    }

    /// `max |res_k| / max(1, target_k)`; absolute for targets up to one,
    /// relative above.
    pub fn scaled_max(&self, marginals: &Marginals) -> f64 {
        let rows = self.rows.iter().zip(&marginals.row_targets);
        let cols = self.cols.iter().zip(&marginals.col_targets);
        rows.chain(cols)
            .map(|(res, t)| res.abs() / t.max(1.0))
            .fold(0.0, f64::max)
    }

    pub fn transpose(&self) -> Residuals {
        Residuals {
            rows: self.cols.clone(),
            cols: self.rows.clone(),
        }
    }
}

/// `rows[i] = sum_j s_ij - R_i`, `cols[j] = sum_i s_ij - C_j`.
pub fn residuals(candidate: &Grid, marginals: &Marginals) -> Result<Residuals> {
    if candidate.rows != marginals.row_targets.len() || candidate.cols != marginals.col_targets.len() {
        return Err(Error::ShapeMismatch {
            context: "residuals",
            expected: format!("{}x{}", marginals.row_targets.len(), marginals.col_targets.len()),
            found: format!("{}x{}", candidate.rows, candidate.cols),
        });
    }
    let rows = candidate
        .row_sums()
        .into_iter()
        .zip(&marginals.row_targets)
        .map(|(s, t)| s - t)
        .collect();
    let cols = candidate
        .col_sums()
        .into_iter()
        .zip(&marginals.col_targets)
        .map(|(s, t)| s - t)
        .collect();
    Ok(Residuals { rows, cols })
}

/// The instance for `Aᵀ` with row targets `C` and column targets `R`.
pub fn transpose_instance(instance: &ValidatedInstance) -> ValidatedInstance {
    ValidatedInstance {
        matrix: instance.matrix.transpose(),
        marginals: instance.marginals.transpose(),
    }
}

/// Number of representable doubles between `a` and `b` (same-sign finite
/// values only; returns `u64::MAX` otherwise).
pub fn ulps_between(a: f64, b: f64) -> u64 {
    if a == b {
        return 0;
    }
    if !a.is_finite() || !b.is_finite() || a.is_sign_negative() != b.is_sign_negative() {
        return u64::MAX;
    }
    a.abs().to_bits().abs_diff(b.abs().to_bits())
}

/// Largest entrywise [`ulps_between`] of two equally shaped grids.
pub fn max_ulps(a: &Grid, b: &Grid) -> u64 {
    assert_eq!((a.rows, a.cols), (b.rows, b.cols));
    a.data
        .iter()
        .zip(&b.data)
        .map(|(&x, &y)| ulps_between(x, y))
        .max()
        .unwrap_or(0)
}
