//! Exact formulas for the shapes with a known closed-form limit.
//!
//! * `1 x n`: the limit is the column-target row `[C_1 .. C_n]`, whatever `A`.
//! * `n x 1`: the transpose of the above.
//! * nonsingular `2 x 2`: a quadratic in the gauge-fixed factor `r_2`
//!   (with `c_2 = 1`) whose minus-square-root branch is the positive one.
//! * singular `2 x 2`: the rank-one limit `s_ij = R_i C_j / sum(R)`, which
//!   depends on the marginals only.
//!
//! The nonsingular entries all share the root term
//! `(P - sqrt(Δ)) / (2 det)` with `P = α(C_2 + R_2) + β(C_1 - R_2)`; the
//! other three entries differ from it by marginal sums only. The root is
//! evaluated in the cancellation-free form `2 α C_2 R_2 / (P + sqrt(Δ))`
//! whenever `P > 0`, which stays accurate as `det -> 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    transpose_instance, Grid, Marginals, Method, ScaledResult, ScalingPair, ValidatedInstance, DEFAULT_CONSISTENCY_TOL,
};

/// Route to the singular formula when `|det| <= threshold * α`.
pub const DEFAULT_SINGULARITY_THRESHOLD: f64 = 1e-12;

/// Below `|det| < COMPENSATION_CUTOFF * α` the determinant is evaluated with
/// error-free products.
const COMPENSATION_CUTOFF: f64 = 1e-6;

fn shape_check(solver: &'static str, instance: &ValidatedInstance, want: (Option<usize>, Option<usize>)) -> Result<()> {
    let (rows, cols) = instance.shape();
    let ok = want.0.is_none_or(|r| r == rows) && want.1.is_none_or(|c| c == cols);
    if ok {
        Ok(())
    } else {
        Err(Error::WrongShape { solver, rows, cols })
    }
}

pub fn closed_form_1xn(instance: &ValidatedInstance) -> Result<ScaledResult> {
    shape_check("closed_form_1xn", instance, (Some(1), None))?;
    let a = instance.matrix();
    let marginals = instance.marginals();
    let c = marginals.col_targets();
    let matrix = Grid::new(1, c.len(), c.to_vec())?;
    // r_1 = 1, c_j = C_j / a_1j
    let col_factors = c.iter().zip(a.row(0)).map(|(cj, aj)| cj / aj).collect();
    let factors = ScalingPair::new(vec![1.0], col_factors)?;
    ScaledResult::direct(matrix, Some(factors), marginals, Method::ClosedForm1xN)
}

pub fn closed_form_nx1(instance: &ValidatedInstance) -> Result<ScaledResult> {
    shape_check("closed_form_nx1", instance, (None, Some(1)))?;
    let row = closed_form_1xn(&transpose_instance(instance))?;
    Ok(row.transpose(Method::TransposedDelegate))
}

/// Coefficients of the `2 x 2` quadratic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticData {
    /// `a_11 a_22`
    pub alpha: f64,
    /// `a_12 a_21`
    pub beta: f64,
    /// `α - β`
    pub det: f64,
    /// `P² - 4 α C_2 R_2 det`
    pub delta: f64,
    /// `P = α(C_2 + R_2) + β(C_1 - R_2)`
    pub linear: f64,
    pub a22: f64,
}

fn two_product(x: f64, y: f64) -> (f64, f64) {
    let hi = x * y;
    (hi, x.mul_add(y, -hi))
}

pub fn quadratic_data(instance: &ValidatedInstance) -> Result<QuadraticData> {
    shape_check("quadratic_data", instance, (Some(2), Some(2)))?;
    let a = instance.matrix();
    let (a11, a12, a21, a22) = (a.get(0, 0), a.get(0, 1), a.get(1, 0), a.get(1, 1));
    let m = instance.marginals();
    let (c1, c2, r2) = (m.col_targets()[0], m.col_targets()[1], m.row_targets()[1]);

    let alpha = a11 * a22;
    let beta = a12 * a21;
    let mut det = alpha - beta;
    if det.abs() < COMPENSATION_CUTOFF * alpha {
        let (ah, al) = two_product(a11, a22);
        let (bh, bl) = two_product(a12, a21);
        det = (ah - bh) + (al - bl);
    }
    let linear = alpha * (c2 + r2) + beta * (c1 - r2);
    let delta = linear * linear - 4.0 * alpha * c2 * r2 * det;
    if delta.is_nan() || delta < 0.0 {
        return Err(Error::NegativeDiscriminant(delta));
    }
    Ok(QuadraticData {
        alpha,
        beta,
        det,
        delta,
        linear,
        a22,
    })
}

/// Both roots `(minus, plus)` of the `r_2` quadratic under the gauge `c_2 = 1`.
pub fn r2_branches(data: &QuadraticData, marginals: &Marginals) -> (f64, f64) {
    let sqrt_delta = data.delta.sqrt();
    let plus = (data.linear + sqrt_delta) / (2.0 * data.a22 * data.det);
    (shared_root(data, marginals) / data.a22, plus)
}

/// `(P - sqrt(Δ)) / (2 det)`, i.e. `a_22 r_2`.
fn shared_root(data: &QuadraticData, marginals: &Marginals) -> f64 {
    let sqrt_delta = data.delta.sqrt();
    if data.linear > 0.0 {
        let (c2, r2) = (marginals.col_targets()[1], marginals.row_targets()[1]);
        2.0 * data.alpha * c2 * r2 / (data.linear + sqrt_delta)
    } else {
        (data.linear - sqrt_delta) / (2.0 * data.det)
    }
}

/// The minus-square-root branch for `r_2` (gauge `c_2 = 1`); the plus branch
/// is extraneous.
pub fn solve_r2(data: &QuadraticData, marginals: &Marginals) -> Result<f64> {
    let (minus, plus) = r2_branches(data, marginals);
    if minus > 0.0 && minus.is_finite() {
        Ok(minus)
    } else {
        Err(Error::NonPositiveRoot { minus, plus })
    }
}

/// `(r_1, r_2, c_1)` under `c_2 = 1`, by back-substitution through the
/// lex Gröbner basis: `r_2` from the quadratic, then
/// `c_1 = (R_2 - a_22 r_2) / (a_21 r_2)` and
/// `r_1 = (a_21 r_2 / a_11) (C_1 / (R_2 - a_22 r_2) - 1)`.
pub fn gauge_fixed_unknowns(instance: &ValidatedInstance) -> Result<(f64, f64, f64)> {
    let data = quadratic_data(instance)?;
    let m = instance.marginals();
    let r2 = solve_r2(&data, m)?;
    let a = instance.matrix();
    let (a11, a21, a22) = (a.get(0, 0), a.get(1, 0), a.get(1, 1));
    let (c1_target, r2_target) = (m.col_targets()[0], m.row_targets()[1]);
    let rest = r2_target - a22 * r2;
    let c1 = rest / (a21 * r2);
    let r1 = a21 * r2 / a11 * (c1_target / rest - 1.0);
    Ok((r1, r2, c1))
}

pub fn closed_form_2x2(instance: &ValidatedInstance) -> Result<ScaledResult> {
    closed_form_2x2_with_threshold(instance, DEFAULT_SINGULARITY_THRESHOLD)
}

pub fn closed_form_2x2_with_threshold(
    instance: &ValidatedInstance,
    singularity_threshold: f64,
) -> Result<ScaledResult> {
    let data = quadratic_data(instance)?;
    if data.det.abs() <= singularity_threshold * data.alpha {
        return Err(Error::NearSingular {
            det: data.det,
            alpha: data.alpha,
        });
    }
    let m = instance.marginals();
    let (minus, plus) = r2_branches(&data, m);
    let r2_t = m.row_targets()[1];
    let (c1_t, c2_t) = (m.col_targets()[0], m.col_targets()[1]);

    let s22 = shared_root(&data, m);
    let s12 = c2_t - s22;
    let s21 = r2_t - s22;
    let s11 = (c1_t - r2_t) + s22;
    let entries = vec![s11, s12, s21, s22];
    if entries.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(Error::NonPositiveRoot { minus, plus });
    }

    let a = instance.matrix();
    let r2 = s22 / data.a22;
    let r1 = s12 / a.get(0, 1);
    let c1 = s21 / (a.get(1, 0) * r2);
    let factors = ScalingPair::new(vec![r1, r2], vec![c1, 1.0])?;
    ScaledResult::direct(Grid::new(2, 2, entries)?, Some(factors), m, Method::ClosedForm2x2)
}

/// The rank-one limit for singular `2 x 2` matrices. Only the marginals enter.
pub fn closed_form_2x2_singular(marginals: &Marginals) -> Result<ScaledResult> {
    let (rows, cols) = (marginals.row_targets().len(), marginals.col_targets().len());
    if (rows, cols) != (2, 2) {
        return Err(Error::WrongShape {
            solver: "closed_form_2x2_singular",
            rows,
            cols,
        });
    }
    if !marginals.is_consistent(DEFAULT_CONSISTENCY_TOL) {
        return Err(Error::InconsistentMarginals {
            defect: marginals.consistency_defect(),
        });
    }
    let r2 = marginals.row_targets()[1];
    let (c1, c2) = (marginals.col_targets()[0], marginals.col_targets()[1]);
    let total = c1 + c2;
    let lower = [c1 * r2 / total, c2 * r2 / total];
    let entries = vec![c1 - lower[0], c2 - lower[1], lower[0], lower[1]];
    ScaledResult::direct(
        Grid::new(2, 2, entries)?,
        None,
        marginals,
        Method::ClosedForm2x2Singular,
    )
}

/// Picks the closed form matching the instance shape.
pub fn closed_form_dispatch(instance: &ValidatedInstance, singularity_threshold: f64) -> Result<ScaledResult> {
    match instance.shape() {
        (1, _) => closed_form_1xn(instance),
        (_, 1) => closed_form_nx1(instance),
        (2, 2) => {
            let data = quadratic_data(instance)?;
            if data.det.abs() <= singularity_threshold * data.alpha {
                closed_form_2x2_singular(instance.marginals())
            } else {
                closed_form_2x2_with_threshold(instance, singularity_threshold)
            }
        }
        (rows, cols) => Err(Error::UnsupportedShape { rows, cols }),
    }
}

/// True when [`closed_form_dispatch`] has a formula for this shape.
pub fn supports_shape(rows: usize, cols: usize) -> bool {
    rows == 1 || cols == 1 || (rows, cols) == (2, 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{residuals, validate_instance, PositiveMatrix};

    fn inst<R: AsRef<[f64]>>(rows: &[R], r: &[f64], c: &[f64]) -> ValidatedInstance {
        validate_instance(
            PositiveMatrix::from_rows(rows).unwrap(),
            Marginals::new(r.to_vec(), c.to_vec()).unwrap(),
            1e-12,
        )
        .unwrap()
    }

    fn unit_1234() -> ValidatedInstance {
        inst(&[[1.0, 2.0], [3.0, 4.0]], &[1.0, 1.0], &[1.0, 1.0])
    }

    #[test]
    fn row_vector_limit_is_column_targets() {
        let out = closed_form_1xn(&inst(&[[5.0, 7.0, 11.0]], &[6.0], &[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(out.matrix.as_slice(), &[1.0, 2.0, 3.0]);
        assert_eq!(out.method, Method::ClosedForm1xN);
        let out = closed_form_1xn(&inst(&[[1.0]], &[4.0], &[4.0])).unwrap();
        assert_eq!(out.matrix.as_slice(), &[4.0]);
        assert!(matches!(closed_form_1xn(&unit_1234()), Err(Error::WrongShape { .. })));
    }

    #[test]
    fn column_vector_delegates_through_transpose() {
        let col = inst(&[[5.0], [7.0], [11.0]], &[1.0, 2.0, 3.0], &[6.0]);
        let out = closed_form_nx1(&col).unwrap();
        assert_eq!(out.matrix.shape(), (3, 1));
        assert_eq!(out.matrix.as_slice(), &[1.0, 2.0, 3.0]);
        assert_eq!(out.method, Method::TransposedDelegate);
        let out = closed_form_nx1(&inst(&[[1.0]], &[4.0], &[4.0])).unwrap();
        assert_eq!(out.matrix.as_slice(), &[4.0]);
        assert!(matches!(closed_form_nx1(&unit_1234()), Err(Error::WrongShape { .. })));
    }

    #[test]
    fn quadratic_data_reference() {
        let d = quadratic_data(&unit_1234()).unwrap();
        assert_eq!((d.alpha, d.beta, d.det), (4.0, 6.0, -2.0));
        // (4*2 + 6*0)^2 - 4*4*1*1*(-2)
        assert_eq!(d.delta, 96.0);
        let ones = inst(&[[1.0, 1.0], [1.0, 1.0]], &[1.0, 1.0], &[1.0, 1.0]);
        let d = quadratic_data(&ones).unwrap();
        assert_eq!((d.alpha, d.beta, d.det), (1.0, 1.0, 0.0));
    }

    #[test]
    fn r2_branches_reference() {
        let i = unit_1234();
        let d = quadratic_data(&i).unwrap();
        let (minus, plus) = r2_branches(&d, i.marginals());
        assert!((minus - 0.112372).abs() < 1e-5, "{minus}");
        assert!((plus + 1.11237).abs() < 1e-4, "{plus}");
        assert_eq!(solve_r2(&d, i.marginals()).unwrap(), minus);
    }

    #[test]
    fn nathanson_reference() {
        let out = closed_form_2x2(&unit_1234()).unwrap();
        let d = 2.0 + 6f64.sqrt();
        let expect = [2.0 / d, 6f64.sqrt() / d, 6f64.sqrt() / d, 2.0 / d];
        for (s, e) in out.matrix.as_slice().iter().zip(expect) {
            assert!((s - e).abs() <= 1e-12, "{s} vs {e}");
        }
        // s_22 = a_22 r_2 c_2 with c_2 = 1
        assert!((out.matrix.get(1, 1) - 4.0 * 0.112372).abs() < 1e-5);
    }

    #[test]
    fn closed_form_factors_reproduce_matrix() {
        let i = inst(
            &[[1.0, 2.0], [400.0, 9999.0 / 17.0]],
            &[1.0 / 3.0, 16.0 / 17.0],
            &[0.5, 79.0 / 102.0],
        );
        let out = closed_form_2x2(&i).unwrap();
        let f = out.factors.as_ref().unwrap();
        let again = crate::model::apply_scaling(i.matrix(), f).unwrap();
        assert!(again.max_abs_diff(&out.matrix) < 1e-14);
        let res = residuals(&out.matrix, i.marginals()).unwrap();
        assert!(res.max_abs() < 1e-14);
    }

    #[test]
    fn back_substitution_matches_entries() {
        let i = unit_1234();
        let (r1, r2, c1) = gauge_fixed_unknowns(&i).unwrap();
        let out = closed_form_2x2(&i).unwrap();
        let a = i.matrix();
        assert!((r1 * a.get(0, 0) * c1 - out.matrix.get(0, 0)).abs() < 1e-12);
        assert!((r1 * a.get(0, 1) - out.matrix.get(0, 1)).abs() < 1e-12);
        assert!((r2 * a.get(1, 0) * c1 - out.matrix.get(1, 0)).abs() < 1e-12);
        assert!((r2 * a.get(1, 1) - out.matrix.get(1, 1)).abs() < 1e-12);
    }

    #[test]
    fn singular_formula_examples() {
        let m = Marginals::new(vec![30.0, 30.0], vec![10.0, 50.0]).unwrap();
        let out = closed_form_2x2_singular(&m).unwrap();
        assert_eq!(out.matrix.to_rows(), vec![vec![5.0, 25.0], vec![5.0, 25.0]]);
        let m = Marginals::new(vec![1.0, 1.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(closed_form_2x2_singular(&m).unwrap().matrix.as_slice(), &[0.5; 4]);
        let bad = Marginals::new(vec![1.0, 1.0], vec![1.0, 2.0]).unwrap();
        assert!(matches!(
            closed_form_2x2_singular(&bad),
            Err(Error::InconsistentMarginals { .. })
        ));
        let wrong = Marginals::new(vec![2.0], vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            closed_form_2x2_singular(&wrong),
            Err(Error::WrongShape { .. })
        ));
    }

    #[test]
    fn exactly_singular_matrix_is_refused_by_nonsingular_formula() {
        let i = inst(&[[2.0, 4.0], [3.0, 6.0]], &[1.0, 1.0], &[1.0, 1.0]);
        assert!(matches!(closed_form_2x2(&i), Err(Error::NearSingular { .. })));
    }

    #[test]
    fn dispatch_routes() {
        let sq = inst(
            &[[1.0, 2.0, 3.0], [1.0, 1.0, 1.0], [2.0, 1.0, 5.0]],
            &[1.0; 3],
            &[1.0; 3],
        );
        assert!(matches!(
            closed_form_dispatch(&sq, DEFAULT_SINGULARITY_THRESHOLD),
            Err(Error::UnsupportedShape { rows: 3, cols: 3 })
        ));
        let sing = inst(&[[2.0, 4.0], [3.0, 6.0]], &[1.0, 1.0], &[1.0, 1.0]);
        let out = closed_form_dispatch(&sing, DEFAULT_SINGULARITY_THRESHOLD).unwrap();
        assert_eq!(out.method, Method::ClosedForm2x2Singular);
        let out = closed_form_dispatch(&unit_1234(), DEFAULT_SINGULARITY_THRESHOLD).unwrap();
        assert_eq!(out.method, Method::ClosedForm2x2);
        let row = inst(&[[1.0, 2.0]], &[3.0], &[1.0, 2.0]);
        assert_eq!(closed_form_dispatch(&row, 0.0).unwrap().method, Method::ClosedForm1xN);
        let col = row_to_col(&row);
        assert_eq!(
            closed_form_dispatch(&col, 0.0).unwrap().method,
            Method::TransposedDelegate
        );
        assert!(supports_shape(1, 7) && supports_shape(7, 1) && supports_shape(2, 2));
        assert!(!supports_shape(2, 3));
    }

    fn row_to_col(i: &ValidatedInstance) -> ValidatedInstance {
        transpose_instance(i)
    }

    #[test]
    fn continuity_towards_singular() {
        let m = Marginals::new(vec![1.0, 2.0], vec![1.5, 1.5]).unwrap();
        let singular = closed_form_2x2_singular(&m).unwrap();
        let mut last = f64::INFINITY;
        for eps in [1e-2, 1e-4, 1e-6] {
            let i = inst(&[[1.0, 2.0 + eps], [3.0, 6.0]], m.row_targets(), m.col_targets());
            let gap = closed_form_2x2(&i).unwrap().matrix.max_abs_diff(&singular.matrix);
            assert!(gap < last, "gap {gap} at eps {eps}");
            last = gap;
        }
        assert!(last <= 1e-4);
    }
}
