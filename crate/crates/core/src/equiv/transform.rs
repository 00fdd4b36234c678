use std::sync::Arc;

use num_complex::Complex;

use super::factor::{field_error, spectrum_of};
use super::lmap::compute_l;
use super::{EquivError, Result};
use crate::fields::{MatrixField, MetricField, OperatorField, ValueFn};
use crate::smallmat::{default_cluster_tol, matrix_function, Matrix, ScalarFunction};

fn is_constant_one(f: &ScalarFunction<f64>) -> bool {
    matches!(f, ScalarFunction::Polynomial(c) if c.as_slice() == [Complex::new(1.0, 0.0)])
}

fn f_of_l(
    g: &MetricField<f64>,
    gbar: &MetricField<f64>,
    f: &ScalarFunction<f64>,
    p: &[f64],
) -> Result<Matrix<f64>> {
    let l = compute_l(g, gbar, p)?.l;
    for z in spectrum_of(&l)? {
        if f.in_domain(z) && f.eval(z).norm() <= 1e-12 * (1.0 + z.norm()) {
            return Err(EquivError::ZeroInImage {
                point: p.to_vec(),
                re: z.re,
                im: z.im,
            });
        }
    }
    Ok(matrix_function(&l, f, default_cluster_tol(&l))?)
}

/// `(g f(L), gbar f(L))`, checked at `points` for `0` in `f(Spectrum L)`.
///
/// For `f = 1` the inputs are returned unchanged.
pub fn topalov_sinjukov(
    g: &MetricField<f64>,
    gbar: &MetricField<f64>,
    f: &ScalarFunction<f64>,
    points: &[Vec<f64>],
) -> Result<(MetricField<f64>, MetricField<f64>)> {
    if is_constant_one(f) {
        return Ok((g.clone(), gbar.clone()));
    }
    for p in std::iter::once(&g.chart().base().to_vec()).chain(points) {
        f_of_l(g, gbar, f, p)?;
    }
    let make = |second: bool| {
        let (g2, gbar2, f2) = (g.clone(), gbar.clone(), f.clone());
        let v: ValueFn<f64> = Arc::new(move |p: &[f64]| {
            let go = || -> Result<Matrix<f64>> {
                let fl = f_of_l(&g2, &gbar2, &f2, p)?;
                let m = if second {
                    gbar2.value(p)?
                } else {
                    g2.value(p)?
                };
                Ok((&m * &fl).symmetrized())
            };
            go().map_err(field_error)
        });
        MetricField(MatrixField::from_value_fn(g.chart().clone(), g.dim(), v))
    };
    Ok((make(false), make(true)))
}

/// `f(L)` as a field, evaluated pointwise by the functional calculus.
pub fn function_of_l(l: &OperatorField<f64>, f: &ScalarFunction<f64>) -> OperatorField<f64> {
    let (l2, f2) = (l.clone(), f.clone());
    let v: ValueFn<f64> = Arc::new(move |p: &[f64]| {
        let lp = l2.value(p)?;
        Ok(matrix_function(&lp, &f2, default_cluster_tol(&lp))?)
    });
    OperatorField(MatrixField::from_value_fn(l.chart().clone(), l.dim(), v))
}
