use std::sync::Arc;

use super::factor::field_error;
use super::Result;
use crate::fields::{
    lie_derivative_metric, FieldError, MatrixField, MetricField, OperatorField, ValueFn,
    VectorField,
};
use crate::smallmat::{char_poly, Matrix};
use crate::tol;

/// Residual of `d chi(t) . L - t d chi(t) = chi(t) d tr L` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct CharPolyResidual {
    pub covector: Vec<f64>,
    /// `chi(t)` at the point.
    pub chi: f64,
    /// `|covector| / (1 + |chi(t)|)`.
    pub value: f64,
}

/// Checks the differential identity of the characteristic polynomial
/// `chi(t) = det(t Id - L)`. `d chi(t)` is taken by central differences of
/// the coefficients; `d tr L` comes from the field's own partials.
pub fn charpoly_differential_residual(
    l: &MatrixField<f64>,
    t: f64,
    p: &[f64],
) -> Result<CharPolyResidual> {
    let n = l.dim();
    let jet = l.jet(p)?;
    let chi_at = |q: &[f64]| -> Result<f64> { Ok(char_poly(&l.value(q)?)?.eval(t)) };
    let chi = chi_at(p)?;
    let mut dchi = Vec::with_capacity(n);
    let mut q = p.to_vec();
    for k in 0..n {
        let h = tol::fd_step(p[k]);
        q[k] = p[k] + h;
        let (up, hi) = (chi_at(&q)?, q[k]);
        q[k] = p[k] - h;
        let dn = chi_at(&q)?;
        dchi.push((up - dn) / (hi - q[k]));
        q[k] = p[k];
    }
    let covector: Vec<f64> = (0..n)
        .map(|k| {
            let dl: f64 = (0..n).map(|s| dchi[s] * jet.value[(s, k)]).sum();
            dl - t * dchi[k] - chi * jet.partials[k].trace()
        })
        .collect();
    let norm = covector.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok(CharPolyResidual {
        covector,
        chi,
        value: norm / (1.0 + chi.abs()),
    })
}

/// The tensor `g^-1 L_v g - tr(g^-1 L_v g)/(n+1) Id` and a shifted copy.
#[derive(Debug, Clone)]
pub struct ProjectiveDeformation {
    pub field: OperatorField<f64>,
    /// `1 + |field|` at the base point.
    pub shift: f64,
    /// `field + shift Id`.
    pub shifted: OperatorField<f64>,
}

fn deformation_at(v: &VectorField, g: &MetricField<f64>, p: &[f64]) -> Result<Matrix<f64>> {
    let gv = g.at(p)?;
    let m = gv.solve(&lie_derivative_metric(v, g, p)?)?;
    let n = m.rows();
    Ok(m.shift(m.trace() / (n + 1) as f64))
}

/// Deformation tensor of a vector field; it solves the compatibility
/// equation exactly when `v` is a projective vector field of `g`.
///
/// Values are exact, derivatives come from central differences.
pub fn projective_deformation(
    v: &VectorField,
    g: &MetricField<f64>,
) -> Result<ProjectiveDeformation> {
    if v.dim() != g.dim() {
        return Err(FieldError::Dimension(format!(
            "vector field of dimension {} on a {}-chart",
            v.dim(),
            g.dim()
        ))
        .into());
    }
    let base = deformation_at(v, g, g.chart().base())?;
    let shift = 1.0 + base.frobenius_norm();
    let make = |c: f64| {
        let (v, g2) = (v.clone(), g.clone());
        let f: ValueFn<f64> = Arc::new(move |p: &[f64]| {
            deformation_at(&v, &g2, p)
                .map(|m| m.shift(-c))
                .map_err(field_error)
        });
        OperatorField(MatrixField::from_value_fn(g.chart().clone(), g.dim(), f))
    };
    Ok(ProjectiveDeformation {
        field: make(0.0),
        shift,
        shifted: make(shift),
    })
}
