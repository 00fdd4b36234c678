use std::sync::Arc;

use super::{EquivError, Result};
use crate::fields::{
    DerivativeMethod, FieldError, Jet, JetFn, MatrixField, MetricField, OperatorField, Tensor3,
    ValueFn,
};
use crate::smallmat::{Matrix, SymBilinear};
use crate::tol;

/// `L` at a point, with the sign normalisation that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct LValue {
    pub l: Matrix<f64>,
    /// `g` was replaced by `-g` before taking the root.
    pub flipped: bool,
    /// `(det gbar / det g)^(1/(n+1))` after the flip.
    pub rho: f64,
}

/// Signed real root; callers guarantee `x >= 0` or odd `k`.
fn real_root(x: f64, k: usize) -> f64 {
    x.signum() * x.abs().powf(1.0 / k as f64)
}

pub(crate) fn l_from_values(g: &Matrix<f64>, gbar: &Matrix<f64>, p: &[f64]) -> Result<LValue> {
    let n = g.rows();
    crate::fields::check_nondegenerate(g, p)?;
    crate::fields::check_nondegenerate(gbar, p)?;
    let mut ratio = gbar.det()? / g.det()?;
    let flipped = (n + 1) % 2 == 0 && ratio < 0.0;
    let a = if flipped {
        ratio = -ratio;
        g.scale(-1.0)
    } else {
        g.clone()
    };
    let rho = real_root(ratio, n + 1);
    let l = gbar.solve(&a)?.scale(rho);
    Ok(LValue { l, flipped, rho })
}

/// `L = rho gbar^-1 g` at `p`.
///
/// The root is real. For odd `n+1` it keeps the sign of the determinant
/// ratio; for even `n+1` a negative ratio is made positive by using `-g`,
/// which is reported through [`LValue::flipped`].
pub fn compute_l(g: &MetricField<f64>, gbar: &MetricField<f64>, p: &[f64]) -> Result<LValue> {
    l_from_values(&g.value(p)?, &gbar.value(p)?, p)
}

pub(crate) fn l_jet_from(gj: &Jet<f64>, bj: &Jet<f64>, p: &[f64]) -> Result<(Jet<f64>, bool)> {
    let LValue { l, flipped, rho } = l_from_values(&gj.value, &bj.value, p)?;
    let n = l.rows();
    let sign = if flipped { -1.0 } else { 1.0 };
    let a = gj.value.scale(sign);
    let binv = bj.value.inverse()?;
    let ainv = a.inverse()?;
    let binv_a = &binv * &a;
    let mut partials = Vec::with_capacity(gj.partials.len());
    for (da, db) in gj.partials.iter().zip(&bj.partials) {
        let da = da.scale(sign);
        let binv_db = &binv * db;
        let drho = rho / (n + 1) as f64 * (binv_db.trace() - (&ainv * &da).trace());
        let inner = &(&binv * &da) - &(&binv_db * &binv_a);
        partials.push(&binv_a.scale(drho) + &inner.scale(rho));
    }
    Ok((Jet { value: l, partials }, flipped))
}

/// `L` as a field, differentiated through the chain rule of its defining
/// formula. Derivatives are exact when both metrics are.
pub fn l_field(g: &MetricField<f64>, gbar: &MetricField<f64>) -> Result<OperatorField<f64>> {
    if g.dim() != gbar.dim() {
        return Err(
            FieldError::Dimension("metrics live on charts of different dimension".into()).into(),
        );
    }
    let method = match (g.derivative_method(), gbar.derivative_method()) {
        (DerivativeMethod::Exact, DerivativeMethod::Exact) => DerivativeMethod::Exact,
        _ => DerivativeMethod::FiniteDifference,
    };
    let (g2, b2) = (g.clone(), gbar.clone());
    let f: JetFn<f64> = Arc::new(move |p: &[f64]| {
        let gj = g2.jet(p)?;
        let bj = b2.jet(p)?;
        l_jet_from(&gj, &bj, p)
            .map(|(j, _)| j)
            .map_err(super::factor::field_error)
    });
    Ok(OperatorField(MatrixField::from_jet_fn(
        g.chart().clone(),
        g.dim(),
        method,
        f,
    )))
}

pub(crate) fn gbar_from(g: &Matrix<f64>, l: &Matrix<f64>, p: &[f64]) -> Result<Matrix<f64>> {
    let det = l.det()?;
    if !(det.abs() > tol::EPS_DEG) {
        return Err(EquivError::SingularL { point: p.to_vec() });
    }
    let linv = l.inverse()?;
    Ok((g * &linv).scale(1.0 / det).symmetrized())
}

/// `(1 / det L) g L^-1` at `p`: the partner metric determined by `g` and `L`.
pub fn reconstruct_gbar(
    g: &MetricField<f64>,
    l: &MatrixField<f64>,
    p: &[f64],
) -> Result<SymBilinear<f64>> {
    Ok(SymBilinear::new(gbar_from(&g.at(p)?, &l.value(p)?, p)?))
}

/// Partner of `g` whose `L` is `L(g, gbar) + c Id`. Used to move a singular
/// `L` away from 0 before splitting.
pub fn shifted_partner(
    g: &MetricField<f64>,
    gbar: &MetricField<f64>,
    c: f64,
) -> Result<MetricField<f64>> {
    let l = l_field(g, gbar)?;
    let g2 = g.clone();
    let f: ValueFn<f64> = Arc::new(move |p: &[f64]| {
        let go = || -> Result<Matrix<f64>> { gbar_from(&g2.at(p)?, &l.value(p)?.shift(-c), p) };
        go().map_err(super::factor::field_error)
    });
    let out = MetricField(MatrixField::from_value_fn(g.chart().clone(), g.dim(), f));
    out.at(g.chart().base())?;
    Ok(out)
}

/// Residual of `nabla L = (1/2)(u (x) l + adjoint)` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct CompatResidual {
    /// `|R| / (1 + |dL|)`.
    pub value: f64,
    /// `R^p_{q,r}` stored at `(p, q, r)`.
    pub array: Tensor3<f64>,
    /// Frobenius norm of all first partials of `L`.
    pub dl_norm: f64,
}

pub(crate) fn residual_from_jets(
    gj: &Jet<f64>,
    lj: &Jet<f64>,
    p: &[f64],
) -> Result<CompatResidual> {
    let n = gj.value.rows();
    let gamma = crate::fields::christoffel_from_jet(gj, p)?;
    let nabla = crate::fields::covariant_from_jets(&gamma, lj);
    let ginv = gj.value.inverse()?;
    let dl: Vec<f64> = lj.partials.iter().map(|m| m.trace()).collect();
    let raised: Vec<f64> = (0..n)
        .map(|a| (0..n).map(|s| ginv[(a, s)] * dl[s]).sum())
        .collect();
    let array = Tensor3::from_fn(n, |a, q, r| {
        let delta = if a == r { dl[q] } else { 0.0 };
        nabla[(a, q, r)] - 0.5 * (delta + raised[a] * gj.value[(r, q)])
    });
    let dl_norm = lj
        .partials
        .iter()
        .map(|m| m.frobenius_norm().powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(CompatResidual {
        value: array.norm() / (1.0 + dl_norm),
        array,
        dl_norm,
    })
}

/// Residual of the compatibility equation for `(g, L)` at `p`.
pub fn compatibility_residual(
    g: &MetricField<f64>,
    l: &MatrixField<f64>,
    p: &[f64],
) -> Result<CompatResidual> {
    if l.dim() != g.dim() || l.size() != g.size() {
        return Err(FieldError::Dimension("L and g do not match".into()).into());
    }
    residual_from_jets(&g.jet_checked(p)?, &l.jet(p)?, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Chart;

    fn chart(n: usize) -> Chart<f64> {
        Chart::cube(n, -1.0, 1.0, &vec![0.0; n]).unwrap()
    }

    fn constant(m: &[f64]) -> MetricField<f64> {
        MetricField::constant(chart(m.len()), &Matrix::from_diagonal(m)).unwrap()
    }

    #[test]
    fn conformal_case() {
        let v = compute_l(
            &constant(&[1.0, 1.0]),
            &constant(&[0.125, 0.125]),
            &[0.0, 0.0],
        )
        .unwrap();
        assert!((&v.l - &Matrix::from_diagonal(&[2.0, 2.0])).max_abs() < 1e-15);
        assert!(!v.flipped);
    }

    #[test]
    fn even_root_flip() {
        let v = compute_l(&constant(&[-1.0 / 3.0]), &constant(&[1.0 / 12.0]), &[0.0]).unwrap();
        assert!(v.flipped);
        assert!((v.l[(0, 0)] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn singular_l_is_rejected() {
        let g = constant(&[1.0, 1.0]);
        let l = MatrixField::constant(chart(2), &Matrix::from_diagonal(&[0.0, 1.0])).unwrap();
        assert!(matches!(
            reconstruct_gbar(&g, &l, &[0.0, 0.0]),
            Err(EquivError::SingularL { .. })
        ));
    }
}
