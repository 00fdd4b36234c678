use std::sync::Arc;

use super::factor::{field_error, spectrum_of};
use super::lmap::{compute_l, l_field};
use super::{EquivError, Result};
use crate::fields::{
    DerivativeMethod, FieldError, Jet, JetFn, MatrixField, MetricField, OperatorField, ValueFn,
};
use crate::smallmat::{char_poly, min_distance, Matrix};
use crate::tol;

/// Two factor pairs on their own charts, with optional explicit `L_i`.
#[derive(Debug, Clone)]
pub struct GlueInput {
    pub h1: MetricField<f64>,
    pub hbar1: MetricField<f64>,
    pub l1: Option<OperatorField<f64>>,
    pub h2: MetricField<f64>,
    pub hbar2: MetricField<f64>,
    pub l2: Option<OperatorField<f64>>,
}

/// Glued metrics at one point of the product chart.
#[derive(Debug, Clone, PartialEq)]
pub struct GlueValue {
    pub g: Matrix<f64>,
    pub gbar: Matrix<f64>,
    pub l1: Matrix<f64>,
    pub l2: Matrix<f64>,
    /// The second block of `gbar` was negated to restore equivalence.
    pub parity_corrected: bool,
}

/// `+1` when `hbar` is a positive multiple of `(1/det L) h L^-1`.
fn orientation(h: &Matrix<f64>, hbar: &Matrix<f64>, l: &Matrix<f64>, p: &[f64]) -> Result<f64> {
    let expected = super::lmap::gbar_from(h, l, p)?;
    let inner: f64 = hbar
        .as_slice()
        .iter()
        .zip(expected.as_slice())
        .map(|(a, b)| a * b)
        .sum();
    Ok(if inner < 0.0 { -1.0 } else { 1.0 })
}

/// Pointwise gluing of two factors.
///
/// `eps_i` is `+1` when `hbar_i = (1/det L_i) h_i L_i^-1` and `-1` when
/// `hbar_i` is the negative of that. The second block of `gbar` is
/// multiplied by `eps1 eps2 (-1)^(r+s)`; for factors produced by splitting
/// this factor is always `+1`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn glue_values(
    h1: &Matrix<f64>,
    hbar1: &Matrix<f64>,
    l1: &Matrix<f64>,
    eps1: f64,
    h2: &Matrix<f64>,
    hbar2: &Matrix<f64>,
    l2: &Matrix<f64>,
    eps2: f64,
    p: &[f64],
) -> Result<GlueValue> {
    let (r, s) = (l1.rows(), l2.rows());
    let gap = min_distance(&spectrum_of(l1)?, &spectrum_of(l2)?);
    if !(gap >= tol::eps_gap(l1.frobenius_norm() + l2.frobenius_norm())) {
        return Err(EquivError::SpectraOverlap {
            point: p.to_vec(),
            gap,
        });
    }
    let (chi1, chi2) = (char_poly(l1)?, char_poly(l2)?);
    let (z1, z2) = (chi1.eval(0.0), chi2.eval(0.0));
    if !(z1.abs() > tol::EPS_DEG && z2.abs() > tol::EPS_DEG) {
        return Err(EquivError::ZeroChiAtZero { point: p.to_vec() });
    }
    let (c21, c12) = (chi2.eval_matrix(l1), chi1.eval_matrix(l2));
    let parity = eps1 * eps2 * if (r + s) % 2 == 0 { 1.0 } else { -1.0 };
    let blocks = [
        h1 * &c21,
        h2 * &c12,
        (hbar1 * &c21).scale(1.0 / z2),
        (hbar2 * &c12).scale(parity / z1),
    ];
    let mut sym = Vec::with_capacity(4);
    for b in blocks {
        let asym = b.asymmetry();
        if asym > 1e-9 * b.frobenius_norm().max(1.0) {
            return Err(EquivError::NonSymmetricResult {
                point: p.to_vec(),
                asymmetry: asym,
            });
        }
        sym.push(b.symmetrized());
    }
    let g = sym[0].direct_sum(&sym[1]);
    let gbar = sym[2].direct_sum(&sym[3]);
    crate::fields::check_nondegenerate(&g, p)?;
    crate::fields::check_nondegenerate(&gbar, p)?;
    Ok(GlueValue {
        g,
        gbar,
        l1: l1.clone(),
        l2: l2.clone(),
        parity_corrected: parity < 0.0,
    })
}

fn factor_l(
    h: &MetricField<f64>,
    hbar: &MetricField<f64>,
    l: &Option<OperatorField<f64>>,
    x: &[f64],
) -> Result<(Matrix<f64>, f64)> {
    match l {
        Some(field) => {
            let lv = field.value(x)?;
            Ok((
                lv.clone(),
                orientation(&h.value(x)?, &hbar.value(x)?, &lv, x)?,
            ))
        }
        None => {
            let v = compute_l(h, hbar, x)?;
            Ok((v.l, if v.flipped { -1.0 } else { 1.0 }))
        }
    }
}

impl GlueInput {
    fn check(&self) -> Result<()> {
        let ok = self.h1.dim() == self.hbar1.dim()
            && self.h2.dim() == self.hbar2.dim()
            && self.l1.as_ref().is_none_or(|l| l.dim() == self.h1.dim())
            && self.l2.as_ref().is_none_or(|l| l.dim() == self.h2.dim());
        if ok {
            Ok(())
        } else {
            Err(FieldError::Dimension("factor fields do not share their charts".into()).into())
        }
    }

    /// Dimension of the first factor.
    pub fn r(&self) -> usize {
        self.h1.dim()
    }
}

/// Glued `(g, gbar)` at a point `p = (x, y)` of the product chart.
pub fn glue(input: &GlueInput, p: &[f64]) -> Result<GlueValue> {
    input.check()?;
    let r = input.r();
    if p.len() != r + input.h2.dim() {
        return Err(FieldError::Dimension("point does not fit the product chart".into()).into());
    }
    let (x, y) = p.split_at(r);
    let (l1, e1) = factor_l(&input.h1, &input.hbar1, &input.l1, x)?;
    let (l2, e2) = factor_l(&input.h2, &input.hbar2, &input.l2, y)?;
    glue_values(
        &input.h1.value(x)?,
        &input.hbar1.value(x)?,
        &l1,
        e1,
        &input.h2.value(y)?,
        &input.hbar2.value(y)?,
        &l2,
        e2,
        p,
    )
}

/// The glued pair as fields on the product chart.
#[derive(Debug, Clone)]
pub struct GluedPair {
    pub g: MetricField<f64>,
    pub gbar: MetricField<f64>,
    /// `L1 (+) L2` in the product coordinates.
    pub l_sum: OperatorField<f64>,
    pub r: usize,
    /// Parity correction was applied at the base point.
    pub parity_corrected: bool,
}

/// Builds the glued fields after checking the construction at every point
/// in `points` (product-chart coordinates) and at the base point.
pub fn glue_fields(input: &GlueInput, points: &[Vec<f64>]) -> Result<GluedPair> {
    input.check()?;
    let chart = input.h1.chart().product(input.h2.chart());
    let base = glue(input, chart.base())?;
    for p in points {
        glue(input, p)?;
    }
    let n = chart.dim();
    let make = |second: bool| {
        let inp = input.clone();
        let f: ValueFn<f64> = Arc::new(move |p: &[f64]| {
            glue(&inp, p)
                .map(|v| if second { v.gbar } else { v.g })
                .map_err(field_error)
        });
        MetricField(MatrixField::from_value_fn(chart.clone(), n, f))
    };
    let l1 = match &input.l1 {
        Some(l) => l.clone(),
        None => l_field(&input.h1, &input.hbar1)?,
    };
    let l2 = match &input.l2 {
        Some(l) => l.clone(),
        None => l_field(&input.h2, &input.hbar2)?,
    };
    let method = match (l1.derivative_method(), l2.derivative_method()) {
        (DerivativeMethod::Exact, DerivativeMethod::Exact) => DerivativeMethod::Exact,
        _ => DerivativeMethod::FiniteDifference,
    };
    let r = input.r();
    let jf: JetFn<f64> = Arc::new(move |p: &[f64]| {
        let (x, y) = p.split_at(r);
        let (j1, j2) = (l1.jet(x)?, l2.jet(y)?);
        let (z1, z2) = (
            Matrix::zeros(j1.value.rows(), j1.value.rows()),
            Matrix::zeros(j2.value.rows(), j2.value.rows()),
        );
        let partials = j1
            .partials
            .iter()
            .map(|d| d.direct_sum(&z2))
            .chain(j2.partials.iter().map(|d| z1.direct_sum(d)))
            .collect();
        Ok(Jet {
            value: j1.value.direct_sum(&j2.value),
            partials,
        })
    });
    let l_sum = OperatorField(MatrixField::from_jet_fn(chart.clone(), n, method, jf));
    Ok(GluedPair {
        g: make(false),
        gbar: make(true),
        l_sum,
        r,
        parity_corrected: base.parity_corrected,
    })
}
