use super::{point_f64, FieldError, Jet, MatrixField, MetricField, Result, Tensor3, VectorField};
use crate::scalar::Real;
use crate::smallmat::Matrix;

fn degenerate<T: Real>(p: &[T], g: &Matrix<T>) -> FieldError {
    FieldError::DegenerateMetric {
        point: point_f64(p),
        det: g.det().map(|d| d.to_f64_lossy()).unwrap_or(0.0),
    }
}

pub(crate) fn christoffel_from_jet<T: Real>(g: &Jet<T>, p: &[T]) -> Result<Tensor3<T>> {
    let n = g.value.rows();
    super::check_nondegenerate(&g.value, p)?;
    let ginv = g.value.inverse().map_err(|_| degenerate(p, &g.value))?;
    let dg = &g.partials;
    // lowered symbols G_{l,jk}
    let low = Tensor3::from_fn(n, |l, j, k| {
        T::lit(0.5) * (dg[j][(l, k)] + dg[k][(l, j)] - dg[l][(j, k)])
    });
    let mut gamma = Tensor3::from_fn(n, |i, j, k| {
        (0..n).fold(T::zero(), |acc, l| acc + ginv[(i, l)] * low[(l, j, k)])
    });
    for i in 0..n {
        for j in 0..n {
            for k in j + 1..n {
                let s = T::lit(0.5) * (gamma[(i, j, k)] + gamma[(i, k, j)]);
                gamma[(i, j, k)] = s;
                gamma[(i, k, j)] = s;
            }
        }
    }
    Ok(gamma)
}

/// Christoffel symbols `G^i_{jk}` (stored at `(i, j, k)`) of the Levi-Civita
/// connection of `g` at `p`.
pub fn christoffel<T: Real>(g: &MetricField<T>, p: &[T]) -> Result<Tensor3<T>> {
    christoffel_from_jet(&g.jet(p)?, p)
}

pub(crate) fn covariant_from_jets<T: Real>(gamma: &Tensor3<T>, l: &Jet<T>) -> Tensor3<T> {
    let n = l.value.rows();
    let lv = &l.value;
    Tensor3::from_fn(n, |p, q, r| {
        let mut v = l.partials[r][(p, q)];
        for s in 0..n {
            v += gamma[(p, r, s)] * lv[(s, q)] - gamma[(s, r, q)] * lv[(p, s)];
        }
        v
    })
}

/// `(nabla L)^p_{q,r}`, stored at `(p, q, r)`: the derivative of `L` along
/// the r-th coordinate direction.
pub fn covariant_derivative_op<T: Real>(
    g: &MetricField<T>,
    l: &MatrixField<T>,
    p: &[T],
) -> Result<Tensor3<T>> {
    let gamma = christoffel(g, p)?;
    Ok(covariant_from_jets(&gamma, &l.jet(p)?))
}

pub(crate) fn nijenhuis_from_jet<T: Real>(l: &Jet<T>) -> Tensor3<T> {
    let n = l.value.rows();
    let lv = &l.value;
    let d = &l.partials;
    let raw = Tensor3::from_fn(n, |i, j, k| {
        let mut v = T::zero();
        for s in 0..n {
            v += lv[(s, j)] * d[s][(i, k)] - lv[(s, k)] * d[s][(i, j)];
            v -= lv[(i, s)] * (d[j][(s, k)] - d[k][(s, j)]);
        }
        v
    });
    Tensor3::from_fn(n, |i, j, k| T::lit(0.5) * (raw[(i, j, k)] - raw[(i, k, j)]))
}

/// Nijenhuis torsion `N^i_{jk}` of a (1,1)-tensor field, antisymmetric in
/// `(j, k)` by construction.
pub fn nijenhuis<T: Real>(l: &MatrixField<T>, p: &[T]) -> Result<Tensor3<T>> {
    Ok(nijenhuis_from_jet(&l.jet(p)?))
}

/// Lie derivative of a metric along an expression vector field.
pub fn lie_derivative_metric<T: Real>(
    v: &VectorField,
    g: &MetricField<T>,
    p: &[T],
) -> Result<Matrix<T>> {
    let n = g.dim();
    if v.dim() != n {
        return Err(FieldError::Dimension(format!(
            "vector field of dimension {} on a {n}-chart",
            v.dim()
        )));
    }
    let (vv, dv) = v.jet(p)?;
    let gj = g.jet(p)?;
    let gv = &gj.value;
    let mut out = Matrix::from_fn(n, n, |i, j| {
        let mut x = T::zero();
        for s in 0..n {
            x += vv[s] * gj.partials[s][(i, j)] + gv[(s, j)] * dv[s][i] + gv[(i, s)] * dv[s][j];
        }
        x
    });
    out = out.symmetrized();
    Ok(out)
}

/// Largest entry of `d_k g_{ij} - G^s_{ki} g_{sj} - G^s_{kj} g_{is}`.
pub fn metric_compatibility<T: Real>(g: &MetricField<T>, p: &[T]) -> Result<T> {
    let j = g.jet(p)?;
    let gamma = christoffel_from_jet(&j, p)?;
    let n = g.dim();
    let mut worst = T::zero();
    for k in 0..n {
        for a in 0..n {
            for b in 0..n {
                let mut r = j.partials[k][(a, b)];
                for s in 0..n {
                    r -= gamma[(s, k, a)] * j.value[(s, b)] + gamma[(s, k, b)] * j.value[(a, s)];
                }
                worst = worst.max(r.abs());
            }
        }
    }
    Ok(worst)
}
