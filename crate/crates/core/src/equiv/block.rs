use super::lmap::residual_from_jets;
use super::Result;
use crate::fields::{FieldError, Jet, MatrixField, MetricField};
use crate::smallmat::Matrix;

/// Residuals of the three block conditions for a pair written in adapted
/// coordinates `(x, y)` with `x` the first `r` coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockResiduals {
    /// Compatibility of `(g1, L1)` along the `x`-leaf through the point.
    pub c1: f64,
    /// `X_k L2 - L1 X_k - Id (x) d_y tr L2` with `(X_k)^j_b = (g1^-1 d_{y^b} g1)^j_k`.
    pub c2: f64,
    /// `[g2^-1 d_{x^k} g2, L2]`.
    pub c3: f64,
}

fn block(
    m: &Matrix<f64>,
    rows: std::ops::Range<usize>,
    cols: std::ops::Range<usize>,
) -> Matrix<f64> {
    Matrix::from_fn(rows.len(), cols.len(), |i, j| {
        m[(rows.start + i, cols.start + j)]
    })
}

/// Evaluates the three block conditions at `p` from the jets of `g` and `L`.
pub fn block_condition_residuals(
    g: &MetricField<f64>,
    l: &MatrixField<f64>,
    r: usize,
    p: &[f64],
) -> Result<BlockResiduals> {
    let n = g.dim();
    if r == 0 || r >= n || l.dim() != n || l.size() != n {
        return Err(FieldError::Dimension(format!("cannot split {n} coordinates at {r}")).into());
    }
    let gj = g.jet_checked(p)?;
    let lj = l.jet(p)?;
    let (x, y) = (0..r, r..n);

    let leaf = |j: &Jet<f64>| Jet {
        value: block(&j.value, x.clone(), x.clone()),
        partials: j.partials[..r]
            .iter()
            .map(|d| block(d, x.clone(), x.clone()))
            .collect(),
    };
    let c1 = residual_from_jets(&leaf(&gj), &leaf(&lj), &p[..r])?.value;

    let g1 = block(&gj.value, x.clone(), x.clone());
    let g2 = block(&gj.value, y.clone(), y.clone());
    let (g1inv, g2inv) = (g1.inverse()?, g2.inverse()?);
    let l1 = block(&lj.value, x.clone(), x.clone());
    let l2 = block(&lj.value, y.clone(), y.clone());
    // A_b = g1^-1 d_{y^b} g1
    let a: Vec<Matrix<f64>> = (r..n)
        .map(|b| &g1inv * &block(&gj.partials[b], x.clone(), x.clone()))
        .collect();
    let dtr2: Vec<f64> = (r..n)
        .map(|b| block(&lj.partials[b], y.clone(), y.clone()).trace())
        .collect();
    let s = n - r;
    let mut c2 = 0.0_f64;
    for k in 0..r {
        let xk = Matrix::from_fn(r, s, |j, b| a[b][(j, k)]);
        let mut m = &(&xk * &l2) - &(&l1 * &xk);
        for b in 0..s {
            m[(k, b)] -= dtr2[b];
        }
        c2 = c2.max(m.frobenius_norm());
    }
    let mut c3 = 0.0_f64;
    for k in 0..r {
        let d = &g2inv * &block(&gj.partials[k], y.clone(), y.clone());
        c3 = c3.max((&(&d * &l2) - &(&l2 * &d)).frobenius_norm());
    }
    Ok(BlockResiduals { c1, c2, c3 })
}
