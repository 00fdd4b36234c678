use std::sync::Arc;

use num_complex::Complex;

use super::factor::spectrum_of;
use super::lmap::{compatibility_residual, l_field};
use super::split::AdaptedBlocks;
use super::{admissible_factorization, split, Result, SplitResult};
use crate::fields::{Chart, MatrixField, MetricField, OperatorField, ValueFn};
use crate::smallmat::{Matrix, Spectrum};
use crate::tol;

/// One factor of the full decomposition.
#[derive(Debug, Clone)]
pub struct Factor {
    pub dim: usize,
    /// Eigenvalues of the factor at the base point.
    pub eigenvalues: Vec<Complex<f64>>,
    /// Split with this factor's eigenvalues as the first group; `None` when
    /// the pair has a single factor.
    pub split: Option<SplitResult>,
    /// Coordinates spanning this factor's distribution at the base point,
    /// when the projector there is a coordinate projector.
    pub coords: Option<Vec<usize>>,
    g: MetricField<f64>,
    gbar: MetricField<f64>,
}

/// Groups the base-point spectrum into real clusters and conjugate pairs of
/// clusters; each group is returned as indices into the canonical order.
fn base_groups(values: &[Complex<f64>], tol: f64) -> Vec<Vec<usize>> {
    let clusters = Spectrum::from_values(values.to_vec()).clusters(tol);
    let mut used = vec![false; clusters.len()];
    let mut groups = Vec::new();
    for i in 0..clusters.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let mut members = clusters[i].members.clone();
        if clusters[i].center.im.abs() > tol {
            let target = clusters[i].center.conj();
            if let Some(j) = (0..clusters.len())
                .find(|&j| !used[j] && (clusters[j].center - target).norm() <= tol)
            {
                used[j] = true;
                members.extend(&clusters[j].members);
            }
        }
        members.sort_unstable();
        groups.push(members);
    }
    groups
}

fn coordinate_projector(p: &Matrix<f64>) -> Option<Vec<usize>> {
    let n = p.rows();
    let mut coords = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let want = if i == j { p[(i, i)].round() } else { 0.0 };
            if (p[(i, j)] - want).abs() > 1e-12 || !(want == 0.0 || want == 1.0) {
                return None;
            }
        }
        if p[(i, i)].round() == 1.0 {
            coords.push(i);
        }
    }
    Some(coords)
}

/// Eigenvalue groups of `L` at `p` as used by [`full_decompose`]: index sets
/// into the canonical eigenvalue order, one per real cluster or conjugate
/// pair of clusters.
pub fn spectral_groups(l: &OperatorField<f64>, p: &[f64]) -> Result<Vec<Vec<usize>>> {
    let lp = l.value(p)?;
    Ok(base_groups(
        &spectrum_of(&lp)?,
        tol::eps_gap(lp.frobenius_norm()),
    ))
}

/// Splits `(g, gbar)` into one factor per eigenvalue cluster (a real
/// eigenvalue with its multiplicity, or a conjugate pair), peeling each
/// cluster off against all the others. `points` are tracked for every split.
pub fn full_decompose(
    g: &MetricField<f64>,
    gbar: &MetricField<f64>,
    points: &[Vec<f64>],
) -> Result<Vec<Factor>> {
    let l = l_field(g, gbar)?;
    let base = g.chart().base().to_vec();
    let lb = l.value(&base)?;
    let values = spectrum_of(&lb)?;
    let groups = base_groups(&values, tol::eps_gap(lb.frobenius_norm()));
    let n = g.dim();
    if groups.len() == 1 {
        return Ok(vec![Factor {
            dim: n,
            eigenvalues: values,
            split: None,
            coords: Some((0..n).collect()),
            g: g.clone(),
            gbar: gbar.clone(),
        }]);
    }
    let mut out = Vec::with_capacity(groups.len());
    for group in groups {
        let fact = admissible_factorization(&l, &group, points)?;
        let s = split(g, gbar, &fact)?;
        let coords = coordinate_projector(&s.p1.value(&base)?);
        out.push(Factor {
            dim: group.len(),
            eigenvalues: group.iter().map(|&i| values[i]).collect(),
            split: Some(s),
            coords,
            g: g.clone(),
            gbar: gbar.clone(),
        });
    }
    Ok(out)
}

impl Factor {
    /// The factor's metrics and `L` at `p` in an orthonormal basis of its
    /// distribution: `(h_i, hbar_i, L_i)`.
    pub fn pair_at(&self, p: &[f64]) -> Result<(Matrix<f64>, Matrix<f64>, Matrix<f64>)> {
        match &self.split {
            Some(s) => {
                let AdaptedBlocks { h1, hbar1, l1, .. } = s.blocks_at(p)?;
                Ok((h1, hbar1, l1))
            }
            None => {
                let l = l_field(&self.g, &self.gbar)?.value(p)?;
                Ok((self.g.value(p)?, self.gbar.value(p)?, l))
            }
        }
    }

    /// The factor metrics on the coordinate leaf through `p`, when the
    /// factor is coordinate aligned.
    pub fn leaf_pair(&self, p: &[f64]) -> Result<Option<(MetricField<f64>, MetricField<f64>)>> {
        let Some(coords) = self.coords.clone() else {
            return Ok(None);
        };
        let (h, hbar) = match &self.split {
            Some(s) => (s.h.clone(), s.hbar.clone()),
            None => (self.g.clone(), self.gbar.clone()),
        };
        let chart = self.g.chart();
        let pick = |v: &[f64]| coords.iter().map(|&c| v[c]).collect::<Vec<_>>();
        let leaf_chart = Chart::new(pick(chart.lo()), pick(chart.hi()), pick(p))?;
        let make = |m: MetricField<f64>| {
            let (cs, frozen) = (coords.clone(), p.to_vec());
            let f: ValueFn<f64> = Arc::new(move |q: &[f64]| {
                let mut full = frozen.clone();
                for (i, &c) in cs.iter().enumerate() {
                    full[c] = q[i];
                }
                let v = m.value(&full)?;
                Ok(v.select(&cs, &cs))
            });
            MetricField(MatrixField::from_value_fn(
                leaf_chart.clone(),
                coords.len(),
                f,
            ))
        };
        Ok(Some((make(h), make(hbar))))
    }

    /// Compatibility residual of the factor pair on its leaf through `p`.
    pub fn leaf_residual(&self, p: &[f64]) -> Result<Option<f64>> {
        let Some((h, hbar)) = self.leaf_pair(p)? else {
            return Ok(None);
        };
        let l = l_field(&h, &hbar)?;
        let at = h.chart().base().to_vec();
        Ok(Some(compatibility_residual(&h, &l, &at)?.value))
    }

    /// The factor's projector, `Id` for a single factor.
    pub fn projector(&self) -> Result<OperatorField<f64>> {
        match &self.split {
            Some(s) => Ok(s.p1.clone()),
            None => Ok(OperatorField::constant(
                self.g.chart().clone(),
                &Matrix::identity(self.g.dim()),
            )?),
        }
    }
}
