use std::sync::Arc;

use super::factor::{field_error, projectors};
use super::{EquivError, FactorizationResult, Result};
use crate::fields::{covariant_derivative_op, MatrixField, MetricField, OperatorField, ValueFn};
use crate::smallmat::{char_poly, Matrix, MonicPoly};
use crate::tol;

/// Metrics `h`, `hbar` of the splitting construction together with the
/// projectors onto the two distributions.
#[derive(Debug, Clone)]
pub struct SplitResult {
    pub g: MetricField<f64>,
    pub gbar: MetricField<f64>,
    pub h: MetricField<f64>,
    pub hbar: MetricField<f64>,
    pub p1: OperatorField<f64>,
    pub p2: OperatorField<f64>,
    pub factorization: FactorizationResult,
}

fn chi_at_zero(chi: &MonicPoly<f64>, p: &[f64]) -> Result<f64> {
    let z = chi.eval(0.0);
    if !(z.abs() > tol::EPS_DEG) {
        return Err(EquivError::ZeroChiAtZero { point: p.to_vec() });
    }
    Ok(z)
}

fn checked_symmetric(m: Matrix<f64>, p: &[f64]) -> Result<Matrix<f64>> {
    let asym = m.asymmetry();
    if asym > 1e-9 * m.frobenius_norm().max(1.0) {
        return Err(EquivError::NonSymmetricResult {
            point: p.to_vec(),
            asymmetry: asym,
        });
    }
    Ok(m.symmetrized())
}

pub(crate) fn split_values(
    g: &Matrix<f64>,
    gbar: &Matrix<f64>,
    l: &Matrix<f64>,
    chi1: &MonicPoly<f64>,
    chi2: &MonicPoly<f64>,
    p: &[f64],
) -> Result<(Matrix<f64>, Matrix<f64>)> {
    let (c1, c2) = (chi1.eval_matrix(l), chi2.eval_matrix(l));
    let (z1, z2) = (chi_at_zero(chi1, p)?, chi_at_zero(chi2, p)?);
    let sum = &c2 + &c1;
    let weighted = &c2.scale(1.0 / z2) + &c1.scale(1.0 / z1);
    let h = checked_symmetric(g * &sum.inverse()?, p)?;
    let hbar = checked_symmetric(gbar * &weighted.inverse()?, p)?;
    crate::fields::check_nondegenerate(&h, p)?;
    crate::fields::check_nondegenerate(&hbar, p)?;
    Ok((h, hbar))
}

/// Splits `(g, gbar)` along an admissible factorisation of their `L`.
///
/// `fact` must have been built from the `L` field of this pair. The
/// construction is checked at every tracked sample before the derived
/// fields are returned.
pub fn split(
    g: &MetricField<f64>,
    gbar: &MetricField<f64>,
    fact: &FactorizationResult,
) -> Result<SplitResult> {
    let l = fact.l().clone();
    for s in fact.samples() {
        let p = &s.point;
        split_values(
            &g.value(p)?,
            &gbar.value(p)?,
            &l.value(p)?,
            &s.chi1,
            &s.chi2,
            p,
        )?;
    }
    let make = |second: bool| {
        let (g2, gbar2, fact2) = (g.clone(), gbar.clone(), fact.clone());
        let f: ValueFn<f64> = Arc::new(move |p: &[f64]| {
            let go = || -> Result<Matrix<f64>> {
                let lp = fact2.l().value(p)?;
                let s = fact2.groups_at(p, &lp)?;
                let (h, hbar) =
                    split_values(&g2.value(p)?, &gbar2.value(p)?, &lp, &s.chi1, &s.chi2, p)?;
                Ok(if second { hbar } else { h })
            };
            go().map_err(field_error)
        });
        MetricField(MatrixField::from_value_fn(g.chart().clone(), g.dim(), f))
    };
    let (p1, p2) = projectors(fact);
    Ok(SplitResult {
        g: g.clone(),
        gbar: gbar.clone(),
        h: make(false),
        hbar: make(true),
        p1,
        p2,
        factorization: fact.clone(),
    })
}

/// Orthonormal basis of the column space of `p`, `rank` vectors chosen by
/// pivoted Gram-Schmidt. Returned as the columns of an `n x rank` matrix.
pub(crate) fn range_basis(p: &Matrix<f64>, rank: usize) -> Matrix<f64> {
    let n = p.rows();
    let mut cols: Vec<Vec<f64>> = (0..p.cols()).map(|j| p.column(j)).collect();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(rank);
    for _ in 0..rank {
        let norm = |v: &Vec<f64>| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let (best, _) =
            cols.iter()
                .enumerate()
                .map(|(j, c)| (j, norm(c)))
                .fold(
                    (0, -1.0),
                    |acc, (j, v)| if v > acc.1 { (j, v) } else { acc },
                );
        let v = cols[best].clone();
        let nv = norm(&v);
        let q: Vec<f64> = v.iter().map(|x| x / nv).collect();
        for c in cols.iter_mut() {
            let d: f64 = c.iter().zip(&q).map(|(a, b)| a * b).sum();
            for (ci, qi) in c.iter_mut().zip(&q) {
                *ci -= d * qi;
            }
        }
        basis.push(q);
    }
    Matrix::from_fn(n, rank, |i, j| basis[j][i])
}

/// A split pair written in an orthonormal basis adapted to `D1 + D2`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedBlocks {
    /// Columns span `D1`.
    pub basis1: Matrix<f64>,
    /// Columns span `D2`.
    pub basis2: Matrix<f64>,
    pub h1: Matrix<f64>,
    pub hbar1: Matrix<f64>,
    pub l1: Matrix<f64>,
    pub h2: Matrix<f64>,
    pub hbar2: Matrix<f64>,
    pub l2: Matrix<f64>,
}

impl AdaptedBlocks {
    /// `[basis1 basis2]`.
    pub fn basis(&self) -> Matrix<f64> {
        let n = self.basis1.rows();
        let r = self.basis1.cols();
        Matrix::from_fn(n, n, |i, j| {
            if j < r {
                self.basis1[(i, j)]
            } else {
                self.basis2[(i, j - r)]
            }
        })
    }
}

fn restrict(m: &Matrix<f64>, b: &Matrix<f64>) -> Matrix<f64> {
    &(&b.transpose() * m) * b
}

/// Summary of the split invariants over a set of points. Every field is a
/// maximum over the points except the determinant minima.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SplitReport {
    pub points: usize,
    pub h_asymmetry: f64,
    pub hbar_asymmetry: f64,
    pub h_min_abs_det: f64,
    pub hbar_min_abs_det: f64,
    pub partition_of_unity: f64,
    pub g_orthogonality: f64,
    pub gbar_orthogonality: f64,
    pub nabla_h_p1: f64,
    pub nabla_hbar_p1: f64,
    pub chi1_mismatch: f64,
    pub chi2_mismatch: f64,
    pub bracket_defect: f64,
}

impl SplitResult {
    /// Both factors in an orthonormal basis adapted to the splitting.
    pub fn blocks_at(&self, p: &[f64]) -> Result<AdaptedBlocks> {
        let r = self.factorization.r();
        let n = self.g.dim();
        let b1 = range_basis(&self.p1.value(p)?, r);
        let b2 = range_basis(&self.p2.value(p)?, n - r);
        let l = self.factorization.l().value(p)?;
        let (h, hbar) = (self.h.value(p)?, self.hbar.value(p)?);
        Ok(AdaptedBlocks {
            h1: restrict(&h, &b1).symmetrized(),
            hbar1: restrict(&hbar, &b1).symmetrized(),
            l1: restrict(&l, &b1),
            h2: restrict(&h, &b2).symmetrized(),
            hbar2: restrict(&hbar, &b2).symmetrized(),
            l2: restrict(&l, &b2),
            basis1: b1,
            basis2: b2,
        })
    }

    /// Evaluates every invariant of the construction at `points`.
    pub fn verify(&self, points: &[Vec<f64>]) -> Result<SplitReport> {
        let n = self.g.dim();
        let mut rep = SplitReport {
            points: points.len(),
            h_min_abs_det: f64::INFINITY,
            hbar_min_abs_det: f64::INFINITY,
            ..SplitReport::default()
        };
        for p in points {
            let (h, hbar) = (self.h.value(p)?, self.hbar.value(p)?);
            rep.h_asymmetry = rep
                .h_asymmetry
                .max(h.asymmetry() / h.frobenius_norm().max(1.0));
            rep.hbar_asymmetry = rep
                .hbar_asymmetry
                .max(hbar.asymmetry() / hbar.frobenius_norm().max(1.0));
            rep.h_min_abs_det = rep.h_min_abs_det.min(h.det()?.abs());
            rep.hbar_min_abs_det = rep.hbar_min_abs_det.min(hbar.det()?.abs());

            let p1j = self.p1.jet(p)?;
            let p1 = &p1j.value;
            let p2 = self.p2.value(p)?;
            let unity = &(p1 + &p2) - &Matrix::identity(n);
            rep.partition_of_unity = rep.partition_of_unity.max(unity.max_abs());
            let (g, gbar) = (self.g.value(p)?, self.gbar.value(p)?);
            rep.g_orthogonality = rep
                .g_orthogonality
                .max((&(&p1.transpose() * &g) * &p2).max_abs());
            rep.gbar_orthogonality = rep
                .gbar_orthogonality
                .max((&(&p1.transpose() * &gbar) * &p2).max_abs());

            rep.nabla_h_p1 = rep
                .nabla_h_p1
                .max(covariant_derivative_op(&self.h, &self.p1, p)?.max_abs());
            rep.nabla_hbar_p1 = rep
                .nabla_hbar_p1
                .max(covariant_derivative_op(&self.hbar, &self.p1, p)?.max_abs());

            let blocks = self.blocks_at(p)?;
            let (chi1, chi2) = self.factorization.chis_at(p)?;
            rep.chi1_mismatch = rep
                .chi1_mismatch
                .max(char_poly(&blocks.l1)?.coeff_distance(&chi1));
            rep.chi2_mismatch = rep
                .chi2_mismatch
                .max(char_poly(&blocks.l2)?.coeff_distance(&chi2));

            // [P1 e_i, P1 e_j]^a = X^s d_s Y^a - Y^s d_s X^a, projected by P2
            for i in 0..n {
                for j in i + 1..n {
                    let bracket: Vec<f64> = (0..n)
                        .map(|a| {
                            (0..n)
                                .map(|s| {
                                    p1[(s, i)] * p1j.partials[s][(a, j)]
                                        - p1[(s, j)] * p1j.partials[s][(a, i)]
                                })
                                .sum()
                        })
                        .collect();
                    let proj = p2.mat_vec(&bracket);
                    let norm = proj.iter().map(|x| x * x).sum::<f64>().sqrt();
                    rep.bracket_defect = rep.bracket_defect.max(norm);
                }
            }
        }
        Ok(rep)
    }
}
