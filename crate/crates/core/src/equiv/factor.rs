use std::sync::Arc;

use num_complex::Complex;

use super::{EquivError, Result};
use crate::fields::{FieldError, MatrixField, OperatorField, ValueFn};
use crate::smallmat::{
    default_cluster_tol, eigen, indicator_function, is_conjugation_closed, matrix_function,
    min_distance, Matrix, MonicPoly,
};
use crate::tol;

type C = Complex<f64>;

/// Eigenvalue groups and factor polynomials at one tracked point.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackedSample {
    pub point: Vec<f64>,
    pub group1: Vec<C>,
    pub group2: Vec<C>,
    pub chi1: MonicPoly<f64>,
    pub chi2: MonicPoly<f64>,
    /// Smallest distance between the two groups.
    pub gap: f64,
}

/// A splitting `chi = chi1 chi2` of the characteristic polynomial of `L`,
/// followed continuously from the base point over a set of sample points.
#[derive(Debug, Clone)]
pub struct FactorizationResult {
    l: OperatorField<f64>,
    r: usize,
    samples: Arc<Vec<TrackedSample>>,
}

pub(crate) fn spectrum_of(l: &Matrix<f64>) -> Result<Vec<C>> {
    Ok(eigen(l, 1e-12)?.values().to_vec())
}

fn closure_tol(values: &[C]) -> f64 {
    1e-9 * values.iter().fold(1.0_f64, |m, z| m.max(1.0 + z.norm()))
}

/// Greedy nearest matching: repeatedly pair the closest unmatched
/// (reference, new) eigenvalues. Returns the label of each new value.
fn match_labels(reference: &[(C, bool)], values: &[C]) -> Vec<bool> {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(reference.len() * values.len());
    for (i, (z, _)) in reference.iter().enumerate() {
        for (j, w) in values.iter().enumerate() {
            pairs.push(((z - w).norm(), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut ref_used = vec![false; reference.len()];
    let mut labels: Vec<Option<bool>> = vec![None; values.len()];
    for (_, i, j) in pairs {
        if !ref_used[i] && labels[j].is_none() {
            ref_used[i] = true;
            labels[j] = Some(reference[i].1);
        }
    }
    labels.into_iter().map(|x| x.unwrap_or(false)).collect()
}

fn sample_from(
    point: &[f64],
    l: &Matrix<f64>,
    values: &[C],
    labels: &[bool],
) -> Result<TrackedSample> {
    let (mut group1, mut group2) = (Vec::new(), Vec::new());
    for (z, &first) in values.iter().zip(labels) {
        if first {
            group1.push(*z);
        } else {
            group2.push(*z);
        }
    }
    let ctol = closure_tol(values);
    if !is_conjugation_closed(&group1, ctol) || !is_conjugation_closed(&group2, ctol) {
        return Err(EquivError::ConjugationViolation {
            point: point.to_vec(),
        });
    }
    let gap = min_distance(&group1, &group2);
    let need = tol::eps_gap(l.frobenius_norm());
    if !(gap >= need) {
        return Err(EquivError::AdmissibilityViolation {
            point: point.to_vec(),
            gap,
            tol: need,
        });
    }
    let chi1 = MonicPoly::from_roots(&group1);
    let chi2 = MonicPoly::from_roots(&group2);
    Ok(TrackedSample {
        point: point.to_vec(),
        group1,
        group2,
        chi1,
        chi2,
        gap,
    })
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Tracks the grouping `first_group | rest` of the base-point spectrum over
/// `points`.
///
/// `first_group` indexes the base-point eigenvalues in canonical order (real
/// part, then imaginary part). Points are visited in order of distance from
/// the base point; each is matched against the nearest point already
/// visited.
pub fn admissible_factorization(
    l: &OperatorField<f64>,
    first_group: &[usize],
    points: &[Vec<f64>],
) -> Result<FactorizationResult> {
    let base = l.chart().base().to_vec();
    let lb = l.value(&base)?;
    let n = lb.rows();
    let base_values = spectrum_of(&lb)?;
    let mut labels = vec![false; n];
    for &i in first_group {
        if i >= n {
            return Err(EquivError::InvalidGrouping(format!(
                "index {i} out of range for {n} eigenvalues"
            )));
        }
        if labels[i] {
            return Err(EquivError::InvalidGrouping(format!("index {i} repeated")));
        }
        labels[i] = true;
    }
    if first_group.is_empty() || first_group.len() == n {
        return Err(EquivError::InvalidGrouping(
            "both groups must be nonempty".into(),
        ));
    }
    let mut samples = vec![sample_from(&base, &lb, &base_values, &labels)?];

    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        dist2(&points[a], &base)
            .total_cmp(&dist2(&points[b], &base))
            .then(a.cmp(&b))
    });
    for idx in order {
        let p = &points[idx];
        if p.len() != n {
            return Err(FieldError::Dimension("sample point does not fit the chart".into()).into());
        }
        let lp = l.value(p)?;
        let values = spectrum_of(&lp)?;
        let nearest = nearest_sample(&samples, p);
        let labels = match_labels(&labelled(nearest), &values);
        samples.push(sample_from(p, &lp, &values, &labels)?);
    }
    let r = first_group.len();
    Ok(FactorizationResult {
        l: l.clone(),
        r,
        samples: Arc::new(samples),
    })
}

fn labelled(s: &TrackedSample) -> Vec<(C, bool)> {
    s.group1
        .iter()
        .map(|z| (*z, true))
        .chain(s.group2.iter().map(|z| (*z, false)))
        .collect()
}

fn nearest_sample<'a>(samples: &'a [TrackedSample], p: &[f64]) -> &'a TrackedSample {
    let mut best = &samples[0];
    let mut best_d = dist2(&best.point, p);
    for s in &samples[1..] {
        let d = dist2(&s.point, p);
        if d < best_d {
            best = s;
            best_d = d;
        }
    }
    best
}

impl FactorizationResult {
    /// Degree of `chi1`.
    pub fn r(&self) -> usize {
        self.r
    }

    pub fn samples(&self) -> &[TrackedSample] {
        &self.samples
    }

    pub fn base(&self) -> &TrackedSample {
        &self.samples[0]
    }

    pub fn l(&self) -> &OperatorField<f64> {
        &self.l
    }

    /// Groups at an arbitrary point, matched against the nearest tracked
    /// sample.
    pub fn groups_at(&self, p: &[f64], lp: &Matrix<f64>) -> Result<TrackedSample> {
        let values = spectrum_of(lp)?;
        let labels = match_labels(&labelled(nearest_sample(&self.samples, p)), &values);
        sample_from(p, lp, &values, &labels)
    }

    /// `(chi1, chi2)` at `p`.
    pub fn chis_at(&self, p: &[f64]) -> Result<(MonicPoly<f64>, MonicPoly<f64>)> {
        let s = self.groups_at(p, &self.l.value(p)?)?;
        Ok((s.chi1, s.chi2))
    }

    /// Projector onto the generalised eigenspace of the first (`first =
    /// true`) or second group at `p`.
    pub fn projector_at(&self, p: &[f64], first: bool) -> Result<Matrix<f64>> {
        let lp = self.l.value(p)?;
        let s = self.groups_at(p, &lp)?;
        let f = if first {
            indicator_function(&s.group1, &s.group2)?
        } else {
            indicator_function(&s.group2, &s.group1)?
        };
        Ok(matrix_function(&lp, &f, default_cluster_tol(&lp))?)
    }
}

pub(crate) fn field_error(e: EquivError) -> FieldError {
    match e {
        EquivError::Field(f) => f,
        EquivError::SmallMat(s) => FieldError::SmallMat(s),
        other => FieldError::Other(other.to_string()),
    }
}

/// Spectral projectors `(P1, P2)` onto the two generalised eigenspaces.
/// `P2` is computed from its own indicator, not as `Id - P1`.
pub fn projectors(fact: &FactorizationResult) -> (OperatorField<f64>, OperatorField<f64>) {
    let make = |first: bool| {
        let f2 = fact.clone();
        let f: ValueFn<f64> =
            Arc::new(move |p: &[f64]| f2.projector_at(p, first).map_err(field_error));
        OperatorField(MatrixField::from_value_fn(
            fact.l.chart().clone(),
            fact.l.size(),
            f,
        ))
    };
    (make(true), make(false))
}
