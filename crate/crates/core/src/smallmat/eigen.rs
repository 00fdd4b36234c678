//! Eigenvalues of small real matrices: Hessenberg reduction followed by the
//! Francis double-shift QR iteration.

use std::cmp::Ordering;

use num_complex::Complex;

use super::{Matrix, Result, SmallMatError};
use crate::scalar::Real;

const MAX_SWEEPS: usize = 60;

/// Eigenvalues with algebraic multiplicity, in canonical order
/// (real part, then imaginary part).
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum<T> {
    values: Vec<Complex<T>>,
}

/// A group of numerically coincident eigenvalues.
#[derive(Clone, Debug, PartialEq)]
pub struct Cluster<T> {
    pub center: Complex<T>,
    pub multiplicity: usize,
    /// Indices into [`Spectrum::values`].
    pub members: Vec<usize>,
}

pub(crate) fn canonical_cmp<T: Real>(a: &Complex<T>, b: &Complex<T>) -> Ordering {
    a.re.partial_cmp(&b.re)
        .unwrap_or(Ordering::Equal)
        .then(a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal))
}

impl<T: Real> Spectrum<T> {
    pub fn from_values(mut values: Vec<Complex<T>>) -> Self {
        values.sort_by(canonical_cmp);
        Self { values }
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Single-linkage clusters of eigenvalues closer than `tol`.
    ///
    /// Cluster centers are member means; clusters come out in canonical order.
    pub fn clusters(&self, tol: T) -> Vec<Cluster<T>> {
        let n = self.values.len();
        let mut label: Vec<usize> = (0..n).collect();
        fn root(label: &mut [usize], mut i: usize) -> usize {
            while label[i] != i {
                label[i] = label[label[i]];
                i = label[i];
            }
            i
        }
        for i in 0..n {
            for j in i + 1..n {
                if (self.values[i] - self.values[j]).norm() <= tol {
                    let (a, b) = (root(&mut label, i), root(&mut label, j));
                    if a != b {
                        label[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        let mut clusters: Vec<Cluster<T>> = Vec::new();
        let mut seen: Vec<(usize, usize)> = Vec::new();
        for i in 0..n {
            let r = root(&mut label, i);
            match seen.iter().find(|(rr, _)| *rr == r) {
                Some(&(_, idx)) => clusters[idx].members.push(i),
                None => {
                    seen.push((r, clusters.len()));
                    clusters.push(Cluster {
                        center: Complex::new(T::zero(), T::zero()),
                        multiplicity: 0,
                        members: vec![i],
                    });
                }
            }
        }
        for c in &mut clusters {
            c.multiplicity = c.members.len();
            let sum = c
                .members
                .iter()
                .fold(Complex::new(T::zero(), T::zero()), |acc, &i| {
                    acc + self.values[i]
                });
            c.center = sum / T::from_usize_lossy(c.multiplicity);
        }
        clusters.sort_by(|a, b| canonical_cmp(&a.center, &b.center));
        clusters
    }

    /// Smallest distance between an eigenvalue of `self` and one of `other`.
    pub fn gap_to(&self, other: &Spectrum<T>) -> T {
        min_distance(&self.values, &other.values)
    }
}

pub(crate) fn min_distance<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> T {
    let mut best = T::infinity();
    for x in a {
        for y in b {
            best = best.min((*x - *y).norm());
        }
    }
    best
}

/// Checks that `values` is closed under conjugation up to `tol`, matching
/// multiplicities.
pub(crate) fn is_conjugation_closed<T: Real>(values: &[Complex<T>], tol: T) -> bool {
    let mut used = vec![false; values.len()];
    for i in 0..values.len() {
        if used[i] {
            continue;
        }
        let target = values[i].conj();
        if (values[i] - target).norm() <= tol {
            used[i] = true;
            continue;
        }
        let partner = (0..values.len())
            .filter(|&j| j != i && !used[j])
            .min_by(|&a, &b| {
                (values[a] - target)
                    .norm()
                    .partial_cmp(&(values[b] - target).norm())
                    .unwrap_or(Ordering::Equal)
            });
        match partner {
            Some(j) if (values[j] - target).norm() <= tol => {
                used[i] = true;
                used[j] = true;
            }
            _ => return false,
        }
    }
    true
}

/// Eigenvalues of a real square matrix.
///
/// `tol` is the relative backward-error target; the QR iteration itself runs
/// to machine precision, and `tol` is used only to decide which nearly real
/// eigenvalue pairs are snapped onto the real axis.
pub fn eigen<T: Real>(a: &Matrix<T>, tol: T) -> Result<Spectrum<T>> {
    let n = a.square_dim()?;
    if !a.is_finite() {
        return Err(SmallMatError::NonFinite);
    }
    if n == 0 {
        return Ok(Spectrum { values: Vec::new() });
    }
    let mut h = hessenberg(a);
    let raw = hqr(&mut h, n)?;
    let scale = a.frobenius_norm();
    let mut values = raw;
    // conjugate pairs come out adjacent; make them exactly conjugate
    let mut i = 0;
    while i < values.len() {
        if values[i].im != T::zero() && i + 1 < values.len() {
            let (p, q) = (values[i], values[i + 1]);
            let re = (p.re + q.re) * T::lit(0.5);
            let im = (p.im.abs() + q.im.abs()) * T::lit(0.5);
            if im <= tol * scale * T::epsilon() {
                values[i] = Complex::new(re, T::zero());
                values[i + 1] = Complex::new(re, T::zero());
            } else {
                values[i] = Complex::new(re, im);
                values[i + 1] = Complex::new(re, -im);
            }
            i += 2;
        } else {
            i += 1;
        }
    }
    Ok(Spectrum::from_values(values))
}

/// Reduction to upper Hessenberg form by stabilised elementary similarity
/// transforms.
fn hessenberg<T: Real>(a: &Matrix<T>) -> Vec<Vec<T>> {
    let n = a.rows();
    // 1-based storage keeps the QR sweep below close to its textbook form
    let mut h = vec![vec![T::zero(); n + 1]; n + 1];
    for i in 0..n {
        for j in 0..n {
            h[i + 1][j + 1] = a[(i, j)];
        }
    }
    for m in 2..n {
        let mut x = T::zero();
        let mut i = m;
        for j in m..=n {
            if h[j][m - 1].abs() > x.abs() {
                x = h[j][m - 1];
                i = j;
            }
        }
        if i != m {
            for j in (m - 1)..=n {
                let tmp = h[i][j];
                h[i][j] = h[m][j];
                h[m][j] = tmp;
            }
            for row in h.iter_mut().skip(1) {
                row.swap(i, m);
            }
        }
        if x != T::zero() {
            for i in (m + 1)..=n {
                let mut y = h[i][m - 1];
                if y != T::zero() {
                    y /= x;
                    h[i][m - 1] = y;
                    for j in m..=n {
                        let hmj = h[m][j];
                        h[i][j] -= y * hmj;
                    }
                    for row in h.iter_mut().skip(1) {
                        let hji = row[i];
                        row[m] += y * hji;
                    }
                }
            }
        }
    }
    for i in 1..=n {
        for j in 1..=n {
            if i > j + 1 {
                h[i][j] = T::zero();
            }
        }
    }
    h
}

#[inline]
fn sign<T: Real>(a: T, b: T) -> T {
    if b >= T::zero() {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Francis double-shift QR on a 1-based upper Hessenberg matrix.
#[allow(clippy::many_single_char_names, unused_assignments)]
fn hqr<T: Real>(a: &mut [Vec<T>], n: usize) -> Result<Vec<Complex<T>>> {
    let zero = T::zero();
    let mut wr = vec![zero; n + 1];
    let mut wi = vec![zero; n + 1];
    let mut anorm = zero;
    for i in 1..=n {
        for j in i.saturating_sub(1).max(1)..=n {
            anorm += a[i][j].abs();
        }
    }
    let mut nn = n as isize;
    let mut t = zero;
    let (mut p, mut q, mut r) = (zero, zero, zero);
    let (mut x, mut y, mut z, mut w);
    while nn >= 1 {
        let mut its = 0usize;
        loop {
            let mut l = nn;
            while l >= 2 {
                let lu = l as usize;
                let mut s = a[lu - 1][lu - 1].abs() + a[lu][lu].abs();
                if s == zero {
                    s = anorm;
                }
                if a[lu][lu - 1].abs() + s == s {
                    a[lu][lu - 1] = zero;
                    break;
                }
                l -= 1;
            }
            let nu = nn as usize;
            x = a[nu][nu];
            if l == nn {
                wr[nu] = x + t;
                wi[nu] = zero;
                nn -= 1;
            } else {
                y = a[nu - 1][nu - 1];
                w = a[nu][nu - 1] * a[nu - 1][nu];
                if l == nn - 1 {
                    p = T::lit(0.5) * (y - x);
                    q = p * p + w;
                    z = q.abs().sqrt();
                    x += t;
                    if q >= zero {
                        z = p + sign(z, p);
                        wr[nu - 1] = x + z;
                        wr[nu] = x + z;
                        if z != zero {
                            wr[nu] = x - w / z;
                        }
                        wi[nu - 1] = zero;
                        wi[nu] = zero;
                    } else {
                        wr[nu - 1] = x + p;
                        wr[nu] = x + p;
                        wi[nu - 1] = -z;
                        wi[nu] = z;
                    }
                    nn -= 2;
                } else {
                    if its >= MAX_SWEEPS {
                        return Err(SmallMatError::NoConvergence { iterations: its });
                    }
                    if its > 0 && its % 10 == 0 {
                        // exceptional shift
                        t += x;
                        for i in 1..=nu {
                            a[i][i] -= x;
                        }
                        let s = a[nu][nu - 1].abs() + a[nu - 1][nu - 2].abs();
                        x = T::lit(0.75) * s;
                        y = x;
                        w = T::lit(-0.4375) * s * s;
                    }
                    its += 1;
                    let lu = l as usize;
                    let mut m = nu - 2;
                    loop {
                        z = a[m][m];
                        r = x - z;
                        let s0 = y - z;
                        p = (r * s0 - w) / a[m + 1][m] + a[m][m + 1];
                        q = a[m + 1][m + 1] - z - r - s0;
                        r = a[m + 2][m + 1];
                        let s = p.abs() + q.abs() + r.abs();
                        p /= s;
                        q /= s;
                        r /= s;
                        if m == lu {
                            break;
                        }
                        let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                        let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                        if u + v == v {
                            break;
                        }
                        m -= 1;
                    }
                    for i in (m + 2)..=nu {
                        a[i][i - 2] = zero;
                        if i != m + 2 {
                            a[i][i - 3] = zero;
                        }
                    }
                    let mut k = m;
                    while k + 1 <= nu {
                        if k != m {
                            p = a[k][k - 1];
                            q = a[k + 1][k - 1];
                            r = zero;
                            if k != nu - 1 {
                                r = a[k + 2][k - 1];
                            }
                            x = p.abs() + q.abs() + r.abs();
                            if x != zero {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        let s = sign((p * p + q * q + r * r).sqrt(), p);
                        if s != zero {
                            if k == m {
                                if l as usize != m {
                                    a[k][k - 1] = -a[k][k - 1];
                                }
                            } else {
                                a[k][k - 1] = -s * x;
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q /= p;
                            r /= p;
                            for j in k..=nu {
                                p = a[k][j] + q * a[k + 1][j];
                                if k != nu - 1 {
                                    p += r * a[k + 2][j];
                                    a[k + 2][j] -= p * z;
                                }
                                a[k + 1][j] -= p * y;
                                a[k][j] -= p * x;
                            }
                            let mmin = if nu < k + 3 { nu } else { k + 3 };
                            for i in lu..=mmin {
                                p = x * a[i][k] + y * a[i][k + 1];
                                if k != nu - 1 {
                                    p += z * a[i][k + 2];
                                    a[i][k + 2] -= p * r;
                                }
                                a[i][k + 1] -= p * q;
                                a[i][k] -= p;
                            }
                        }
                        k += 1;
                    }
                }
            }
            if l >= nn - 1 {
                break;
            }
        }
    }
    Ok((1..=n).map(|i| Complex::new(wr[i], wi[i])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> Matrix<f64> {
        Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
    }

    #[test]
    fn diagonal_with_repeat() {
        let s = eigen(&Matrix::from_diagonal(&[1.0, 5.0, 1.0]), 1e-12).unwrap();
        let c = s.clusters(1e-10);
        assert_eq!(c.len(), 2);
        assert_eq!((c[0].center.re, c[0].multiplicity), (1.0, 2));
        assert_eq!((c[1].center.re, c[1].multiplicity), (5.0, 1));
    }

    #[test]
    fn rotation_has_conjugate_pair() {
        let s = eigen(&m(&[&[0.0, -1.0], &[1.0, 0.0]]), 1e-12).unwrap();
        let v = s.values();
        assert!((v[0] - Complex::new(0.0, -1.0)).norm() < 1e-14);
        assert!((v[1] - Complex::new(0.0, 1.0)).norm() < 1e-14);
        assert_eq!(v[0], v[1].conj());
    }

    #[test]
    fn jordan_block() {
        let s = eigen(&m(&[&[2.0, 1.0], &[0.0, 2.0]]), 1e-12).unwrap();
        let c = s.clusters(1e-8);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].multiplicity, 2);
        assert!((c[0].center - Complex::new(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn companion_matrix_roots() {
        // roots 1, 2, 3, 4
        let a = m(&[
            &[10.0, -35.0, 50.0, -24.0],
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0],
        ]);
        let s = eigen(&a, 1e-12).unwrap();
        for (v, want) in s.values().iter().zip([1.0, 2.0, 3.0, 4.0]) {
            assert!((v.re - want).abs() < 1e-10 && v.im == 0.0, "{v}");
        }
    }

    #[test]
    fn conjugation_closure() {
        let i = Complex::new(0.0, 1.0);
        let three = Complex::new(3.0, 0.0);
        assert!(is_conjugation_closed(&[i, -i, three], 1e-12));
        assert!(!is_conjugation_closed(&[i, three], 1e-12));
        assert!(!is_conjugation_closed(&[i, i, -i], 1e-12));
    }
}
