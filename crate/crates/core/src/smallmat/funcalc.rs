//! Functions of a matrix via Hermite interpolation on its clustered spectrum.

use num_complex::Complex;

use super::eigen::{is_conjugation_closed, min_distance};
use super::{eigen, Matrix, Result, SmallMatError};
use crate::scalar::Real;

/// A scalar function holomorphic near the spectra it is applied to.
#[derive(Clone, Debug, PartialEq)]
pub enum ScalarFunction<T> {
    /// `sum c_k z^k`, coefficients lowest degree first.
    Polynomial(Vec<Complex<T>>),
    /// `1 / (z - c)`.
    Reciprocal(Complex<T>),
    Exp,
    /// Principal branch, cut along the non-positive real axis.
    Sqrt,
    /// 1 within `radius` of a point of `ones`, 0 within `radius` of `zeros`.
    Indicator {
        ones: Vec<Complex<T>>,
        zeros: Vec<Complex<T>>,
        radius: T,
    },
}

fn c<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

impl<T: Real> ScalarFunction<T> {
    /// Real-coefficient polynomial.
    pub fn polynomial(coeffs: &[T]) -> Self {
        Self::Polynomial(coeffs.iter().map(|&x| c(x)).collect())
    }

    pub fn reciprocal(pole: T) -> Self {
        Self::Reciprocal(c(pole))
    }

    /// The constant function 1.
    pub fn one() -> Self {
        Self::polynomial(&[T::one()])
    }

    /// The identity `f(z) = z`.
    pub fn identity() -> Self {
        Self::polynomial(&[T::zero(), T::one()])
    }

    /// Whether `z` lies in the open set where the function is holomorphic.
    pub fn in_domain(&self, z: Complex<T>) -> bool {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return false;
        }
        match self {
            Self::Polynomial(_) | Self::Exp => true,
            Self::Reciprocal(p) => (z - *p).norm() > T::lit(1e-10) * (T::one() + p.norm()),
            Self::Sqrt => {
                !(z.re <= T::zero() && z.im.abs() <= T::lit(1e-14) * (T::one() + z.re.abs()))
            }
            Self::Indicator {
                ones,
                zeros,
                radius,
            } => self.indicator_side(ones, zeros, *radius, z).is_some(),
        }
    }

    fn indicator_side(
        &self,
        ones: &[Complex<T>],
        zeros: &[Complex<T>],
        radius: T,
        z: Complex<T>,
    ) -> Option<bool> {
        let d1 = min_distance(&[z], ones);
        let d0 = min_distance(&[z], zeros);
        if d1 < radius && d1 <= d0 {
            Some(true)
        } else if d0 < radius {
            Some(false)
        } else {
            None
        }
    }

    /// Taylor coefficients `f^(k)(z) / k!` for `k < m`.
    ///
    /// The caller is responsible for checking [`Self::in_domain`].
    pub fn taylor(&self, z: Complex<T>, m: usize) -> Vec<Complex<T>> {
        let zero = c(T::zero());
        match self {
            Self::Polynomial(a) => (0..m)
                .map(|k| {
                    // sum_j binom(j,k) a_j z^(j-k)
                    let mut acc = zero;
                    for (j, &aj) in a.iter().enumerate().skip(k).rev() {
                        acc = acc * z + aj * c(binom::<T>(j, k));
                    }
                    acc
                })
                .collect(),
            Self::Reciprocal(p) => {
                let w = c(T::one()) / (z - *p);
                let mut out = Vec::with_capacity(m);
                let mut term = w;
                for _ in 0..m {
                    out.push(term);
                    term = -term * w;
                }
                out
            }
            Self::Exp => {
                let e = z.exp();
                let mut fact = T::one();
                (0..m)
                    .map(|k| {
                        if k > 0 {
                            fact *= T::from_usize_lossy(k);
                        }
                        e / fact
                    })
                    .collect()
            }
            Self::Sqrt => {
                let s = z.sqrt();
                let mut b = T::one();
                let mut zk = c(T::one());
                let half = T::lit(0.5);
                (0..m)
                    .map(|k| {
                        if k > 0 {
                            let i = T::from_usize_lossy(k - 1);
                            b = b * (half - i) / (i + T::one());
                            zk = zk * z;
                        }
                        s * c(b) / zk
                    })
                    .collect()
            }
            Self::Indicator {
                ones,
                zeros,
                radius,
            } => {
                let v = if self.indicator_side(ones, zeros, *radius, z) == Some(true) {
                    T::one()
                } else {
                    T::zero()
                };
                let mut out = vec![zero; m];
                if m > 0 {
                    out[0] = c(v);
                }
                out
            }
        }
    }

    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        self.taylor(z, 1)[0]
    }

    /// Checks `f(conj z) = conj f(z)` for the first `m` Taylor coefficients.
    pub fn is_conjugation_symmetric_at(&self, z: Complex<T>, m: usize) -> bool {
        let a = self.taylor(z, m);
        let b = self.taylor(z.conj(), m);
        a.iter()
            .zip(&b)
            .all(|(x, y)| (x.conj() - *y).norm() <= T::lit(1e-10) * (T::one() + x.norm()))
    }
}

fn binom<T: Real>(n: usize, k: usize) -> T {
    let mut r = T::one();
    for i in 0..k {
        r = r * T::from_usize_lossy(n - i) / T::from_usize_lossy(i + 1);
    }
    r
}

/// `f(A)` for a real square matrix.
///
/// Eigenvalues closer than `cluster_tol` are merged into one Hermite node
/// whose multiplicity is the cluster size; the interpolating polynomial is
/// evaluated at `A` in Newton form over the complex numbers and the real part
/// returned.
pub fn matrix_function<T: Real>(
    a: &Matrix<T>,
    f: &ScalarFunction<T>,
    cluster_tol: T,
) -> Result<Matrix<T>> {
    let n = a.square_dim()?;
    let spectrum = eigen(a, T::lit(1e-12))?;
    let clusters = spectrum.clusters(cluster_tol);
    let mut nodes: Vec<Complex<T>> = Vec::with_capacity(n);
    let mut taylor: Vec<Vec<Complex<T>>> = Vec::with_capacity(clusters.len());
    let mut start: Vec<usize> = Vec::with_capacity(n);
    for cl in &clusters {
        let z = cl.center;
        if !f.in_domain(z) {
            return Err(SmallMatError::DomainViolation {
                re: z.re.to_f64_lossy(),
                im: z.im.to_f64_lossy(),
            });
        }
        if !f.is_conjugation_symmetric_at(z, cl.multiplicity) {
            return Err(SmallMatError::SymmetryViolation {
                re: z.re.to_f64_lossy(),
                im: z.im.to_f64_lossy(),
            });
        }
        let first = nodes.len();
        for _ in 0..cl.multiplicity {
            start.push(first);
            nodes.push(z);
        }
        taylor.push(f.taylor(z, cl.multiplicity));
    }
    let cluster_of: Vec<usize> = clusters
        .iter()
        .enumerate()
        .flat_map(|(ci, cl)| std::iter::repeat(ci).take(cl.multiplicity))
        .collect();

    // confluent divided differences; column k of `dd` holds f[z_i .. z_{i+k}]
    let mut dd: Vec<Vec<Complex<T>>> = vec![vec![c(T::zero()); n]; n];
    for i in 0..n {
        dd[i][0] = taylor[cluster_of[i]][0];
    }
    for k in 1..n {
        for i in 0..n - k {
            let j = i + k;
            dd[i][k] = if cluster_of[i] == cluster_of[j] {
                taylor[cluster_of[i]][k]
            } else {
                (dd[i + 1][k - 1] - dd[i][k - 1]) / (nodes[j] - nodes[i])
            };
        }
    }

    let ac = a.to_complex();
    let mut prod = Matrix::<Complex<T>>::identity(n);
    let mut acc = prod.scale(dd[0][0]);
    for k in 1..n {
        prod = &prod * &ac.shift(nodes[k - 1]);
        acc = &acc + &prod.scale(dd[0][k]);
    }
    let re = acc.re();
    let residue = acc.im().frobenius_norm();
    let limit = T::lit(1e-10) * re.frobenius_norm().max(T::one());
    if residue > limit {
        return Err(SmallMatError::ResidueTooLarge {
            residue: residue.to_f64_lossy(),
            limit: limit.to_f64_lossy(),
        });
    }
    Ok(re)
}

/// Default cluster radius for [`matrix_function`]: `1e-8 (1 + |A|)`.
pub fn default_cluster_tol<T: Real>(a: &Matrix<T>) -> T {
    T::lit(1e-8) * (T::one() + a.frobenius_norm())
}

/// The function equal to 1 near `s1` and 0 near `s2`.
pub fn indicator_function<T: Real>(
    s1: &[Complex<T>],
    s2: &[Complex<T>],
) -> Result<ScalarFunction<T>> {
    let scale = s1
        .iter()
        .chain(s2)
        .fold(T::one(), |m, z| m.max(T::one() + z.norm()));
    let closure_tol = T::lit(1e-9) * scale;
    if !is_conjugation_closed(s1, closure_tol) || !is_conjugation_closed(s2, closure_tol) {
        return Err(SmallMatError::NotConjugationClosed);
    }
    let distance = min_distance(s1, s2);
    if distance <= closure_tol {
        return Err(SmallMatError::GroupsNotDisjoint {
            distance: distance.to_f64_lossy(),
        });
    }
    Ok(ScalarFunction::Indicator {
        ones: s1.to_vec(),
        zeros: s2.to_vec(),
        radius: if distance.is_finite() {
            distance * T::lit(0.5)
        } else {
            T::infinity()
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> Matrix<f64> {
        Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
    }

    fn close(a: &Matrix<f64>, b: &Matrix<f64>, tol: f64) -> bool {
        (a - b).max_abs() <= tol
    }

    #[test]
    fn sqrt_of_diagonal() {
        let r = matrix_function(
            &Matrix::from_diagonal(&[1.0, 4.0]),
            &ScalarFunction::Sqrt,
            1e-8,
        )
        .unwrap();
        assert!(close(&r, &Matrix::from_diagonal(&[1.0, 2.0]), 1e-14));
    }

    #[test]
    fn square_of_jordan_block_keeps_derivative_term() {
        let a = m(&[&[2.0, 1.0], &[0.0, 2.0]]);
        let r = matrix_function(&a, &ScalarFunction::polynomial(&[0.0, 0.0, 1.0]), 1e-8).unwrap();
        assert!(close(&r, &m(&[&[4.0, 4.0], &[0.0, 4.0]]), 1e-14));
    }

    #[test]
    fn exp_of_rotation_generator() {
        let t = 0.7_f64;
        let a = m(&[&[0.0, -t], &[t, 0.0]]);
        let r = matrix_function(&a, &ScalarFunction::Exp, 1e-8).unwrap();
        let want = m(&[&[t.cos(), -t.sin()], &[t.sin(), t.cos()]]);
        assert!(close(&r, &want, 1e-14));
    }

    #[test]
    fn reciprocal_is_resolvent() {
        let a = m(&[&[1.0, 2.0], &[0.5, 3.0]]);
        let r = matrix_function(&a, &ScalarFunction::reciprocal(-2.0), 1e-8).unwrap();
        let want = a.shift(-2.0).inverse().unwrap();
        assert!(close(&r, &want, 1e-13));
    }

    #[test]
    fn domain_and_symmetry_violations() {
        let err = matrix_function(
            &Matrix::from_diagonal(&[-1.0, 2.0]),
            &ScalarFunction::Sqrt,
            1e-8,
        )
        .unwrap_err();
        assert!(matches!(err, SmallMatError::DomainViolation { .. }));
        let err = matrix_function(
            &Matrix::from_diagonal(&[3.0]),
            &ScalarFunction::reciprocal(3.0),
            1e-8,
        )
        .unwrap_err();
        assert!(matches!(err, SmallMatError::DomainViolation { .. }));
        let i = Complex::new(0.0, 1.0);
        let err = matrix_function(
            &Matrix::from_diagonal(&[3.0]),
            &ScalarFunction::Polynomial(vec![i]),
            1e-8,
        )
        .unwrap_err();
        assert!(matches!(err, SmallMatError::SymmetryViolation { .. }));
    }

    #[test]
    fn indicator_on_repeated_eigenvalue() {
        let f = indicator_function(&[c(1.0)], &[c(5.0)]).unwrap();
        let p = matrix_function(&Matrix::from_diagonal(&[1.0, 1.0, 5.0]), &f, 1e-8).unwrap();
        assert!(close(&p, &Matrix::from_diagonal(&[1.0, 1.0, 0.0]), 1e-14));
    }

    #[test]
    fn indicator_errors() {
        let i = Complex::new(0.0, 1.0);
        assert!(matches!(
            indicator_function(&[i], &[-i, c(3.0)]),
            Err(SmallMatError::NotConjugationClosed)
        ));
        assert!(matches!(
            indicator_function(&[c(2.0)], &[c(2.0)]),
            Err(SmallMatError::GroupsNotDisjoint { .. })
        ));
    }
}
