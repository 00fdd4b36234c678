use std::fmt;

use num_complex::Complex;

use super::{Matrix, Result};
use crate::scalar::Real;

/// Monic real polynomial `t^d + c_{d-1} t^{d-1} + ... + c_0`.
///
/// Only the non-leading coefficients are stored, lowest degree first.
#[derive(Clone, PartialEq, Debug)]
pub struct MonicPoly<T> {
    coeffs: Vec<T>,
}

impl<T: Real> MonicPoly<T> {
    pub fn new(coeffs: Vec<T>) -> Self {
        Self { coeffs }
    }

    /// The constant polynomial 1.
    pub fn one() -> Self {
        Self { coeffs: Vec::new() }
    }

    /// `prod (t - r)` over the given roots.
    ///
    /// Roots should be closed under conjugation; the imaginary parts of the
    /// expanded coefficients are dropped.
    pub fn from_roots(roots: &[Complex<T>]) -> Self {
        let mut c: Vec<Complex<T>> = vec![Complex::new(T::one(), T::zero())];
        for &r in roots {
            // multiply by (t - r)
            let mut next = vec![Complex::new(T::zero(), T::zero()); c.len() + 1];
            for (k, &ck) in c.iter().enumerate() {
                next[k + 1] += ck;
                next[k] -= ck * r;
            }
            c = next;
        }
        c.pop();
        Self {
            coeffs: c.into_iter().map(|z| z.re).collect(),
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    /// Non-leading coefficients `c_0 .. c_{d-1}`.
    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// All coefficients including the leading 1.
    pub fn full_coeffs(&self) -> Vec<T> {
        let mut v = self.coeffs.clone();
        v.push(T::one());
        v
    }

    pub fn eval(&self, t: T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::one(), |acc, &c| acc * t + c)
    }

    pub fn eval_complex(&self, z: Complex<T>) -> Complex<T> {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex::new(T::one(), T::zero()), |acc, &c| acc * z + c)
    }

    /// Horner evaluation at a square matrix.
    pub fn eval_matrix(&self, a: &Matrix<T>) -> Matrix<T> {
        let n = a.rows();
        let mut acc = Matrix::identity(n);
        for &c in self.coeffs.iter().rev() {
            acc = &acc * a;
            for i in 0..n {
                acc[(i, i)] += c;
            }
        }
        acc
    }

    pub fn mul(&self, other: &Self) -> Self {
        let a = self.full_coeffs();
        let b = other.full_coeffs();
        let mut c = vec![T::zero(); a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                c[i + j] += x * y;
            }
        }
        c.pop();
        Self { coeffs: c }
    }

    /// Largest coefficient-wise difference; polynomials of different degree
    /// compare as infinitely far apart.
    pub fn coeff_distance(&self, other: &Self) -> T {
        if self.degree() != other.degree() {
            return T::infinity();
        }
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(T::zero(), |acc, (&a, &b)| acc.max((a - b).abs()))
    }
}

impl<T: Real> fmt::Display for MonicPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t^{}", self.degree())?;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if *c == T::zero() {
                continue;
            }
            let sign = if *c < T::zero() { '-' } else { '+' };
            match k {
                0 => write!(f, " {sign} {}", c.abs())?,
                1 => write!(f, " {sign} {}*t", c.abs())?,
                _ => write!(f, " {sign} {}*t^{k}", c.abs())?,
            }
        }
        Ok(())
    }
}

/// `det(t Id - A)` by the Faddeev–LeVerrier recursion.
pub fn char_poly<T: Real>(a: &Matrix<T>) -> Result<MonicPoly<T>> {
    let n = a.square_dim()?;
    if !a.is_finite() {
        return Err(super::SmallMatError::NonFinite);
    }
    // M_0 = 0, c_n = 1; M_k = A M_{k-1} + c_{n-k+1} I; c_{n-k} = -tr(A M_k) / k
    let mut coeffs = vec![T::zero(); n];
    let mut m = Matrix::<T>::zeros(n, n);
    let mut prev_c = T::one();
    for k in 1..=n {
        let mut next = a * &m;
        for i in 0..n {
            next[(i, i)] += prev_c;
        }
        let am = a * &next;
        let c = -am.trace() / T::from_usize_lossy(k);
        coeffs[n - k] = c;
        prev_c = c;
        m = next;
    }
    Ok(MonicPoly::new(coeffs))
}
