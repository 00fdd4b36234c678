//! Dense linear algebra on small matrices (dimension at most [`MAX_DIM`]).
//!
//! Everything here is written for desk-scale problems: pointwise values of
//! metrics and (1,1)-tensors on a chart. Algorithms favour clarity over
//! asymptotics (the Sylvester solver is a Kronecker linearisation, for
//! instance), and every routine is a pure function of its inputs.

mod eigen;
mod funcalc;
mod poly;
mod sylvester;

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{Float, Zero};
use thiserror::Error;

use crate::scalar::{Element, Real};

pub use eigen::{eigen, Cluster, Spectrum};
pub(crate) use eigen::{is_conjugation_closed, min_distance};
pub use funcalc::{default_cluster_tol, indicator_function, matrix_function, ScalarFunction};
pub use poly::{char_poly, MonicPoly};
pub use sylvester::{sylvester_solve, sylvester_solve_with_gap};

/// Largest supported matrix dimension.
pub const MAX_DIM: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SmallMatError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension {dim} exceeds the supported maximum {max}")]
    DimensionTooLarge { dim: usize, max: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("eigenvalue iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("spectra overlap: eigenvalue gap {gap:e} below tolerance {tol:e}")]
    SpectraOverlap { gap: f64, tol: f64 },
    #[error("eigenvalue {re}{im:+}i lies outside the domain of the function")]
    DomainViolation { re: f64, im: f64 },
    #[error("function violates f(conj z) = conj f(z) at {re}{im:+}i")]
    SymmetryViolation { re: f64, im: f64 },
    #[error("imaginary residue {residue:e} of the matrix function exceeds {limit:e}")]
    ResidueTooLarge { residue: f64, limit: f64 },
    #[error("eigenvalue groups are not disjoint (distance {distance:e})")]
    GroupsNotDisjoint { distance: f64 },
    #[error("eigenvalue group is not closed under complex conjugation")]
    NotConjugationClosed,
}

pub type Result<T, E = SmallMatError> = std::result::Result<T, E>;

/// Dense row-major matrix over a real or complex element type.
#[derive(Clone, PartialEq)]
pub struct Matrix<E> {
    rows: usize,
    cols: usize,
    data: Vec<E>,
}

impl<E: Element> Matrix<E> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![E::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = E::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> E) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from a row-major slice.
    ///
    /// Panics if `data.len() != rows * cols`.
    pub fn from_row_slice(rows: usize, cols: usize, data: &[E]) -> Self {
        assert_eq!(
            data.len(),
            rows * cols,
            "row-major data has the wrong length"
        );
        Self {
            rows,
            cols,
            data: data.to_vec(),
        }
    }

    /// Panics on ragged input.
    pub fn from_rows(rows: &[Vec<E>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            data: rows.concat(),
        }
    }

    pub fn from_diagonal(diag: &[E]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Dimension of a square matrix, checked against [`MAX_DIM`].
    pub fn square_dim(&self) -> Result<usize> {
        if !self.is_square() {
            return Err(SmallMatError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        if self.rows > MAX_DIM {
            return Err(SmallMatError::DimensionTooLarge {
                dim: self.rows,
                max: MAX_DIM,
            });
        }
        Ok(self.rows)
    }

    pub fn as_slice(&self) -> &[E] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<E> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[E] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<E> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn map<F: Element>(&self, f: impl Fn(E) -> F) -> Matrix<F> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn scale(&self, s: E) -> Self {
        self.map(|x| x * s)
    }

    pub fn trace(&self) -> E {
        let n = self.rows.min(self.cols);
        (0..n).fold(E::zero(), |acc, i| acc + self[(i, i)])
    }

    pub fn mat_vec(&self, v: &[E]) -> Vec<E> {
        assert_eq!(v.len(), self.cols, "vector length mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(E::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    /// `self - s * Id`.
    pub fn shift(&self, s: E) -> Self {
        let mut m = self.clone();
        for i in 0..self.rows.min(self.cols) {
            m[(i, i)] -= s;
        }
        m
    }

    pub fn frobenius_norm(&self) -> E::Real {
        self.data
            .iter()
            .fold(E::Real::zero(), |acc, &x| {
                let m = x.modulus();
                acc + m * m
            })
            .sqrt()
    }

    pub fn max_abs(&self) -> E::Real {
        self.data
            .iter()
            .fold(E::Real::zero(), |acc, &x| acc.max(x.modulus()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.modulus().is_finite())
    }

    /// Block-diagonal sum `self ⊕ other`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let (r, c) = (self.rows + other.rows, self.cols + other.cols);
        let mut m = Self::zeros(r, c);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] = self[(i, j)];
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                m[(self.rows + i, self.cols + j)] = other[(i, j)];
            }
        }
        m
    }

    /// Submatrix picking the given rows and columns, in order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }

    /// LU factorisation with partial pivoting. Not subject to [`MAX_DIM`].
    pub fn lu(&self) -> Result<Lu<E>> {
        if !self.is_square() {
            return Err(SmallMatError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = E::one();
        for k in 0..n {
            let (p, pivot) =
                (k..n)
                    .map(|i| (i, a[(i, k)].modulus()))
                    .fold((k, E::Real::zero()), |best, cur| {
                        if cur.1 > best.1 {
                            cur
                        } else {
                            best
                        }
                    });
            if pivot == E::Real::zero() || !pivot.is_finite() {
                return Err(if pivot.is_finite() {
                    SmallMatError::Singular
                } else {
                    SmallMatError::NonFinite
                });
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let akk = a[(k, k)];
            for i in k + 1..n {
                let factor = a[(i, k)] / akk;
                a[(i, k)] = factor;
                for j in k + 1..n {
                    let akj = a[(k, j)];
                    a[(i, j)] -= factor * akj;
                }
            }
        }
        Ok(Lu { lu: a, perm, sign })
    }

    pub fn det(&self) -> Result<E> {
        match self.lu() {
            Ok(lu) => Ok(lu.det()),
            Err(SmallMatError::Singular) => Ok(E::zero()),
            Err(e) => Err(e),
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        let lu = self.lu()?;
        let n = self.rows;
        let mut inv = Self::zeros(n, n);
        for j in 0..n {
            let mut e = vec![E::zero(); n];
            e[j] = E::one();
            let x = lu.solve_vec(&e);
            for i in 0..n {
                inv[(i, j)] = x[i];
            }
        }
        Ok(inv)
    }

    /// Solves `self * X = rhs` for a matrix right-hand side.
    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        let lu = self.lu()?;
        if rhs.rows != self.rows {
            return Err(SmallMatError::DimensionMismatch(format!(
                "rhs has {} rows, matrix has {}",
                rhs.rows, self.rows
            )));
        }
        let mut out = Self::zeros(rhs.rows, rhs.cols);
        for j in 0..rhs.cols {
            let x = lu.solve_vec(&rhs.column(j));
            for i in 0..rhs.rows {
                out[(i, j)] = x[i];
            }
        }
        Ok(out)
    }
}

impl<T: Real> Matrix<T> {
    pub fn to_complex(&self) -> Matrix<Complex<T>> {
        self.map(|x| Complex::new(x, T::zero()))
    }

    /// Largest |a_ij - a_ji|.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn symmetrized(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            if i == j {
                self[(i, j)]
            } else {
                (self[(i, j)] + self[(j, i)]) * T::lit(0.5)
            }
        })
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        self.map(|x| x.to_f64_lossy())
    }
}

impl<T: Real> Matrix<Complex<T>> {
    pub fn re(&self) -> Matrix<T> {
        self.map(|z| z.re)
    }

    pub fn im(&self) -> Matrix<T> {
        self.map(|z| z.im)
    }
}

/// LU factors of a square matrix.
#[derive(Debug, Clone)]
pub struct Lu<E> {
    lu: Matrix<E>,
    perm: Vec<usize>,
    sign: E,
}

impl<E: Element> Lu<E> {
    pub fn det(&self) -> E {
        (0..self.lu.rows).fold(self.sign, |acc, i| acc * self.lu[(i, i)])
    }

    pub fn solve_vec(&self, b: &[E]) -> Vec<E> {
        let n = self.lu.rows;
        let mut x: Vec<E> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for k in 0..i {
                let l = self.lu[(i, k)];
                let xk = x[k];
                x[i] -= l * xk;
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let u = self.lu[(i, k)];
                let xk = x[k];
                x[i] -= u * xk;
            }
            x[i] = x[i] / self.lu[(i, i)];
        }
        x
    }
}

impl<E> Index<(usize, usize)> for Matrix<E> {
    type Output = E;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &E {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<E> IndexMut<(usize, usize)> for Matrix<E> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut E {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<E: Element> Mul for &Matrix<E> {
    type Output = Matrix<E>;
    fn mul(self, rhs: &Matrix<E>) -> Matrix<E> {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl<E: Element> Add for &Matrix<E> {
    type Output = Matrix<E>;
    fn add(self, rhs: &Matrix<E>) -> Matrix<E> {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "matrix sum dimension mismatch"
        );
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }
}

impl<E: Element> Sub for &Matrix<E> {
    type Output = Matrix<E>;
    fn sub(self, rhs: &Matrix<E>) -> Matrix<E> {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "matrix difference dimension mismatch"
        );
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| a - b)
                .collect(),
        }
    }
}

impl<E: Element> Neg for &Matrix<E> {
    type Output = Matrix<E>;
    fn neg(self) -> Matrix<E> {
        self.map(|x| -x)
    }
}

impl<E: fmt::Debug> fmt::Debug for Matrix<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[i * self.cols..(i + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

/// Symmetric bilinear form. Symmetrised exactly on construction.
#[derive(Clone, PartialEq, Debug)]
pub struct SymBilinear<T> {
    m: Matrix<T>,
}

impl<T: Real> SymBilinear<T> {
    /// Panics if `m` is not square.
    pub fn new(m: Matrix<T>) -> Self {
        assert!(m.is_square(), "bilinear form must be square");
        Self { m: m.symmetrized() }
    }

    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.m
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.m
    }

    pub fn apply(&self, u: &[T], v: &[T]) -> T {
        let mv = self.m.mat_vec(v);
        u.iter()
            .zip(&mv)
            .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
    }

    pub fn det(&self) -> Result<T> {
        self.m.det()
    }

    /// `|det| > eps`.
    pub fn is_nondegenerate(&self, eps: T) -> bool {
        self.m.det().map(|d| d.abs() > eps).unwrap_or(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_det_and_inverse() {
        let a = Matrix::from_rows(&[vec![4.0, 3.0], vec![6.0, 3.0]]);
        assert!((a.det().unwrap() + 6.0).abs() < 1e-14);
        let inv = a.inverse().unwrap();
        let prod = &a * &inv;
        assert!((&prod - &Matrix::identity(2)).max_abs() < 1e-14);
    }

    #[test]
    fn singular_matrix_has_zero_det_and_no_inverse() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert_eq!(a.det().unwrap(), 0.0);
        assert_eq!(a.inverse().unwrap_err(), SmallMatError::Singular);
    }

    #[test]
    fn oversize_matrix_rejected() {
        let a = Matrix::<f64>::identity(9);
        assert!(matches!(
            a.square_dim(),
            Err(SmallMatError::DimensionTooLarge { dim: 9, max: 8 })
        ));
    }

    #[test]
    fn sym_bilinear_symmetrizes() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![4.0, 1.0]]);
        let b = SymBilinear::new(m);
        assert_eq!(b.matrix()[(0, 1)], 3.0);
        assert_eq!(b.matrix()[(1, 0)], 3.0);
        assert_eq!(b.apply(&[1.0, 0.0], &[0.0, 1.0]), 3.0);
    }

    #[test]
    fn complex_solve() {
        let i = Complex::new(0.0, 1.0);
        let one = Complex::new(1.0, 0.0);
        let a = Matrix::from_rows(&[vec![one, i], vec![-i, one + one]]);
        let b = Matrix::from_rows(&[vec![one], vec![i]]);
        let x = a.solve(&b).unwrap();
        let r = &(&a * &x) - &b;
        assert!(r.max_abs() < 1e-14);
    }

    #[test]
    fn works_for_f32() {
        let a = Matrix::<f32>::from_diagonal(&[2.0, 4.0]);
        assert_eq!(a.det().unwrap(), 8.0);
    }
}
