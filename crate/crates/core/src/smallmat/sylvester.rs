use super::{eigen, Matrix, Result, SmallMatError};
use crate::scalar::Real;

/// Solves `X L2 - L1 X = C` for `X` (r×s).
///
/// The spectra of `L1` and `L2` must be separated by more than
/// `1e-8 (1 + |L1| + |L2|)`.
pub fn sylvester_solve<T: Real>(
    l1: &Matrix<T>,
    l2: &Matrix<T>,
    c: &Matrix<T>,
) -> Result<Matrix<T>> {
    let tol = T::lit(1e-8) * (T::one() + l1.frobenius_norm() + l2.frobenius_norm());
    sylvester_solve_with_gap(l1, l2, c, tol)
}

/// As [`sylvester_solve`] with an explicit spectral gap tolerance.
pub fn sylvester_solve_with_gap<T: Real>(
    l1: &Matrix<T>,
    l2: &Matrix<T>,
    c: &Matrix<T>,
    gap_tol: T,
) -> Result<Matrix<T>> {
    let r = l1.square_dim()?;
    let s = l2.square_dim()?;
    if c.rows() != r || c.cols() != s {
        return Err(SmallMatError::DimensionMismatch(format!(
            "right-hand side is {}x{}, expected {r}x{s}",
            c.rows(),
            c.cols()
        )));
    }
    let eig_tol = T::lit(1e-12);
    let gap = eigen(l1, eig_tol)?.gap_to(&eigen(l2, eig_tol)?);
    if gap <= gap_tol {
        return Err(SmallMatError::SpectraOverlap {
            gap: gap.to_f64_lossy(),
            tol: gap_tol.to_f64_lossy(),
        });
    }
    // unknown X[i][j] sits at index i*s + j
    let k = Matrix::from_fn(r * s, r * s, |row, col| {
        let (i, j) = (row / s, row % s);
        let (a, b) = (col / s, col % s);
        let mut v = T::zero();
        if i == a {
            v += l2[(b, j)];
        }
        if b == j {
            v -= l1[(i, a)];
        }
        v
    });
    let rhs = Matrix::from_row_slice(r * s, 1, c.as_slice());
    let x = k.solve(&rhs)?;
    Ok(Matrix::from_row_slice(r, s, x.as_slice()))
}
