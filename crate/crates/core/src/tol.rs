//! Tolerances shared by the constructions and their checks.

use crate::scalar::Real;

/// Determinant floor below which a metric counts as degenerate.
pub const EPS_DEG: f64 = 1e-10;

/// Central-difference step factor: `h_k = FD_STEP * (1 + |x_k|)`.
pub const FD_STEP: f64 = 6e-6;

/// Thresholds graded by how many finite-difference layers a check passes
/// through.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ladder {
    /// Checks whose derivatives are all exact.
    pub exact: f64,
    /// One finite-difference layer.
    pub one_fd: f64,
    /// Two finite-difference layers.
    pub two_fd: f64,
}

impl Default for Ladder {
    fn default() -> Self {
        Self {
            exact: 1e-9,
            one_fd: 1e-5,
            two_fd: 1e-4,
        }
    }
}

impl Ladder {
    /// The default ladder with every rung multiplied by `s`.
    pub fn scaled(s: f64) -> Self {
        let d = Self::default();
        Self {
            exact: d.exact * s,
            one_fd: d.one_fd * s,
            two_fd: d.two_fd * s,
        }
    }
}

/// Minimal separation of eigenvalue groups: `1e-6 (1 + |L|)`.
pub fn eps_gap<T: Real>(norm_l: T) -> T {
    T::lit(1e-6) * (T::one() + norm_l)
}

pub fn fd_step<T: Real>(x: T) -> T {
    T::lit(FD_STEP) * (T::one() + x.abs())
}
