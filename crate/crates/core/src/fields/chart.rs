use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use super::{FieldError, Result};
use crate::scalar::Real;

/// Coordinate box with a distinguished base point.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart<T> {
    lo: Vec<T>,
    hi: Vec<T>,
    base: Vec<T>,
}

impl<T: Real> Chart<T> {
    pub fn new(lo: Vec<T>, hi: Vec<T>, base: Vec<T>) -> Result<Self> {
        let n = lo.len();
        if n == 0 || hi.len() != n || base.len() != n {
            return Err(FieldError::InvalidChart(
                "bounds and base point must share a positive dimension".into(),
            ));
        }
        for k in 0..n {
            if !(lo[k] < hi[k]) {
                return Err(FieldError::InvalidChart(format!(
                    "empty interval on coordinate {k}"
                )));
            }
            if !(lo[k] <= base[k] && base[k] <= hi[k]) {
                return Err(FieldError::InvalidChart(format!(
                    "base point outside the box on coordinate {k}"
                )));
            }
        }
        Ok(Self { lo, hi, base })
    }

    /// Box `[lo, hi]^dim` with the given base point.
    pub fn cube(dim: usize, lo: f64, hi: f64, base: &[f64]) -> Result<Self> {
        Self::new(
            vec![T::lit(lo); dim],
            vec![T::lit(hi); dim],
            base.iter().map(|&x| T::lit(x)).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[T] {
        &self.lo
    }

    pub fn hi(&self) -> &[T] {
        &self.hi
    }

    pub fn base(&self) -> &[T] {
        &self.base
    }

    pub fn contains(&self, p: &[T]) -> bool {
        p.len() == self.dim()
            && p.iter()
                .enumerate()
                .all(|(k, &x)| self.lo[k] <= x && x <= self.hi[k])
    }

    /// `n` points uniform in the box, from a splitmix64 stream seeded by `seed`.
    pub fn sample_points(&self, n: usize, seed: u64) -> Vec<Vec<T>> {
        let mut rng = SplitMix64::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                (0..self.dim())
                    .map(|k| {
                        let u: f64 = rng.random();
                        self.lo[k] + (self.hi[k] - self.lo[k]) * T::lit(u)
                    })
                    .collect()
            })
            .collect()
    }

    /// Cartesian product; this chart's coordinates come first.
    pub fn product(&self, other: &Self) -> Self {
        let cat = |a: &[T], b: &[T]| a.iter().chain(b).copied().collect::<Vec<_>>();
        Self {
            lo: cat(&self.lo, &other.lo),
            hi: cat(&self.hi, &other.hi),
            base: cat(&self.base, &other.base),
        }
    }

    /// The same box with a different base point.
    pub fn with_base(&self, base: Vec<T>) -> Result<Self> {
        Self::new(self.lo.clone(), self.hi.clone(), base)
    }

    /// Uniform lattice with `k` nodes per axis, last coordinate fastest.
    pub fn lattice(&self, k: usize) -> Vec<Vec<T>> {
        let n = self.dim();
        let total = k.pow(n as u32);
        (0..total)
            .map(|mut idx| {
                let mut p = vec![T::zero(); n];
                for axis in (0..n).rev() {
                    let i = idx % k;
                    idx /= k;
                    let t = if k > 1 {
                        T::from_usize_lossy(i) / T::from_usize_lossy(k - 1)
                    } else {
                        T::lit(0.5)
                    };
                    p[axis] = self.lo[axis] + (self.hi[axis] - self.lo[axis]) * t;
                }
                p
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_are_reproducible_and_inside() {
        let c = Chart::<f64>::new(vec![0.0, -1.0], vec![1.0, 2.0], vec![0.5, 0.0]).unwrap();
        let a = c.sample_points(50, 42);
        assert_eq!(a, c.sample_points(50, 42));
        assert_ne!(a, c.sample_points(50, 43));
        assert!(a.iter().all(|p| c.contains(p)));
    }

    #[test]
    fn rejects_bad_boxes() {
        assert!(Chart::<f64>::new(vec![1.0], vec![1.0], vec![1.0]).is_err());
        assert!(Chart::<f64>::new(vec![0.0], vec![1.0], vec![2.0]).is_err());
    }

    #[test]
    fn lattice_covers_corners() {
        let c = Chart::<f64>::cube(2, 0.0, 1.0, &[0.5, 0.5]).unwrap();
        let l = c.lattice(3);
        assert_eq!(l.len(), 9);
        assert_eq!(l[0], vec![0.0, 0.0]);
        assert_eq!(l[1], vec![0.0, 0.5]);
        assert_eq!(l[8], vec![1.0, 1.0]);
    }
}
