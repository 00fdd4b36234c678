//! Dynamical check of geodesic equivalence: integrate geodesics of `g` and
//! measure how far their acceleration with respect to `gbar` is from being
//! tangent.

mod dopri;

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;
use thiserror::Error;

use crate::fields::{christoffel, FieldError, MetricField, Tensor3};

pub use dopri::{integrate_geodesic, GeodesicTrajectory, IntegratorStats, OUTPUT_TIMES};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("step size underflow at t = {t}")]
    StepFailure { t: f64 },
    #[error("initial point {point:?} lies outside the chart")]
    LeftChart { point: Vec<f64> },
    #[error("zero velocity at t = {t}")]
    ZeroVelocity { t: f64 },
    #[error("could not find a non-null direction after {tries} tries")]
    OnlyNullDirections { tries: usize },
}

pub type Result<T, E = OracleError> = std::result::Result<T, E>;

pub(crate) fn contract(gamma: &Tensor3<f64>, v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| {
            let mut s = 0.0;
            for j in 0..n {
                for k in 0..n {
                    s += gamma[(i, j, k)] * v[j] * v[k];
                }
            }
            s
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Collinearity defects of one trajectory against `gbar`, one per sample.
pub fn sample_defects(traj: &GeodesicTrajectory, gbar: &MetricField<f64>) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(traj.times.len());
    for k in 0..traj.times.len() {
        let (x, v, acc) = (
            &traj.positions[k],
            &traj.velocities[k],
            &traj.accelerations[k],
        );
        let vv = dot(v, v);
        if !(vv > 0.0) {
            return Err(OracleError::ZeroVelocity { t: traj.times[k] });
        }
        let bar = contract(&christoffel(gbar, x)?, v);
        let a: Vec<f64> = acc.iter().zip(&bar).map(|(p, q)| p + q).collect();
        let along = dot(&a, v) / vv;
        let perp: f64 = a
            .iter()
            .zip(v)
            .map(|(ai, vi)| (ai - along * vi).powi(2))
            .sum::<f64>()
            .sqrt();
        out.push(perp / (1.0 + dot(&a, &a).sqrt()));
    }
    Ok(out)
}

/// Aggregated defects over a batch of trajectories.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DefectReport {
    /// Largest defect along each trajectory, in trajectory order.
    pub per_trajectory: Vec<f64>,
    pub max: f64,
    pub mean: f64,
    /// Directions rejected as nearly null.
    pub skipped_null: usize,
    /// Trajectories cut short at the chart boundary.
    pub box_exits: usize,
    /// Largest relative drift of `g(x', x')` over all trajectories.
    pub max_energy_drift: f64,
}

impl DefectReport {
    fn from_parts(parts: Vec<(f64, bool, f64)>, skipped_null: usize) -> Self {
        let per: Vec<f64> = parts.iter().map(|p| p.0).collect();
        let max = per.iter().copied().fold(0.0, f64::max);
        let mean = if per.is_empty() {
            0.0
        } else {
            per.iter().sum::<f64>() / per.len() as f64
        };
        Self {
            max,
            mean,
            per_trajectory: per,
            skipped_null,
            box_exits: parts.iter().filter(|p| p.1).count(),
            max_energy_drift: parts.iter().map(|p| p.2).fold(0.0, f64::max),
        }
    }
}

/// Defect report of a single trajectory.
pub fn unparam_defect(traj: &GeodesicTrajectory, gbar: &MetricField<f64>) -> Result<DefectReport> {
    let d = sample_defects(traj, gbar)?;
    let worst = d.iter().copied().fold(0.0, f64::max);
    Ok(DefectReport::from_parts(
        vec![(worst, traj.left_chart, 0.0)],
        0,
    ))
}

/// Relative drift of the energy `g(x', x')` along a trajectory.
pub fn energy_drift(traj: &GeodesicTrajectory, g: &MetricField<f64>) -> Result<f64> {
    let energy = |k: usize| -> Result<f64> {
        let gv = g.value(&traj.positions[k])?;
        let v = &traj.velocities[k];
        Ok(dot(v, &gv.mat_vec(v)))
    };
    let e0 = energy(0)?;
    let mut worst = 0.0_f64;
    for k in 1..traj.times.len() {
        worst = worst.max((energy(k)? - e0).abs() / e0.abs().max(1e-300));
    }
    Ok(worst)
}

/// Batch settings for [`run_oracle`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub trajectories: usize,
    pub seed: u64,
    /// Integration time; by default a quarter of the narrowest box side.
    pub duration: Option<f64>,
}

/// Directions with `|g(v, v)|` below this are treated as null.
pub const NULL_CUTOFF: f64 = 1e-3;
const MAX_DIRECTION_TRIES: usize = 1000;

/// Integrates `trajectories` geodesics of `g` from seeded random starts in
/// the middle half of the box, with unit directions uniform on the sphere,
/// and collects their defects against `gbar`.
pub fn run_oracle(
    g: &MetricField<f64>,
    gbar: &MetricField<f64>,
    cfg: &OracleConfig,
) -> Result<DefectReport> {
    let chart = g.chart();
    let n = chart.dim();
    let mut rng = SplitMix64::seed_from_u64(cfg.seed);
    let duration = cfg.duration.unwrap_or_else(|| {
        0.25 * (0..n)
            .map(|k| chart.hi()[k] - chart.lo()[k])
            .fold(f64::INFINITY, f64::min)
    });
    let mut starts = Vec::with_capacity(cfg.trajectories);
    let mut skipped = 0;
    for _ in 0..cfg.trajectories {
        let p: Vec<f64> = (0..n)
            .map(|k| {
                let u: f64 = rng.random();
                chart.lo()[k] + (0.25 + 0.5 * u) * (chart.hi()[k] - chart.lo()[k])
            })
            .collect();
        let gp = g.at(&p)?;
        let mut found = None;
        for _ in 0..MAX_DIRECTION_TRIES {
            let raw: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let norm = dot(&raw, &raw).sqrt();
            if !(norm > 1e-12) {
                continue;
            }
            let v: Vec<f64> = raw.iter().map(|x| x / norm).collect();
            if dot(&v, &gp.mat_vec(&v)).abs() < NULL_CUTOFF {
                skipped += 1;
                continue;
            }
            found = Some(v);
            break;
        }
        let v = found.ok_or(OracleError::OnlyNullDirections {
            tries: MAX_DIRECTION_TRIES,
        })?;
        starts.push((p, v));
    }
    let parts: Vec<Result<(f64, bool, f64)>> = starts
        .par_iter()
        .map(|(p, v)| {
            let traj = integrate_geodesic(g, p, v, duration)?;
            let worst = sample_defects(&traj, gbar)?.into_iter().fold(0.0, f64::max);
            Ok((worst, traj.left_chart, energy_drift(&traj, g)?))
        })
        .collect();
    let parts = parts.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(DefectReport::from_parts(parts, skipped))
}
