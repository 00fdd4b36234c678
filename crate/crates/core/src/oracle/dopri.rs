use super::{contract, OracleError, Result};
use crate::fields::{christoffel, FieldError, MetricField};

/// Number of uniformly spaced output times in `[0, T]`.
pub const OUTPUT_TIMES: usize = 64;

const RTOL: f64 = 1e-10;
const ATOL: f64 = 1e-12;
const MAX_STEPS: usize = 200_000;

// the system is autonomous, so the stage times are not needed
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IntegratorStats {
    pub steps: usize,
    pub rejected: usize,
    /// Largest accepted scaled local error estimate.
    pub max_local_error: f64,
}

/// Geodesic sampled at uniform times.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicTrajectory {
    pub times: Vec<f64>,
    pub positions: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
    /// `x''` from the geodesic equation of `g`.
    pub accelerations: Vec<Vec<f64>>,
    pub stats: IntegratorStats,
    /// Integration stopped at the chart boundary before `T`.
    pub left_chart: bool,
}

fn rhs(g: &MetricField<f64>, y: &[f64]) -> std::result::Result<Vec<f64>, FieldError> {
    let n = y.len() / 2;
    let (x, v) = y.split_at(n);
    let acc = contract(&christoffel(g, x)?, v);
    Ok(v.iter()
        .copied()
        .chain(acc.into_iter().map(|a| -a))
        .collect())
}

/// Adaptive Dormand-Prince 5(4) integration of the geodesic equation of `g`
/// from `(p0, v0)` over `[0, t_end]`.
///
/// Steps are shortened to land on the output times, so the samples are
/// integrator nodes rather than interpolants. Leaving the chart box ends the
/// integration and sets [`GeodesicTrajectory::left_chart`].
pub fn integrate_geodesic(
    g: &MetricField<f64>,
    p0: &[f64],
    v0: &[f64],
    t_end: f64,
) -> Result<GeodesicTrajectory> {
    let n = g.dim();
    if p0.len() != n || v0.len() != n {
        return Err(FieldError::Dimension("initial data does not fit the chart".into()).into());
    }
    if !g.chart().contains(p0) {
        return Err(OracleError::LeftChart { point: p0.to_vec() });
    }
    let outputs: Vec<f64> = (0..OUTPUT_TIMES)
        .map(|k| t_end * k as f64 / (OUTPUT_TIMES - 1) as f64)
        .collect();
    let mut y: Vec<f64> = p0.iter().chain(v0).copied().collect();
    let mut k1 = rhs(g, &y)?;
    let mut traj = GeodesicTrajectory {
        times: vec![0.0],
        positions: vec![p0.to_vec()],
        velocities: vec![v0.to_vec()],
        accelerations: vec![k1[n..].to_vec()],
        stats: IntegratorStats::default(),
        left_chart: false,
    };
    let mut t = 0.0;
    let mut h_prop = 1e-2 * t_end.max(1e-12);
    let mut next = 1;
    let mut stage = vec![vec![0.0; 2 * n]; 7];
    while next < outputs.len() {
        if traj.stats.steps + traj.stats.rejected >= MAX_STEPS {
            return Err(OracleError::StepFailure { t });
        }
        let target = outputs[next];
        let lands = h_prop >= target - t;
        let h = if lands { target - t } else { h_prop };
        if !(h > 1e-14 * (1.0 + t.abs())) {
            return Err(OracleError::StepFailure { t });
        }
        stage[0].clone_from(&k1);
        let mut left = false;
        for s in 1..7 {
            let ys: Vec<f64> = (0..2 * n)
                .map(|i| y[i] + h * (0..s).map(|j| A[s][j] * stage[j][i]).sum::<f64>())
                .collect();
            match rhs(g, &ys) {
                Ok(k) => stage[s] = k,
                Err(e) => {
                    if g.chart().contains(&ys[..n]) {
                        return Err(e.into());
                    }
                    left = true;
                    break;
                }
            }
        }
        if left {
            traj.left_chart = true;
            break;
        }
        let y_new: Vec<f64> = (0..2 * n)
            .map(|i| y[i] + h * (0..7).map(|j| B5[j] * stage[j][i]).sum::<f64>())
            .collect();
        let mut err = 0.0_f64;
        for i in 0..2 * n {
            let e = h * (0..7).map(|j| (B5[j] - B4[j]) * stage[j][i]).sum::<f64>();
            let scale = ATOL + RTOL * y[i].abs().max(y_new[i].abs());
            err = err.max(e.abs() / scale);
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        if err <= 1.0 {
            if !g.chart().contains(&y_new[..n]) {
                traj.left_chart = true;
                break;
            }
            traj.stats.steps += 1;
            traj.stats.max_local_error = traj.stats.max_local_error.max(err);
            t = if lands { target } else { t + h };
            y = y_new;
            k1 = stage[6].clone();
            if lands {
                traj.times.push(t);
                traj.positions.push(y[..n].to_vec());
                traj.velocities.push(y[n..].to_vec());
                traj.accelerations.push(k1[n..].to_vec());
                next += 1;
            } else {
                h_prop = h * factor;
            }
        } else {
            traj.stats.rejected += 1;
            h_prop = h * factor;
        }
    }
    Ok(traj)
}
