use geq_core::corpus;
use geq_core::exprdsl::parse;
use geq_core::fields::{Chart, FieldError, MetricField};
use geq_core::oracle::{
    integrate_geodesic, run_oracle, sample_defects, OracleConfig, OracleError, OUTPUT_TIMES,
};
use geq_core::smallmat::Matrix;

fn chart(n: usize, lo: f64, hi: f64, base: f64) -> Chart<f64> {
    Chart::cube(n, lo, hi, &vec![base; n]).unwrap()
}

fn metric(c: &Chart<f64>, src: &[&str]) -> MetricField<f64> {
    let n = c.dim();
    MetricField::from_exprs(
        c.clone(),
        src.iter().map(|s| parse(s, n).unwrap()).collect(),
    )
    .unwrap()
}

fn cfg(seed: u64) -> OracleConfig {
    OracleConfig {
        trajectories: 20,
        seed,
        duration: None,
    }
}

#[test]
fn euclidean_geodesics_are_lines() {
    let c = chart(3, -2.0, 2.0, 0.0);
    let g = MetricField::constant(c, &Matrix::identity(3)).unwrap();
    let (p0, v0) = ([0.1, -0.2, 0.3], [0.6, 0.0, -0.8]);
    let traj = integrate_geodesic(&g, &p0, &v0, 1.0).unwrap();
    assert_eq!(traj.times.len(), OUTPUT_TIMES);
    assert!(!traj.left_chart);
    for (t, x) in traj.times.iter().zip(&traj.positions) {
        for k in 0..3 {
            assert!((x[k] - (p0[k] + t * v0[k])).abs() < 1e-13);
        }
    }
    assert_eq!(*traj.times.last().unwrap(), 1.0);
}

#[test]
fn polar_geodesic_matches_closed_form() {
    // the line x = 1 in polar coordinates: r = sqrt(1 + t^2), theta = atan(t)
    let c = Chart::new(vec![0.5, -1.0], vec![2.0, 1.0], vec![1.0, 0.0]).unwrap();
    let g = metric(&c, &["1", "0", "0", "x0^2"]);
    let traj = integrate_geodesic(&g, &[1.0, 0.0], &[0.0, 1.0], 0.5).unwrap();
    for (t, x) in traj.times.iter().zip(&traj.positions) {
        assert!((x[0] - (1.0 + t * t).sqrt()).abs() < 1e-8);
        assert!((x[1] - t.atan()).abs() < 1e-8);
    }
    assert!(geq_core::oracle::energy_drift(&traj, &g).unwrap() < 1e-8);
}

#[test]
fn box_exit_is_flagged() {
    let c = chart(2, 0.0, 1.0, 0.5);
    let g = MetricField::constant(c, &Matrix::identity(2)).unwrap();
    let traj = integrate_geodesic(&g, &[0.5, 0.5], &[1.0, 0.0], 2.0).unwrap();
    assert!(traj.left_chart);
    assert!(traj.positions.iter().all(|x| x[0] <= 1.0));
    assert!(traj.times.len() < OUTPUT_TIMES);
}

#[test]
fn proportional_metric_has_zero_defect() {
    let c = chart(2, 0.0, 1.0, 0.5);
    let g = metric(&c, &["1 + x0^2", "0.1*x1", "0", "2 + sin(x1)"]);
    let gb = metric(&c, &["3 + 3*x0^2", "0.3*x1", "0", "6 + 3*sin(x1)"]);
    let rep = run_oracle(&g, &gb, &cfg(1)).unwrap();
    assert_eq!(rep.per_trajectory.len(), 20);
    assert!(rep.max < 1e-10, "{}", rep.max);
}

#[test]
fn normal_form_pair_passes_and_unrelated_pair_fails() {
    for e in corpus::positive()
        .unwrap()
        .into_iter()
        .filter(|e| e.name == "lc2-sine" || e.name == "lc3-simple")
    {
        let rep = run_oracle(&e.g, &e.gbar, &cfg(42)).unwrap();
        assert!(rep.max <= 1e-5, "{}: {}", e.name, rep.max);
        assert!(rep.max_energy_drift < 1e-7);
    }
    for e in corpus::negative_controls().unwrap() {
        let rep = run_oracle(&e.g, &e.gbar, &cfg(42)).unwrap();
        assert!(rep.max > 1e-2, "{}: {}", e.name, rep.max);
    }
}

#[test]
fn runs_are_reproducible() {
    let e = corpus::positive()
        .unwrap()
        .into_iter()
        .find(|e| e.name == "lc3-indefinite")
        .unwrap();
    let a = run_oracle(&e.g, &e.gbar, &cfg(7)).unwrap();
    let b = run_oracle(&e.g, &e.gbar, &cfg(7)).unwrap();
    assert_eq!(a, b);
    let c = run_oracle(&e.g, &e.gbar, &cfg(8)).unwrap();
    assert_ne!(a.per_trajectory, c.per_trajectory);
}

#[test]
fn degenerate_metric_is_reported() {
    let c = chart(2, -1.0, 1.0, 0.0);
    let g = metric(&c, &["x0^2", "0", "0", "1"]);
    let flat = MetricField::constant(c.clone(), &Matrix::identity(2)).unwrap();
    let cfg = OracleConfig {
        trajectories: 200,
        seed: 3,
        duration: None,
    };
    // starts near x0 = 0 hit the degenerate line; the first failure is surfaced
    let err = (0..50)
        .map(|s| run_oracle(&g, &flat, &OracleConfig { seed: s, ..cfg }))
        .find_map(|r| r.err());
    assert!(
        matches!(
            err,
            Some(OracleError::Field(FieldError::DegenerateMetric { .. }))
        ),
        "{err:?}"
    );
    let traj = integrate_geodesic(&flat, &[0.0, 0.0], &[1.0, 0.0], 0.5).unwrap();
    assert!(sample_defects(&traj, &g).is_err());
}
