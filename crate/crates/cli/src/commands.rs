//! One function per subcommand. Each returns a [`Report`]; failures of a
//! construction on valid input become a failing report, malformed input an
//! error.

use std::path::Path;

use num_complex::Complex;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde_json::json;

use geq_core::equiv::{
    admissible_factorization, block_condition_residuals, compatibility_residual, compute_l,
    glue_fields, l_field, levi_civita_pair, projective_deformation, shifted_partner, split,
    topalov_sinjukov, EquivError, GlueInput, SplitReport,
};
use geq_core::fields::{nijenhuis, DerivativeMethod, MetricField, OperatorField};
use geq_core::oracle::{run_oracle, OracleConfig};
use geq_core::smallmat::{eigen, Matrix, ScalarFunction};
use geq_core::tol::{Ladder, EPS_DEG};

use crate::report::{Check, Report};
use crate::scene::{Scene, SceneFile, SpecFile};
use crate::CliError;

/// Flags shared by the subcommands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub points: usize,
    pub seed: u64,
    pub grid: usize,
    pub trajectories: usize,
    pub ladder: Ladder,
    /// Factor applied to the fixed thresholds outside the ladder.
    pub scale: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            points: 100,
            seed: 42,
            grid: 9,
            trajectories: 20,
            ladder: Ladder::default(),
            scale: 1.0,
        }
    }
}

const NIJENHUIS_EXACT: f64 = 1e-6;
const ALGEBRAIC: f64 = 1e-8;

fn input(path: &str, message: impl ToString) -> CliError {
    CliError::Input {
        path: path.into(),
        message: message.to_string(),
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| input(&name, e))?;
    serde_json::from_str(&text).map_err(|e| input(&name, e))
}

pub fn load_scene(path: &Path) -> Result<Scene, CliError> {
    read_json::<SceneFile>(path)?
        .validate()
        .map_err(|e| match e {
            CliError::Input { path: p, message } => CliError::Input {
                path: format!("{}: {p}", path.display()),
                message,
            },
            other => other,
        })
}

fn rows_of(m: &Matrix<f64>) -> Vec<Vec<f64>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn flat(m: &Matrix<f64>) -> Vec<f64> {
    rows_of(m).concat()
}

fn spectrum(l: &Matrix<f64>) -> Result<Vec<[f64; 2]>, CliError> {
    let s = eigen(l, 1e-12).map_err(EquivError::from)?;
    Ok(s.values().iter().map(|z| [z.re, z.im]).collect())
}

/// Runs a fallible body; a [`CliError::Check`] is folded into the report.
fn guarded(
    mut report: Report,
    body: impl FnOnce(&mut Report) -> Result<(), CliError>,
) -> Result<Report, CliError> {
    match body(&mut report) {
        Ok(()) => Ok(report),
        Err(CliError::Check { kind, message }) => {
            report.error = Some((kind, message));
            Ok(report)
        }
        Err(e) => Err(e),
    }
}

fn collect_points<T: Send>(
    points: &[Vec<f64>],
    f: impl Fn(&[f64]) -> Result<T, CliError> + Sync,
) -> Result<Vec<T>, CliError> {
    let out: Vec<Result<T, CliError>> = points.par_iter().map(|p| f(p)).collect();
    out.into_iter().collect()
}

struct PointCheck {
    residual: f64,
    nijenhuis: f64,
    self_adjoint: f64,
    flipped: bool,
}

/// The checks of `check`, shared by the commands that build a new pair.
fn check_pair(
    r: &mut Report,
    g: &MetricField<f64>,
    gbar: &MetricField<f64>,
    points: &[Vec<f64>],
    s: &Settings,
) -> Result<(), CliError> {
    let base = g.chart().base();
    let lb = compute_l(g, gbar, base)?;
    r.flag("flipped_base", lb.flipped);
    r.info("l_base", rows_of(&lb.l));
    r.info("rho_base", lb.rho);
    r.info("eigenvalues_base", spectrum(&lb.l)?);
    let l = l_field(g, gbar)?;
    let exact = l.derivative_method() == DerivativeMethod::Exact;
    r.info(
        "derivatives",
        if exact { "exact" } else { "finite_difference" },
    );
    let per = collect_points(points, |p| {
        let res = compatibility_residual(g, &l, p)?;
        let lp = l.value(p)?;
        let gl = &g.value(p)? * &lp;
        Ok(PointCheck {
            residual: res.value,
            nijenhuis: nijenhuis(&l, p)?.norm() / (1.0 + res.dl_norm),
            self_adjoint: gl.asymmetry() / (1.0 + gl.frobenius_norm()),
            flipped: compute_l(g, gbar, p)?.flipped,
        })
    })?;
    let col = |f: fn(&PointCheck) -> f64| per.iter().map(f).collect::<Vec<_>>();
    let (res_tol, nij_tol) = if exact {
        (s.ladder.exact, NIJENHUIS_EXACT * s.scale)
    } else {
        (s.ladder.one_fd, s.ladder.two_fd)
    };
    r.check("residual", Check::at_most(&col(|c| c.residual), res_tol));
    r.check("nijenhuis", Check::at_most(&col(|c| c.nijenhuis), nij_tol));
    r.check(
        "self_adjoint",
        Check::at_most(&col(|c| c.self_adjoint), s.ladder.exact),
    );
    r.flag("flipped_points", per.iter().filter(|c| c.flipped).count());
    Ok(())
}

pub fn cmd_check(scene: &Scene, s: &Settings) -> Result<Report, CliError> {
    guarded(Report::new("check", s.seed, s.points), |r| {
        let points = scene.chart.sample_points(s.points, s.seed);
        check_pair(r, &scene.g, &scene.gbar, &points, s)?;
        if let Some(v) = &scene.vector_field {
            let d = projective_deformation(v, &scene.g)?;
            let vals = collect_points(&points, |p| {
                Ok(compatibility_residual(&scene.g, &d.shifted, p)?.value)
            })?;
            r.check(
                "projective_deformation",
                Check::at_most(&vals, s.ladder.one_fd),
            );
            r.flag("projective_shift", d.shift);
            let size = collect_points(&points, |p| Ok(d.field.value(p)?.max_abs()))?;
            r.info(
                "projective_deformation_max",
                size.iter().copied().fold(0.0, f64::max),
            );
        }
        Ok(())
    })
}

/// Parses `"0,1|2"` into the first group, checking that the two groups
/// partition `0..n`.
pub fn parse_groups(src: &str, n: usize) -> Result<Vec<usize>, CliError> {
    let parts: Vec<&str> = src.split('|').collect();
    if parts.len() != 2 {
        return Err(input("--groups", "expected two groups separated by `|`"));
    }
    let mut seen = vec![false; n];
    let mut groups = Vec::with_capacity(2);
    for part in parts {
        let mut g = Vec::new();
        for tok in part.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let i: usize = tok
                .parse()
                .map_err(|_| input("--groups", format!("not an index: {tok:?}")))?;
            if i >= n || seen[i] {
                return Err(input(
                    "--groups",
                    format!("index {i} is out of range or repeated"),
                ));
            }
            seen[i] = true;
            g.push(i);
        }
        if g.is_empty() {
            return Err(input("--groups", "empty group"));
        }
        groups.push(g);
    }
    if seen.iter().any(|s| !s) {
        return Err(input("--groups", "groups do not cover every eigenvalue"));
    }
    let mut first = groups.swap_remove(0);
    first.sort_unstable();
    Ok(first)
}

pub fn write_json(path: &Path, v: &serde_json::Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(v).expect("grid serialises") + "\n";
    std::fs::write(path, text).map_err(|e| input("--export", format!("{}: {e}", path.display())))
}

fn grid_value(
    chart: &geq_core::fields::Chart<f64>,
    k: usize,
    fields: &[(&str, &geq_core::fields::MatrixField<f64>)],
) -> Result<serde_json::Value, CliError> {
    let nodes = collect_points(&chart.lattice(k), |p| {
        let mut node = serde_json::Map::new();
        node.insert("point".into(), json!(p));
        for (name, f) in fields {
            node.insert((*name).into(), json!(flat(&f.value(p)?)));
        }
        Ok(serde_json::Value::Object(node))
    })?;
    Ok(json!({
        "lattice": {
            "dim": chart.dim(),
            "k": k,
            "lo": chart.lo(),
            "hi": chart.hi(),
            "order": "row-major nodes, last coordinate fastest; matrices row-major",
        },
        "fields": fields.iter().map(|f| f.0).collect::<Vec<_>>(),
        "nodes": nodes,
    }))
}

pub fn cmd_split(
    scene: &Scene,
    groups: &str,
    export: Option<&Path>,
    s: &Settings,
) -> Result<Report, CliError> {
    let n = scene.chart.dim();
    let first = parse_groups(groups, n)?;
    let report = Report::new("split", s.seed, s.points);
    guarded(report, |r| {
        let points = scene.chart.sample_points(s.points, s.seed);
        let l = l_field(&scene.g, &scene.gbar)?;
        let l_base = l.value(scene.chart.base())?;
        r.info("eigenvalues_base", spectrum(&l_base)?);
        let fact = admissible_factorization(&l, &first, &points)?;
        // a vanishing eigenvalue is moved off zero by L -> L + c Id
        let (sr, fact, shift) = match split(&scene.g, &scene.gbar, &fact) {
            Err(EquivError::ZeroChiAtZero { .. }) => {
                let c = 1.0 + l_base.frobenius_norm();
                let gbar = shifted_partner(&scene.g, &scene.gbar, c)?;
                let fact = admissible_factorization(&l_field(&scene.g, &gbar)?, &first, &points)?;
                (split(&scene.g, &gbar, &fact)?, fact, c)
            }
            other => (other?, fact, 0.0),
        };
        r.flag("shift_applied", shift);
        r.info("r", fact.r());
        r.info("first_group", &first);
        let base = scene.chart.base();
        r.info("h_base", rows_of(&sr.h.value(base)?));
        r.info("hbar_base", rows_of(&sr.hbar.value(base)?));
        r.info("p1_base", rows_of(&sr.p1.value(base)?));
        let per: Vec<SplitReport> = collect_points(&points, |p| Ok(sr.verify(&[p.to_vec()])?))?;
        let col = |f: fn(&SplitReport) -> f64| per.iter().map(f).collect::<Vec<_>>();
        let (alg, ld) = (ALGEBRAIC * s.scale, &s.ladder);
        r.check(
            "h_symmetric",
            Check::at_most(&col(|x| x.h_asymmetry), ld.exact),
        );
        r.check(
            "hbar_symmetric",
            Check::at_most(&col(|x| x.hbar_asymmetry), ld.exact),
        );
        r.check(
            "h_nondegenerate",
            Check::above(&col(|x| x.h_min_abs_det), EPS_DEG),
        );
        r.check(
            "hbar_nondegenerate",
            Check::above(&col(|x| x.hbar_min_abs_det), EPS_DEG),
        );
        r.check(
            "partition_of_unity",
            Check::at_most(&col(|x| x.partition_of_unity), alg),
        );
        r.check(
            "g_orthogonality",
            Check::at_most(&col(|x| x.g_orthogonality), alg),
        );
        r.check(
            "gbar_orthogonality",
            Check::at_most(&col(|x| x.gbar_orthogonality), alg),
        );
        r.check(
            "nabla_h_p1",
            Check::at_most(&col(|x| x.nabla_h_p1), ld.two_fd),
        );
        r.check(
            "nabla_hbar_p1",
            Check::at_most(&col(|x| x.nabla_hbar_p1), ld.two_fd),
        );
        r.check("chi1_match", Check::at_most(&col(|x| x.chi1_mismatch), alg));
        r.check("chi2_match", Check::at_most(&col(|x| x.chi2_mismatch), alg));
        r.check(
            "bracket_defect",
            Check::at_most(&col(|x| x.bracket_defect), ld.one_fd),
        );
        if let Some(path) = export {
            let grid = grid_value(
                &scene.chart,
                s.grid,
                &[("h", &sr.h), ("hbar", &sr.hbar), ("p1", &sr.p1)],
            )?;
            write_json(path, &grid)?;
            r.info("grid_nodes", s.grid.pow(n as u32));
        }
        Ok(())
    })
}

fn oracle_checks(
    r: &mut Report,
    g: &MetricField<f64>,
    gbar: &MetricField<f64>,
    s: &Settings,
) -> Result<(), CliError> {
    let cfg = OracleConfig {
        trajectories: s.trajectories,
        seed: s.seed,
        duration: None,
    };
    let rep = run_oracle(g, gbar, &cfg)?;
    r.check(
        "oracle_defect",
        Check::at_most(&rep.per_trajectory, s.ladder.one_fd),
    );
    r.flag("oracle_skipped_null", rep.skipped_null);
    r.flag("oracle_box_exits", rep.box_exits);
    r.info("oracle_max_energy_drift", rep.max_energy_drift);
    r.info("oracle_trajectories", rep.per_trajectory.len());
    Ok(())
}

pub fn cmd_glue(
    a: &Scene,
    b: &Scene,
    export: Option<&Path>,
    s: &Settings,
) -> Result<Report, CliError> {
    let chart = a.chart.product(&b.chart);
    let points = chart.sample_points(s.points, s.seed);
    let inp = GlueInput {
        h1: a.g.clone(),
        hbar1: a.gbar.clone(),
        l1: None,
        h2: b.g.clone(),
        hbar2: b.gbar.clone(),
        l2: None,
    };
    let glued = glue_fields(&inp, &points)?;
    guarded(Report::new("glue", s.seed, s.points), |r| {
        r.flag("parity_corrected", glued.parity_corrected);
        r.info("r", glued.r);
        r.info("g_base", rows_of(&glued.g.value(chart.base())?));
        r.info("gbar_base", rows_of(&glued.gbar.value(chart.base())?));
        check_pair(r, &glued.g, &glued.gbar, &points, s)?;
        let l = l_field(&glued.g, &glued.gbar)?;
        let blocks = collect_points(&points, |p| {
            Ok(block_condition_residuals(&glued.g, &l, glued.r, p)?)
        })?;
        r.check(
            "condition_1",
            Check::at_most(
                &blocks.iter().map(|b| b.c1).collect::<Vec<_>>(),
                s.ladder.one_fd,
            ),
        );
        r.check(
            "condition_2",
            Check::at_most(
                &blocks.iter().map(|b| b.c2).collect::<Vec<_>>(),
                s.ladder.one_fd,
            ),
        );
        r.check(
            "condition_3",
            Check::at_most(
                &blocks.iter().map(|b| b.c3).collect::<Vec<_>>(),
                s.ladder.one_fd,
            ),
        );
        oracle_checks(r, &glued.g, &glued.gbar, s)?;
        if let Some(path) = export {
            write_json(
                path,
                &grid_value(&chart, s.grid, &[("g", &glued.g), ("gbar", &glued.gbar)])?,
            )?;
            r.info("grid_nodes", s.grid.pow(chart.dim() as u32));
        }
        Ok(())
    })
}

/// Parses `poly:c0,c1,...`, `recip:c`, `exp` or `id` (the constant 1).
pub fn parse_function(src: &str) -> Result<ScalarFunction<f64>, CliError> {
    let num = |t: &str| -> Result<f64, CliError> {
        t.trim()
            .parse::<f64>()
            .map_err(|_| input("--f", format!("not a number: {t:?}")))
    };
    let c = |x: f64| Complex::new(x, 0.0);
    match src.split_once(':') {
        None if src == "exp" => Ok(ScalarFunction::Exp),
        None if src == "id" => Ok(ScalarFunction::Polynomial(vec![c(1.0)])),
        Some(("poly", rest)) => {
            let coeffs = rest
                .split(',')
                .map(|t| num(t).map(c))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(ScalarFunction::Polynomial(coeffs))
        }
        Some(("recip", rest)) => Ok(ScalarFunction::Reciprocal(c(num(rest)?))),
        _ => Err(input(
            "--f",
            format!("unknown function {src:?}; expected poly:.., recip:c, exp or id"),
        )),
    }
}

/// Rejects `1/(z - c)` when `c` is an eigenvalue of `L` at a sampled point.
fn reciprocal_domain(l: &OperatorField<f64>, c: f64, points: &[Vec<f64>]) -> Result<(), CliError> {
    for p in points {
        for [re, im] in spectrum(&l.value(p)?)? {
            let d = Complex::new(re - c, im).norm();
            if d <= 1e-12 * (1.0 + c.abs()) || d <= 1e-9 {
                return Err(input(
                    "--f",
                    format!("DomainViolation: pole {c} meets eigenvalue {re}{im:+}i at {p:?}"),
                ));
            }
        }
    }
    Ok(())
}

pub fn cmd_ts(scene: &Scene, f_src: &str, s: &Settings) -> Result<Report, CliError> {
    let f = parse_function(f_src)?;
    let points = scene.chart.sample_points(s.points, s.seed);
    if let ScalarFunction::Reciprocal(c) = &f {
        let l = l_field(&scene.g, &scene.gbar)?;
        let mut probe = vec![scene.chart.base().to_vec()];
        probe.extend(points.iter().cloned());
        reciprocal_domain(&l, c.re, &probe)?;
    }
    let (gf, gbf) = topalov_sinjukov(&scene.g, &scene.gbar, &f, &points)?;
    let mut report = guarded(Report::new("ts", s.seed, s.points), |r| {
        check_pair(r, &gf, &gbf, &points, s)
    })?;
    report.info("f", f_src);
    Ok(report)
}

pub fn cmd_generate(spec: &SpecFile) -> Result<SceneFile, CliError> {
    let spec = spec.validate()?;
    let (g, gbar) = levi_civita_pair(&spec)?;
    Ok(SceneFile::from_fields(&g, &gbar).expect("normal forms are closed form"))
}

pub fn cmd_oracle(scene: &Scene, s: &Settings) -> Result<Report, CliError> {
    guarded(Report::new("oracle", s.seed, s.trajectories), |r| {
        oracle_checks(r, &scene.g, &scene.gbar, s)
    })
}
