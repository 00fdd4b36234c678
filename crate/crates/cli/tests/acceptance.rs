//! Acceptance suite, one test per criterion.

use std::path::PathBuf;
use std::process::Command;

use num_complex::Complex;

use geq_cli::scene::SceneFile;
use geq_core::corpus::{self, CorpusEntry};
use geq_core::equiv::{
    admissible_factorization, block_condition_residuals, charpoly_differential_residual,
    compatibility_residual, function_of_l, glue, glue_fields, l_field, levi_civita_pair,
    projective_deformation, reconstruct_gbar, spectral_groups, split, topalov_sinjukov, GlueInput,
    LeviCivitaSpec,
};
use geq_core::exprdsl::parse;
use geq_core::fields::{nijenhuis, Chart, MetricField, OperatorField, VectorField};
use geq_core::oracle::{run_oracle, OracleConfig};
use geq_core::smallmat::{eigen, Matrix, ScalarFunction};
use geq_core::tol::{Ladder, EPS_DEG};

const POINTS: usize = 100;
const SEED: u64 = 42;
const TRAJECTORIES: usize = 20;

const LADDER: Ladder = Ladder {
    exact: 1e-9,
    one_fd: 1e-5,
    two_fd: 1e-4,
};
const NIJENHUIS_TOL: f64 = 1e-6;
const ALGEBRAIC_TOL: f64 = 1e-8;
const ROUND_TRIP_TOL: f64 = 1e-12;
const KILLING_TOL: f64 = 1e-12;
const MARGIN: f64 = 1e3;

fn points(e: &CorpusEntry) -> Vec<Vec<f64>> {
    e.g.chart().sample_points(POINTS, SEED)
}

fn oracle(g: &MetricField<f64>, gbar: &MetricField<f64>) -> f64 {
    run_oracle(
        g,
        gbar,
        &OracleConfig {
            trajectories: TRAJECTORIES,
            seed: SEED,
            duration: None,
        },
    )
    .unwrap()
    .max
}

fn max_residual(g: &MetricField<f64>, l: &OperatorField<f64>, pts: &[Vec<f64>]) -> f64 {
    pts.iter()
        .map(|p| compatibility_residual(g, l, p).unwrap().value)
        .fold(0.0, f64::max)
}

fn ex(s: &str, n: usize) -> geq_core::exprdsl::Expr {
    parse(s, n).unwrap()
}

fn metric(c: &Chart<f64>, src: &[&str]) -> MetricField<f64> {
    MetricField::from_exprs(c.clone(), src.iter().map(|s| ex(s, c.dim())).collect()).unwrap()
}

#[test]
fn criterion_1_corpus_soundness() {
    let pos = corpus::positive().unwrap();
    assert!(pos.iter().filter(|e| e.spec.is_some()).count() >= 10);
    for e in &pos {
        let l = l_field(&e.g, &e.gbar).unwrap();
        let r = max_residual(&e.g, &l, &points(e));
        let d = oracle(&e.g, &e.gbar);
        println!("{:24} residual {r:.3e} oracle {d:.3e}", e.name);
        assert!(r <= LADDER.exact, "{}: residual {r}", e.name);
        assert!(d <= LADDER.one_fd, "{}: oracle {d}", e.name);
    }
    for e in corpus::negative_controls().unwrap() {
        let l = l_field(&e.g, &e.gbar).unwrap();
        let r = max_residual(&e.g, &l, &points(&e));
        let d = oracle(&e.g, &e.gbar);
        println!("{:24} residual {r:.3e} oracle {d:.3e}", e.name);
        assert!(r >= MARGIN * LADDER.exact, "{}: residual {r}", e.name);
        assert!(d >= MARGIN * LADDER.one_fd, "{}: oracle {d}", e.name);
    }
}

/// `c` below every real part of the spectrum of `L` at the base point.
fn pole_below(l: &OperatorField<f64>, e: &CorpusEntry) -> f64 {
    let lb = l.value(e.g.chart().base()).unwrap();
    eigen(&lb, 1e-12)
        .unwrap()
        .values()
        .iter()
        .map(|z| z.re)
        .fold(f64::INFINITY, f64::min)
        - 1.0
}

fn family(c: f64) -> Vec<(&'static str, ScalarFunction<f64>)> {
    let r = |x: f64| Complex::new(x, 0.0);
    vec![
        ("z", ScalarFunction::Polynomial(vec![r(0.0), r(1.0)])),
        (
            "z^2",
            ScalarFunction::Polynomial(vec![r(0.0), r(0.0), r(1.0)]),
        ),
        ("1/(z-c)", ScalarFunction::Reciprocal(r(c))),
        ("exp", ScalarFunction::Exp),
    ]
}

#[test]
fn criterion_2_nijenhuis() {
    for e in corpus::positive().unwrap() {
        let l = l_field(&e.g, &e.gbar).unwrap();
        let pts = points(&e);
        for p in &pts {
            let r = compatibility_residual(&e.g, &l, p).unwrap();
            let n = nijenhuis(&l, p).unwrap().norm();
            assert!(n <= NIJENHUIS_TOL * (1.0 + r.dl_norm), "{}: {n}", e.name);
        }
        for (name, f) in family(pole_below(&l, &e)) {
            let fl = function_of_l(&l, &f);
            let worst = pts
                .iter()
                .map(|p| nijenhuis(&fl, p).unwrap().norm())
                .fold(0.0, f64::max);
            assert!(worst <= LADDER.two_fd, "{} f = {name}: {worst}", e.name);
        }
    }
}

/// Positive corpus entries with at least two eigenvalue groups, with every
/// group as the first one.
fn splittable() -> Vec<(CorpusEntry, Vec<usize>)> {
    let mut out = Vec::new();
    for e in corpus::positive().unwrap() {
        let l = l_field(&e.g, &e.gbar).unwrap();
        let groups = spectral_groups(&l, e.g.chart().base()).unwrap();
        if groups.len() > 1 {
            out.extend(groups.into_iter().map(|g| (e.clone(), g)));
        }
    }
    out
}

#[test]
fn criterion_3_split_metrics() {
    let cases = splittable();
    assert!(cases.len() >= 10);
    for (e, group) in cases {
        let l = l_field(&e.g, &e.gbar).unwrap();
        let pts = points(&e);
        let s = split(
            &e.g,
            &e.gbar,
            &admissible_factorization(&l, &group, &pts).unwrap(),
        )
        .unwrap();
        let rep = s.verify(&pts).unwrap();
        println!("{:24} {group:?} {rep:?}", e.name);
        assert!(
            rep.h_asymmetry <= LADDER.exact && rep.hbar_asymmetry <= LADDER.exact,
            "{}",
            e.name
        );
        assert!(
            rep.h_min_abs_det > EPS_DEG && rep.hbar_min_abs_det > EPS_DEG,
            "{}",
            e.name
        );
        assert!(
            rep.g_orthogonality <= ALGEBRAIC_TOL && rep.gbar_orthogonality <= ALGEBRAIC_TOL,
            "{}",
            e.name
        );
        assert!(
            rep.nabla_h_p1 <= LADDER.two_fd && rep.nabla_hbar_p1 <= LADDER.two_fd,
            "{}",
            e.name
        );
        assert!(
            rep.chi1_mismatch <= ALGEBRAIC_TOL && rep.chi2_mismatch <= ALGEBRAIC_TOL,
            "{}",
            e.name
        );
    }
}

#[test]
fn criterion_4_bracket_defect() {
    for (e, group) in splittable() {
        let l = l_field(&e.g, &e.gbar).unwrap();
        let pts = points(&e);
        let s = split(
            &e.g,
            &e.gbar,
            &admissible_factorization(&l, &group, &pts).unwrap(),
        )
        .unwrap();
        let rep = s.verify(&pts).unwrap();
        assert!(
            rep.bracket_defect <= LADDER.one_fd,
            "{} {group:?}: {}",
            e.name,
            rep.bracket_defect
        );
    }
}

fn one_dim(h: &str, hbar: &str) -> (MetricField<f64>, MetricField<f64>) {
    let c = Chart::cube(1, 0.0, 1.0, &[0.5]).unwrap();
    (metric(&c, &[h]), metric(&c, &[hbar]))
}

fn lc(spec: LeviCivitaSpec) -> (MetricField<f64>, MetricField<f64>) {
    levi_civita_pair(&spec).unwrap()
}

fn complex_block() -> (MetricField<f64>, MetricField<f64>) {
    let c = Chart::cube(2, -1.0, 1.0, &[0.0, 0.0]).unwrap();
    let h = MetricField::constant(
        c.clone(),
        &Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]),
    )
    .unwrap();
    let l = OperatorField::constant(
        c.clone(),
        &Matrix::from_rows(&[vec![8.0, -1.0], vec![1.0, 8.0]]),
    )
    .unwrap();
    let hbar = reconstruct_gbar(&h, &l, c.base()).unwrap();
    let hbar = MetricField::constant(c, hbar.matrix()).unwrap();
    (h, hbar)
}

fn glue_cases() -> Vec<(&'static str, GlueInput)> {
    let chart2 = |lo: f64, hi: f64| Chart::cube(2, lo, hi, &[0.5 * (lo + hi); 2]).unwrap();
    let sine = LeviCivitaSpec {
        chart: chart2(0.0, 1.5),
        simple: vec![ex("1 + 0.1*sin(x0)", 2), ex("2", 2)],
        multiple: vec![],
        signs: vec![],
    };
    let indefinite = LeviCivitaSpec {
        chart: chart2(0.0, 1.0),
        simple: vec![ex("4 + 0.1*sin(x0)", 2), ex("6", 2)],
        multiple: vec![],
        signs: vec![1.0, -1.0],
    };
    let input = |a: (MetricField<f64>, MetricField<f64>),
                 b: (MetricField<f64>, MetricField<f64>)| GlueInput {
        h1: a.0,
        hbar1: a.1,
        l1: None,
        h2: b.0,
        hbar2: b.1,
        l2: None,
    };
    let a1 = || one_dim("1", "(1 + 0.2*x0)^(-2)");
    let b1 = || one_dim("1 + 0.1*x0^2", "(1 + 0.1*x0^2)*(4 + 0.3*x0)^(-2)");
    vec![
        ("1+1", input(a1(), b1())),
        ("1+2 indefinite", input(a1(), lc(indefinite.clone()))),
        ("2+2 indefinite", input(lc(sine.clone()), lc(indefinite))),
        ("2+2 complex", input(lc(sine), complex_block())),
    ]
}

#[test]
fn criterion_5_glue() {
    for (name, inp) in glue_cases() {
        let chart = inp.h1.chart().product(inp.h2.chart());
        let pts = chart.sample_points(POINTS, SEED);
        let glued = glue_fields(&inp, &pts).unwrap();
        let l = l_field(&glued.g, &glued.gbar).unwrap();
        let res = max_residual(&glued.g, &l, &pts);
        let mut c = [0.0_f64; 3];
        for p in &pts {
            let b = block_condition_residuals(&glued.g, &l, glued.r, p).unwrap();
            c = [c[0].max(b.c1), c[1].max(b.c2), c[2].max(b.c3)];
        }
        let d = oracle(&glued.g, &glued.gbar);

        // split the glued pair and glue the blocks back with explicit L_i
        let fact =
            admissible_factorization(&l, &first_block_group(&l, &chart, glued.r), &pts).unwrap();
        let s = split(&glued.g, &glued.gbar, &fact).unwrap();
        let mut trip = 0.0_f64;
        for p in &pts {
            let b = s.blocks_at(p).unwrap();
            let c1 = Chart::cube(b.l1.rows(), -1.0, 1.0, &vec![0.0; b.l1.rows()]).unwrap();
            let c2 = Chart::cube(b.l2.rows(), -1.0, 1.0, &vec![0.0; b.l2.rows()]).unwrap();
            let back = GlueInput {
                h1: MetricField::constant(c1.clone(), &b.h1).unwrap(),
                hbar1: MetricField::constant(c1.clone(), &b.hbar1).unwrap(),
                l1: Some(OperatorField::constant(c1.clone(), &b.l1).unwrap()),
                h2: MetricField::constant(c2.clone(), &b.h2).unwrap(),
                hbar2: MetricField::constant(c2.clone(), &b.hbar2).unwrap(),
                l2: Some(OperatorField::constant(c2, &b.l2).unwrap()),
            };
            let v = glue(&back, &vec![0.0; chart.dim()]).unwrap();
            let basis = b.basis();
            let gt = &(&basis.transpose() * &glued.g.value(p).unwrap()) * &basis;
            let gbt = &(&basis.transpose() * &glued.gbar.value(p).unwrap()) * &basis;
            trip = trip
                .max((&v.g - &gt).max_abs())
                .max((&v.gbar - &gbt).max_abs());
        }
        println!("{name:16} residual {res:.3e} c {c:?} oracle {d:.3e} round trip {trip:.3e}");
        assert!(res <= LADDER.one_fd, "{name}: residual {res}");
        assert!(c.iter().all(|&x| x <= LADDER.one_fd), "{name}: {c:?}");
        assert!(d <= LADDER.one_fd, "{name}: oracle {d}");
        assert!(trip <= ROUND_TRIP_TOL, "{name}: round trip {trip}");
    }
}

/// Indices (in canonical order) of the eigenvalues belonging to the first
/// block of a glued pair at the base point.
fn first_block_group(l: &OperatorField<f64>, chart: &Chart<f64>, r: usize) -> Vec<usize> {
    let base = chart.base();
    let lb = l.value(base).unwrap();
    let block = Matrix::from_fn(r, r, |i, j| lb[(i, j)]);
    let all = eigen(&lb, 1e-12).unwrap();
    let first = eigen(&block, 1e-12).unwrap();
    let mut out: Vec<usize> = Vec::new();
    for z in first.values() {
        let (k, _) = all
            .values()
            .iter()
            .enumerate()
            .filter(|(k, _)| !out.contains(k))
            .map(|(k, w)| (k, (w - z).norm()))
            .fold(
                (usize::MAX, f64::INFINITY),
                |a, b| if b.1 < a.1 { b } else { a },
            );
        out.push(k);
    }
    out.sort_unstable();
    out
}

#[test]
fn criterion_6_function_transform() {
    for e in corpus::positive().unwrap() {
        let l = l_field(&e.g, &e.gbar).unwrap();
        let pts = points(&e);
        for (name, f) in family(pole_below(&l, &e)) {
            let (gf, gbf) = topalov_sinjukov(&e.g, &e.gbar, &f, &pts).unwrap();
            let lf = l_field(&gf, &gbf).unwrap();
            let r = max_residual(&gf, &lf, &pts);
            assert!(r <= LADDER.one_fd, "{} f = {name}: {r}", e.name);
        }
        let one = ScalarFunction::Polynomial(vec![Complex::new(1.0, 0.0)]);
        let (gi, gbi) = topalov_sinjukov(&e.g, &e.gbar, &one, &pts).unwrap();
        for p in &pts {
            let same = |a: &Matrix<f64>, b: &Matrix<f64>| {
                a.as_slice()
                    .iter()
                    .zip(b.as_slice())
                    .all(|(x, y)| x.to_bits() == y.to_bits())
            };
            assert!(
                same(&gi.value(p).unwrap(), &e.g.value(p).unwrap()),
                "{}",
                e.name
            );
            assert!(
                same(&gbi.value(p).unwrap(), &e.gbar.value(p).unwrap()),
                "{}",
                e.name
            );
        }
    }
}

#[test]
fn criterion_7_charpoly_differential() {
    let tchart = Chart::cube(1, -5.0, 5.0, &[0.0]).unwrap();
    for (k, e) in corpus::positive().unwrap().into_iter().enumerate() {
        let l = l_field(&e.g, &e.gbar).unwrap();
        let ts: Vec<f64> = tchart
            .sample_points(5, SEED + k as u64)
            .into_iter()
            .map(|t| t[0])
            .collect();
        for t in ts {
            for p in points(&e) {
                let r = charpoly_differential_residual(&l, t, &p).unwrap();
                assert!(r.value <= LADDER.one_fd, "{} t = {t}: {}", e.name, r.value);
            }
        }
    }
}

#[test]
fn criterion_8_projective_deformation() {
    let c = Chart::cube(2, 0.5, 1.5, &[1.0, 1.0]).unwrap();
    let field = |src: &[&str]| VectorField::new(src.iter().map(|s| ex(s, 2)).collect(), 2).unwrap();
    let flat = metric(&c, &["1", "0", "0", "1"]);
    let polar = metric(&c, &["1", "0", "0", "x0^2"]);
    // entries homogeneous of degree 0, so the Euler field is a homothety
    let cone = metric(
        &c,
        &[
            "2 + x0^2/(x0^2 + x1^2)",
            "x0*x1/(x0^2 + x1^2)",
            "0",
            "3 - x1/(x0 + x1)",
        ],
    );
    let projective = [
        (
            "flat, projective non-affine",
            &flat,
            field(&["x0^2", "x0*x1"]),
        ),
        ("polar, homothety", &polar, field(&["x0", "0"])),
        ("homogeneous, homothety", &cone, field(&["x0", "x1"])),
    ];
    let pts = c.sample_points(POINTS, SEED);
    for (name, g, v) in &projective {
        let d = projective_deformation(v, g).unwrap();
        let r = max_residual(g, &d.shifted, &pts);
        println!("{name:28} residual {r:.3e}");
        assert!(r <= LADDER.one_fd, "{name}: {r}");
    }
    let killing = [
        ("flat rotation", &flat, field(&["-x1", "x0"])),
        ("polar rotation", &polar, field(&["0", "1"])),
        ("flat translation", &flat, field(&["1", "0"])),
    ];
    for (name, g, v) in &killing {
        let d = projective_deformation(v, g).unwrap();
        let worst = pts
            .iter()
            .map(|p| d.field.value(p).unwrap().max_abs())
            .fold(0.0, f64::max);
        assert!(worst <= KILLING_TOL, "{name}: {worst}");
    }
}

fn scratch() -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> (Vec<u8>, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_geq"))
        .args(args)
        .output()
        .unwrap();
    (out.stdout, out.status.code().unwrap_or(-1))
}

#[test]
fn criterion_9_deterministic_reports() {
    let dir = scratch();
    let write_scene = |name: &str, g: &MetricField<f64>, gbar: &MetricField<f64>| {
        let path = dir.join(name);
        let scene = SceneFile::from_fields(g, gbar).unwrap();
        std::fs::write(&path, serde_json::to_string(&scene).unwrap()).unwrap();
        path.display().to_string()
    };
    let pos = corpus::positive().unwrap();
    let e3 = pos.iter().find(|e| e.name == "lc3-mixed").unwrap();
    let s3 = write_scene("lc3.json", &e3.g, &e3.gbar);
    let (h, hb) = one_dim("1", "(1 + 0.2*x0)^(-2)");
    let s1 = write_scene("one.json", &h, &hb);
    let e2 = pos.iter().find(|e| e.name == "lc2-indefinite").unwrap();
    let s2 = write_scene("lc2.json", &e2.g, &e2.gbar);
    let grid = dir.join("grid.json").display().to_string();
    let runs: Vec<Vec<&str>> = vec![
        vec!["check", &s3],
        vec![
            "split", &s3, "--groups", "0|1,2", "--export", &grid, "--grid", "4",
        ],
        vec!["glue", &s1, &s2, "--points", "30"],
        vec!["ts", &s3, "--f", "exp", "--points", "30"],
        vec!["oracle", &s3, "--trajectories", "8", "--seed", "5"],
    ];
    for args in runs {
        let (a, code_a) = run(&args);
        let grid_a = std::fs::read(&grid).ok();
        let (b, code_b) = run(&args);
        let grid_b = std::fs::read(&grid).ok();
        assert_eq!(code_a, 0, "{args:?}: {}", String::from_utf8_lossy(&a));
        assert_eq!(code_a, code_b);
        assert!(!a.is_empty() && a == b, "{args:?} differs between runs");
        assert_eq!(grid_a, grid_b);
    }
}
