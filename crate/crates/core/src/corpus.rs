//! Reference pairs used by the test suites and the command line tool.
//!
//! Positive entries are Levi-Civita normal forms in dimensions 2 to 4 with
//! simple and multiple eigenvalues and indefinite signatures, plus two
//! constant pairs whose `L` has complex eigenvalues. Negative entries are
//! pairs that do not share their geodesics.

use crate::equiv::{levi_civita_pair, reconstruct_gbar, LeviCivitaSpec, MultipleBlock, Result};
use crate::exprdsl::{parse, Expr};
use crate::fields::{Chart, MetricField, OperatorField};
use crate::smallmat::Matrix;

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub g: MetricField<f64>,
    pub gbar: MetricField<f64>,
    /// Whether the pair is geodesically equivalent.
    pub equivalent: bool,
    pub spec: Option<LeviCivitaSpec>,
}

fn ex(src: &str, n: usize) -> Expr {
    parse(src, n).expect("corpus expression")
}

fn exs(src: &[&str], n: usize) -> Vec<Expr> {
    src.iter().map(|s| ex(s, n)).collect()
}

fn cube(n: usize, lo: f64, hi: f64) -> Chart<f64> {
    Chart::cube(n, lo, hi, &vec![0.5 * (lo + hi); n]).expect("corpus chart")
}

fn simple(chart: Chart<f64>, lambdas: &[&str], signs: &[f64]) -> LeviCivitaSpec {
    let n = chart.dim();
    LeviCivitaSpec {
        chart,
        simple: exs(lambdas, n),
        multiple: vec![],
        signs: signs.to_vec(),
    }
}

fn block(lambda: f64, metric: &[&str], n: usize) -> MultipleBlock {
    MultipleBlock {
        lambda,
        metric: exs(metric, n),
    }
}

/// Named Levi-Civita specs.
pub fn levi_civita_specs() -> Vec<(&'static str, LeviCivitaSpec)> {
    vec![
        (
            "lc2-sine",
            simple(cube(2, 0.0, 1.5), &["1 + 0.1*sin(x0)", "2"], &[]),
        ),
        (
            "lc2-indefinite",
            simple(
                cube(2, 0.0, 1.0),
                &["0.5 + 0.2*x0", "3 + 0.1*cos(x1)"],
                &[1.0, -1.0],
            ),
        ),
        (
            "lc2-negative",
            simple(cube(2, 0.0, 1.0), &["-3 - 0.2*x0", "-1 + 0.1*x1^2"], &[]),
        ),
        (
            "lc2-double",
            LeviCivitaSpec {
                chart: cube(2, 0.0, 1.0),
                simple: vec![],
                multiple: vec![block(2.0, &["1 + x0^2", "0.2", "0", "1 + x1^2"], 2)],
                signs: vec![],
            },
        ),
        (
            "lc3-simple",
            simple(
                cube(3, 0.2, 1.2),
                &["1 + 0.2*x0", "3 + 0.3*sin(x1)", "5 + 0.1*x2^2"],
                &[],
            ),
        ),
        (
            "lc3-indefinite",
            simple(
                cube(3, 0.0, 1.0),
                &["0.8 + 0.1*x0", "2 + 0.2*x1", "4 - 0.3*x2"],
                &[1.0, -1.0, 1.0],
            ),
        ),
        (
            "lc3-mixed",
            LeviCivitaSpec {
                chart: cube(3, 0.0, 1.0),
                simple: exs(&["1 + 0.2*x0"], 3),
                multiple: vec![block(4.0, &["1 + x1^2", "0.1*x2", "0", "2 + sin(x1)"], 3)],
                signs: vec![],
            },
        ),
        (
            "lc3-triple",
            LeviCivitaSpec {
                chart: cube(3, 0.0, 1.0),
                simple: vec![],
                multiple: vec![block(
                    1.5,
                    &["1 + x0^2", "0.1*x1", "0", "0", "2", "0", "0", "0", "1 + x2"],
                    3,
                )],
                signs: vec![],
            },
        ),
        (
            "lc4-simple",
            simple(
                cube(4, 0.0, 1.0),
                &[
                    "1 + 0.1*x0",
                    "2.5 + 0.1*sin(x1)",
                    "4 + 0.2*x2",
                    "6 - 0.1*x3",
                ],
                &[1.0, 1.0, -1.0, 1.0],
            ),
        ),
        (
            "lc4-mixed",
            LeviCivitaSpec {
                chart: cube(4, 0.0, 1.0),
                simple: exs(&["0.5 + 0.1*x0", "2 + 0.1*cos(x1)"], 4),
                multiple: vec![block(5.0, &["1", "0", "0", "1 + 0.2*x3^2"], 4)],
                signs: vec![1.0, -1.0, 1.0],
            },
        ),
        (
            "lc4-two-doubles",
            LeviCivitaSpec {
                chart: cube(4, 0.0, 1.0),
                simple: vec![],
                multiple: vec![
                    block(2.0, &["1 + 0.3*x0^2", "0.1*x1", "0", "1"], 4),
                    block(5.0, &["2", "0", "0", "1 + sin(x2*x3)"], 4),
                ],
                signs: vec![1.0, -1.0],
            },
        ),
        (
            "lc4-triple-simple",
            LeviCivitaSpec {
                chart: cube(4, 0.0, 1.0),
                simple: exs(&["1 + 0.2*x0"], 4),
                multiple: vec![block(
                    3.0,
                    &["1 + x1^2", "0", "0", "0", "1", "0.1*x3", "0", "0", "2 + x2"],
                    4,
                )],
                signs: vec![],
            },
        ),
    ]
}

fn constant_pair(name: &'static str, g: Matrix<f64>, l: Matrix<f64>) -> Result<CorpusEntry> {
    let n = g.rows();
    let chart = cube(n, -1.0, 1.0);
    let gm = MetricField::constant(chart.clone(), &g)?;
    let lf = OperatorField::constant(chart.clone(), &l)?;
    let gbar = reconstruct_gbar(&gm, &lf, chart.base())?;
    Ok(CorpusEntry {
        name,
        gbar: MetricField::constant(chart, gbar.matrix())?,
        g: gm,
        equivalent: true,
        spec: None,
    })
}

/// Constant pairs whose `L` has a complex conjugate pair of eigenvalues.
pub fn complex_pairs() -> Result<Vec<CorpusEntry>> {
    let rot = |a: f64, b: f64| Matrix::from_rows(&[vec![a, -b], vec![b, a]]);
    let anti = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
    Ok(vec![
        constant_pair(
            "complex3",
            Matrix::from_diagonal(&[1.0]).direct_sum(&anti),
            Matrix::from_diagonal(&[3.0]).direct_sum(&rot(1.0, 0.5)),
        )?,
        constant_pair(
            "complex4",
            Matrix::from_diagonal(&[1.0, -1.0]).direct_sum(&anti),
            Matrix::from_diagonal(&[2.0, 5.0]).direct_sum(&rot(1.0, 1.0)),
        )?,
    ])
}

/// Every equivalent pair of the corpus.
pub fn positive() -> Result<Vec<CorpusEntry>> {
    let mut out = Vec::new();
    for (name, spec) in levi_civita_specs() {
        let (g, gbar) = levi_civita_pair(&spec)?;
        out.push(CorpusEntry {
            name,
            g,
            gbar,
            equivalent: true,
            spec: Some(spec),
        });
    }
    out.extend(complex_pairs()?);
    Ok(out)
}

fn metric(chart: &Chart<f64>, src: &[&str]) -> Result<MetricField<f64>> {
    Ok(MetricField::from_exprs(
        chart.clone(),
        exs(src, chart.dim()),
    )?)
}

/// Pairs that are not geodesically equivalent.
pub fn negative_controls() -> Result<Vec<CorpusEntry>> {
    let c2 = cube(2, 0.0, 1.0);
    let c3 = cube(3, 0.0, 1.0);
    let mut out = vec![
        CorpusEntry {
            name: "neg2-unrelated",
            g: metric(&c2, &["1", "0", "0", "1"])?,
            gbar: metric(&c2, &["1 + x0^2", "0.5*x1", "0.5*x1", "2 + sin(3*x0)"])?,
            equivalent: false,
            spec: None,
        },
        CorpusEntry {
            name: "neg3-unrelated",
            g: metric(
                &c3,
                &[
                    "1",
                    "0",
                    "0",
                    "0",
                    "2 + sin(2*x0)",
                    "0",
                    "0",
                    "0",
                    "1 + x1^2",
                ],
            )?,
            gbar: metric(
                &c3,
                &["2", "0", "0", "0", "1 + x2^2", "0", "0", "0", "3 + x0"],
            )?,
            equivalent: false,
            spec: None,
        },
    ];
    // a normal form with one weight deformed
    let (_, spec) = levi_civita_specs()
        .into_iter()
        .find(|(n, _)| *n == "lc2-sine")
        .expect("corpus entry");
    let (g, gbar) = levi_civita_pair(&spec)?;
    let bad = gbar.exprs().expect("closed form").to_vec();
    let mut bad = bad;
    bad[3] = bad[3].clone() * ex("1 + 0.8*x0", 2);
    out.push(CorpusEntry {
        name: "neg2-deformed-weight",
        g,
        gbar: MetricField::from_exprs(spec.chart.clone(), bad)?,
        equivalent: false,
        spec: None,
    });
    Ok(out)
}
