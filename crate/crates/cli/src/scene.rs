//! Scene and normal-form spec files.

use serde::{Deserialize, Serialize};

use geq_core::equiv::{LeviCivitaSpec, MultipleBlock};
use geq_core::exprdsl::{parse, Expr};
use geq_core::fields::{Chart, MetricField, VectorField};

use crate::CliError;

/// A matrix of expression strings. Rows may be full (`n` entries, lower
/// triangle ignored and allowed to be `null`) or upper-triangular
/// (`n - i` entries in row `i`).
pub type ExprMatrix = Vec<Vec<Option<String>>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub dim: usize,
    #[serde(rename = "box")]
    pub bounds: Vec<[f64; 2]>,
    pub base_point: Vec<f64>,
    pub g: ExprMatrix,
    pub gbar: ExprMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector_field: Option<Vec<String>>,
}

/// A validated scene.
#[derive(Debug, Clone)]
pub struct Scene {
    pub chart: Chart<f64>,
    pub g: MetricField<f64>,
    pub gbar: MetricField<f64>,
    pub vector_field: Option<VectorField>,
}

fn input(path: impl Into<String>, message: impl ToString) -> CliError {
    CliError::Input {
        path: path.into(),
        message: message.to_string(),
    }
}

fn expr(src: &str, n: usize, path: String) -> Result<Expr, CliError> {
    parse(src, n).map_err(|e| input(path, e))
}

/// Full `n x n` expression list with the lower triangle mirrored; entries
/// are parsed against `dim` coordinates.
fn upper_triangle(m: &ExprMatrix, n: usize, dim: usize, name: &str) -> Result<Vec<Expr>, CliError> {
    if m.len() != n {
        return Err(input(name, format!("expected {n} rows, found {}", m.len())));
    }
    let zero = Expr::Num(0.0);
    let mut out = vec![zero; n * n];
    for (i, row) in m.iter().enumerate() {
        let offset = match row.len() {
            l if l == n => 0,
            l if l == n - i => i,
            l => {
                return Err(input(
                    format!("{name}[{i}]"),
                    format!("row has {l} entries"),
                ))
            }
        };
        for j in i..n {
            let path = format!("{name}[{i}][{}]", j - offset);
            let src = row[j - offset]
                .as_deref()
                .ok_or_else(|| input(path.clone(), "missing upper-triangle entry"))?;
            let e = expr(src, dim, path)?;
            out[j * n + i] = e.clone();
            out[i * n + j] = e;
        }
        // parse the optional lower entries too, so typos do not go unnoticed
        if offset == 0 {
            for (j, src) in row.iter().enumerate().take(i) {
                if let Some(src) = src {
                    expr(src, dim, format!("{name}[{i}][{j}]"))?;
                }
            }
        }
    }
    Ok(out)
}

pub fn chart_from(dim: usize, bounds: &[[f64; 2]], base: &[f64]) -> Result<Chart<f64>, CliError> {
    if dim == 0 {
        return Err(input("dim", "must be positive"));
    }
    if bounds.len() != dim {
        return Err(input(
            "box",
            format!("expected {dim} intervals, found {}", bounds.len()),
        ));
    }
    if base.len() != dim {
        return Err(input(
            "base_point",
            format!("expected {dim} coordinates, found {}", base.len()),
        ));
    }
    Chart::new(
        bounds.iter().map(|b| b[0]).collect(),
        bounds.iter().map(|b| b[1]).collect(),
        base.to_vec(),
    )
    .map_err(|e| input("box", e))
}

impl SceneFile {
    pub fn validate(&self) -> Result<Scene, CliError> {
        let n = self.dim;
        let chart = chart_from(n, &self.bounds, &self.base_point)?;
        let metric = |m: &ExprMatrix, name: &str| -> Result<MetricField<f64>, CliError> {
            let f = MetricField::from_exprs(chart.clone(), upper_triangle(m, n, n, name)?)
                .map_err(|e| input(name, e))?;
            f.at(chart.base()).map_err(|e| input(name, e))?;
            Ok(f)
        };
        let g = metric(&self.g, "g")?;
        let gbar = metric(&self.gbar, "gbar")?;
        let vector_field = match &self.vector_field {
            None => None,
            Some(v) => {
                let comps = v
                    .iter()
                    .enumerate()
                    .map(|(i, s)| expr(s, n, format!("vector_field[{i}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                Some(VectorField::new(comps, n).map_err(|e| input("vector_field", e))?)
            }
        };
        Ok(Scene {
            chart,
            g,
            gbar,
            vector_field,
        })
    }

    /// Closed-form scene of a pair whose fields are expression based.
    pub fn from_fields(g: &MetricField<f64>, gbar: &MetricField<f64>) -> Option<Self> {
        let n = g.dim();
        let chart = g.chart();
        let rows = |f: &MetricField<f64>| -> Option<ExprMatrix> {
            let ex = f.exprs()?;
            Some(
                (0..n)
                    .map(|i| (i..n).map(|j| Some(ex[i * n + j].to_string())).collect())
                    .collect(),
            )
        };
        Some(Self {
            dim: n,
            bounds: (0..n).map(|k| [chart.lo()[k], chart.hi()[k]]).collect(),
            base_point: chart.base().to_vec(),
            g: rows(g)?,
            gbar: rows(gbar)?,
            vector_field: None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockFile {
    pub lambda: f64,
    /// `k x k` metric of the block, in the global coordinates.
    pub metric: ExprMatrix,
}

/// Levi-Civita normal form description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub dim: usize,
    #[serde(rename = "box")]
    pub bounds: Vec<[f64; 2]>,
    pub base_point: Vec<f64>,
    #[serde(default)]
    pub simple: Vec<String>,
    #[serde(default)]
    pub multiple: Vec<BlockFile>,
    #[serde(default)]
    pub signs: Vec<f64>,
}

impl SpecFile {
    pub fn validate(&self) -> Result<LeviCivitaSpec, CliError> {
        let n = self.dim;
        let chart = chart_from(n, &self.bounds, &self.base_point)?;
        let simple = self
            .simple
            .iter()
            .enumerate()
            .map(|(i, s)| expr(s, n, format!("simple[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let mut multiple = Vec::with_capacity(self.multiple.len());
        for (b, blk) in self.multiple.iter().enumerate() {
            let k = blk.metric.len();
            let name = format!("multiple[{b}].metric");
            // block metrics are written in the coordinates of the whole chart
            let metric = upper_triangle(&blk.metric, k, n, &name)?;
            multiple.push(MultipleBlock {
                lambda: blk.lambda,
                metric,
            });
        }
        Ok(LeviCivitaSpec {
            chart,
            simple,
            multiple,
            signs: self.signs.clone(),
        })
    }
}
