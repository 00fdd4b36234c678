//! Tensor fields on a single coordinate chart.
//!
//! A field is evaluated pointwise and exposes first derivatives. Fields given
//! by expressions differentiate exactly through dual numbers; fields built
//! from other fields either supply exact partials themselves or fall back to
//! central differences.

mod chart;
mod ops;
mod tensor;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::exprdsl::{Expr, ExprError};
use crate::scalar::Real;
use crate::smallmat::{Matrix, SmallMatError};
use crate::tol;

pub use chart::Chart;
pub use ops::{
    christoffel, covariant_derivative_op, lie_derivative_metric, metric_compatibility, nijenhuis,
};
pub(crate) use ops::{christoffel_from_jet, covariant_from_jets};
pub use tensor::Tensor3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("metric is degenerate at {point:?} (det = {det:e})")]
    DegenerateMetric { point: Vec<f64>, det: f64 },
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    SmallMat(#[from] SmallMatError),
    #[error("{0}")]
    Other(String),
}

pub type Result<T, E = FieldError> = std::result::Result<T, E>;

pub(crate) fn point_f64<T: Real>(p: &[T]) -> Vec<f64> {
    p.iter().map(|x| x.to_f64_lossy()).collect()
}

/// Value of a matrix field and its partial derivatives `d_k M`, k < dim.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet<T> {
    pub value: Matrix<T>,
    pub partials: Vec<Matrix<T>>,
}

pub type ValueFn<T> = Arc<dyn Fn(&[T]) -> Result<Matrix<T>> + Send + Sync>;
pub type JetFn<T> = Arc<dyn Fn(&[T]) -> Result<Jet<T>> + Send + Sync>;

/// How a field's derivatives are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeMethod {
    Exact,
    FiniteDifference,
}

#[derive(Clone)]
enum Backing<T> {
    /// Row-major component expressions.
    Exprs(Arc<Vec<Expr>>),
    Jet {
        f: JetFn<T>,
        method: DerivativeMethod,
    },
    Values(ValueFn<T>),
}

/// Square-matrix-valued field on a chart.
#[derive(Clone)]
pub struct MatrixField<T> {
    chart: Chart<T>,
    size: usize,
    backing: Backing<T>,
}

impl<T: Real> fmt::Debug for MatrixField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.backing {
            Backing::Exprs(e) => format!(
                "exprs {:?}",
                e.iter().map(|x| x.to_string()).collect::<Vec<_>>()
            ),
            Backing::Jet { method, .. } => format!("jet ({method:?})"),
            Backing::Values(_) => "values (finite differences)".into(),
        };
        write!(
            f,
            "MatrixField {{ dim: {}, size: {}, {kind} }}",
            self.chart.dim(),
            self.size
        )
    }
}

impl<T: Real> MatrixField<T> {
    /// Field from `size*size` row-major expressions over the chart coordinates.
    pub fn from_exprs(chart: Chart<T>, size: usize, exprs: Vec<Expr>) -> Result<Self> {
        if exprs.len() != size * size {
            return Err(FieldError::Dimension(format!(
                "{} expressions for a {size}x{size} field",
                exprs.len()
            )));
        }
        for e in &exprs {
            e.check_dim(chart.dim())?;
        }
        Ok(Self {
            chart,
            size,
            backing: Backing::Exprs(Arc::new(exprs)),
        })
    }

    pub fn constant(chart: Chart<T>, m: &Matrix<T>) -> Result<Self> {
        let exprs = m
            .as_slice()
            .iter()
            .map(|x| Expr::Num(x.to_f64_lossy()))
            .collect();
        Self::from_exprs(chart, m.rows(), exprs)
    }

    /// Field with caller-supplied partials.
    pub fn from_jet_fn(
        chart: Chart<T>,
        size: usize,
        method: DerivativeMethod,
        f: JetFn<T>,
    ) -> Self {
        Self {
            chart,
            size,
            backing: Backing::Jet { f, method },
        }
    }

    /// Field known only by its values; derivatives by central differences.
    pub fn from_value_fn(chart: Chart<T>, size: usize, f: ValueFn<T>) -> Self {
        Self {
            chart,
            size,
            backing: Backing::Values(f),
        }
    }

    pub fn chart(&self) -> &Chart<T> {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    /// Matrix size (rows = cols).
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn exprs(&self) -> Option<&[Expr]> {
        match &self.backing {
            Backing::Exprs(e) => Some(e),
            _ => None,
        }
    }

    pub fn derivative_method(&self) -> DerivativeMethod {
        match &self.backing {
            Backing::Exprs(_) => DerivativeMethod::Exact,
            Backing::Jet { method, .. } => *method,
            Backing::Values(_) => DerivativeMethod::FiniteDifference,
        }
    }

    fn check_point(&self, p: &[T]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(FieldError::Dimension(format!(
                "point has {} coordinates, chart has {}",
                p.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    pub fn value(&self, p: &[T]) -> Result<Matrix<T>> {
        self.check_point(p)?;
        match &self.backing {
            Backing::Exprs(e) => {
                let mut v = Vec::with_capacity(e.len());
                for x in e.iter() {
                    v.push(x.eval(p)?);
                }
                Ok(Matrix::from_row_slice(self.size, self.size, &v))
            }
            Backing::Jet { f, .. } => Ok(f(p)?.value),
            Backing::Values(f) => f(p),
        }
    }

    pub fn jet(&self, p: &[T]) -> Result<Jet<T>> {
        self.check_point(p)?;
        match &self.backing {
            Backing::Exprs(e) => {
                let (s, n) = (self.size, self.dim());
                let mut value = Matrix::zeros(s, s);
                let mut partials = vec![Matrix::zeros(s, s); n];
                for (idx, x) in e.iter().enumerate() {
                    let d = x.eval_dual(p)?;
                    value[(idx / s, idx % s)] = d.value;
                    for k in 0..n {
                        partials[k][(idx / s, idx % s)] = d.grad[k];
                    }
                }
                Ok(Jet { value, partials })
            }
            Backing::Jet { f, .. } => f(p),
            Backing::Values(f) => {
                let value = f(p)?;
                let partials = central_differences(p, |q| f(q))?;
                Ok(Jet { value, partials })
            }
        }
    }

    /// Partials by central differences of the values, whatever the backing.
    pub fn fd_partials(&self, p: &[T]) -> Result<Vec<Matrix<T>>> {
        central_differences(p, |q| self.value(q))
    }

    /// The same field read on a larger chart whose coordinates `coords[i]`
    /// play the role of this chart's coordinate `i`.
    pub fn pullback(&self, chart: Chart<T>, coords: Vec<usize>) -> Result<Self> {
        if coords.len() != self.dim() || coords.iter().any(|&c| c >= chart.dim()) {
            return Err(FieldError::Dimension(
                "pullback coordinate map does not fit the charts".into(),
            ));
        }
        if let Backing::Exprs(e) = &self.backing {
            let exprs = e.iter().map(|x| x.remap_vars(&|i| coords[i])).collect();
            return Self::from_exprs(chart, self.size, exprs);
        }
        let inner = self.clone();
        let n = chart.dim();
        let size = self.size;
        let method = self.derivative_method();
        let f: JetFn<T> = Arc::new(move |p: &[T]| {
            let sub: Vec<T> = coords.iter().map(|&c| p[c]).collect();
            let j = inner.jet(&sub)?;
            let mut partials = vec![Matrix::zeros(size, size); n];
            for (i, &c) in coords.iter().enumerate() {
                partials[c] = j.partials[i].clone();
            }
            Ok(Jet {
                value: j.value,
                partials,
            })
        });
        Ok(Self::from_jet_fn(chart, size, method, f))
    }
}

/// Central differences of a matrix-valued function with the standard step.
pub fn central_differences<T: Real>(
    p: &[T],
    f: impl Fn(&[T]) -> Result<Matrix<T>>,
) -> Result<Vec<Matrix<T>>> {
    let mut out = Vec::with_capacity(p.len());
    let mut q = p.to_vec();
    for k in 0..p.len() {
        let h = tol::fd_step(p[k]);
        q[k] = p[k] + h;
        let up = f(&q)?;
        let hi = q[k];
        q[k] = p[k] - h;
        let dn = f(&q)?;
        let width = hi - q[k];
        q[k] = p[k];
        out.push((&up - &dn).scale(width.recip()));
    }
    Ok(out)
}

/// Symmetric (0,2)-tensor field.
#[derive(Clone)]
pub struct MetricField<T>(pub MatrixField<T>);

/// (1,1)-tensor field.
#[derive(Clone)]
pub struct OperatorField<T>(pub MatrixField<T>);

impl<T: Real> fmt::Debug for MetricField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Metric{:?}", self.0)
    }
}

impl<T: Real> fmt::Debug for OperatorField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Operator{:?}", self.0)
    }
}

impl<T> std::ops::Deref for MetricField<T> {
    type Target = MatrixField<T>;
    fn deref(&self) -> &MatrixField<T> {
        &self.0
    }
}

impl<T> std::ops::Deref for OperatorField<T> {
    type Target = MatrixField<T>;
    fn deref(&self) -> &MatrixField<T> {
        &self.0
    }
}

impl<T: Real> MetricField<T> {
    /// Metric from expressions; only the upper triangle of `exprs` is read
    /// and mirrored.
    pub fn from_exprs(chart: Chart<T>, exprs: Vec<Expr>) -> Result<Self> {
        let n = chart.dim();
        if exprs.len() != n * n {
            return Err(FieldError::Dimension(format!(
                "{} expressions for a {n}x{n} metric",
                exprs.len()
            )));
        }
        let sym = (0..n * n).map(|idx| {
            let (i, j) = (idx / n, idx % n);
            exprs[i.min(j) * n + i.max(j)].clone()
        });
        Ok(Self(MatrixField::from_exprs(chart, n, sym.collect())?))
    }

    pub fn constant(chart: Chart<T>, m: &Matrix<T>) -> Result<Self> {
        Ok(Self(MatrixField::constant(chart, &m.symmetrized())?))
    }

    /// Value at `p`, checked for nondegeneracy.
    pub fn at(&self, p: &[T]) -> Result<Matrix<T>> {
        let g = self.value(p)?;
        check_nondegenerate(&g, p)?;
        Ok(g)
    }

    pub fn jet_checked(&self, p: &[T]) -> Result<Jet<T>> {
        let j = self.jet(p)?;
        check_nondegenerate(&j.value, p)?;
        Ok(j)
    }
}

pub(crate) fn check_nondegenerate<T: Real>(g: &Matrix<T>, p: &[T]) -> Result<T> {
    let det = g.det()?;
    if !(det.abs() > T::lit(tol::EPS_DEG)) {
        return Err(FieldError::DegenerateMetric {
            point: point_f64(p),
            det: det.to_f64_lossy(),
        });
    }
    Ok(det)
}

impl<T: Real> OperatorField<T> {
    pub fn from_exprs(chart: Chart<T>, exprs: Vec<Expr>) -> Result<Self> {
        let n = chart.dim();
        Ok(Self(MatrixField::from_exprs(chart, n, exprs)?))
    }

    pub fn constant(chart: Chart<T>, m: &Matrix<T>) -> Result<Self> {
        Ok(Self(MatrixField::constant(chart, m)?))
    }
}

/// Vector field with expression components.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    components: Vec<Expr>,
}

impl VectorField {
    pub fn new(components: Vec<Expr>, dim: usize) -> Result<Self> {
        if components.len() != dim {
            return Err(FieldError::Dimension(format!(
                "{} components for dimension {dim}",
                components.len()
            )));
        }
        for e in &components {
            e.check_dim(dim)?;
        }
        Ok(Self { components })
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    /// `(v, dv)` with `dv[s][i] = d_i v^s`.
    pub fn jet<T: Real>(&self, p: &[T]) -> Result<(Vec<T>, Vec<Vec<T>>)> {
        let mut v = Vec::with_capacity(self.dim());
        let mut dv = Vec::with_capacity(self.dim());
        for e in &self.components {
            let d = e.eval_dual(p)?;
            v.push(d.value);
            dv.push(d.grad);
        }
        Ok((v, dv))
    }
}
