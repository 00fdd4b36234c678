use super::{EquivError, Result};
use crate::exprdsl::Expr;
use crate::fields::{Chart, MetricField};

/// A block with a constant eigenvalue of multiplicity `k >= 2` and its own
/// `k x k` metric.
#[derive(Debug, Clone, PartialEq)]
pub struct MultipleBlock {
    pub lambda: f64,
    /// Row-major `k x k` expressions; only the upper triangle is read. They
    /// use the global coordinate names of the block's own coordinates.
    pub metric: Vec<Expr>,
}

impl MultipleBlock {
    pub fn k(&self) -> usize {
        (self.metric.len() as f64).sqrt().round() as usize
    }
}

/// Levi-Civita normal form data.
///
/// Coordinates are laid out block by block: simple eigenvalue `i` owns
/// coordinate `i`, and the multiple blocks follow in order, each owning
/// `k` consecutive coordinates. `signs` (one per block, simple blocks
/// first) sets the signature of each block; empty means all `+1`.
#[derive(Debug, Clone)]
pub struct LeviCivitaSpec {
    pub chart: Chart<f64>,
    pub simple: Vec<Expr>,
    pub multiple: Vec<MultipleBlock>,
    pub signs: Vec<f64>,
}

/// Number of probe points, besides the base point and a 3-per-axis lattice,
/// used to check the sign conditions on the box.
const PROBES: usize = 256;
const PROBE_SEED: u64 = 0x1c_5eed;

impl LeviCivitaSpec {
    fn blocks(&self) -> usize {
        self.simple.len() + self.multiple.len()
    }

    /// Coordinates owned by each block.
    pub fn block_coords(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = (0..self.simple.len()).map(|i| vec![i]).collect();
        let mut next = self.simple.len();
        for b in &self.multiple {
            out.push((next..next + b.k()).collect());
            next += b.k();
        }
        out
    }

    fn lambda_expr(&self, block: usize) -> Expr {
        match self.simple.get(block) {
            Some(e) => e.clone(),
            None => Expr::num(self.multiple[block - self.simple.len()].lambda),
        }
    }

    /// Eigenvalues of `L`, repeated by multiplicity, in coordinate order.
    pub fn eigenvalue_exprs(&self) -> Vec<Expr> {
        let coords = self.block_coords();
        (0..self.blocks())
            .flat_map(|b| std::iter::repeat(self.lambda_expr(b)).take(coords[b].len()))
            .collect()
    }

    fn validate(&self) -> Result<()> {
        let n = self.chart.dim();
        let coords = self.block_coords();
        let total: usize = coords.iter().map(Vec::len).sum();
        if total != n {
            return Err(EquivError::InvalidSpec(format!(
                "blocks cover {total} coordinates, chart has {n}"
            )));
        }
        if self.blocks() == 0 {
            return Err(EquivError::InvalidSpec("no blocks".into()));
        }
        if !self.signs.is_empty() && self.signs.len() != self.blocks() {
            return Err(EquivError::InvalidSpec(format!(
                "{} signs for {} blocks",
                self.signs.len(),
                self.blocks()
            )));
        }
        if self.signs.iter().any(|s| *s != 1.0 && *s != -1.0) {
            return Err(EquivError::InvalidSpec("signs must be +1 or -1".into()));
        }
        for (i, e) in self.simple.iter().enumerate() {
            if e.vars().iter().any(|&v| v != i) {
                return Err(EquivError::InvalidSpec(format!(
                    "eigenvalue {i} may only depend on x{i}"
                )));
            }
        }
        for (b, block) in self.multiple.iter().enumerate() {
            let k = block.k();
            if k < 2 || k * k != block.metric.len() {
                return Err(EquivError::InvalidSpec(format!(
                    "multiple block {b} needs k*k entries with k >= 2"
                )));
            }
            let own = &coords[self.simple.len() + b];
            if block
                .metric
                .iter()
                .flat_map(Expr::vars)
                .any(|v| !own.contains(&v))
            {
                return Err(EquivError::InvalidSpec(format!(
                    "metric of multiple block {b} leaves its coordinates"
                )));
            }
        }
        Ok(())
    }

    fn probe_points(&self) -> Vec<Vec<f64>> {
        let mut pts = vec![self.chart.base().to_vec()];
        pts.extend(self.chart.lattice(3));
        pts.extend(self.chart.sample_points(PROBES, PROBE_SEED));
        pts
    }
}

fn sign_of(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Closed-form metrics `(g, gbar)` in Levi-Civita normal form.
///
/// Block `i` of `g` is `P_i h_i` and of `gbar` is `P_i rho_i h_i`, with
/// `P_i = prod_{j != i} (lambda_i - lambda_j)` over the other blocks and
/// `rho_i = 1 / (lambda_i prod_a lambda_a)` over all coordinates. Each
/// `P_i` gets the sign that makes it positive; the `rho_i` share one
/// global sign, so they must all have the same sign to begin with.
pub fn levi_civita_pair(spec: &LeviCivitaSpec) -> Result<(MetricField<f64>, MetricField<f64>)> {
    spec.validate()?;
    let nb = spec.blocks();
    let coords = spec.block_coords();
    let lambdas: Vec<Expr> = (0..nb).map(|b| spec.lambda_expr(b)).collect();

    let probes = spec.probe_points();
    let mut values = Vec::with_capacity(probes.len());
    for p in &probes {
        let mut v = Vec::with_capacity(nb);
        for e in &lambdas {
            v.push(e.eval(p)?);
        }
        values.push(v);
    }
    let base = &values[0];
    for (p, v) in probes.iter().zip(&values) {
        for i in 0..nb {
            if v[i] == 0.0 || sign_of(v[i]) != sign_of(base[i]) {
                return Err(EquivError::NonPositiveWeight {
                    what: format!("rho (eigenvalue {i} reaches 0)"),
                });
            }
            for j in i + 1..nb {
                let d = v[i] - v[j];
                let scale = 1e-9 * (1.0 + v[i].abs() + v[j].abs());
                if d.abs() <= scale || sign_of(d) != sign_of(base[i] - base[j]) {
                    return Err(EquivError::EigenvalueCollision {
                        i,
                        j,
                        point: p.clone(),
                    });
                }
            }
        }
    }
    let p_sign: Vec<f64> = (0..nb)
        .map(|i| {
            (0..nb)
                .filter(|&j| j != i)
                .map(|j| sign_of(base[i] - base[j]))
                .product()
        })
        .collect();
    let lambda_prod_sign: f64 = (0..nb)
        .map(|b| sign_of(base[b]).powi(coords[b].len() as i32))
        .product();
    let rho_sign: Vec<f64> = (0..nb)
        .map(|i| sign_of(base[i]) * lambda_prod_sign)
        .collect();
    if rho_sign.iter().any(|&s| s != rho_sign[0]) {
        return Err(EquivError::NonPositiveWeight {
            what: "rho (weights of mixed sign)".into(),
        });
    }
    let global_rho = rho_sign[0];

    // prod over coordinates of lambda_a, grouped by block
    let lambda_prod = (0..nb)
        .map(|b| match coords[b].len() {
            1 => lambdas[b].clone(),
            k => lambdas[b].clone().pow(k as i32),
        })
        .reduce(|a, b| a * b)
        .expect("at least one block");

    let n = spec.chart.dim();
    let mut g = vec![Expr::num(0.0); n * n];
    let mut gbar = vec![Expr::num(0.0); n * n];
    for i in 0..nb {
        let sign = p_sign[i] * spec.signs.get(i).copied().unwrap_or(1.0);
        let weight = (0..nb)
            .filter(|&j| j != i)
            .map(|j| lambdas[i].clone() - lambdas[j].clone())
            .fold(Expr::num(sign), |acc, f| acc * f);
        let rho = Expr::num(global_rho) / (lambdas[i].clone() * lambda_prod.clone());
        let own = &coords[i];
        for (a, &ca) in own.iter().enumerate() {
            for (b, &cb) in own.iter().enumerate() {
                let h = if i < spec.simple.len() {
                    Expr::num(1.0)
                } else {
                    let block = &spec.multiple[i - spec.simple.len()];
                    let k = block.k();
                    block.metric[a.min(b) * k + a.max(b)].clone()
                };
                g[ca * n + cb] = weight.clone() * h.clone();
                gbar[ca * n + cb] = weight.clone() * rho.clone() * h;
            }
        }
    }
    Ok((
        MetricField::from_exprs(spec.chart.clone(), g)?,
        MetricField::from_exprs(spec.chart.clone(), gbar)?,
    ))
}
