//! Deterministic JSON reports.
//!
//! Objects are `BTreeMap`s, so keys come out sorted, and floats are printed
//! by `serde_json` as shortest round-trip decimals.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

/// Summary of a residual sampled at many points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stats {
    pub count: usize,
    pub max: f64,
    pub mean: f64,
    pub p50: f64,
    pub p90: f64,
    pub min: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Self {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let rank = |q: f64| -> f64 {
            if v.is_empty() {
                return 0.0;
            }
            let k = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len());
            v[k - 1]
        };
        let nan = values.iter().any(|x| x.is_nan());
        Self {
            count: v.len(),
            max: if nan {
                f64::NAN
            } else {
                v.last().copied().unwrap_or(0.0)
            },
            mean: if v.is_empty() {
                0.0
            } else {
                values.iter().sum::<f64>() / v.len() as f64
            },
            p50: rank(0.5),
            p90: rank(0.9),
            min: v.first().copied().unwrap_or(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// Passes when the maximum is at most the limit.
    AtMost,
    /// Passes when the minimum exceeds the limit.
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    #[serde(flatten)]
    pub stats: Stats,
    pub bound: Bound,
    pub limit: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(values: &[f64], limit: f64) -> Self {
        let stats = Stats::of(values);
        let pass = stats.max <= limit;
        Self {
            stats,
            bound: Bound::AtMost,
            limit,
            pass,
        }
    }

    pub fn above(values: &[f64], limit: f64) -> Self {
        let stats = Stats::of(values);
        let pass = stats.min > limit && !values.iter().any(|x| x.is_nan());
        Self {
            stats,
            bound: Bound::Above,
            limit,
            pass,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub command: String,
    pub seed: u64,
    pub samples: usize,
    pub checks: BTreeMap<String, Check>,
    pub flags: BTreeMap<String, Value>,
    pub info: BTreeMap<String, Value>,
    /// Set when a construction failed before all checks could run.
    pub error: Option<(String, String)>,
}

impl Report {
    pub fn new(command: &str, seed: u64, samples: usize) -> Self {
        Self {
            command: command.into(),
            seed,
            samples,
            ..Self::default()
        }
    }

    pub fn check(&mut self, name: &str, c: Check) {
        self.checks.insert(name.into(), c);
    }

    pub fn flag(&mut self, name: &str, v: impl Serialize) {
        self.flags.insert(name.into(), to_value(v));
    }

    pub fn info(&mut self, name: &str, v: impl Serialize) {
        self.info.insert(name.into(), to_value(v));
    }

    pub fn pass(&self) -> bool {
        self.error.is_none() && self.checks.values().all(|c| c.pass)
    }

    pub fn to_value(&self) -> Value {
        let mut m = serde_json::Map::new();
        m.insert("command".into(), Value::from(self.command.clone()));
        m.insert("seed".into(), Value::from(self.seed));
        m.insert("samples".into(), Value::from(self.samples));
        m.insert("checks".into(), to_value(&self.checks));
        m.insert("flags".into(), to_value(&self.flags));
        m.insert("info".into(), to_value(&self.info));
        if let Some((kind, message)) = &self.error {
            m.insert(
                "error".into(),
                serde_json::json!({ "kind": kind, "message": message }),
            );
        }
        m.insert("pass".into(), Value::from(self.pass()));
        Value::Object(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("report serialises") + "\n"
    }
}

pub fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("report values serialise")
}
