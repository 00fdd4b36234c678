//! Batch front end: scene files in, JSON reports out.

pub mod commands;
pub mod report;
pub mod scene;

use geq_core::equiv::EquivError;
use geq_core::fields::FieldError;
use geq_core::oracle::OracleError;
use geq_core::tol::Ladder;
use thiserror::Error;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed or inadmissible input; `path` points into the JSON or names
    /// the offending flag.
    #[error("{path}: {message}")]
    Input { path: String, message: String },
    /// A construction failed on valid input.
    #[error("{kind}: {message}")]
    Check { kind: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input { .. } => EXIT_INPUT,
            CliError::Check { .. } => EXIT_CHECK_FAILED,
        }
    }
}

fn field_kind(e: &FieldError) -> &'static str {
    match e {
        FieldError::DegenerateMetric { .. } => "DegenerateMetric",
        FieldError::InvalidChart(_) => "InvalidChart",
        FieldError::Dimension(_) => "Dimension",
        FieldError::Expr(_) => "ExprError",
        FieldError::SmallMat(_) => "SmallMatError",
        FieldError::Other(_) => "FieldError",
    }
}

impl From<EquivError> for CliError {
    fn from(e: EquivError) -> Self {
        let message = e.to_string();
        let input = |path: &str| CliError::Input {
            path: path.into(),
            message: message.clone(),
        };
        let check = |kind: &str| CliError::Check {
            kind: kind.into(),
            message: message.clone(),
        };
        match &e {
            EquivError::InvalidGrouping(_) | EquivError::ConjugationViolation { .. } => {
                input("--groups")
            }
            EquivError::ZeroInImage { .. } => input("--f"),
            EquivError::SpectraOverlap { .. } => input("scenes"),
            EquivError::InvalidSpec(_)
            | EquivError::NonPositiveWeight { .. }
            | EquivError::EigenvalueCollision { .. } => input("spec"),
            EquivError::Expr(_) => input("expression"),
            EquivError::Field(f) => check(field_kind(f)),
            EquivError::SmallMat(_) => check("SmallMatError"),
            EquivError::SingularL { .. } => check("SingularL"),
            EquivError::AdmissibilityViolation { .. } => check("AdmissibilityViolation"),
            EquivError::ZeroChiAtZero { .. } => check("ZeroChiAtZero"),
            EquivError::NonSymmetricResult { .. } => check("NonSymmetricResult"),
        }
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        CliError::Check {
            kind: field_kind(&e).into(),
            message: e.to_string(),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        let kind = match &e {
            OracleError::Field(f) => field_kind(f),
            OracleError::StepFailure { .. } => "StepFailure",
            OracleError::LeftChart { .. } => "LeftChart",
            OracleError::ZeroVelocity { .. } => "ZeroVelocity",
            OracleError::OnlyNullDirections { .. } => "OnlyNullDirections",
        };
        CliError::Check {
            kind: kind.into(),
            message: e.to_string(),
        }
    }
}

/// Tolerance ladder scaled by `GEQ_TOL_SCALE` (default 1).
pub fn ladder_from_env() -> Result<(Ladder, f64), CliError> {
    match std::env::var("GEQ_TOL_SCALE") {
        Err(_) => Ok((Ladder::default(), 1.0)),
        Ok(s) => {
            let v: f64 = s.trim().parse().map_err(|_| CliError::Input {
                path: "GEQ_TOL_SCALE".into(),
                message: format!("not a number: {s:?}"),
            })?;
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::Input {
                    path: "GEQ_TOL_SCALE".into(),
                    message: "must be positive".into(),
                });
            }
            Ok((Ladder::scaled(v), v))
        }
    }
}
