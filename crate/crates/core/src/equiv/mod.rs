//! Constructions on pairs of metrics sharing their unparameterised
//! geodesics: the (1,1)-tensor `L`, the compatibility residual, splitting a
//! pair along an admissible factorisation, gluing two pairs, the function
//! transform `g -> g f(L)`, and the Levi-Civita normal form generator.

mod block;
mod decompose;
mod factor;
mod glue;
mod lcform;
mod lmap;
mod misc;
mod split;
mod transform;

use thiserror::Error;

use crate::exprdsl::ExprError;
use crate::fields::FieldError;
use crate::smallmat::SmallMatError;

pub use block::{block_condition_residuals, BlockResiduals};
pub use decompose::{full_decompose, spectral_groups, Factor};
pub use factor::{admissible_factorization, projectors, FactorizationResult, TrackedSample};
pub use glue::{glue, glue_fields, GlueInput, GlueValue, GluedPair};
pub use lcform::{levi_civita_pair, LeviCivitaSpec, MultipleBlock};
pub use lmap::{
    compatibility_residual, compute_l, l_field, reconstruct_gbar, shifted_partner, CompatResidual,
    LValue,
};
pub use misc::{
    charpoly_differential_residual, projective_deformation, CharPolyResidual, ProjectiveDeformation,
};
pub use split::{split, AdaptedBlocks, SplitReport, SplitResult};
pub use transform::{function_of_l, topalov_sinjukov};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EquivError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    SmallMat(#[from] SmallMatError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("L is singular at {point:?}")]
    SingularL { point: Vec<f64> },
    #[error("eigenvalue groups come within {gap:e} of each other at {point:?} (need {tol:e})")]
    AdmissibilityViolation { point: Vec<f64>, gap: f64, tol: f64 },
    #[error("an eigenvalue group is not closed under conjugation at {point:?}")]
    ConjugationViolation { point: Vec<f64> },
    #[error("invalid grouping: {0}")]
    InvalidGrouping(String),
    #[error(
        "a factor polynomial vanishes at 0 at {point:?}; shift L by a multiple of the identity"
    )]
    ZeroChiAtZero { point: Vec<f64> },
    #[error("constructed metric is not symmetric (asymmetry {asymmetry:e}) at {point:?}")]
    NonSymmetricResult { point: Vec<f64>, asymmetry: f64 },
    #[error("spectra of the factors meet (gap {gap:e}) at {point:?}")]
    SpectraOverlap { point: Vec<f64>, gap: f64 },
    #[error("f vanishes at the eigenvalue {re}{im:+}i at {point:?}")]
    ZeroInImage { point: Vec<f64>, re: f64, im: f64 },
    #[error("eigenvalues {i} and {j} collide at {point:?}")]
    EigenvalueCollision { i: usize, j: usize, point: Vec<f64> },
    #[error("weight {what} changes sign on the box")]
    NonPositiveWeight { what: String },
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
}

pub type Result<T, E = EquivError> = std::result::Result<T, E>;
