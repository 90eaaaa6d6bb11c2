//! The real operator `P = Σ X_j² + (JX_j)² + X₀` built from a certified
//! metric, and the identities it satisfies on CR functions.

mod assemble;
mod identity;
mod metric;
mod orthonormal;

pub use assemble::{
    apply_operator, assemble_global_operator, assemble_local_operator, OperatorP, OperatorPiece, PieceJets,
    PARTITION_TOLERANCE, SYMBOL_TOLERANCE,
};
pub use identity::{cr_identity_check, IdentityReport, IdentityRow, CR_TOLERANCE, IDENTITY_TOLERANCE, NONNEGATIVITY_SLACK};
pub use metric::{MetricField, INTERPOLATION_MIN_EIGENVALUE};
pub use orthonormal::{
    beta_coefficients, orthonormalize_frame, BetaCoefficients, OrthonormalCRFrame, OrthonormalJets,
    BETA_RESIDUAL_TOLERANCE,
};

use thiserror::Error;

use crate::cr::FrameError;
use crate::geometry::GeometryError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("no certificate at grid node {point:?}")]
    NotCertified { point: Vec<f64> },
    #[error("interpolated metric is not positive definite at {point:?} (smallest eigenvalue {lambda_min:e})")]
    NotPositiveDefinite { point: Vec<f64>, lambda_min: f64 },
    #[error("{point:?} lies outside the operator's region")]
    OutsideRegion { point: Vec<f64> },
    #[error("bracket sum leaves HM at {point:?} (residual {residual:e})")]
    BetaResidual { point: Vec<f64>, residual: f64 },
    #[error("partition weights sum to {sum} at {point:?}")]
    Partition { point: Vec<f64>, sum: f64 },
    #[error("negative partition weight {value:e} at {point:?}")]
    NegativeWeight { point: Vec<f64>, value: f64 },
    #[error("partition weight {value:e} is nonzero outside its piece at {point:?}")]
    WeightOutsidePiece { point: Vec<f64>, value: f64 },
    #[error("principal symbols of overlapping pieces differ by {deviation:e} at {point:?}")]
    SymbolMismatch { point: Vec<f64>, deviation: f64 },
    #[error("only local operators can be glued")]
    NestedGluing,
    #[error("function is not CR at {point:?} (|∂̄u| = {residual:e})")]
    NotCR { point: Vec<f64>, residual: f64 },
}
