//! Almost CR structures of type `(n, k)` given by a frame of `HM`: the
//! `∂̄_M` operator, the integrability residual, characteristic covectors
//! and the Levi form.

mod frame;
mod function;
mod levi;

pub use frame::{build_frame, CRFrame, FrameDefinition, FrameJets, RANK_TOLERANCE};
pub use function::{ComplexFunction, ComplexJet};
pub use levi::{
    characteristic_basis, characteristic_basis_from_jets, dbar_apply, integrability_residual,
    levi_from_jets, levi_matrix, CharacteristicBasis, LeviMatrix, CHARACTERISTIC_TOLERANCE,
};

use thiserror::Error;

use crate::geometry::GeometryError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("frame is rank deficient at {point:?} (smallest singular value {sigma:e})")]
    RankDeficient { point: Vec<f64>, sigma: f64 },
    #[error("dimension mismatch: {message}")]
    DimensionMismatch { message: String },
    #[error("annihilator at {point:?} has dimension {found}, expected {expected}")]
    AnnihilatorDimension {
        point: Vec<f64>,
        expected: usize,
        found: usize,
    },
    #[error("covector is not characteristic at {point:?} (pairing {pairing:e})")]
    NotCharacteristic { point: Vec<f64>, pairing: f64 },
}
