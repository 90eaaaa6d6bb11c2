//! Weak pseudoconcavity: the spectral necessary condition and metric
//! certificates found by a cutting-plane linear program.

mod certify;
mod region;
mod signature;
pub(crate) mod simplex;

pub use certify::{
    certify_from_levi, certify_metric, certify_metric_with, CertifyOptions, CertifyOutcome, MetricCertificate,
    CUT_TOLERANCE, DEFAULT_MAX_ITERATIONS, MIN_EIGENVALUE, RESIDUAL_TOLERANCE,
};
pub(crate) use certify::min_eigenpair;
pub use region::{certify_region, certify_region_with, LatticeGrid, RegionPoint, RegionReport, REGION_LABEL};
pub use signature::{classify, signature_test, sphere_samples, Signature, SignatureVerdict, EIGENVALUE_TOLERANCE};

use thiserror::Error;

use crate::cr::FrameError;
use crate::geometry::GeometryError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertifyError {
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("linear program unbounded at {point:?}")]
    Unbounded { point: Vec<f64> },
    #[error("simplex pivot limit reached at {point:?}")]
    SolverStalled { point: Vec<f64> },
    #[error("cutting planes did not converge within {iterations} iterations at {point:?}")]
    IterationCap { point: Vec<f64>, iterations: usize },
    #[error("signature test needs at least {minimum} samples, got {samples}")]
    TooFewSamples { samples: usize, minimum: usize },
}

impl From<GeometryError> for CertifyError {
    fn from(e: GeometryError) -> Self {
        CertifyError::Frame(FrameError::Geometry(e))
    }
}
