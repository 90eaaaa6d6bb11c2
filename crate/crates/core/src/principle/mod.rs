//! Scenario checks for maximum principles, the curve-value lemma, a
//! Carleman-type weighted estimate and unique continuation along leaves.

mod barrier;
mod carleman;
mod maximum;
mod modulus;
mod ucp;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cr::FrameError;
use crate::geometry::GeometryError;
use crate::operator::OperatorError;
use crate::sussmann::LeafError;

pub use barrier::{barrier_gamma, BarrierCertificate, GAMMA_CAP};
pub use carleman::{carleman_ratio, CarlemanConfig, CarlemanRow, CarlemanTable, GROWTH_LIMIT};
pub use maximum::{max_principle_check, SUBSOLUTION_SLACK};
pub use modulus::{
    curve_value_test, max_modulus_check, max_modulus_on_cloud, LeafOptions, ModulusMode, NONDEGENERACY_THRESHOLD};
pub use ucp::{ucp_demo, UcpOptions, UcpReport, VANISHING_THRESHOLD};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// The scenario's precondition on the location of the maximum is not met.
    HypothesisNotSatisfied,
    /// The maximum sits on the region boundary; nothing to assert.
    Consistent,
}

impl Verdict {
    pub fn is_fail(self) -> bool {
        self == Verdict::Fail
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrincipleReport {
    pub scenario: String,
    pub verdict: Verdict,
    pub max_violation: f64,
    pub witness: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl PrincipleReport {
    fn new(scenario: impl Into<String>, verdict: Verdict, max_violation: f64, witness: Option<Vec<f64>>) -> Self {
        PrincipleReport {
            scenario: scenario.into(),
            verdict,
            max_violation,
            witness,
            notes: Vec::new(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PrincipleError {
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Leaf(#[from] LeafError),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("Pu = {value:e} < 0 at {point:?}")]
    NotSubsolution { point: Vec<f64>, value: f64 },
    #[error("no frame field moves |y|² at {point:?}")]
    BarrierPrecondition { point: Vec<f64> },
    #[error("no γ ≤ {cap} makes the barrier positive (worst point {point:?})")]
    GammaCap { cap: f64, point: Vec<f64> },
    #[error("F(Re u, Im u) = {value:e} does not vanish at {point:?}")]
    CurveNotVanishing { point: Vec<f64>, value: f64 },
    #[error("|∂F/∂ū| = {value:e} is too small at {point:?}")]
    CurveDegenerate { point: Vec<f64>, value: f64 },
    #[error("region is not covered by a full weak pseudoconcavity certificate")]
    NotCertified,
    #[error("function is not CR at {point:?} (|∂̄u| = {residual:e})")]
    NotCR { point: Vec<f64>, residual: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("test function {function} is nonzero within two cells of the boundary at {point:?}")]
    SupportViolation { function: String, point: Vec<f64> },
}

/// Largest `|∂̄u|` over `points`, or an error at the first point above the
/// CR tolerance.
fn require_cr<'a>(
    frame: &crate::cr::CRFrame,
    u: &crate::cr::ComplexFunction,
    points: impl Iterator<Item = &'a [f64]>,
) -> Result<(), PrincipleError> {
    for p in points {
        let jets = frame.jets(p)?;
        let r: f64 = jets.dbar(&u.jet(p)?).iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if r > crate::operator::CR_TOLERANCE {
            return Err(PrincipleError::NotCR {
                point: p.to_vec(),
                residual: r,
            });
        }
    }
    Ok(())
}
