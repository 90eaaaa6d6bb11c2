//! Chart-level numerical calculus: expressions with exact second-order jets,
//! vector fields, Lie brackets and flows.

mod chart;
pub mod expr;
mod field;
mod flow;
mod jet;

pub use chart::{BoxRegion, Chart, BOUNDS_SLACK};
pub use expr::{Expr, Func, SplineKind};
pub use field::{evaluate_jet, lie_bracket, parse_expression, CoefficientExpr, FieldJet, VectorField};
pub use flow::flow;
pub use jet::Jet2;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("syntax error at offset {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown identifier '{name}' at offset {position} in '{source_text}'")]
    UnknownIdentifier {
        name: String,
        position: usize,
        source_text: String,
    },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("invalid bounds on axis {axis}")]
    InvalidBounds { axis: usize },
    #[error("point {point:?} lies outside the chart bounds")]
    OutOfBounds { point: Vec<f64> },
    #[error("non-finite value at {point:?}")]
    NonFinite { point: Vec<f64> },
    #[error("vector fields live on different charts")]
    ChartMismatch,
    #[error("invalid integration step {step}")]
    InvalidStep { step: f64 },
}
