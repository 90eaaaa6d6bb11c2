//! Reachable sets of families of vector fields: leaf clouds, bracket rank,
//! minimality and the trapping hypothesis.

mod compare;
mod explore;
mod index;
mod minimal;
mod rank;
mod trapping;

use thiserror::Error;

use crate::geometry::GeometryError;

pub use compare::{hausdorff_distance, tangency_residual};
pub use explore::{
    explore_leaf, Explorer, LeafCloud, Step, FLOW_SUBSTEPS, IMMERSION_RATIO, PCA_CUTOFF, PCA_WINDOW,
};
pub use index::PointIndex;
pub use minimal::{minimality_test, MinimalityReport, MinimalityVerdict};
pub use rank::{lie_rank, LIE_DEPTH, RANK_TOLERANCE};
pub use trapping::{
    trapping_test, ConormalSample, ContainmentCheck, TrappingOptions, TrappingReport, PAIRING_TOLERANCE,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LeafError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("exploration budget must be positive")]
    ZeroBudget,
    #[error("resolution must be positive and finite, got {eps}")]
    InvalidEps { eps: f64 },
    #[error("no generator fields")]
    NoFields,
    #[error("start point {point:?} lies outside the region")]
    OriginOutside { point: Vec<f64> },
    #[error("bracket depth must be at least 1")]
    ZeroDepth,
    #[error("defining function has degenerate gradient {norm:e} at {point:?}")]
    DegenerateGradient { point: Vec<f64>, norm: f64 },
    #[error("could not project {point:?} onto the level set")]
    Projection { point: Vec<f64> },
}
