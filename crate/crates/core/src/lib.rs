//! Levi forms, weak pseudoconcavity certificates, Sussmann leaves and
//! maximum-principle checks for almost CR structures given in coordinates.

// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cr;
pub mod gallery;
pub mod geometry;
pub mod operator;
pub mod principle;
pub mod pseudoconcave;
pub mod sussmann;
pub(crate) mod util;
