//! Manifold definition files, the built-in gallery and report assembly.

mod definition;
mod run;

pub use definition::{
    builtin, builtin_source, load_definition, resolve, ChartSpec, CrFunctionSpec, Expectations, LoadedManifold,
    ManifoldDefinition, PartitionPiece, DEFINITION_SCHEMA_VERSION, GALLERY,
};
pub use run::{
    carleman_scenario, input_hash, run_gallery, unit_box, CheckId, CheckRecord, CheckVerdict, RunReport, RunSettings, Witness, REPORT_SCHEMA_VERSION,
    TOOL_VERSION,
};

use thiserror::Error;

use crate::cr::FrameError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GalleryError {
    #[error("schema violation at '{path}': {message}")]
    Schema { path: String, message: String },
    #[error("frame of '{name}' failed validation: {source}")]
    FrameValidation { name: String, source: FrameError },
    #[error("cannot read '{path}': {message}")]
    Io { path: String, message: String },
    #[error("unknown manifold '{0}'")]
    UnknownManifold(String),
    #[error("unknown check '{0}'")]
    UnknownCheck(String),
}
