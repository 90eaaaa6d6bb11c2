use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::GalleryError;
use crate::cr::{CRFrame, ComplexFunction, FrameDefinition};
use crate::geometry::{BoxRegion, Chart, CoefficientExpr};

pub const DEFINITION_SCHEMA_VERSION: u32 = 1;

const HEISENBERG: &str = include_str!("../../gallery/heisenberg.json");
const QUADRIC11: &str = include_str!("../../gallery/quadric11.json");
const LEVIFLAT: &str = include_str!("../../gallery/leviflat.json");

/// Names of the built-in manifolds.
pub const GALLERY: [&str; 3] = ["heisenberg", "quadric11", "leviflat"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartSpec {
    pub bounds: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrFunctionSpec {
    pub id: String,
    pub re: String,
    pub im: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionPiece {
    pub region: BoxRegion,
    pub weight: String,
}

/// Declared ground truth, compared against check outcomes.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectations {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weakly_pseudoconcave: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minimal: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrable: Option<bool>,
}

/// On-disk manifold description (one JSON document per manifold).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldDefinition {
    pub schema_version: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub n: usize,
    pub k: usize,
    pub chart: ChartSpec,
    /// `X_1..X_n` followed by `JX_1..JX_n`.
    pub frame: Vec<Vec<String>>,
    #[serde(default)]
    pub cr_functions: Vec<CrFunctionSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub partition: Vec<PartitionPiece>,
    #[serde(default)]
    pub expect: Expectations,
}

/// A validated definition together with its compiled frame.
#[derive(Clone, Debug)]
pub struct LoadedManifold {
    pub definition: ManifoldDefinition,
    pub frame: Arc<CRFrame>,
    pub cr_functions: Vec<ComplexFunction>,
    pub partition: Vec<(BoxRegion, CoefficientExpr)>,
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> GalleryError {
    GalleryError::Schema {
        path: path.into(),
        message: message.into(),
    }
}

impl ManifoldDefinition {
    pub fn from_json(text: &str) -> Result<Self, GalleryError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            schema(path, e.into_inner().to_string())
        })
    }

    pub fn dim(&self) -> usize {
        2 * self.n + self.k
    }

    fn check_shape(&self) -> Result<(), GalleryError> {
        if self.schema_version != DEFINITION_SCHEMA_VERSION {
            return Err(schema(
                "schema_version",
                format!("unsupported version {}, expected {}", self.schema_version, DEFINITION_SCHEMA_VERSION),
            ));
        }
        if self.n == 0 {
            return Err(schema("n", "n must be at least 1"));
        }
        let dim = self.dim();
        if self.chart.bounds.len() != dim {
            return Err(schema(
                "chart.bounds",
                format!("expected {} coordinate ranges (2n+k), found {}", dim, self.chart.bounds.len()),
            ));
        }
        for (i, [lo, hi]) in self.chart.bounds.iter().enumerate() {
            if !(lo < hi) {
                return Err(schema(format!("chart.bounds[{i}]"), "range must satisfy lo < hi"));
            }
        }
        if self.frame.len() != 2 * self.n {
            return Err(schema(
                "frame",
                format!("expected {} coefficient arrays (X_j then JX_j), found {}", 2 * self.n, self.frame.len()),
            ));
        }
        for (i, arr) in self.frame.iter().enumerate() {
            if arr.len() != dim {
                return Err(schema(format!("frame[{i}]"), format!("expected {} components, found {}", dim, arr.len())));
            }
            for (j, src) in arr.iter().enumerate() {
                CoefficientExpr::parse(src, dim).map_err(|e| schema(format!("frame[{i}][{j}]"), e.to_string()))?;
            }
        }
        Ok(())
    }

    /// Validate the document and compile the frame.
    pub fn load(self) -> Result<LoadedManifold, GalleryError> {
        self.check_shape()?;
        let dim = self.dim();
        let chart = Chart::new(
            self.name.clone(),
            BoxRegion {
                lo: self.chart.bounds.iter().map(|b| b[0]).collect(),
                hi: self.chart.bounds.iter().map(|b| b[1]).collect(),
            },
        )
        .map_err(|e| schema("chart.bounds", e.to_string()))?;
        let def = FrameDefinition {
            chart,
            n: self.n,
            k: self.k,
            x: self.frame[..self.n].to_vec(),
            jx: self.frame[self.n..].to_vec(),
        };
        let frame = CRFrame::build(&def).map_err(|e| GalleryError::FrameValidation {
            name: self.name.clone(),
            source: e,
        })?;
        let cr_functions = self
            .cr_functions
            .iter()
            .enumerate()
            .map(|(i, f)| {
                ComplexFunction::parse(&f.id, &f.re, &f.im, dim)
                    .map_err(|e| schema(format!("cr_functions[{i}]"), e.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let partition = self
            .partition
            .iter()
            .enumerate()
            .map(|(i, piece)| {
                if piece.region.dim() != dim || piece.region.hi.len() != dim {
                    return Err(schema(format!("partition[{i}].region"), "region dimension mismatch"));
                }
                let w = CoefficientExpr::parse(&piece.weight, dim)
                    .map_err(|e| schema(format!("partition[{i}].weight"), e.to_string()))?;
                Ok((piece.region.clone(), w))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(LoadedManifold {
            definition: self,
            frame: Arc::new(frame),
            cr_functions,
            partition,
        })
    }

    /// Canonical serialization, used for input hashing.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("definition serializes")
    }
}

/// Source text of a built-in manifold.
pub fn builtin_source(name: &str) -> Option<&'static str> {
    match name {
        "heisenberg" => Some(HEISENBERG),
        "quadric11" => Some(QUADRIC11),
        "leviflat" => Some(LEVIFLAT),
        _ => None,
    }
}

pub fn builtin(name: &str) -> Result<LoadedManifold, GalleryError> {
    let src = builtin_source(name).ok_or_else(|| GalleryError::UnknownManifold(name.to_string()))?;
    ManifoldDefinition::from_json(src)?.load()
}

/// Load and validate a definition file.
pub fn load_definition(path: impl AsRef<Path>) -> Result<LoadedManifold, GalleryError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| GalleryError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    ManifoldDefinition::from_json(&text)?.load()
}

/// A gallery name or a path to a definition file.
pub fn resolve(selection: &str) -> Result<LoadedManifold, GalleryError> {
    if builtin_source(selection).is_some() {
        builtin(selection)
    } else {
        load_definition(selection)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_load() {
        for name in GALLERY {
            let m = builtin(name).unwrap();
            assert_eq!(m.definition.name, name);
            assert_eq!(m.frame.dim(), m.definition.dim());
        }
    }

    #[test]
    fn heisenberg_shape() {
        let m = builtin("heisenberg").unwrap();
        assert_eq!((m.definition.n, m.definition.k, m.frame.dim()), (1, 1, 3));
    }

    #[test]
    fn three_arrays_for_n2_is_a_schema_error() {
        let mut d = ManifoldDefinition::from_json(QUADRIC11).unwrap();
        d.frame.pop();
        match d.load() {
            Err(GalleryError::Schema { path, .. }) => assert_eq!(path, "frame"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn type_errors_carry_a_path() {
        let text = LEVIFLAT.replace("\"n\": 1", "\"n\": \"one\"");
        match ManifoldDefinition::from_json(&text) {
            Err(GalleryError::Schema { path, .. }) => assert_eq!(path, "n"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_expression_names_the_component() {
        let mut d = ManifoldDefinition::from_json(LEVIFLAT).unwrap();
        d.frame[1][2] = "tan(y1)".into();
        match d.load() {
            Err(GalleryError::Schema { path, .. }) => assert_eq!(path, "frame[1][2]"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rank_deficient_frame_names_the_probe_point() {
        let mut d = ManifoldDefinition::from_json(LEVIFLAT).unwrap();
        d.frame[1] = d.frame[0].clone();
        let err = d.load().unwrap_err();
        assert!(matches!(
            err,
            GalleryError::FrameValidation {
                source: crate::cr::FrameError::RankDeficient { .. },
                ..
            }
        ));
        assert!(err.to_string().contains("rank deficient at ["));
    }
}
