use serde::{Deserialize, Serialize};

use super::GeometryError;

/// Slack allowed when testing membership in a closed box.
pub const BOUNDS_SLACK: f64 = 1e-12;

/// A closed axis-aligned box in ℝ^N. Degenerate axes (`lo == hi`) are allowed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxRegion {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, GeometryError> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(GeometryError::Dimension {
                expected: lo.len(),
                found: hi.len(),
            });
        }
        for (i, (a, b)) in lo.iter().zip(&hi).enumerate() {
            if !a.is_finite() || !b.is_finite() || a > b {
                return Err(GeometryError::InvalidBounds { axis: i });
            }
        }
        Ok(BoxRegion { lo, hi })
    }

    /// The cube `center ± half_width` on every axis.
    pub fn cube(center: &[f64], half_width: f64) -> Self {
        BoxRegion {
            lo: center.iter().map(|c| c - half_width).collect(),
            hi: center.iter().map(|c| c + half_width).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(x, (a, b))| *x >= a - BOUNDS_SLACK && *x <= b + BOUNDS_SLACK)
    }

    pub fn contains_box(&self, other: &BoxRegion) -> bool {
        self.contains(&other.lo) && self.contains(&other.hi)
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    /// Chebyshev distance from `p` to the boundary of the box (0 outside).
    pub fn distance_to_boundary(&self, p: &[f64]) -> f64 {
        let mut d = f64::INFINITY;
        for ((x, a), b) in p.iter().zip(&self.lo).zip(&self.hi) {
            if b - a <= 0.0 {
                // a flat axis has no boundary in the slice it describes
                continue;
            }
            d = d.min(x - a).min(b - x);
        }
        d.max(0.0)
    }

    pub fn intersection(&self, other: &BoxRegion) -> Option<BoxRegion> {
        let lo: Vec<f64> = self.lo.iter().zip(&other.lo).map(|(a, b)| a.max(*b)).collect();
        let hi: Vec<f64> = self.hi.iter().zip(&other.hi).map(|(a, b)| a.min(*b)).collect();
        if lo.iter().zip(&hi).all(|(a, b)| a <= b) {
            Some(BoxRegion { lo, hi })
        } else {
            None
        }
    }
}

/// A coordinate chart of dimension `N = 2n + k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chart {
    pub name: String,
    pub bounds: BoxRegion,
}

impl Chart {
    pub fn new(name: impl Into<String>, bounds: BoxRegion) -> Result<Self, GeometryError> {
        if bounds.dim() < 2 {
            return Err(GeometryError::Dimension {
                expected: 2,
                found: bounds.dim(),
            });
        }
        if bounds.lo.iter().zip(&bounds.hi).any(|(a, b)| a >= b) {
            return Err(GeometryError::InvalidBounds {
                axis: bounds.lo.iter().zip(&bounds.hi).position(|(a, b)| a >= b).unwrap(),
            });
        }
        Ok(Chart {
            name: name.into(),
            bounds,
        })
    }

    /// The cube `[-half, half]^dim`.
    pub fn cube(name: impl Into<String>, dim: usize, half: f64) -> Self {
        Chart {
            name: name.into(),
            bounds: BoxRegion::cube(&vec![0.0; dim], half),
        }
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    pub fn check_point(&self, p: &[f64]) -> Result<(), GeometryError> {
        if p.len() != self.dim() {
            return Err(GeometryError::Dimension {
                expected: self.dim(),
                found: p.len(),
            });
        }
        if !self.bounds.contains(p) {
            return Err(GeometryError::OutOfBounds { point: p.to_vec() });
        }
        Ok(())
    }
}
