use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::{certify_metric_with, CertifyError, CertifyOptions, CertifyOutcome};
use crate::cr::CRFrame;
use crate::geometry::BoxRegion;
use crate::util::distance;

pub const REGION_LABEL: &str = "pointwise certified, smoothness diagnostic only";

/// Tensor-product lattice with `counts[i]` nodes along axis `i` of `region`.
/// Degenerate axes carry a single node.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeGrid {
    pub region: BoxRegion,
    pub counts: Vec<usize>,
}

impl LatticeGrid {
    pub fn new(region: BoxRegion, per_axis: usize) -> Self {
        let counts = region
            .lo
            .iter()
            .zip(&region.hi)
            .map(|(lo, hi)| if hi > lo { per_axis.max(1) } else { 1 })
            .collect();
        LatticeGrid { region, counts }
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn coordinate(&self, axis: usize, i: usize) -> f64 {
        let (lo, hi) = (self.region.lo[axis], self.region.hi[axis]);
        if self.counts[axis] == 1 {
            if hi > lo {
                0.5 * (lo + hi)
            } else {
                lo
            }
        } else {
            lo + (hi - lo) * i as f64 / (self.counts[axis] - 1) as f64
        }
    }

    /// Multi-index of flat index `idx`, first axis fastest.
    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        self.counts
            .iter()
            .map(|c| {
                let i = idx % c;
                idx /= c;
                i
            })
            .collect()
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.counts).rev().fold(0, |acc, (i, c)| acc * c + i)
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        self.multi_index(idx)
            .iter()
            .enumerate()
            .map(|(axis, &i)| self.coordinate(axis, i))
            .collect()
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// Pairs of lattice neighbours along one axis.
    pub fn neighbors(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for idx in 0..self.len() {
            let m = self.multi_index(idx);
            for axis in 0..m.len() {
                if m[axis] + 1 < self.counts[axis] {
                    let mut next = m.clone();
                    next[axis] += 1;
                    out.push((idx, self.flat_index(&next)));
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegionPoint {
    pub point: Vec<f64>,
    pub outcome: Result<CertifyOutcome, CertifyError>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegionReport {
    pub grid: LatticeGrid,
    pub points: Vec<RegionPoint>,
    /// `max ‖G(p) − G(q)‖_F / ‖p − q‖` over neighbouring certified nodes.
    pub continuity_constant: f64,
    pub all_certified: bool,
    pub label: &'static str,
}

impl RegionReport {
    pub fn certified_count(&self) -> usize {
        self.points.iter().filter(|p| matches!(&p.outcome, Ok(o) if o.is_certified())).count()
    }

    pub fn infeasible_count(&self) -> usize {
        self.points
            .iter()
            .filter(|p| matches!(&p.outcome, Ok(CertifyOutcome::Infeasible { .. })))
            .count()
    }

    pub fn error_count(&self) -> usize {
        self.points.iter().filter(|p| p.outcome.is_err()).count()
    }

    /// Gram matrix at node `idx` if certified.
    pub fn gram(&self, idx: usize) -> Option<&DMatrix<Complex64>> {
        match &self.points[idx].outcome {
            Ok(CertifyOutcome::Certified(c)) => Some(&c.g),
            _ => None,
        }
    }
}

/// Certify every node of `grid`; per-point failures are collected.
pub fn certify_region(frame: &CRFrame, grid: &LatticeGrid) -> RegionReport {
    certify_region_with(frame, grid, &CertifyOptions::default())
}

pub fn certify_region_with(frame: &CRFrame, grid: &LatticeGrid, opts: &CertifyOptions) -> RegionReport {
    let points: Vec<RegionPoint> = grid
        .points()
        .into_par_iter()
        .map(|p| {
            let outcome = certify_metric_with(frame, &p, opts);
            RegionPoint { point: p, outcome }
        })
        .collect();
    let mut report = RegionReport {
        grid: grid.clone(),
        all_certified: false,
        continuity_constant: 0.0,
        label: REGION_LABEL,
        points,
    };
    report.all_certified = report.certified_count() == report.points.len();
    for (a, b) in grid.neighbors() {
        if let (Some(ga), Some(gb)) = (report.gram(a), report.gram(b)) {
            let d = distance(&report.points[a].point, &report.points[b].point);
            if d > 0.0 {
                report.continuity_constant = report.continuity_constant.max((ga - gb).norm() / d);
            }
        }
    }
    report
}
