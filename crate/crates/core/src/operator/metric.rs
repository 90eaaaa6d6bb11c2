use nalgebra::DMatrix;
use num_complex::Complex64;

use super::OperatorError;
use crate::pseudoconcave::{min_eigenpair, LatticeGrid, RegionReport};

/// `G` must keep its smallest eigenvalue above this after interpolation.
pub const INTERPOLATION_MIN_EIGENVALUE: f64 = 1e-9;

/// A field of Hermitian positive-definite matrices `G(p)` on a chart region.
#[derive(Clone, Debug, PartialEq)]
pub enum MetricField {
    Constant(DMatrix<Complex64>),
    /// Multilinear interpolation of certified lattice values.
    Interpolated {
        grid: LatticeGrid,
        nodes: Vec<DMatrix<Complex64>>,
    },
}

fn hermitian_part(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

impl MetricField {
    /// Interpolated field from a fully certified region report.
    pub fn from_report(report: &RegionReport) -> Result<Self, OperatorError> {
        let nodes = (0..report.points.len())
            .map(|i| {
                report.gram(i).cloned().ok_or_else(|| OperatorError::NotCertified {
                    point: report.points[i].point.clone(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(MetricField::Interpolated {
            grid: report.grid.clone(),
            nodes,
        })
    }

    pub fn n(&self) -> usize {
        match self {
            MetricField::Constant(g) => g.nrows(),
            MetricField::Interpolated { nodes, .. } => nodes[0].nrows(),
        }
    }

    /// `G(p)` and its partial derivatives `∂_a G(p)` for each chart axis.
    pub fn eval(&self, p: &[f64]) -> Result<(DMatrix<Complex64>, Vec<DMatrix<Complex64>>), OperatorError> {
        let (g, dg) = match self {
            MetricField::Constant(g) => {
                let n = g.nrows();
                (g.clone(), vec![DMatrix::zeros(n, n); p.len()])
            }
            MetricField::Interpolated { grid, nodes } => interpolate(grid, nodes, p)?,
        };
        let g = hermitian_part(&g);
        let (lambda, _) = min_eigenpair(&g);
        if !(lambda >= INTERPOLATION_MIN_EIGENVALUE) {
            return Err(OperatorError::NotPositiveDefinite {
                point: p.to_vec(),
                lambda_min: lambda,
            });
        }
        Ok((g, dg.iter().map(hermitian_part).collect()))
    }
}

fn interpolate(
    grid: &LatticeGrid,
    nodes: &[DMatrix<Complex64>],
    p: &[f64],
) -> Result<(DMatrix<Complex64>, Vec<DMatrix<Complex64>>), OperatorError> {
    let dim = grid.counts.len();
    if p.len() != dim || !grid.region.contains(p) {
        return Err(OperatorError::OutsideRegion { point: p.to_vec() });
    }
    // Per axis: lower cell index, local weight s ∈ [0,1] and ds/dy.
    let mut cell = Vec::with_capacity(dim);
    for axis in 0..dim {
        let c = grid.counts[axis];
        if c == 1 {
            cell.push((0usize, 0.0, 0.0));
            continue;
        }
        let (lo, hi) = (grid.region.lo[axis], grid.region.hi[axis]);
        let h = (hi - lo) / (c - 1) as f64;
        let u = ((p[axis] - lo) / h).clamp(0.0, (c - 1) as f64);
        let i = (u.floor() as usize).min(c - 2);
        cell.push((i, u - i as f64, 1.0 / h));
    }
    let n = nodes[0].nrows();
    let mut g = DMatrix::<Complex64>::zeros(n, n);
    let mut dg = vec![DMatrix::<Complex64>::zeros(n, n); dim];
    let active: Vec<usize> = (0..dim).filter(|&a| grid.counts[a] > 1).collect();
    for mask in 0..(1usize << active.len()) {
        let mut multi: Vec<usize> = cell.iter().map(|c| c.0).collect();
        let mut factors = vec![1.0; dim];
        let mut dfactors = vec![0.0; dim];
        for (bit, &axis) in active.iter().enumerate() {
            let (_, s, ds) = cell[axis];
            if mask >> bit & 1 == 1 {
                multi[axis] += 1;
                factors[axis] = s;
                dfactors[axis] = ds;
            } else {
                factors[axis] = 1.0 - s;
                dfactors[axis] = -ds;
            }
        }
        let node = &nodes[grid.flat_index(&multi)];
        let w: f64 = factors.iter().product();
        g += node * Complex64::new(w, 0.0);
        for &axis in &active {
            let dw: f64 = (0..dim)
                .map(|b| if b == axis { dfactors[b] } else { factors[b] })
                .product();
            dg[axis] += node * Complex64::new(dw, 0.0);
        }
    }
    Ok((g, dg))
}
