use std::io::Write;

use nalgebra::{DMatrix, DVector};

use super::index::PointIndex;
use super::{lie_rank, LeafError, LIE_DEPTH};
use crate::geometry::{flow, BoxRegion, GeometryError, VectorField};

/// Local PCA window, in units of `eps`.
pub const PCA_WINDOW: f64 = 5.0;
/// PCA eigenvalues below this fraction of the largest are treated as noise.
pub const PCA_CUTOFF: f64 = 0.05;
/// RK4 steps per flow segment of length `eps`.
pub const FLOW_SUBSTEPS: usize = 2;
/// Chart distance vs graph distance ratio that flags a possible self-approach.
pub const IMMERSION_RATIO: f64 = 10.0;

/// How a cloud point was reached: from `parent` along `±field` for time `eps`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Step {
    pub parent: usize,
    pub field: usize,
    pub forward: bool,
}

/// Finite approximation of the leaf through `origin` inside `region`.
#[derive(Clone, Debug, PartialEq)]
pub struct LeafCloud {
    pub origin: Vec<f64>,
    pub region: BoxRegion,
    pub eps: f64,
    pub dim: usize,
    /// Row-major `len × dim` coordinates; point 0 is the origin.
    pub coords: Vec<f64>,
    /// Number of flow segments from the origin.
    pub graph_distance: Vec<usize>,
    pub provenance: Vec<Option<Step>>,
    pub dim_estimate: usize,
    pub lie_rank: usize,
    pub budget_exhausted: bool,
    /// Pairs of nearby points whose graph distances differ by more than
    /// `IMMERSION_RATIO` times their chart distance.
    pub self_approach_pairs: usize,
}

impl LeafCloud {
    pub fn len(&self) -> usize {
        self.graph_distance.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks(self.dim)
    }

    /// The sequence of steps leading from the origin to point `i`.
    pub fn path(&self, mut i: usize) -> Vec<Step> {
        let mut out = Vec::new();
        while let Some(s) = self.provenance[i] {
            out.push(s);
            i = s.parent;
        }
        out.reverse();
        out
    }

    pub fn index(&self, cell: f64) -> PointIndex {
        let mut idx = PointIndex::new(self.dim, cell);
        for (i, p) in self.points().enumerate() {
            idx.insert(p, i);
        }
        idx
    }

    /// Distance from `p` to the nearest cloud point if it is at most `r`.
    pub fn distance_within(&self, index: &PointIndex, p: &[f64], r: f64) -> Option<f64> {
        index.nearest_within(&self.coords, p, r).map(|(_, d)| d)
    }

    /// Index suitable for `tangent_space_indexed`.
    pub fn pca_index(&self) -> PointIndex {
        self.index(PCA_WINDOW * self.eps)
    }

    /// Orthonormal basis (columns) of the PCA tangent space at `p`.
    pub fn tangent_space(&self, p: &[f64]) -> DMatrix<f64> {
        let r2 = (PCA_WINDOW * self.eps).powi(2);
        let near: Vec<&[f64]> = self
            .points()
            .filter(|q| q.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() <= r2)
            .collect();
        self.principal_directions(&near)
    }

    /// As `tangent_space`, with neighbours found through `index` (from `pca_index`).
    pub fn tangent_space_indexed(&self, index: &PointIndex, p: &[f64]) -> DMatrix<f64> {
        let near: Vec<&[f64]> = index
            .all_within(&self.coords, p, PCA_WINDOW * self.eps)
            .into_iter()
            .map(|i| self.point(i))
            .collect();
        self.principal_directions(&near)
    }

    /// Estimated dimension at `p` by local PCA.
    pub fn local_dimension(&self, p: &[f64]) -> usize {
        self.tangent_space(p).ncols()
    }

    fn principal_directions(&self, near: &[&[f64]]) -> DMatrix<f64> {
        let n = self.dim;
        if near.len() < 2 {
            return DMatrix::zeros(n, 0);
        }
        let mut mean = DVector::zeros(n);
        for q in near {
            mean += DVector::from_column_slice(q);
        }
        mean /= near.len() as f64;
        let mut cov = DMatrix::zeros(n, n);
        for q in near {
            let d = DVector::from_column_slice(q) - &mean;
            cov += &d * d.transpose();
        }
        cov /= near.len() as f64;
        let eig = cov.symmetric_eigen();
        let max = eig.eigenvalues.max();
        let keep: Vec<usize> = (0..n).filter(|&i| max > 0.0 && eig.eigenvalues[i] >= PCA_CUTOFF * max).collect();
        DMatrix::from_fn(n, keep.len(), |r, c| eig.eigenvectors[(r, keep[c])])
    }

    /// CSV with one point per row and a graph-distance column, CRLF line
    /// endings and 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(out);
        let mut header: Vec<String> = (1..=self.dim).map(|i| format!("y{i}")).collect();
        header.push("graph_distance".into());
        w.write_record(&header)?;
        for (i, p) in self.points().enumerate() {
            let mut row: Vec<String> = p.iter().map(|v| format!("{v:.16e}")).collect();
            row.push(self.graph_distance[i].to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Breadth-first exploration state; each call to `expand_layer` adds the
/// points at the next graph distance.
pub struct Explorer<'a> {
    fields: &'a [VectorField],
    region: BoxRegion,
    eps: f64,
    budget: usize,
    dim: usize,
    coords: Vec<f64>,
    graph_distance: Vec<usize>,
    provenance: Vec<Option<Step>>,
    frontier: Vec<usize>,
    index: PointIndex,
    exhausted: bool,
}

impl<'a> Explorer<'a> {
    pub fn new(
        fields: &'a [VectorField],
        x0: &[f64],
        region: &BoxRegion,
        eps: f64,
        budget: usize,
    ) -> Result<Self, LeafError> {
        if budget == 0 {
            return Err(LeafError::ZeroBudget);
        }
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(LeafError::InvalidEps { eps });
        }
        let first = fields.first().ok_or(LeafError::NoFields)?;
        let dim = first.dim();
        if fields.iter().any(|f| !f.same_chart(first)) {
            return Err(GeometryError::ChartMismatch.into());
        }
        if x0.len() != dim || region.dim() != dim {
            return Err(GeometryError::Dimension {
                expected: dim,
                found: x0.len(),
            }
            .into());
        }
        if !region.contains(x0) {
            return Err(LeafError::OriginOutside { point: x0.to_vec() });
        }
        first.chart().check_point(x0)?;
        let mut index = PointIndex::new(dim, 0.5 * eps);
        index.insert(x0, 0);
        Ok(Explorer {
            fields,
            region: region.clone(),
            eps,
            budget,
            dim,
            coords: x0.to_vec(),
            graph_distance: vec![0],
            provenance: vec![None],
            frontier: vec![0],
            index,
            exhausted: false,
        })
    }

    pub fn len(&self) -> usize {
        self.graph_distance.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_closed(&self) -> bool {
        self.frontier.is_empty()
    }

    pub fn budget_exhausted(&self) -> bool {
        self.exhausted
    }

    /// Nearest stored point within `r ≤ eps/2` of `p`.
    pub fn nearest(&self, p: &[f64], r: f64) -> Option<(usize, f64)> {
        self.index.nearest_within(&self.coords, p, r)
    }

    /// Expand the current frontier once. Returns `false` when nothing is left
    /// to do (closed or out of budget).
    pub fn expand_layer(&mut self) -> bool {
        if self.frontier.is_empty() || self.exhausted {
            return false;
        }
        let step = self.eps / FLOW_SUBSTEPS as f64;
        let mut next = Vec::new();
        let frontier = std::mem::take(&mut self.frontier);
        'outer: for &i in &frontier {
            let p = self.coords[i * self.dim..(i + 1) * self.dim].to_vec();
            for (fi, field) in self.fields.iter().enumerate() {
                for forward in [true, false] {
                    let t = if forward { self.eps } else { -self.eps };
                    let q = match flow(field, &p, t, step) {
                        Ok(q) => q,
                        Err(_) => continue,
                    };
                    if !self.region.contains(&q) {
                        continue;
                    }
                    if self.index.nearest_within(&self.coords, &q, 0.5 * self.eps).is_some() {
                        continue;
                    }
                    if self.len() >= self.budget {
                        self.exhausted = true;
                        break 'outer;
                    }
                    let id = self.len();
                    self.index.insert(&q, id);
                    self.coords.extend_from_slice(&q);
                    self.graph_distance.push(self.graph_distance[i] + 1);
                    self.provenance.push(Some(Step {
                        parent: i,
                        field: fi,
                        forward,
                    }));
                    next.push(id);
                }
            }
        }
        self.frontier = next;
        !self.frontier.is_empty() && !self.exhausted
    }

    /// Snapshot without the expensive diagnostics, for stopping tests.
    pub fn cloud_view(&self) -> LeafCloud {
        LeafCloud {
            origin: self.coords[..self.dim].to_vec(),
            region: self.region.clone(),
            eps: self.eps,
            dim: self.dim,
            coords: self.coords.clone(),
            graph_distance: self.graph_distance.clone(),
            provenance: self.provenance.clone(),
            dim_estimate: 0,
            lie_rank: 0,
            budget_exhausted: self.exhausted,
            self_approach_pairs: 0,
        }
    }

    pub fn finish(self) -> LeafCloud {
        let mut cloud = self.cloud_view();
        cloud.dim_estimate = cloud.local_dimension(&cloud.origin.clone());
        cloud.lie_rank = lie_rank(self.fields, &cloud.origin, LIE_DEPTH).unwrap_or(0);
        cloud.self_approach_pairs = self_approach_pairs(&cloud);
        cloud
    }
}

fn self_approach_pairs(cloud: &LeafCloud) -> usize {
    let idx = cloud.index(cloud.eps);
    let mut count = 0;
    for (i, p) in cloud.points().enumerate() {
        if let Some((j, d)) = idx.nearest_within_excluding(&cloud.coords, p, cloud.eps, i) {
            let gap = cloud.graph_distance[i].abs_diff(cloud.graph_distance[j]) as f64 * cloud.eps;
            if d > 0.0 && gap / d > IMMERSION_RATIO {
                count += 1;
            }
        }
    }
    count
}

/// Explore the reachable set of `fields` from `x0` inside `region`.
pub fn explore_leaf(
    fields: &[VectorField],
    x0: &[f64],
    region: &BoxRegion,
    eps: f64,
    budget: usize,
) -> Result<LeafCloud, LeafError> {
    let mut ex = Explorer::new(fields, x0, region, eps, budget)?;
    while ex.expand_layer() {}
    Ok(ex.finish())
}
