use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{ComplexJet, FrameError};
use crate::geometry::{Chart, CoefficientExpr, FieldJet, GeometryError, VectorField};

/// Smallest singular value allowed for the frame `{X_j, JX_j}` at a probe point.
pub const RANK_TOLERANCE: f64 = 1e-8;

/// Coefficient arrays describing an almost CR structure of type `(n, k)` on a chart.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameDefinition {
    pub chart: Chart,
    pub n: usize,
    pub k: usize,
    /// `x[j][i]` is the `∂/∂y^{i+1}` component of `X_{j+1}`.
    pub x: Vec<Vec<String>>,
    pub jx: Vec<Vec<String>>,
}

/// A frame `X_1..X_n, JX_1..JX_n` of `HM` over a chart; `L̄_j = X_j + i·JX_j`.
#[derive(Clone, Debug)]
pub struct CRFrame {
    chart: Arc<Chart>,
    n: usize,
    k: usize,
    x: Vec<VectorField>,
    jx: Vec<VectorField>,
}

/// First-order data of the `2n` frame fields at one point.
#[derive(Clone, Debug)]
pub struct FrameJets {
    pub point: Vec<f64>,
    pub x: Vec<FieldJet>,
    pub jx: Vec<FieldJet>,
}

impl FrameJets {
    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn dim(&self) -> usize {
        self.point.len()
    }

    /// Field `p` in the ordering `X_1..X_n, JX_1..JX_n`.
    pub fn field(&self, p: usize) -> &FieldJet {
        let n = self.n();
        if p < n {
            &self.x[p]
        } else {
            &self.jx[p - n]
        }
    }

    /// `N × 2n` matrix whose columns are the frame vectors.
    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.n();
        DMatrix::from_fn(self.dim(), 2 * n, |i, p| self.field(p).value[i])
    }

    /// `(L̄_1u, …, L̄_nu)`.
    pub fn dbar(&self, u: &ComplexJet) -> Vec<Complex64> {
        self.x
            .iter()
            .zip(&self.jx)
            .map(|(x, jx)| {
                let (xr, xi) = (x.apply(&u.re), x.apply(&u.im));
                let (jr, ji) = (jx.apply(&u.re), jx.apply(&u.im));
                Complex64::new(xr - ji, xi + jr)
            })
            .collect()
    }

    /// `(L_1u, …, L_nu)` with `L_j = X_j − i·JX_j`.
    pub fn l_apply(&self, u: &ComplexJet) -> Vec<Complex64> {
        self.x
            .iter()
            .zip(&self.jx)
            .map(|(x, jx)| {
                let (xr, xi) = (x.apply(&u.re), x.apply(&u.im));
                let (jr, ji) = (jx.apply(&u.re), jx.apply(&u.im));
                Complex64::new(xr + ji, xi - jr)
            })
            .collect()
    }

    /// Norm of the part of the brackets `[L̄_i, L̄_j]` outside the complex span
    /// of `L̄_1..L̄_n`.
    pub fn integrability_residual(&self) -> f64 {
        let n = self.n();
        if n < 2 {
            return 0.0;
        }
        let dim = self.dim();
        let lbar = DMatrix::from_fn(dim, n, |i, m| {
            Complex64::new(self.x[m].value[i], self.jx[m].value[i])
        });
        let gram = lbar.adjoint() * &lbar;
        let gram_inv = match gram.try_inverse() {
            Some(g) => g,
            None => return f64::INFINITY,
        };
        let mut total = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let re = self.x[i].bracket(&self.x[j]) - self.jx[i].bracket(&self.jx[j]);
                let im = self.x[i].bracket(&self.jx[j]) + self.jx[i].bracket(&self.x[j]);
                let w = DVector::from_fn(dim, |r, _| Complex64::new(re[r], im[r]));
                let coeff = &gram_inv * (lbar.adjoint() * &w);
                let resid = &w - &lbar * coeff;
                total += resid.norm_squared();
            }
        }
        total.sqrt()
    }
}

impl CRFrame {
    /// Validate and build a frame. The rank condition is probed at the chart
    /// center, at the (slightly shrunk) corners and at quasi-random points.
    pub fn build(def: &FrameDefinition) -> Result<CRFrame, FrameError> {
        let dim = def.chart.dim();
        if def.n == 0 || dim != 2 * def.n + def.k {
            return Err(FrameError::DimensionMismatch {
                message: format!(
                    "chart dimension {} does not equal 2n+k = {}",
                    dim,
                    2 * def.n + def.k
                ),
            });
        }
        if def.x.len() != def.n || def.jx.len() != def.n {
            return Err(FrameError::DimensionMismatch {
                message: format!(
                    "expected {} X and {} JX arrays, found {} and {}",
                    def.n,
                    def.n,
                    def.x.len(),
                    def.jx.len()
                ),
            });
        }
        let chart = Arc::new(def.chart.clone());
        let parse = |arrays: &[Vec<String>]| -> Result<Vec<VectorField>, FrameError> {
            arrays
                .iter()
                .map(|arr| {
                    if arr.len() != dim {
                        return Err(FrameError::DimensionMismatch {
                            message: format!("coefficient array of length {} on a {}-dimensional chart", arr.len(), dim),
                        });
                    }
                    let coeffs = arr
                        .iter()
                        .map(|s| CoefficientExpr::parse(s, dim))
                        .collect::<Result<Vec<_>, GeometryError>>()?;
                    Ok(VectorField::new(chart.clone(), coeffs)?)
                })
                .collect()
        };
        let frame = CRFrame {
            n: def.n,
            k: def.k,
            x: parse(&def.x)?,
            jx: parse(&def.jx)?,
            chart: chart.clone(),
        };
        for p in probe_points(&chart) {
            frame.check_rank(&p)?;
        }
        Ok(frame)
    }

    /// Assemble a frame from fields without probing; used for derived frames.
    pub fn from_fields(
        chart: Arc<Chart>,
        k: usize,
        x: Vec<VectorField>,
        jx: Vec<VectorField>,
    ) -> Result<CRFrame, FrameError> {
        let n = x.len();
        if jx.len() != n || chart.dim() != 2 * n + k {
            return Err(FrameError::DimensionMismatch {
                message: "field counts do not match the chart dimension".into(),
            });
        }
        Ok(CRFrame { chart, n, k, x, jx })
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn x(&self) -> &[VectorField] {
        &self.x
    }

    pub fn jx(&self) -> &[VectorField] {
        &self.jx
    }

    /// The generating family `X_1..X_n, JX_1..JX_n` of `HM`.
    pub fn fields(&self) -> Vec<VectorField> {
        self.x.iter().chain(&self.jx).cloned().collect()
    }

    pub fn jets(&self, p: &[f64]) -> Result<FrameJets, GeometryError> {
        Ok(FrameJets {
            point: p.to_vec(),
            x: self.x.iter().map(|f| f.jet(p)).collect::<Result<_, _>>()?,
            jx: self.jx.iter().map(|f| f.jet(p)).collect::<Result<_, _>>()?,
        })
    }

    /// Smallest singular value of the frame matrix at `p`.
    pub fn min_singular_value(&self, p: &[f64]) -> Result<f64, GeometryError> {
        let cols: Vec<Vec<f64>> = self
            .fields()
            .iter()
            .map(|f| f.eval(p))
            .collect::<Result<_, _>>()?;
        let m = DMatrix::from_fn(self.dim(), 2 * self.n, |i, c| cols[c][i]);
        Ok(m.svd(false, false).singular_values.min())
    }

    fn check_rank(&self, p: &[f64]) -> Result<(), FrameError> {
        let sigma = self.min_singular_value(p)?;
        if sigma < RANK_TOLERANCE {
            return Err(FrameError::RankDeficient {
                point: p.to_vec(),
                sigma,
            });
        }
        Ok(())
    }

    /// Multiply every frame field by the positive function `f`.
    pub fn scaled(&self, f: &CoefficientExpr) -> CRFrame {
        CRFrame {
            chart: self.chart.clone(),
            n: self.n,
            k: self.k,
            x: self.x.iter().map(|v| v.scaled(f)).collect(),
            jx: self.jx.iter().map(|v| v.scaled(f)).collect(),
        }
    }
}

/// Build a frame from a structured description.
pub fn build_frame(def: &FrameDefinition) -> Result<CRFrame, FrameError> {
    CRFrame::build(def)
}

/// Center, shrunk corners and a few Halton points of the chart box.
fn probe_points(chart: &Chart) -> Vec<Vec<f64>> {
    let b = &chart.bounds;
    let dim = b.dim();
    let center = b.center();
    let mut pts = vec![center.clone()];
    if dim <= 10 {
        for mask in 0..(1usize << dim) {
            pts.push(
                (0..dim)
                    .map(|i| {
                        let half = 0.999 * 0.5 * (b.hi[i] - b.lo[i]);
                        center[i] + if mask >> i & 1 == 1 { half } else { -half }
                    })
                    .collect(),
            );
        }
    }
    for idx in 1..=20 {
        pts.push(
            (0..dim)
                .map(|i| b.lo[i] + (b.hi[i] - b.lo[i]) * crate::util::halton(idx, i))
                .collect(),
        );
    }
    pts
}
