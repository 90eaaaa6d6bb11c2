use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{MetricField, OperatorError};
use crate::cr::{CRFrame, ComplexJet};
use crate::geometry::{FieldJet, Jet2};
use crate::pseudoconcave::RegionReport;

/// β least-squares residuals above this are errors.
pub const BETA_RESIDUAL_TOLERANCE: f64 = 1e-7;

/// The frame `X'_j + i·JX'_j` obtained from `L̄_j` by the Cholesky factor
/// `C` of `G = CC*`: column `j` of `C` gives the coefficients of `X'_j`
/// in the complex basis, so that `{X'_j}` is orthonormal for the Hermitian
/// metric with Gram matrix `G⁻¹` in the original frame.
#[derive(Clone, Debug)]
pub struct OrthonormalCRFrame {
    base: Arc<CRFrame>,
    metric: MetricField,
}

/// Value and first derivatives of the orthonormalized fields at one point.
#[derive(Clone, Debug)]
pub struct OrthonormalJets {
    pub point: Vec<f64>,
    pub x: Vec<FieldJet>,
    pub jx: Vec<FieldJet>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BetaCoefficients {
    pub point: Vec<f64>,
    pub beta: Vec<Complex64>,
    /// Norm of the part of `iΣ[L'_j, L̄'_j]` outside `H_pM`.
    pub residual: f64,
}

/// Lower Cholesky factor of a Hermitian positive-definite matrix.
fn cholesky(g: &DMatrix<Complex64>, p: &[f64]) -> Result<DMatrix<Complex64>, OperatorError> {
    g.clone()
        .cholesky()
        .map(|c| c.l())
        .ok_or_else(|| OperatorError::NotPositiveDefinite {
            point: p.to_vec(),
            lambda_min: f64::NAN,
        })
}

/// `dC = C·Φ(C⁻¹ dG C⁻*)` with `Φ` keeping the strict lower part and half the diagonal.
fn cholesky_derivative(c: &DMatrix<Complex64>, dg: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = c.nrows();
    let ci = c.clone().try_inverse().expect("Cholesky factor is invertible");
    let m = &ci * dg * ci.adjoint();
    let phi = DMatrix::from_fn(n, n, |i, j| {
        if i > j {
            m[(i, j)]
        } else if i == j {
            Complex64::new(0.5 * m[(i, i)].re, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    c * phi
}

impl OrthonormalCRFrame {
    pub fn new(base: Arc<CRFrame>, metric: MetricField) -> Result<Self, OperatorError> {
        if metric.n() != base.n() {
            return Err(OperatorError::Frame(crate::cr::FrameError::DimensionMismatch {
                message: format!("metric of size {} for a frame with n = {}", metric.n(), base.n()),
            }));
        }
        Ok(OrthonormalCRFrame { base, metric })
    }

    pub fn with_constant_metric(base: Arc<CRFrame>, g: DMatrix<Complex64>) -> Result<Self, OperatorError> {
        Self::new(base, MetricField::Constant(g))
    }

    pub fn base(&self) -> &Arc<CRFrame> {
        &self.base
    }

    pub fn metric(&self) -> &MetricField {
        &self.metric
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn jets(&self, p: &[f64]) -> Result<OrthonormalJets, OperatorError> {
        let n = self.n();
        let dim = self.dim();
        let base = self.base.jets(p)?;
        let (g, dg) = self.metric.eval(p)?;
        let c = cholesky(&g, p)?;
        let dc: Vec<DMatrix<Complex64>> = dg.iter().map(|d| cholesky_derivative(&c, d)).collect();
        // Σ_l a_l F_l with variable coefficients a_l(p), ∇a_l.
        let combine = |terms: &[(f64, Vec<f64>, &FieldJet)]| -> FieldJet {
            let mut out = FieldJet::zeros(dim);
            for (a, grad, f) in terms {
                out.axpy(*a, f);
                for i in 0..dim {
                    for (b, gb) in grad.iter().enumerate() {
                        out.jac[(i, b)] += f.value[i] * gb;
                    }
                }
            }
            out
        };
        let mut x = Vec::with_capacity(n);
        let mut jx = Vec::with_capacity(n);
        for j in 0..n {
            let mut xt = Vec::with_capacity(2 * n);
            let mut jt = Vec::with_capacity(2 * n);
            for l in 0..n {
                let re = c[(l, j)].re;
                let im = c[(l, j)].im;
                let dre: Vec<f64> = dc.iter().map(|d| d[(l, j)].re).collect();
                let dim_: Vec<f64> = dc.iter().map(|d| d[(l, j)].im).collect();
                let neg_dim: Vec<f64> = dim_.iter().map(|v| -v).collect();
                xt.push((re, dre.clone(), &base.x[l]));
                xt.push((im, dim_.clone(), &base.jx[l]));
                jt.push((re, dre, &base.jx[l]));
                jt.push((-im, neg_dim, &base.x[l]));
            }
            x.push(combine(&xt));
            jx.push(combine(&jt));
        }
        Ok(OrthonormalJets {
            point: p.to_vec(),
            x,
            jx,
        })
    }

    /// Hermitian Gram matrix of `X'_j + i·JX'_j` in the metric with Gram
    /// `G⁻¹` on the original frame; the identity when orthonormalization worked.
    pub fn gram(&self, p: &[f64]) -> Result<DMatrix<Complex64>, OperatorError> {
        let n = self.n();
        let (g, _) = self.metric.eval(p)?;
        let jets = self.jets(p)?;
        let base = self.base.jets(p)?.matrix();
        // Coefficients of each X'_j in the complex basis, recovered by least squares.
        let pinv = base.clone().pseudo_inverse(1e-14).expect("nonnegative epsilon");
        let coeffs = DMatrix::from_fn(n, n, |l, j| {
            let v = &pinv * &jets.x[j].value;
            Complex64::new(v[l], v[n + l])
        });
        let h = g.try_inverse().ok_or(OperatorError::NotPositiveDefinite {
            point: p.to_vec(),
            lambda_min: 0.0,
        })?;
        Ok(coeffs.adjoint() * h * coeffs)
    }

    pub fn beta(&self, p: &[f64]) -> Result<BetaCoefficients, OperatorError> {
        let jets = self.jets(p)?;
        let (beta, residual) = jets.beta();
        if residual > BETA_RESIDUAL_TOLERANCE {
            return Err(OperatorError::BetaResidual {
                point: p.to_vec(),
                residual,
            });
        }
        Ok(BetaCoefficients {
            point: p.to_vec(),
            beta,
            residual,
        })
    }
}

impl OrthonormalJets {
    pub fn n(&self) -> usize {
        self.x.len()
    }

    fn frame_matrix(&self) -> DMatrix<f64> {
        let n = self.n();
        let dim = self.point.len();
        DMatrix::from_fn(dim, 2 * n, |i, c| if c < n { self.x[c].value[i] } else { self.jx[c - n].value[i] })
    }

    /// `iΣ[L_j, L̄_j] = −2Σ[X_j, JX_j]`.
    pub fn bracket_sum(&self) -> DVector<f64> {
        let dim = self.point.len();
        let mut v = DVector::zeros(dim);
        for (x, jx) in self.x.iter().zip(&self.jx) {
            v -= x.bracket(jx) * 2.0;
        }
        v
    }

    /// β from the least-squares expansion of `iΣ[L_j, L̄_j]` in the frame,
    /// together with the out-of-span residual.
    pub fn beta(&self) -> (Vec<Complex64>, f64) {
        let n = self.n();
        let f = self.frame_matrix();
        let v = self.bracket_sum();
        let coeffs = f.clone().svd(true, true).solve(&v, 1e-14).expect("SVD computed with U and V");
        let residual = (&f * &coeffs - &v).norm();
        let beta = (0..n).map(|r| Complex64::new(0.5 * coeffs[r], 0.5 * coeffs[n + r])).collect();
        (beta, residual)
    }

    /// `X₀ = Σ(Im β^j X_j − Re β^j JX_j)` as a field jet. Its derivatives are
    /// not needed by the operator and are left at zero.
    pub fn drift(&self, beta: &[Complex64]) -> FieldJet {
        let dim = self.point.len();
        let mut d = FieldJet::zeros(dim);
        for j in 0..self.n() {
            d.value.axpy(beta[j].im, &self.x[j].value, 1.0);
            d.value.axpy(-beta[j].re, &self.jx[j].value, 1.0);
        }
        d
    }

    /// `(L_1u, …, L_nu)` with `L_j = X_j − i·JX_j`.
    pub fn l_apply(&self, u: &ComplexJet) -> Vec<Complex64> {
        self.x
            .iter()
            .zip(&self.jx)
            .map(|(x, jx)| {
                Complex64::new(x.apply(&u.re) + jx.apply(&u.im), x.apply(&u.im) - jx.apply(&u.re))
            })
            .collect()
    }

    /// `Σ X_j² u + (JX_j)² u + X₀u`.
    pub fn apply(&self, drift: &FieldJet, u: &Jet2) -> f64 {
        let second: f64 = self
            .x
            .iter()
            .chain(&self.jx)
            .map(|f| f.second_derivative(u))
            .sum();
        second + drift.apply(u)
    }

    /// Principal symbol matrix `Σ X_jX_jᵀ + JX_jJX_jᵀ`.
    pub fn symbol(&self) -> DMatrix<f64> {
        let dim = self.point.len();
        let mut s = DMatrix::zeros(dim, dim);
        for f in self.x.iter().chain(&self.jx) {
            s += &f.value * f.value.transpose();
        }
        s
    }
}

/// Orthonormalize `frame` with the metric interpolated from a fully
/// certified region report.
pub fn orthonormalize_frame(frame: Arc<CRFrame>, report: &RegionReport) -> Result<OrthonormalCRFrame, OperatorError> {
    OrthonormalCRFrame::new(frame, MetricField::from_report(report)?)
}

pub fn beta_coefficients(oframe: &OrthonormalCRFrame, p: &[f64]) -> Result<BetaCoefficients, OperatorError> {
    oframe.beta(p)
}
