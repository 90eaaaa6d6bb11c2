use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::simplex::{maximize, LpOutcome, Row, Sense};
use super::CertifyError;
use crate::cr::CRFrame;

/// Certificates need `λ_min(G) ≥ MIN_EIGENVALUE`.
pub const MIN_EIGENVALUE: f64 = 1e-6;
/// Bound on `|trace(G·A(ξ_i))|` and `|trace G − n|` for a certificate.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;
/// Cutting planes stop once `λ_min(G) ≥ t − CUT_TOLERANCE`.
pub const CUT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_MAX_ITERATIONS: usize = 500;

/// Equality rows whose coefficients are all below this are treated as `0 = 0`.
const NULL_ROW: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyOptions {
    pub max_iterations: usize,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }
}

/// Positive-definite Hermitian `G` with `trace G = n` and
/// `trace(G·A(ξ_i)) = 0` for a basis `ξ_i` of the characteristic covectors.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricCertificate {
    pub point: Vec<f64>,
    pub g: DMatrix<Complex64>,
    pub lambda_min: f64,
    pub residuals: Vec<f64>,
    pub trace: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CertifyOutcome {
    Certified(MetricCertificate),
    /// No positive-definite solution. `best_t` is the optimal margin when the
    /// equality constraints alone are feasible, `cuts` the final cut directions.
    Infeasible {
        point: Vec<f64>,
        best_t: Option<f64>,
        cuts: Vec<Vec<Complex64>>,
    },
    /// Optimal margin in `(0, MIN_EIGENVALUE)`.
    Inconclusive {
        point: Vec<f64>,
        best_t: f64,
        cuts: Vec<Vec<Complex64>>,
    },
}

impl CertifyOutcome {
    pub fn certificate(&self) -> Option<&MetricCertificate> {
        match self {
            CertifyOutcome::Certified(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_certified(&self) -> bool {
        self.certificate().is_some()
    }
}

/// Real parameters of an `n × n` Hermitian matrix: the diagonal, then
/// `(Re g_ij, Im g_ij)` for `i < j` in row order.
struct Layout {
    n: usize,
}

impl Layout {
    fn len(&self) -> usize {
        self.n * self.n
    }

    fn off(&self, i: usize, j: usize) -> usize {
        // index of Re g_ij, i < j
        let n = self.n;
        let before: usize = (0..i).map(|r| n - r - 1).sum();
        n + 2 * (before + (j - i - 1))
    }

    fn matrix(&self, v: &[f64]) -> DMatrix<Complex64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(v[i], 0.0)
            } else if i < j {
                let o = self.off(i, j);
                Complex64::new(v[o], v[o + 1])
            } else {
                let o = self.off(j, i);
                Complex64::new(v[o], -v[o + 1])
            }
        })
    }

    /// Coefficients of `trace(G·A)` for Hermitian `A`.
    fn trace_row(&self, a: &DMatrix<Complex64>) -> Vec<f64> {
        let n = self.n;
        let mut row = vec![0.0; self.len()];
        for i in 0..n {
            row[i] = a[(i, i)].re;
            for j in (i + 1)..n {
                let o = self.off(i, j);
                row[o] = 2.0 * a[(j, i)].re;
                row[o + 1] = -2.0 * a[(j, i)].im;
            }
        }
        row
    }

    /// Coefficients of `w*Gw`.
    fn quad_row(&self, w: &[Complex64]) -> Vec<f64> {
        let n = self.n;
        let mut row = vec![0.0; self.len()];
        for i in 0..n {
            row[i] = w[i].norm_sqr();
            for j in (i + 1)..n {
                let s = w[i].conj() * w[j];
                let o = self.off(i, j);
                row[o] = 2.0 * s.re;
                row[o + 1] = -2.0 * s.im;
            }
        }
        row
    }

    fn lower(&self, idx: usize) -> f64 {
        if idx < self.n {
            0.0
        } else {
            -(self.n as f64)
        }
    }

    fn upper(&self) -> f64 {
        self.n as f64
    }
}

fn initial_cuts(n: usize) -> Vec<Vec<Complex64>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let unit = |i: usize, c: Complex64| {
        let mut w = vec![Complex64::new(0.0, 0.0); n];
        w[i] = c;
        w
    };
    let mut cuts = Vec::new();
    for i in 0..n {
        cuts.push(unit(i, Complex64::new(1.0, 0.0)));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            for c in [
                Complex64::new(1.0, 0.0),
                Complex64::new(-1.0, 0.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, -1.0),
            ] {
                let mut w = unit(i, Complex64::new(s, 0.0));
                w[j] = c * s;
                cuts.push(w);
            }
        }
    }
    cuts
}

/// Smallest eigenvalue of a Hermitian matrix with a unit eigenvector.
pub(crate) fn min_eigenpair(g: &DMatrix<Complex64>) -> (f64, Vec<Complex64>) {
    let eig = g.clone().symmetric_eigen();
    let (idx, val) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, v)| (i, *v))
        .expect("nonempty matrix");
    (val, eig.eigenvectors.column(idx).iter().copied().collect())
}

pub(crate) fn trace_product(g: &DMatrix<Complex64>, a: &DMatrix<Complex64>) -> Complex64 {
    (g * a).trace()
}

/// Minimal-norm correction of `v` onto `{E v = b}`.
fn project(v: &[f64], eq: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    if eq.is_empty() {
        return v.to_vec();
    }
    let m = DMatrix::from_fn(eq.len(), v.len(), |i, j| eq[i][j]);
    let x = DVector::from_column_slice(v);
    let r = &m * &x - DVector::from_column_slice(b);
    let pinv = m.clone().pseudo_inverse(1e-12).expect("pseudo-inverse with nonnegative epsilon");
    (x - pinv * r).as_slice().to_vec()
}

/// Cutting-plane search for a certificate given the Levi matrices of a basis
/// of characteristic covectors.
pub fn certify_from_levi(
    point: &[f64],
    n: usize,
    levi: &[DMatrix<Complex64>],
    opts: &CertifyOptions,
) -> Result<CertifyOutcome, CertifyError> {
    let layout = Layout { n };
    let nv = layout.len() + 1; // last variable is t
    let shift: Vec<f64> = (0..nv)
        .map(|i| if i < layout.len() { layout.lower(i) } else { -(n as f64) })
        .collect();

    // Equalities in unshifted parameters; kept for the final projection.
    let mut eq: Vec<Vec<f64>> = vec![(0..layout.len()).map(|i| if i < n { 1.0 } else { 0.0 }).collect()];
    let mut eq_rhs = vec![n as f64];
    for a in levi {
        let row = layout.trace_row(a);
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > NULL_ROW {
            eq.push(row.iter().map(|v| v / norm).collect());
            eq_rhs.push(0.0);
        }
    }

    // Rows in shifted variables x = v − lo ≥ 0.
    let shifted = |coeffs: &[f64], sense: Sense, rhs: f64| -> Row {
        let offset: f64 = coeffs.iter().zip(&shift).map(|(c, s)| c * s).sum();
        Row {
            coeffs: coeffs.to_vec(),
            sense,
            rhs: rhs - offset,
        }
    };
    let mut base_rows = Vec::new();
    for (row, rhs) in eq.iter().zip(&eq_rhs) {
        let mut c = row.clone();
        c.push(0.0);
        base_rows.push(shifted(&c, Sense::Eq, *rhs));
    }
    for i in 0..nv {
        let mut c = vec![0.0; nv];
        c[i] = 1.0;
        base_rows.push(shifted(&c, Sense::Le, layout.upper()));
    }
    let mut objective = vec![0.0; nv];
    objective[nv - 1] = 1.0;

    let mut cuts = initial_cuts(n);
    for iteration in 1..=opts.max_iterations {
        let mut rows = base_rows.clone();
        for w in &cuts {
            let mut c = layout.quad_row(w);
            c.push(-1.0);
            rows.push(shifted(&c, Sense::Ge, 0.0));
        }
        let x = match maximize(&objective, &rows) {
            LpOutcome::Optimal { x, .. } => x,
            LpOutcome::Infeasible => {
                return Ok(CertifyOutcome::Infeasible {
                    point: point.to_vec(),
                    best_t: None,
                    cuts,
                })
            }
            LpOutcome::Unbounded => return Err(CertifyError::Unbounded { point: point.to_vec() }),
            LpOutcome::Stalled => return Err(CertifyError::SolverStalled { point: point.to_vec() }),
        };
        let v: Vec<f64> = x.iter().zip(&shift).map(|(a, b)| a + b).collect();
        let t = v[nv - 1];
        let g = layout.matrix(&v[..nv - 1]);
        let (lambda, w) = min_eigenpair(&g);
        if lambda >= t - CUT_TOLERANCE {
            if t < MIN_EIGENVALUE {
                return Ok(if t > 0.0 {
                    CertifyOutcome::Inconclusive {
                        point: point.to_vec(),
                        best_t: t,
                        cuts,
                    }
                } else {
                    CertifyOutcome::Infeasible {
                        point: point.to_vec(),
                        best_t: Some(t),
                        cuts,
                    }
                });
            }
            // Recompute everything from the projected matrix.
            let params = project(&v[..nv - 1], &eq, &eq_rhs);
            let g = layout.matrix(&params);
            let g = (&g + g.adjoint()) * Complex64::new(0.5, 0.0);
            let (lambda_min, _) = min_eigenpair(&g);
            let residuals: Vec<f64> = levi.iter().map(|a| trace_product(&g, a).norm()).collect();
            let trace = g.trace().re;
            let sound = lambda_min >= MIN_EIGENVALUE
                && residuals.iter().all(|r| *r <= RESIDUAL_TOLERANCE)
                && (trace - n as f64).abs() <= RESIDUAL_TOLERANCE;
            if !sound {
                return Ok(CertifyOutcome::Inconclusive {
                    point: point.to_vec(),
                    best_t: t,
                    cuts,
                });
            }
            return Ok(CertifyOutcome::Certified(MetricCertificate {
                point: point.to_vec(),
                g,
                lambda_min,
                residuals,
                trace,
                iterations: iteration,
            }));
        }
        cuts.push(w);
    }
    Err(CertifyError::IterationCap {
        point: point.to_vec(),
        iterations: opts.max_iterations,
    })
}

/// Search for a metric certificate of weak pseudoconcavity at `p`.
pub fn certify_metric(frame: &CRFrame, p: &[f64]) -> Result<CertifyOutcome, CertifyError> {
    certify_metric_with(frame, p, &CertifyOptions::default())
}

pub fn certify_metric_with(frame: &CRFrame, p: &[f64], opts: &CertifyOptions) -> Result<CertifyOutcome, CertifyError> {
    let basis = frame.characteristic_basis(p)?;
    let levi = basis
        .xi
        .iter()
        .map(|xi| frame.levi_matrix(p, xi).map(|l| l.a))
        .collect::<Result<Vec<_>, _>>()?;
    certify_from_levi(p, frame.n(), &levi, opts)
}
