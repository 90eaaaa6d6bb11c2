use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::expr::{parse_expr, Expr};
use super::{Chart, GeometryError, Jet2};

/// A compiled scalar expression over a chart.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientExpr {
    source: String,
    expr: Expr,
    dim: usize,
}

impl CoefficientExpr {
    pub fn parse(source: &str, dim: usize) -> Result<Self, GeometryError> {
        let expr = parse_expr(source, dim)?;
        Ok(CoefficientExpr {
            source: source.to_string(),
            expr,
            dim,
        })
    }

    /// Wrap an already-built tree; the source text is its printed form.
    pub fn from_expr(expr: Expr, dim: usize) -> Self {
        debug_assert!(expr.arity() <= dim);
        CoefficientExpr {
            source: expr.to_string(),
            expr,
            dim,
        }
    }

    pub fn constant(c: f64, dim: usize) -> Self {
        CoefficientExpr::from_expr(Expr::Const(c), dim)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Value at `p`, without bounds checks.
    pub fn value(&self, p: &[f64]) -> Result<f64, GeometryError> {
        let v = self.expr.eval(p);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(GeometryError::NonFinite { point: p.to_vec() })
        }
    }

    /// Value, gradient and Hessian at `p`, without bounds checks.
    pub fn jet(&self, p: &[f64]) -> Result<Jet2, GeometryError> {
        if p.len() != self.dim {
            return Err(GeometryError::Dimension {
                expected: self.dim,
                found: p.len(),
            });
        }
        let j = self.expr.jet(p);
        if j.is_finite() {
            Ok(j)
        } else {
            Err(GeometryError::NonFinite { point: p.to_vec() })
        }
    }

    pub fn derivative(&self, var: usize) -> CoefficientExpr {
        CoefficientExpr::from_expr(self.expr.derivative(var), self.dim)
    }
}

impl fmt::Display for CoefficientExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.expr)
    }
}

/// Parse `source` against `chart` (coordinates `y1..yN`).
pub fn parse_expression(source: &str, chart: &Chart) -> Result<CoefficientExpr, GeometryError> {
    CoefficientExpr::parse(source, chart.dim())
}

/// Jet of `f` at a point of the chart; points outside the bounds are errors.
pub fn evaluate_jet(
    f: &CoefficientExpr,
    chart: &Chart,
    p: &[f64],
) -> Result<Jet2, GeometryError> {
    chart.check_point(p)?;
    f.jet(p)
}

/// Value and first derivatives of a vector field at a point.
///
/// `jac[(i, a)] = ∂_a X^i`.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldJet {
    pub value: DVector<f64>,
    pub jac: DMatrix<f64>,
}

impl FieldJet {
    pub fn zeros(dim: usize) -> Self {
        FieldJet {
            value: DVector::zeros(dim),
            jac: DMatrix::zeros(dim, dim),
        }
    }

    pub fn scaled(&self, s: f64) -> FieldJet {
        FieldJet {
            value: &self.value * s,
            jac: &self.jac * s,
        }
    }

    pub fn axpy(&mut self, s: f64, other: &FieldJet) {
        self.value.axpy(s, &other.value, 1.0);
        self.jac += &other.jac * s;
    }

    /// `[self, other]` at the point: `J_other·self − J_self·other`.
    pub fn bracket(&self, other: &FieldJet) -> DVector<f64> {
        &other.jac * &self.value - &self.jac * &other.value
    }

    /// `X(Xu)` for a scalar `u` with second-order jet `u`.
    pub fn second_derivative(&self, u: &Jet2) -> f64 {
        let n = self.value.len();
        let a = &self.value;
        // Σ_ij a^i a^j ∂_ij u + Σ_ij a^i (∂_i a^j) ∂_j u
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += a[i] * a[j] * u.h(i, j) + a[i] * self.jac[(j, i)] * u.grad[j];
            }
        }
        s
    }

    pub fn apply(&self, u: &Jet2) -> f64 {
        u.directional(self.value.as_slice())
    }
}

/// A smooth vector field `Σ X^i ∂/∂y^i` on a chart.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    chart: Arc<Chart>,
    coeffs: Vec<CoefficientExpr>,
}

impl VectorField {
    pub fn new(chart: Arc<Chart>, coeffs: Vec<CoefficientExpr>) -> Result<Self, GeometryError> {
        if coeffs.len() != chart.dim() {
            return Err(GeometryError::Dimension {
                expected: chart.dim(),
                found: coeffs.len(),
            });
        }
        if let Some(c) = coeffs.iter().find(|c| c.dim() != chart.dim()) {
            return Err(GeometryError::Dimension {
                expected: chart.dim(),
                found: c.dim(),
            });
        }
        Ok(VectorField { chart, coeffs })
    }

    pub fn parse(chart: Arc<Chart>, sources: &[&str]) -> Result<Self, GeometryError> {
        let coeffs = sources
            .iter()
            .map(|s| CoefficientExpr::parse(s, chart.dim()))
            .collect::<Result<Vec<_>, _>>()?;
        VectorField::new(chart, coeffs)
    }

    /// The coordinate field `∂/∂y^{axis+1}`.
    pub fn coordinate(chart: Arc<Chart>, axis: usize) -> Self {
        let n = chart.dim();
        let coeffs = (0..n)
            .map(|i| CoefficientExpr::constant(if i == axis { 1.0 } else { 0.0 }, n))
            .collect();
        VectorField { chart, coeffs }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn coeffs(&self) -> &[CoefficientExpr] {
        &self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn same_chart(&self, other: &VectorField) -> bool {
        Arc::ptr_eq(&self.chart, &other.chart) || *self.chart == *other.chart
    }

    /// Components at `p` (bounds-checked).
    pub fn eval(&self, p: &[f64]) -> Result<Vec<f64>, GeometryError> {
        self.chart.check_point(p)?;
        self.eval_unchecked(p)
    }

    /// As `eval`, writing into `out`.
    pub fn eval_into(&self, p: &[f64], out: &mut [f64]) -> Result<(), GeometryError> {
        self.chart.check_point(p)?;
        for (o, c) in out.iter_mut().zip(&self.coeffs) {
            *o = c.value(p)?;
        }
        Ok(())
    }

    pub(crate) fn eval_unchecked(&self, p: &[f64]) -> Result<Vec<f64>, GeometryError> {
        self.coeffs.iter().map(|c| c.value(p)).collect()
    }

    pub fn jet(&self, p: &[f64]) -> Result<FieldJet, GeometryError> {
        self.chart.check_point(p)?;
        let n = self.dim();
        let mut out = FieldJet::zeros(n);
        for (i, c) in self.coeffs.iter().enumerate() {
            let j = c.jet(p)?;
            out.value[i] = j.value;
            for a in 0..n {
                out.jac[(i, a)] = j.grad[a];
            }
        }
        Ok(out)
    }

    /// `f·X` for a scalar expression `f`.
    pub fn scaled(&self, f: &CoefficientExpr) -> VectorField {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                CoefficientExpr::from_expr(Expr::mul(f.expr().clone(), c.expr().clone()), self.dim())
            })
            .collect();
        VectorField {
            chart: self.chart.clone(),
            coeffs,
        }
    }

    /// `Σ c_i F_i` with constant weights.
    pub fn linear_combination(fields: &[&VectorField], weights: &[f64]) -> VectorField {
        let first = fields[0];
        let n = first.dim();
        let coeffs = (0..n)
            .map(|i| {
                let e = fields.iter().zip(weights).fold(Expr::Const(0.0), |acc, (f, w)| {
                    Expr::add(acc, Expr::mul(Expr::Const(*w), f.coeffs[i].expr().clone()))
                });
                CoefficientExpr::from_expr(e, n)
            })
            .collect();
        VectorField {
            chart: first.chart.clone(),
            coeffs,
        }
    }

    /// Symbolic bracket `[self, other]` as a new field.
    pub fn bracket_field(&self, other: &VectorField) -> Result<VectorField, GeometryError> {
        if !self.same_chart(other) {
            return Err(GeometryError::ChartMismatch);
        }
        let n = self.dim();
        let coeffs = (0..n)
            .map(|i| {
                let mut e = Expr::Const(0.0);
                for j in 0..n {
                    e = Expr::add(
                        e,
                        Expr::sub(
                            Expr::mul(self.coeffs[j].expr().clone(), other.coeffs[i].expr().derivative(j)),
                            Expr::mul(other.coeffs[j].expr().clone(), self.coeffs[i].expr().derivative(j)),
                        ),
                    );
                }
                CoefficientExpr::from_expr(e, n)
            })
            .collect();
        Ok(VectorField {
            chart: self.chart.clone(),
            coeffs,
        })
    }
}

/// Components of `[X, Y]` at `p`:
/// `[X,Y]^i = Σ_j (X^j ∂_j Y^i − Y^j ∂_j X^i)`.
pub fn lie_bracket(x: &VectorField, y: &VectorField, p: &[f64]) -> Result<Vec<f64>, GeometryError> {
    if !x.same_chart(y) {
        return Err(GeometryError::ChartMismatch);
    }
    let (jx, jy) = (x.jet(p)?, y.jet(p)?);
    Ok(jx.bracket(&jy).as_slice().to_vec())
}
