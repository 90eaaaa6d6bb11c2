use num_complex::Complex64;

use crate::geometry::{CoefficientExpr, GeometryError, Jet2};

/// A complex-valued function `re + i·im` given by two coefficient expressions.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexFunction {
    pub id: String,
    pub re: CoefficientExpr,
    pub im: CoefficientExpr,
}

/// Jets of the real and imaginary parts at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexJet {
    pub re: Jet2,
    pub im: Jet2,
}

impl ComplexJet {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value, self.im.value)
    }

    /// Jet of `|u|²`.
    pub fn modulus_squared(&self) -> Jet2 {
        &(&self.re * &self.re) + &(&self.im * &self.im)
    }
}

impl ComplexFunction {
    pub fn parse(id: &str, re: &str, im: &str, dim: usize) -> Result<Self, GeometryError> {
        Ok(ComplexFunction {
            id: id.to_string(),
            re: CoefficientExpr::parse(re, dim)?,
            im: CoefficientExpr::parse(im, dim)?,
        })
    }

    pub fn real(id: &str, re: CoefficientExpr) -> Self {
        let dim = re.dim();
        ComplexFunction {
            id: id.to_string(),
            re,
            im: CoefficientExpr::constant(0.0, dim),
        }
    }

    pub fn constant(id: &str, c: Complex64, dim: usize) -> Self {
        ComplexFunction {
            id: id.to_string(),
            re: CoefficientExpr::constant(c.re, dim),
            im: CoefficientExpr::constant(c.im, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.re.dim()
    }

    pub fn value(&self, p: &[f64]) -> Result<Complex64, GeometryError> {
        Ok(Complex64::new(self.re.value(p)?, self.im.value(p)?))
    }

    pub fn jet(&self, p: &[f64]) -> Result<ComplexJet, GeometryError> {
        Ok(ComplexJet {
            re: self.re.jet(p)?,
            im: self.im.jet(p)?,
        })
    }
}
