//! Second-order jets: value, gradient and Hessian of a scalar function at a
//! point, propagated through arithmetic by forward-mode differentiation.

use std::ops::{Add, Mul, Neg, Sub};

/// Value, gradient and (symmetric) Hessian of a scalar function at a point.
///
/// The Hessian is stored row-major as an `N×N` array.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
}

impl Jet2 {
    pub fn constant(value: f64, dim: usize) -> Self {
        Jet2 {
            value,
            grad: vec![0.0; dim],
            hess: vec![0.0; dim * dim],
        }
    }

    /// The coordinate function `y_{index+1}`.
    pub fn variable(value: f64, index: usize, dim: usize) -> Self {
        let mut j = Jet2::constant(value, dim);
        j.grad[index] = 1.0;
        j
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    #[inline]
    pub fn h(&self, i: usize, j: usize) -> f64 {
        self.hess[i * self.dim() + j]
    }

    /// Composition `g ∘ self` given `g(v), g'(v), g''(v)` at `v = self.value`.
    pub fn compose(&self, g0: f64, g1: f64, g2: f64) -> Jet2 {
        let n = self.dim();
        let mut out = Jet2 {
            value: g0,
            grad: self.grad.iter().map(|d| g1 * d).collect(),
            hess: vec![0.0; n * n],
        };
        for i in 0..n {
            for j in 0..n {
                out.hess[i * n + j] = g1 * self.hess[i * n + j] + g2 * self.grad[i] * self.grad[j];
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Jet2 {
        Jet2 {
            value: self.value * s,
            grad: self.grad.iter().map(|d| d * s).collect(),
            hess: self.hess.iter().map(|d| d * s).collect(),
        }
    }

    pub fn recip(&self) -> Jet2 {
        let v = self.value;
        self.compose(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }

    pub fn powi(&self, n: i32) -> Jet2 {
        let v = self.value;
        match n {
            0 => Jet2::constant(1.0, self.dim()),
            1 => self.clone(),
            _ => {
                let nf = n as f64;
                self.compose(
                    v.powi(n),
                    nf * v.powi(n - 1),
                    nf * (nf - 1.0) * v.powi(n - 2),
                )
            }
        }
    }

    pub fn sin(&self) -> Jet2 {
        let (s, c) = self.value.sin_cos();
        self.compose(s, c, -s)
    }

    pub fn cos(&self) -> Jet2 {
        let (s, c) = self.value.sin_cos();
        self.compose(c, -s, -c)
    }

    pub fn exp(&self) -> Jet2 {
        let e = self.value.exp();
        self.compose(e, e, e)
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.grad.iter().all(|d| d.is_finite())
            && self.hess.iter().all(|d| d.is_finite())
    }

    /// Directional derivative `a·∇f`.
    pub fn directional(&self, a: &[f64]) -> f64 {
        self.grad.iter().zip(a).map(|(g, x)| g * x).sum()
    }
}

impl Add for &Jet2 {
    type Output = Jet2;
    fn add(self, rhs: &Jet2) -> Jet2 {
        Jet2 {
            value: self.value + rhs.value,
            grad: self.grad.iter().zip(&rhs.grad).map(|(a, b)| a + b).collect(),
            hess: self.hess.iter().zip(&rhs.hess).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: &Jet2) -> Jet2 {
        Jet2 {
            value: self.value - rhs.value,
            grad: self.grad.iter().zip(&rhs.grad).map(|(a, b)| a - b).collect(),
            hess: self.hess.iter().zip(&rhs.hess).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: &Jet2) -> Jet2 {
        let n = self.dim();
        let (a, b) = (self, rhs);
        let mut hess = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                hess[i * n + j] = a.value * b.hess[i * n + j]
                    + b.value * a.hess[i * n + j]
                    + a.grad[i] * b.grad[j]
                    + a.grad[j] * b.grad[i];
            }
        }
        Jet2 {
            value: a.value * b.value,
            grad: a
                .grad
                .iter()
                .zip(&b.grad)
                .map(|(da, db)| a.value * db + b.value * da)
                .collect(),
            hess,
        }
    }
}

impl Neg for &Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Jet2 {
            type Output = Jet2;
            fn $m(self, rhs: Jet2) -> Jet2 {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}
