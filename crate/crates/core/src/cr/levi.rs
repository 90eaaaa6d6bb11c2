use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{CRFrame, ComplexFunction, FrameError, FrameJets};

/// Pairing of a characteristic covector with the frame must stay below this.
pub const CHARACTERISTIC_TOLERANCE: f64 = 1e-8;
/// Rank cutoff used when computing the annihilator of `HM`.
const ANNIHILATOR_RANK_TOLERANCE: f64 = 1e-8;

/// Orthonormal basis of `H⁰_pM`, the annihilator of `H_pM`.
#[derive(Clone, Debug, PartialEq)]
pub struct CharacteristicBasis {
    pub point: Vec<f64>,
    pub xi: Vec<Vec<f64>>,
}

/// Hermitian matrix `A` with `v*Av = ⟨ξ, [Jṽ, ṽ]⟩` in the frame basis.
#[derive(Clone, Debug, PartialEq)]
pub struct LeviMatrix {
    pub point: Vec<f64>,
    pub xi: Vec<f64>,
    pub a: DMatrix<Complex64>,
}

impl LeviMatrix {
    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.a.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    /// The real quadratic form at the real coefficient vector `c = (a, b)`,
    /// i.e. at `ṽ = Σ a_j X_j + b_j JX_j`, read off the Hermitian matrix.
    pub fn quadratic_form(&self, c: &[f64]) -> f64 {
        let n = self.a.nrows();
        let v = DVector::from_fn(n, |j, _| Complex64::new(c[j], c[n + j]));
        (v.adjoint() * &self.a * v)[(0, 0)].re
    }
}

fn sign_normalize(v: &mut [f64]) {
    if let Some(first) = v.iter().find(|c| c.abs() > 1e-12) {
        if *first < 0.0 {
            v.iter_mut().for_each(|c| *c = -*c);
        }
    }
}

/// Orthonormal annihilator of the frame at the point of `jets`.
pub fn characteristic_basis_from_jets(jets: &FrameJets, k: usize) -> Result<CharacteristicBasis, FrameError> {
    let dim = jets.dim();
    let f = jets.matrix();
    let svd = f.clone().svd(true, false);
    let u = svd.u.as_ref().expect("svd computed with U");
    let rank = svd
        .singular_values
        .iter()
        .filter(|s| **s >= ANNIHILATOR_RANK_TOLERANCE)
        .count();
    if dim - rank != k {
        return Err(FrameError::AnnihilatorDimension {
            point: jets.point.clone(),
            expected: k,
            found: dim - rank,
        });
    }
    let ur = u.columns(0, rank);
    let proj = DMatrix::<f64>::identity(dim, dim) - ur * ur.transpose();

    // Greedy Gram–Schmidt on projected coordinate covectors, largest first.
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(k);
    let mut used = vec![false; dim];
    while basis.len() < k {
        let mut best: Option<(usize, DVector<f64>, f64)> = None;
        for i in 0..dim {
            if used[i] {
                continue;
            }
            let mut v = proj.column(i).into_owned();
            for b in &basis {
                let c = b.dot(&v);
                v.axpy(-c, b, 1.0);
            }
            let nv = v.norm();
            if best.as_ref().is_none_or(|(_, _, bn)| nv > *bn) {
                best = Some((i, v, nv));
            }
        }
        let (i, v, nv) = best.expect("annihilator dimension checked");
        used[i] = true;
        basis.push(v / nv);
    }
    // Re-orthonormalize once more and fix signs.
    let mut xi = Vec::with_capacity(k);
    for (idx, b) in basis.iter().enumerate() {
        let mut v = b.clone();
        for prev in basis.iter().take(idx) {
            let c = prev.dot(&v);
            v.axpy(-c, prev, 1.0);
        }
        let mut v: Vec<f64> = (v.clone() / v.norm()).as_slice().to_vec();
        sign_normalize(&mut v);
        xi.push(v);
    }
    Ok(CharacteristicBasis {
        point: jets.point.clone(),
        xi,
    })
}

/// Hermitian Levi matrix from frame jets, by polarization of the real form
/// `Q(c) = ⟨ξ, [Jṽ, ṽ]⟩` on the `2n` frame directions.
pub fn levi_from_jets(jets: &FrameJets, xi: &[f64]) -> Result<LeviMatrix, FrameError> {
    let n = jets.n();
    let m = 2 * n;
    let xi_v = DVector::from_column_slice(xi);
    let max_pairing = (0..m)
        .map(|p| xi_v.dot(&jets.field(p).value).abs())
        .fold(0.0, f64::max);
    if max_pairing > CHARACTERISTIC_TOLERANCE {
        return Err(FrameError::NotCharacteristic {
            point: jets.point.clone(),
            pairing: max_pairing,
        });
    }
    // b[p][q] = ⟨ξ, [F_p, F_q]⟩
    let mut b = DMatrix::<f64>::zeros(m, m);
    for p in 0..m {
        for q in (p + 1)..m {
            let v = xi_v.dot(&jets.field(p).bracket(jets.field(q)));
            b[(p, q)] = v;
            b[(q, p)] = -v;
        }
    }
    let j_apply = |c: &DVector<f64>| -> DVector<f64> {
        DVector::from_fn(m, |i, _| if i < n { -c[n + i] } else { c[i - n] })
    };
    let q = |c: &DVector<f64>| -> f64 { (j_apply(c).transpose() * &b * c)[(0, 0)] };
    let e = |i: usize| -> DVector<f64> { DVector::from_fn(m, |r, _| if r == i { 1.0 } else { 0.0 }) };
    let diag: Vec<f64> = (0..m).map(|i| q(&e(i))).collect();
    let mut s = DMatrix::<f64>::zeros(m, m);
    for p in 0..m {
        s[(p, p)] = diag[p];
        for r in (p + 1)..m {
            let v = 0.5 * (q(&(e(p) + e(r))) - diag[p] - diag[r]);
            s[(p, r)] = v;
            s[(r, p)] = v;
        }
    }
    // s = [[R, -K], [K, R]] with A = R + iK.
    let a = DMatrix::from_fn(n, n, |i, j| {
        let re = 0.5 * (s[(i, j)] + s[(n + i, n + j)]);
        let im = 0.5 * (s[(n + i, j)] - s[(i, n + j)]);
        Complex64::new(re, im)
    });
    let a = (&a + a.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(LeviMatrix {
        point: jets.point.clone(),
        xi: xi.to_vec(),
        a,
    })
}

impl CRFrame {
    pub fn characteristic_basis(&self, p: &[f64]) -> Result<CharacteristicBasis, FrameError> {
        characteristic_basis_from_jets(&self.jets(p)?, self.k())
    }

    pub fn levi_matrix(&self, p: &[f64], xi: &[f64]) -> Result<LeviMatrix, FrameError> {
        if xi.len() != self.dim() {
            return Err(FrameError::DimensionMismatch {
                message: format!("covector of length {} on a {}-dimensional chart", xi.len(), self.dim()),
            });
        }
        levi_from_jets(&self.jets(p)?, xi)
    }

    pub fn integrability_residual(&self, p: &[f64]) -> Result<f64, FrameError> {
        Ok(self.jets(p)?.integrability_residual())
    }

    pub fn dbar_apply(&self, u: &ComplexFunction, p: &[f64]) -> Result<Vec<Complex64>, FrameError> {
        let jets = self.jets(p)?;
        Ok(jets.dbar(&u.jet(p)?))
    }
}

pub fn characteristic_basis(frame: &CRFrame, p: &[f64]) -> Result<CharacteristicBasis, FrameError> {
    frame.characteristic_basis(p)
}

pub fn levi_matrix(frame: &CRFrame, p: &[f64], xi: &[f64]) -> Result<LeviMatrix, FrameError> {
    frame.levi_matrix(p, xi)
}

pub fn integrability_residual(frame: &CRFrame, p: &[f64]) -> Result<f64, FrameError> {
    frame.integrability_residual(p)
}

pub fn dbar_apply(frame: &CRFrame, u: &ComplexFunction, p: &[f64]) -> Result<Vec<Complex64>, FrameError> {
    frame.dbar_apply(u, p)
}
