use serde::{Deserialize, Serialize};

use super::CertifyError;
use crate::cr::{CRFrame, LeviMatrix};
use crate::util::halton;

/// Eigenvalues below this in absolute value count as zero.
pub const EIGENVALUE_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Signature {
    AllZero,
    IndefiniteEverywhere,
    Fails,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SignatureVerdict {
    pub point: Vec<f64>,
    pub samples: usize,
    pub verdict: Signature,
    /// Levi matrix at the first sampled covector with a nonzero semidefinite form.
    pub witness: Option<LeviMatrix>,
}

/// Classification of a single Levi matrix.
pub fn classify(levi: &LeviMatrix) -> Signature {
    let ev = levi.eigenvalues();
    let (lo, hi) = (ev[0], ev[ev.len() - 1]);
    if lo.abs().max(hi.abs()) < EIGENVALUE_TOLERANCE {
        Signature::AllZero
    } else if lo < -EIGENVALUE_TOLERANCE && hi > EIGENVALUE_TOLERANCE {
        Signature::IndefiniteEverywhere
    } else {
        Signature::Fails
    }
}

/// Coefficients of the `m` sampled unit covectors in a basis of `H⁰_pM`:
/// the basis vectors themselves, then normalized Halton points of `[-1,1]^k`.
pub fn sphere_samples(k: usize, m: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = (0..k.min(m))
        .map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut idx = 1u64;
    while out.len() < m {
        let v: Vec<f64> = (0..k).map(|j| 2.0 * halton(idx, j) - 1.0).collect();
        idx += 1;
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 {
            out.push(v.iter().map(|x| x / norm).collect());
        }
    }
    out
}

/// Necessary condition for weak pseudoconcavity: at each sampled unit
/// characteristic covector the Levi form is zero or has eigenvalues of both signs.
pub fn signature_test(frame: &CRFrame, p: &[f64], m: usize) -> Result<SignatureVerdict, CertifyError> {
    let k = frame.k();
    if m < 2 * k + 1 {
        return Err(CertifyError::TooFewSamples { samples: m, minimum: 2 * k + 1 });
    }
    let basis = frame.characteristic_basis(p)?;
    let mut all_zero = true;
    for c in sphere_samples(k, m) {
        let xi: Vec<f64> = (0..frame.dim())
            .map(|i| c.iter().zip(&basis.xi).map(|(a, x)| a * x[i]).sum())
            .collect();
        let levi = frame.levi_matrix(p, &xi)?;
        match classify(&levi) {
            Signature::AllZero => {}
            Signature::IndefiniteEverywhere => all_zero = false,
            Signature::Fails => {
                return Ok(SignatureVerdict {
                    point: p.to_vec(),
                    samples: m,
                    verdict: Signature::Fails,
                    witness: Some(levi),
                })
            }
        }
    }
    Ok(SignatureVerdict {
        point: p.to_vec(),
        samples: m,
        verdict: if all_zero { Signature::AllZero } else { Signature::IndefiniteEverywhere },
        witness: None,
    })
}
