use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{OperatorError, OperatorP, OrthonormalCRFrame};
use crate::cr::ComplexFunction;

/// Bound on `e₁, e₂, e₃`.
pub const IDENTITY_TOLERANCE: f64 = 1e-7;
/// Bound on `|∂̄_M u|` for the precondition.
pub const CR_TOLERANCE: f64 = 1e-8;
/// `P|u|²` may dip below zero by at most this.
pub const NONNEGATIVITY_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityRow {
    pub point: Vec<f64>,
    /// `|P|u|² − Σ|L'_ju|²|`
    pub e1: f64,
    /// `|P(Re u)|`
    pub e2: f64,
    /// `|Pu|`
    pub e3: f64,
    pub p_modulus_squared: f64,
    pub sum_l_squared: f64,
    pub dbar_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub function: String,
    pub rows: Vec<IdentityRow>,
    pub max_e1: f64,
    pub max_e2: f64,
    pub max_e3: f64,
    pub min_p_modulus_squared: f64,
    pub pass: bool,
}

/// Check `P|u|² = Σ|L'_ju|²`, `P Re u = 0` and `Pu = 0` for a CR function `u`.
pub fn cr_identity_check(
    op: &OperatorP,
    oframe: &OrthonormalCRFrame,
    u: &ComplexFunction,
    points: &[Vec<f64>],
) -> Result<IdentityReport, OperatorError> {
    let mut rows = Vec::with_capacity(points.len());
    for p in points {
        let jet = u.jet(p)?;
        let dbar_residual = oframe
            .base()
            .jets(p)?
            .dbar(&jet)
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt();
        if dbar_residual > CR_TOLERANCE {
            return Err(OperatorError::NotCR {
                point: p.clone(),
                residual: dbar_residual,
            });
        }
        let modsq = jet.modulus_squared();
        let p_modsq = op.apply_jet(p, &modsq)?;
        let sum_l: f64 = oframe.jets(p)?.l_apply(&jet).iter().map(|c| c.norm_sqr()).sum();
        let pre = op.apply_jet(p, &jet.re)?;
        let pim = op.apply_jet(p, &jet.im)?;
        rows.push(IdentityRow {
            point: p.clone(),
            e1: (p_modsq - sum_l).abs(),
            e2: pre.abs(),
            e3: Complex64::new(pre, pim).norm(),
            p_modulus_squared: p_modsq,
            sum_l_squared: sum_l,
            dbar_residual,
        });
    }
    let max = |f: fn(&IdentityRow) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    let (max_e1, max_e2, max_e3) = (max(|r| r.e1), max(|r| r.e2), max(|r| r.e3));
    let min_p = rows.iter().map(|r| r.p_modulus_squared).fold(f64::INFINITY, f64::min);
    let pass = max_e1 <= IDENTITY_TOLERANCE
        && max_e2 <= IDENTITY_TOLERANCE
        && max_e3 <= IDENTITY_TOLERANCE
        && (rows.is_empty() || min_p >= -NONNEGATIVITY_SLACK);
    Ok(IdentityReport {
        function: u.id.clone(),
        rows,
        max_e1,
        max_e2,
        max_e3,
        min_p_modulus_squared: min_p,
        pass,
    })
}
