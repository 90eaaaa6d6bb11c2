use super::PrincipleError;
use crate::geometry::Jet2;
use crate::operator::OperatorP;

/// Largest γ tried by the doubling search.
pub const GAMMA_CAP: f64 = (1u64 << 20) as f64;
const NET_SPACING: f64 = 1e-2;
const BISECTION_RELATIVE: f64 = 1e-3;
const MOVES_TOLERANCE: f64 = 1e-12;

/// A γ for which `P(e^{−γ|y|²}) > 0` on a net of the ball around `center`,
/// together with the recomputed values.
#[derive(Clone, Debug, PartialEq)]
pub struct BarrierCertificate {
    pub center: Vec<f64>,
    pub eps: f64,
    pub gamma: f64,
    /// `max Pf / Σ(Yf)²` over the net for `f = |y|²`: every γ above it works.
    pub threshold: f64,
    pub net: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub min_value: f64,
}

fn barrier_jet(p: &[f64], gamma: f64) -> Jet2 {
    let n = p.len();
    let r2: f64 = p.iter().map(|v| v * v).sum();
    let v = (-gamma * r2).exp();
    let mut j = Jet2::constant(v, n);
    for i in 0..n {
        j.grad[i] = -2.0 * gamma * p[i] * v;
        for k in 0..n {
            let delta = if i == k { 1.0 } else { 0.0 };
            j.hess[i * n + k] = (4.0 * gamma * gamma * p[i] * p[k] - 2.0 * gamma * delta) * v;
        }
    }
    j
}

fn radius_squared_jet(p: &[f64]) -> Jet2 {
    let n = p.len();
    let mut j = Jet2::constant(p.iter().map(|v| v * v).sum(), n);
    for i in 0..n {
        j.grad[i] = 2.0 * p[i];
        j.hess[i * n + i] = 2.0;
    }
    j
}

/// Lattice points of spacing 1e-2 in the closed ball of radius `eps`.
fn ball_net(center: &[f64], eps: f64) -> Vec<Vec<f64>> {
    let n = center.len();
    let m = (eps / NET_SPACING).floor() as i64;
    let side = (2 * m + 1) as usize;
    let mut out = Vec::new();
    let mut offset = vec![0.0; n];
    for code in 0..side.pow(n as u32) {
        let mut c = code;
        for o in offset.iter_mut() {
            *o = ((c % side) as i64 - m) as f64 * NET_SPACING;
            c /= side;
        }
        if offset.iter().map(|v| v * v).sum::<f64>() <= eps * eps * (1.0 + 1e-12) {
            out.push(center.iter().zip(&offset).map(|(a, b)| a + b).collect());
        }
    }
    out
}

/// Smallest γ (doubling from 1, then bisection to 0.1%) with
/// `P(e^{−γ|y|²}) > 0` on a 1e-2 lattice net of `{|y − x1| ≤ eps}`.
///
/// Uses `P(e^{−γf}) = e^{−γf}(γ²Σ(Yf)² − γPf)` for `f = |y|²` to search, then
/// recomputes every net value from the operator at the returned γ.
pub fn barrier_gamma(op: &OperatorP, x1: &[f64], eps: f64) -> Result<BarrierCertificate, PrincipleError> {
    if !(eps > 0.0) {
        return Err(PrincipleError::InvalidConfig(format!("eps must be positive, got {eps}")));
    }
    let quad = |p: &[f64]| -> Result<(f64, f64), PrincipleError> {
        let s = op.symbol(p)?;
        let g = nalgebra::DVector::from_iterator(p.len(), p.iter().map(|v| 2.0 * v));
        let a = (g.transpose() * &s * &g)[(0, 0)];
        let b = op.apply_jet(p, &radius_squared_jet(p))?;
        Ok((a, b))
    };
    let (a1, _) = quad(x1)?;
    if a1 <= MOVES_TOLERANCE {
        return Err(PrincipleError::BarrierPrecondition { point: x1.to_vec() });
    }
    let net = ball_net(x1, eps);
    let coeffs = net.iter().map(|p| quad(p)).collect::<Result<Vec<_>, _>>()?;
    let positive = |gamma: f64| coeffs.iter().position(|&(a, b)| gamma * a - b <= 0.0);

    let mut hi = 1.0;
    while let Some(i) = positive(hi) {
        if hi >= GAMMA_CAP {
            return Err(PrincipleError::GammaCap {
                cap: GAMMA_CAP,
                point: net[i].clone(),
            });
        }
        hi *= 2.0;
    }
    let mut lo = if hi > 1.0 { hi / 2.0 } else { 0.0 };
    while hi - lo > BISECTION_RELATIVE * hi {
        let mid = 0.5 * (lo + hi);
        if positive(mid).is_none() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let threshold = coeffs
        .iter()
        .filter(|(a, _)| *a > 0.0)
        .map(|(a, b)| b / a)
        .fold(f64::NEG_INFINITY, f64::max);
    let values = net
        .iter()
        .map(|p| op.apply_jet(p, &barrier_jet(p, hi)))
        .collect::<Result<Vec<_>, _>>()?;
    let min_value = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(BarrierCertificate {
        center: x1.to_vec(),
        eps,
        gamma: hi,
        threshold,
        net,
        values,
        min_value,
    })
}
