use super::{PrincipleError, PrincipleReport, Verdict};
use crate::geometry::CoefficientExpr;
use crate::operator::OperatorP;
use crate::sussmann::LeafCloud;

/// `Pu` may dip this far below zero.
pub const SUBSOLUTION_SLACK: f64 = 1e-9;

/// Constancy of a subsolution `Pu ≥ 0` over a leaf cloud whose origin
/// carries the cloud maximum.
pub fn max_principle_check(
    op: &OperatorP,
    u: &CoefficientExpr,
    cloud: &LeafCloud,
    tol: f64,
) -> Result<PrincipleReport, PrincipleError> {
    let mut values = Vec::with_capacity(cloud.len());
    for p in cloud.points() {
        let pu = op.apply(u, p)?;
        if pu < -SUBSOLUTION_SLACK {
            return Err(PrincipleError::NotSubsolution {
                point: p.to_vec(),
                value: pu,
            });
        }
        values.push(u.value(p)?);
    }
    let argmax = argmax(&values);
    let argmin = argmax_by(&values, |v| -v);
    let origin_value = values[0];
    if values[argmax] - origin_value > tol {
        let mut r = PrincipleReport::new(
            "max_principle",
            Verdict::HypothesisNotSatisfied,
            values[argmax] - origin_value,
            Some(cloud.point(argmax).to_vec()),
        );
        r.notes.push("cloud maximum is not attained at the origin".into());
        return Ok(r);
    }
    let spread = values[argmax] - values[argmin];
    let verdict = if spread <= tol { Verdict::Pass } else { Verdict::Fail };
    let witness = (verdict == Verdict::Fail).then(|| cloud.point(argmin).to_vec());
    Ok(PrincipleReport::new("max_principle", verdict, spread, witness))
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    argmax_by(values, |v| v)
}

/// First index maximizing `key`.
pub(crate) fn argmax_by(values: &[f64], key: impl Fn(f64) -> f64) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if key(v) > key(values[best]) {
            best = i;
        }
    }
    best
}
