use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::maximum::argmax;
use super::{require_cr, PrincipleError, PrincipleReport, Verdict};
use crate::cr::{CRFrame, ComplexFunction};
use crate::geometry::{BoxRegion, CoefficientExpr};
use crate::pseudoconcave::RegionReport;
use crate::sussmann::{explore_leaf, LeafCloud};

/// Smallest admissible `|∂F/∂ū|` along a nonconstant trace.
pub const NONDEGENERACY_THRESHOLD: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModulusMode {
    Modulus,
    RealPart,
}

/// Resolution and point budget for leaf exploration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LeafOptions {
    pub eps: f64,
    pub budget: usize,
}

fn values(u: &ComplexFunction, cloud: &LeafCloud) -> Result<Vec<Complex64>, PrincipleError> {
    cloud.points().map(|p| Ok(u.value(p)?)).collect()
}

/// Largest `|u − u(origin)|` over the cloud and where it occurs.
fn spread(vals: &[Complex64]) -> (f64, usize) {
    let dev: Vec<f64> = vals.iter().map(|v| (v - vals[0]).norm()).collect();
    let i = argmax(&dev);
    (dev[i], i)
}

/// If `F(Re u, Im u)` vanishes on the cloud and `∂F/∂ū ≠ 0` there, the
/// leaf derivatives of `u` vanish and `u` is constant along the cloud.
///
/// `f` is an expression in two variables, `y1 = Re u` and `y2 = Im u`.
pub fn curve_value_test(
    frame: &CRFrame,
    u: &ComplexFunction,
    f: &CoefficientExpr,
    cloud: &LeafCloud,
    tol: f64,
) -> Result<PrincipleReport, PrincipleError> {
    if f.dim() != 2 {
        return Err(PrincipleError::InvalidConfig(format!(
            "F must be a function of (Re u, Im u), got dimension {}",
            f.dim()
        )));
    }
    let vals = values(u, cloud)?;
    let mut grads = Vec::with_capacity(vals.len());
    for (p, v) in cloud.points().zip(&vals) {
        let j = f.jet(&[v.re, v.im])?;
        if j.value.abs() > tol {
            return Err(PrincipleError::CurveNotVanishing {
                point: p.to_vec(),
                value: j.value,
            });
        }
        grads.push(0.5 * (j.grad[0] * j.grad[0] + j.grad[1] * j.grad[1]).sqrt());
    }
    let (dev, at) = spread(&vals);
    if dev <= tol {
        let mut r = PrincipleReport::new("curve_value", Verdict::Pass, dev, None);
        r.notes.push("u is constant on the cloud; the trace is a single value".into());
        return Ok(r);
    }
    for (p, &g) in cloud.points().zip(&grads) {
        if g < NONDEGENERACY_THRESHOLD {
            return Err(PrincipleError::CurveDegenerate {
                point: p.to_vec(),
                value: g,
            });
        }
    }
    let mut worst = (0.0f64, 0usize);
    for (i, p) in cloud.points().enumerate() {
        let jets = frame.jets(p)?;
        let uj = u.jet(p)?;
        for field in jets.x.iter().chain(&jets.jx) {
            let d = Complex64::new(field.apply(&uj.re), field.apply(&uj.im)).norm();
            if d > worst.0 {
                worst = (d, i);
            }
        }
    }
    if worst.0 > tol {
        let mut r = PrincipleReport::new("curve_value", Verdict::Fail, worst.0, Some(cloud.point(worst.1).to_vec()));
        r.notes.push("a leaf derivative of u does not vanish".into());
        return Ok(r);
    }
    Ok(PrincipleReport::new("curve_value", Verdict::Fail, dev, Some(cloud.point(at).to_vec())))
}

/// Locate the maximum of `|u|` (or `Re u`) over the leaf cloud through `x0`
/// in `region`. An interior maximum (farther than `2·eps` from the boundary)
/// must come with `u` constant on the cloud; a boundary maximum is reported
/// as consistent.
#[allow(clippy::too_many_arguments)]
pub fn max_modulus_check(
    frame: &CRFrame,
    certificate: &RegionReport,
    u: &ComplexFunction,
    x0: &[f64],
    region: &BoxRegion,
    mode: ModulusMode,
    leaf: LeafOptions,
    tol: f64,
) -> Result<PrincipleReport, PrincipleError> {
    require_certificate(certificate, region)?;
    let cloud = explore_leaf(&frame.fields(), x0, region, leaf.eps, leaf.budget)?;
    max_modulus_on_cloud(frame, certificate, u, &cloud, mode, tol)
}

fn require_certificate(certificate: &RegionReport, region: &BoxRegion) -> Result<(), PrincipleError> {
    if !certificate.all_certified || !certificate.grid.region.contains_box(region) {
        return Err(PrincipleError::NotCertified);
    }
    Ok(())
}

/// As `max_modulus_check` on an already explored cloud; the interior margin
/// uses the cloud's region and resolution.
pub fn max_modulus_on_cloud(
    frame: &CRFrame,
    certificate: &RegionReport,
    u: &ComplexFunction,
    cloud: &LeafCloud,
    mode: ModulusMode,
    tol: f64,
) -> Result<PrincipleReport, PrincipleError> {
    require_certificate(certificate, &cloud.region)?;
    require_cr(frame, u, cloud.points())?;
    let vals = values(u, cloud)?;
    let key: Vec<f64> = match mode {
        ModulusMode::Modulus => vals.iter().map(|v| v.norm()).collect(),
        ModulusMode::RealPart => vals.iter().map(|v| v.re).collect(),
    };
    let scenario = match mode {
        ModulusMode::Modulus => "max_modulus",
        ModulusMode::RealPart => "max_real_part",
    };
    let top = argmax(&key);
    let p = cloud.point(top).to_vec();
    let margin = cloud.region.distance_to_boundary(&p);
    let mut report = if margin > 2.0 * cloud.eps {
        let (dev, at) = spread(&vals);
        if dev <= tol {
            let mut r = PrincipleReport::new(scenario, Verdict::Pass, dev, None);
            r.notes.push(format!("interior maximum at {p:?}; u is constant on the cloud"));
            r
        } else {
            let mut r = PrincipleReport::new(scenario, Verdict::Fail, dev, Some(cloud.point(at).to_vec()));
            r.notes.push(format!("interior maximum at {p:?} but u varies on the cloud"));
            r
        }
    } else {
        let mut r = PrincipleReport::new(scenario, Verdict::Consistent, 0.0, Some(p));
        r.notes.push(format!("max on boundary (margin {margin:.3e})"));
        r
    };
    if cloud.budget_exhausted {
        report.notes.push("leaf exploration stopped at the budget".into());
    }
    Ok(report)
}
