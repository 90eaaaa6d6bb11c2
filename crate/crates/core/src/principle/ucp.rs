use super::{require_cr, PrincipleError, PrincipleReport, Verdict};
use crate::cr::{CRFrame, ComplexFunction};
use crate::geometry::BoxRegion;
use crate::sussmann::explore_leaf;
use crate::util;

/// `|u|` at or below this counts as zero.
pub const VANISHING_THRESHOLD: f64 = 1e-10;
/// Sample points with `|u|` above this seed the support check.
const SUPPORT_SAMPLE_THRESHOLD: f64 = 1e-6;
/// A leaf point stays in the support if `|u|` exceeds this fraction of `|u(x)|`
/// within `eps/2` of it.
const SUPPORT_RATIO: f64 = 1e-8;
const ATTEMPTS_PER_SAMPLE: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UcpOptions {
    pub eps: f64,
    pub budget: usize,
    pub tol: f64,
    /// Leaves explored from inside, and again from outside, the support.
    pub samples: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UcpReport {
    pub report: PrincipleReport,
    /// `u` vanishes on the part of the leaf through `x0` inside `omega`.
    pub vanishing_patch: bool,
    pub patch_max: f64,
    pub cloud_max: f64,
    pub support_samples: usize,
    pub support_failures: usize,
    pub complement_samples: usize,
    pub complement_failures: usize,
}

/// Whether `|u| > threshold` somewhere on `p + (eps/2)·{−1,0,1}^N`,
/// starting with `p` itself.
fn reaches(u: &ComplexFunction, p: &[f64], eps: f64, threshold: f64) -> Result<bool, PrincipleError> {
    if u.value(p)?.norm() > threshold {
        return Ok(true);
    }
    let n = p.len();
    let mut q = vec![0.0; n];
    for code in 0..3usize.pow(n as u32) {
        let mut c = code;
        for i in 0..n {
            q[i] = p[i] + 0.5 * eps * ((c % 3) as f64 - 1.0);
            c /= 3;
        }
        if u.value(&q)?.norm() > threshold {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Vanishing on an open piece of a leaf forces vanishing on the whole leaf,
/// and the support of `u` is a union of leaves.
///
/// If `u` vanishes on the leaf cloud through `x0` inside `omega`, it must
/// vanish on the whole cloud. Independently, leaves through sampled points of
/// the support must stay in the support at `eps` resolution, and leaves through
/// sampled points away from the support must stay away from it.
pub fn ucp_demo(
    frame: &CRFrame,
    u: &ComplexFunction,
    x0: &[f64],
    omega: &BoxRegion,
    region: &BoxRegion,
    opts: &UcpOptions,
) -> Result<UcpReport, PrincipleError> {
    let fields = frame.fields();
    let cloud = explore_leaf(&fields, x0, region, opts.eps, opts.budget)?;
    require_cr(frame, u, cloud.points())?;
    let mut witness: Option<(f64, Vec<f64>)> = None;
    let mut note_witness = |v: f64, p: &[f64]| {
        if witness.as_ref().is_none_or(|(w, _)| v > *w) {
            witness = Some((v, p.to_vec()));
        }
    };

    let mut patch_max = 0.0f64;
    let mut patch_points = 0;
    let mut cloud_max = 0.0f64;
    let mut cloud_argmax = x0.to_vec();
    for p in cloud.points() {
        let v = u.value(p)?.norm();
        if omega.contains(p) {
            patch_points += 1;
            patch_max = patch_max.max(v);
        }
        if v > cloud_max {
            cloud_max = v;
            cloud_argmax = p.to_vec();
        }
    }
    let vanishing_patch = patch_points > 0 && patch_max <= VANISHING_THRESHOLD;
    let mut notes = Vec::new();
    let mut max_violation = 0.0f64;
    let mut failed = false;
    if vanishing_patch {
        if cloud_max > opts.tol {
            failed = true;
            max_violation = cloud_max;
            note_witness(f64::INFINITY, &cloud_argmax);
            notes.push("u vanishes on the patch but not along the whole leaf".into());
        }
    } else {
        notes.push("no vanishing patch; propagation form checked only".into());
    }

    let mut rng = util::rng(opts.seed);
    let (mut inside, mut outside) = (Vec::new(), Vec::new());
    for _ in 0..opts.samples * ATTEMPTS_PER_SAMPLE {
        if inside.len() >= opts.samples && outside.len() >= opts.samples {
            break;
        }
        let x = util::sample_box(&mut rng, region);
        let v = u.value(&x)?.norm();
        if v > SUPPORT_SAMPLE_THRESHOLD {
            if inside.len() < opts.samples {
                inside.push((x, v));
            }
        } else if outside.len() < opts.samples && !reaches(u, &x, opts.eps, VANISHING_THRESHOLD)? {
            outside.push(x);
        }
    }
    require_cr(frame, u, inside.iter().map(|(x, _)| x.as_slice()).chain(outside.iter().map(|x| x.as_slice())))?;

    let mut support_failures = 0;
    for (x, ux) in &inside {
        let leaf = explore_leaf(&fields, x, region, opts.eps, opts.budget)?;
        let mut ok = true;
        for q in leaf.points() {
            if !reaches(u, q, opts.eps, SUPPORT_RATIO * ux)? {
                ok = false;
                note_witness(0.0, q);
                break;
            }
        }
        if !ok {
            support_failures += 1;
        }
    }
    let mut complement_failures = 0;
    for x in &outside {
        let leaf = explore_leaf(&fields, x, region, opts.eps, opts.budget)?;
        let mut worst = 0.0f64;
        for q in leaf.points() {
            let v = u.value(q)?.norm();
            if v > worst {
                worst = v;
                if v > VANISHING_THRESHOLD {
                    note_witness(v, q);
                }
            }
        }
        if worst > VANISHING_THRESHOLD {
            complement_failures += 1;
            max_violation = max_violation.max(worst);
        }
    }
    if support_failures > 0 {
        notes.push(format!("{support_failures} leaves leave the support"));
    }
    if complement_failures > 0 {
        notes.push(format!("{complement_failures} leaves enter the support from outside"));
    }
    failed |= support_failures > 0 || complement_failures > 0;
    let report = PrincipleReport {
        scenario: "ucp".into(),
        verdict: if failed { Verdict::Fail } else { Verdict::Pass },
        max_violation,
        witness: if failed { witness.map(|(_, p)| p) } else { None },
        notes,
    };
    Ok(UcpReport {
        report,
        vanishing_patch,
        patch_max,
        cloud_max,
        support_samples: inside.len(),
        support_failures,
        complement_samples: outside.len(),
        complement_failures,
    })
}
