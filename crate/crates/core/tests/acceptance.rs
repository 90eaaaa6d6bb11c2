//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::{fd_gradient, fd_hessian, manifold, random_point, rel_err, rng, FD_STEP};
use crlab_core::cr::{CRFrame, ComplexFunction};
use crlab_core::gallery::{run_gallery, CheckId, LoadedManifold, RunSettings, GALLERY};
use crlab_core::geometry::{BoxRegion, CoefficientExpr, VectorField};
use crlab_core::operator::{
    assemble_global_operator, assemble_local_operator, cr_identity_check, orthonormalize_frame, OperatorP,
    OrthonormalCRFrame,
};
use crlab_core::principle::{
    barrier_gamma, carleman_ratio, max_modulus_check, ucp_demo, CarlemanConfig, LeafOptions, ModulusMode,
    UcpOptions, Verdict, GROWTH_LIMIT,
};
use crlab_core::pseudoconcave::{
    certify_region, signature_test, CertifyOutcome, LatticeGrid, RegionReport, Signature,
};
use crlab_core::sussmann::{
    explore_leaf, hausdorff_distance, minimality_test, trapping_test, MinimalityVerdict, TrappingOptions,
    PAIRING_TOLERANCE,
};
use num_complex::Complex64;
use rand::Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err(format!($($arg)+));
        }
    };
}

const EPS: f64 = 0.05;

fn unit_box(dim: usize) -> BoxRegion {
    BoxRegion::cube(&vec![0.0; dim], 0.5)
}

fn grid_report(frame: &CRFrame) -> RegionReport {
    certify_region(frame, &LatticeGrid::new(unit_box(frame.dim()), 3))
}

fn within(limit: Duration, t: Instant) -> Result<Duration, String> {
    let el = t.elapsed();
    if el <= limit {
        Ok(el)
    } else {
        Err(format!("runtime {el:.2?} exceeds {limit:?}"))
    }
}

fn function(m: &LoadedManifold, id: &str) -> ComplexFunction {
    m.cr_functions.iter().find(|f| f.id == id).unwrap().clone()
}

// 1

fn certification() -> Outcome {
    let t = Instant::now();
    let heis = grid_report(&manifold("heisenberg").frame);
    let quad = grid_report(&manifold("quadric11").frame);
    let flat = grid_report(&manifold("leviflat").frame);
    let el = within(Duration::from_secs(10), t)?;

    ensure!(heis.points.len() == 27, "heisenberg grid has {} points", heis.points.len());
    ensure!(heis.infeasible_count() == 27, "heisenberg infeasible at {} of 27", heis.infeasible_count());

    ensure!(quad.points.len() == 243, "quadric11 grid has {} points", quad.points.len());
    ensure!(quad.certified_count() == 243, "quadric11 certified at {} of 243", quad.certified_count());
    let (mut max_res, mut min_lambda) = (0.0f64, f64::INFINITY);
    for c in quad.points.iter().filter_map(|p| p.outcome.as_ref().ok()?.certificate()) {
        max_res = c.residuals.iter().fold(max_res, |a, r| a.max(r.abs()));
        min_lambda = min_lambda.min(c.lambda_min);
    }
    ensure!(max_res <= 1e-9, "quadric11 residual {max_res:e}");
    ensure!(min_lambda >= 1e-6, "quadric11 lambda_min {min_lambda:e}");

    ensure!(flat.all_certified, "leviflat not certified everywhere");
    for p in &flat.points {
        let Ok(CertifyOutcome::Certified(c)) = &p.outcome else {
            return Err(format!("leviflat not certified at {:?}", p.point));
        };
        let dev = (c.g[(0, 0)] - Complex64::new(1.0, 0.0)).norm();
        ensure!(dev <= 1e-12, "leviflat G = {} at {:?}", c.g[(0, 0)], p.point);
    }
    Ok(format!(
        "heisenberg 27/27 infeasible, quadric11 243/243 certified (residual {max_res:.1e}, lambda_min {min_lambda:.3}), leviflat G = 1; {el:.2?}"
    ))
}

// 2

/// `⟨ξ, [Y, X]⟩` from central differences of the coefficient functions.
fn fd_bracket_pairing(x: &VectorField, y: &VectorField, p: &[f64], xi: &[f64]) -> f64 {
    let n = p.len();
    let (xv, yv) = (x.eval(p).unwrap(), y.eval(p).unwrap());
    let mut out = 0.0;
    for (i, &w) in xi.iter().enumerate() {
        let cx = |q: &[f64]| x.eval(q).unwrap()[i];
        let cy = |q: &[f64]| y.eval(q).unwrap()[i];
        let gx = fd_gradient(&cx, p, FD_STEP);
        let gy = fd_gradient(&cy, p, FD_STEP);
        let yx: f64 = (0..n).map(|j| yv[j] * gx[j]).sum();
        let xy: f64 = (0..n).map(|j| xv[j] * gy[j]).sum();
        out += w * (yx - xy);
    }
    out
}

fn signature_consistency() -> Outcome {
    let mut checked = 0;
    for name in ["quadric11", "leviflat"] {
        let m = manifold(name);
        let report = grid_report(&m.frame);
        for p in report.points.iter().filter(|p| matches!(&p.outcome, Ok(o) if o.is_certified())) {
            let v = signature_test(&m.frame, &p.point, 2 * m.frame.k() + 9).map_err(|e| e.to_string())?;
            ensure!(v.verdict != Signature::Fails, "{name}: signature fails at certified {:?}", p.point);
            checked += 1;
        }
    }
    let m = manifold("heisenberg");
    for p in LatticeGrid::new(unit_box(3), 3).points() {
        let v = signature_test(&m.frame, &p, 11).map_err(|e| e.to_string())?;
        ensure!(v.verdict == Signature::Fails, "heisenberg signature {:?} at {p:?}", v.verdict);
    }
    let v = signature_test(&m.frame, &[0.0; 3], 11).map_err(|e| e.to_string())?;
    let w = v.witness.ok_or("heisenberg has no witness at the origin")?;
    ensure!(w.a.shape() == (1, 1), "witness is {:?}", w.a.shape());
    let value = w.a[(0, 0)].re;
    let fields = m.frame.fields();
    let oracle = fd_bracket_pairing(&fields[0], &fields[1], &[0.0; 3], &w.xi);
    ensure!((value - 4.0).abs() <= 1e-9, "witness value {value}");
    ensure!((value - oracle).abs() <= 1e-6, "witness {value} vs bracket oracle {oracle}");
    Ok(format!(
        "{checked} certified points never fail; heisenberg fails at 27/27 with witness {value} (oracle {oracle:.9})"
    ))
}

// 3

fn gallery_operator(m: &LoadedManifold, oframe: &Arc<OrthonormalCRFrame>) -> OperatorP {
    if m.partition.is_empty() {
        return assemble_local_operator(Arc::clone(oframe), unit_box(m.frame.dim())).unwrap();
    }
    let pieces = m
        .partition
        .iter()
        .map(|(r, _)| assemble_local_operator(Arc::clone(oframe), r.clone()).unwrap())
        .collect();
    let bumps = m.partition.iter().map(|(_, w)| w.clone()).collect();
    assemble_global_operator(pieces, bumps).unwrap()
}

fn identity_suite() -> Outcome {
    let t = Instant::now();
    let mut r = rng(2024);
    let (mut e1, mut e2, mut e3, mut min_p) = (0.0f64, 0.0f64, 0.0f64, f64::INFINITY);
    let mut evaluated = 0;
    let mut notes = Vec::new();
    for name in GALLERY {
        let m = manifold(name);
        let report = grid_report(&m.frame);
        if !report.all_certified {
            notes.push(format!("{name} has no certified points"));
            continue;
        }
        let oframe = Arc::new(orthonormalize_frame(Arc::clone(&m.frame), &report).map_err(|e| e.to_string())?);
        let op = gallery_operator(&m, &oframe);
        let dim = m.frame.dim();
        let points: Vec<Vec<f64>> = (0..100).map(|_| random_point(&mut r, dim, 0.5)).collect();
        for u in m.cr_functions.iter().take(3) {
            let rep = cr_identity_check(&op, &oframe, u, &points).map_err(|e| format!("{name} {}: {e}", u.id))?;
            e1 = e1.max(rep.max_e1);
            e2 = e2.max(rep.max_e2);
            e3 = e3.max(rep.max_e3);
            min_p = min_p.min(rep.min_p_modulus_squared);
            evaluated += rep.rows.len();
        }
    }
    let el = within(Duration::from_secs(30), t)?;
    ensure!(evaluated == 600, "evaluated {evaluated} function-point pairs");
    ensure!(e1 <= 1e-7 && e2 <= 1e-7 && e3 <= 1e-7, "e1 {e1:e}, e2 {e2:e}, e3 {e3:e}");
    ensure!(min_p >= -1e-9, "min P|u|^2 = {min_p:e}");
    Ok(format!(
        "{evaluated} pairs, max e1 {e1:.1e} e2 {e2:.1e} e3 {e3:.1e}, min P|u|^2 {min_p:.2e}; {}; {el:.2?}",
        notes.join(", ")
    ))
}

// 4

fn jet_oracle() -> Outcome {
    let mut exprs: Vec<CoefficientExpr> = Vec::new();
    for name in GALLERY {
        let m = manifold(name);
        for field in m.frame.fields() {
            exprs.extend(field.coeffs().iter().cloned());
        }
        for f in &m.cr_functions {
            exprs.push(f.re.clone());
            exprs.push(f.im.clone());
        }
        exprs.extend(m.partition.iter().map(|(_, w)| w.clone()));
    }
    let mut r = rng(4);
    let mut worst = 0.0f64;
    for probe in 0..1000 {
        let e = &exprs[probe % exprs.len()];
        let p = random_point(&mut r, e.dim(), 0.5);
        let j = e.jet(&p).map_err(|err| err.to_string())?;
        let f = |q: &[f64]| e.value(q).unwrap();
        let g = fd_gradient(&f, &p, FD_STEP);
        let h = fd_hessian(&f, &p, FD_STEP);
        for (a, b) in j.grad.iter().zip(&g).chain(j.hess.iter().zip(&h)) {
            let err = rel_err(*a, *b);
            worst = worst.max(err);
            ensure!(err <= 1e-5, "{e} at {p:?}: jet {a} vs difference {b}");
        }
    }
    Ok(format!("1000 probes over {} expressions, max relative error {worst:.1e}", exprs.len()))
}

// 5

fn leaf_suite() -> Outcome {
    let t = Instant::now();
    let mut lines = Vec::new();
    let expected = [
        ("leviflat", MinimalityVerdict::NotMinimal, Some(2), 2),
        ("heisenberg", MinimalityVerdict::Minimal, Some(3), 3),
        ("quadric11", MinimalityVerdict::Minimal, None, 5),
    ];
    for (name, verdict, dim, lie) in expected {
        let m = manifold(name);
        let fields = m.frame.fields();
        let n = m.frame.dim();
        let rep = minimality_test(&fields, &vec![0.0; n], &unit_box(n), EPS, 200_000).map_err(|e| e.to_string())?;
        ensure!(rep.verdict == verdict, "{name}: {:?}", rep.verdict);
        ensure!(rep.cloud.lie_rank == lie, "{name}: lie_rank {}", rep.cloud.lie_rank);
        if let Some(d) = dim {
            let full = explore_leaf(&fields, &vec![0.0; n], &unit_box(n), EPS, 100_000).map_err(|e| e.to_string())?;
            ensure!(full.dim_estimate == d, "{name}: dim_estimate {}", full.dim_estimate);
        }
        lines.push(format!("{name} {:?} lie {}", rep.verdict, rep.cloud.lie_rank));
    }
    let mut r = rng(55);
    let mut worst = 0.0f64;
    for name in ["leviflat", "heisenberg"] {
        let fields = manifold(name).frame.fields();
        let c = explore_leaf(&fields, &[0.0; 3], &unit_box(3), EPS, 100_000).map_err(|e| e.to_string())?;
        ensure!(!c.budget_exhausted, "{name} leaf does not close");
        for _ in 0..5 {
            let y = c.point(r.random_range(0..c.len())).to_vec();
            let d = explore_leaf(&fields, &y, &c.region, EPS, 100_000).map_err(|e| e.to_string())?;
            let h = hausdorff_distance(&c, &d, 2.0 * EPS);
            ensure!(h <= 2.0 * EPS, "{name} re-based at {y:?}: Hausdorff {h}");
            worst = worst.max(h);
        }
    }
    let el = within(Duration::from_secs(60), t)?;
    Ok(format!(
        "{}; 5 re-basings each on leviflat and heisenberg, max Hausdorff {worst:.3}; {el:.2?}",
        lines.join(", ")
    ))
}

// 6

fn trapping() -> Outcome {
    let f = CoefficientExpr::parse("y3", 3).unwrap();
    let mut r = rng(6);
    let samples: Vec<Vec<f64>> = (0..12).map(|_| random_point(&mut r, 3, 0.4)).collect();
    let opts = TrappingOptions {
        region: unit_box(3),
        eps: EPS,
        budget: 10_000,
    };
    let flat = trapping_test(&manifold("leviflat").frame.fields(), &f, 0.0, &samples, &opts)
        .map_err(|e| e.to_string())?;
    ensure!(flat.max_pairing <= PAIRING_TOLERANCE, "leviflat pairing {}", flat.max_pairing);
    ensure!(flat.hypothesis_holds, "leviflat hypothesis rejected");
    let c = flat.containment.as_ref().ok_or("no containment check")?;
    ensure!(c.holds, "leviflat leaf leaves the set at {:?}", c.witness);

    let x = [1.0, 0.0, 0.0];
    let opts = TrappingOptions {
        region: BoxRegion::cube(&[0.0; 3], 1.5),
        ..opts
    };
    let heis = trapping_test(&manifold("heisenberg").frame.fields(), &f, 0.0, &[x.to_vec()], &opts)
        .map_err(|e| e.to_string())?;
    // ⟨dt, JX⟩ = −2x for JX = ∂y − 2x∂t.
    let oracle = -2.0 * x[0];
    let jx = heis.samples[0].pairings[1];
    ensure!(!heis.hypothesis_holds, "heisenberg hypothesis accepted");
    ensure!((jx - oracle).abs() <= 1e-12, "<dt, JX> = {jx}, expected {oracle}");
    ensure!((heis.max_pairing - 2.0).abs() <= 1e-12, "heisenberg max pairing {}", heis.max_pairing);
    Ok(format!(
        "leviflat pairing {:.1e}, containment over {} points; heisenberg |<dt, JX>| = {} at (1,0,0)",
        flat.max_pairing,
        c.points_checked,
        jx.abs()
    ))
}

// 7

fn barrier() -> Outcome {
    let x1 = [1.0, 0.0, 0.0];
    let m = manifold("leviflat");
    let region = BoxRegion::cube(&x1, 0.5);
    let report = certify_region(&m.frame, &LatticeGrid::new(region.clone(), 3));
    let oframe = Arc::new(orthonormalize_frame(Arc::clone(&m.frame), &report).map_err(|e| e.to_string())?);
    let op = assemble_local_operator(oframe, region).map_err(|e| e.to_string())?;
    let cert = barrier_gamma(&op, &x1, 0.1).map_err(|e| e.to_string())?;
    // Δe^{−γr²} = e^{−γr²}(4γ²ρ² − 4γ), positive on the ball iff γ > 1/ρ_min² = 1/0.81.
    let bound = 1.0 / 0.81;
    let g = cert.gamma;
    ensure!(g > 1.0 && g <= 2.5, "gamma {g}");
    ensure!(g > bound, "gamma {g} below the closed-form bound {bound}");
    ensure!(cert.values.iter().all(|&v| v > 0.0), "nonpositive certificate value {}", cert.min_value);
    for (p, v) in cert.net.iter().zip(&cert.values) {
        let rho2 = p[0] * p[0] + p[1] * p[1];
        let oracle = (-g * (rho2 + p[2] * p[2])).exp() * (4.0 * g * g * rho2 - 4.0 * g);
        ensure!((v - oracle).abs() <= 1e-10 * oracle.abs().max(1.0), "{p:?}: {v} vs {oracle}");
    }
    Ok(format!(
        "gamma {g:.4} (bound {bound:.4}), {} net values > 0, min {:.3e}",
        cert.values.len(),
        cert.min_value
    ))
}

// 8

fn max_modulus() -> Outcome {
    let m = manifold("quadric11");
    let region = BoxRegion::cube(&[0.0; 5], 0.3);
    let report = certify_region(&m.frame, &LatticeGrid::new(region.clone(), 3));
    ensure!(report.all_certified, "quadric11 not certified on the region");
    let opts = LeafOptions {
        eps: 0.1,
        budget: 200_000,
    };
    let mut r = rng(8);
    let mut starts = vec![vec![0.0; 5]];
    starts.extend((0..2).map(|_| random_point(&mut r, 5, 0.2)));
    let fields = m.frame.fields();
    let mut scenarios = 0;
    for x0 in &starts {
        let cloud = explore_leaf(&fields, x0, &region, opts.eps, opts.budget).map_err(|e| e.to_string())?;
        for id in ["z1", "z2", "z1z2", "2+z1^2"] {
            let u = function(&m, id);
            for mode in [ModulusMode::Modulus, ModulusMode::RealPart] {
                let rep = max_modulus_check(&m.frame, &report, &u, x0, &region, mode, opts, 1e-7)
                    .map_err(|e| format!("{id} {mode:?}: {e}"))?;
                // Grid-search oracle over the same cloud.
                let vals: Vec<f64> = cloud
                    .points()
                    .map(|p| {
                        let v = u.value(p).unwrap();
                        match mode {
                            ModulusMode::Modulus => v.norm(),
                            ModulusMode::RealPart => v.re,
                        }
                    })
                    .collect();
                let (arg, max) = vals.iter().enumerate().fold((0, f64::NEG_INFINITY), |a, (i, &v)| {
                    if v > a.1 {
                        (i, v)
                    } else {
                        a
                    }
                });
                let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
                let on_boundary = region.distance_to_boundary(cloud.point(arg)) <= 2.0 * opts.eps;
                let constant = max - min <= 1e-7;
                ensure!(on_boundary || constant, "{id} {mode:?} from {x0:?}: interior max at {:?}", cloud.point(arg));
                ensure!(rep.verdict != Verdict::Fail, "{id} {mode:?} from {x0:?}: {:?}", rep.verdict);
                if let (Verdict::Consistent, Some(w)) = (rep.verdict, &rep.witness) {
                    ensure!(region.distance_to_boundary(w) <= 2.0 * opts.eps, "{id}: witness {w:?} is interior");
                }
                scenarios += 1;
            }
        }
    }
    let c = ComplexFunction::constant("3+4i", Complex64::new(3.0, 4.0), 5);
    for mode in [ModulusMode::Modulus, ModulusMode::RealPart] {
        let rep = max_modulus_check(&m.frame, &report, &c, &[0.0; 5], &region, mode, opts, 1e-7)
            .map_err(|e| e.to_string())?;
        ensure!(rep.verdict == Verdict::Pass, "constant {mode:?}: {:?}", rep.verdict);
    }
    Ok(format!("{scenarios} leaf scenarios with boundary maxima, constant passes in both modes"))
}

// 9

fn carleman_bump(id: &str, cx: f64, cy: f64, r: f64) -> ComplexFunction {
    let re = format!("bump((y1 - {cx})/{r})*bump((y2 - {cy})/{r})");
    ComplexFunction::parse(id, &re, "0", 3).unwrap()
}

fn carleman() -> Outcome {
    let t = Instant::now();
    let cfg = CarlemanConfig {
        region: BoxRegion::new(vec![-0.5, -0.5, 0.0], vec![0.5, 0.5, 0.0]).unwrap(),
        x0: vec![0.0; 3],
        phi: CoefficientExpr::parse("y1", 3).unwrap(),
        a: 1.0,
        tau_grid: vec![8.0, 16.0, 32.0, 64.0],
        spacing: 1.0 / 64.0,
    };
    let bumps = vec![
        carleman_bump("b0", 0.0, 0.0, 0.3),
        carleman_bump("b1", 0.15, 0.1, 0.2),
        carleman_bump("b2", -0.2, -0.15, 0.25),
        carleman_bump("b3", 0.3, -0.25, 0.15),
        carleman_bump("b4", -0.1, 0.3, 0.12),
    ];
    let table = carleman_ratio(&manifold("leviflat").frame, &cfg, &bumps).map_err(|e| e.to_string())?;
    let el = within(Duration::from_secs(60), t)?;
    ensure!(table.skipped.is_empty(), "skipped {:?}", table.skipped);
    let mut worst = f64::NEG_INFINITY;
    for b in &bumps {
        let rs: Vec<f64> = table.rows.iter().filter(|r| r.function == b.id).map(|r| r.ratio).collect();
        ensure!(rs.len() == 4, "{}: {} rows", b.id, rs.len());
        let lower = rs[..2].iter().copied().fold(0.0, f64::max);
        let all = rs.iter().copied().fold(0.0, f64::max);
        let growth = all / lower - 1.0;
        ensure!(growth <= GROWTH_LIMIT, "{}: running max grows {:.2}%", b.id, 100.0 * growth);
        worst = worst.max(growth);
    }
    Ok(format!(
        "5 bumps, max running-max growth {:.2}%, C_emp {:.4}; {el:.2?}",
        100.0 * worst,
        table.c_emp
    ))
}

// 10

fn ucp() -> Outcome {
    let opts = |eps| UcpOptions {
        eps,
        budget: 200_000,
        tol: 1e-9,
        samples: 20,
        seed: 10,
    };
    let flat = manifold("leviflat");
    let eta = function(&flat, "eta(t)");
    let x0 = [0.0, 0.0, -0.2];
    let rep = ucp_demo(&flat.frame, &eta, &x0, &BoxRegion::cube(&x0, 0.1), &unit_box(3), &opts(EPS))
        .map_err(|e| e.to_string())?;
    ensure!(rep.vanishing_patch && rep.cloud_max == 0.0, "eta leaf does not vanish: {}", rep.cloud_max);
    ensure!(rep.support_samples == 20 && rep.complement_samples == 20, "samples {} / {}", rep.support_samples, rep.complement_samples);
    ensure!(
        rep.support_failures == 0 && rep.complement_failures == 0,
        "inclusion failures {} / {}",
        rep.support_failures,
        rep.complement_failures
    );
    ensure!(rep.report.verdict == Verdict::Pass, "leviflat verdict {:?}", rep.report.verdict);

    // Oracle: leaves are the planes t = const, so |η| is constant on each.
    let fields = flat.frame.fields();
    let mut r = rng(10);
    for _ in 0..10 {
        let x = random_point(&mut r, 3, 0.45);
        let c = explore_leaf(&fields, &x, &unit_box(3), EPS, 10_000).map_err(|e| e.to_string())?;
        let ux = eta.value(&x).unwrap().norm();
        ensure!(c.points().all(|p| (eta.value(p).unwrap().norm() - ux).abs() <= 1e-12), "eta varies along the leaf of {x:?}");
    }

    let quad = manifold("quadric11");
    let region = BoxRegion::cube(&[0.0; 5], 0.3);
    let y = [0.1, 0.1, 0.0, 0.0, 0.1];
    let rep = ucp_demo(&quad.frame, &function(&quad, "z1w"), &y, &BoxRegion::cube(&y, 0.1), &region, &opts(0.1))
        .map_err(|e| e.to_string())?;
    ensure!(!rep.vanishing_patch, "z1w vanishes near {y:?}");
    ensure!(rep.report.notes.iter().any(|n| n.contains("no vanishing patch")), "missing note");
    ensure!(rep.support_failures == 0 && rep.report.verdict == Verdict::Pass, "z1w verdict {:?}", rep.report.verdict);
    let zero = ComplexFunction::constant("0", Complex64::new(0.0, 0.0), 5);
    let rep0 = ucp_demo(&quad.frame, &zero, &[0.0; 5], &BoxRegion::cube(&[0.0; 5], 0.1), &region, &opts(0.1))
        .map_err(|e| e.to_string())?;
    ensure!(rep0.report.verdict == Verdict::Pass, "u = 0 verdict {:?}", rep0.report.verdict);
    Ok(format!(
        "eta support is a union of leaves (20 + 20 samples), quadric z1w propagation-only pass over {} samples, u = 0 vacuous",
        rep.support_samples
    ))
}

// 11

fn determinism() -> Outcome {
    let s = RunSettings {
        seed: 11,
        ..RunSettings::default()
    };
    let run = || -> Vec<String> {
        GALLERY
            .iter()
            .map(|name| run_gallery(&manifold(name), &CheckId::ALL, s).to_json())
            .collect()
    };
    let t = Instant::now();
    let (a, b) = (run(), run());
    for (name, (x, y)) in GALLERY.iter().zip(a.iter().zip(&b)) {
        ensure!(x == y, "{name}: reports differ");
    }
    let bytes: usize = a.iter().map(String::len).sum();
    Ok(format!("3 full reports ({bytes} bytes) identical across runs; {:.2?}", t.elapsed()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("certification", certification),
        ("signature consistency", signature_consistency),
        ("operator identities", identity_suite),
        ("jets vs finite differences", jet_oracle),
        ("leaves and minimality", leaf_suite),
        ("trapping", trapping),
        ("barrier", barrier),
        ("maximum modulus", max_modulus),
        ("carleman ratios", carleman),
        ("unique continuation", ucp),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
