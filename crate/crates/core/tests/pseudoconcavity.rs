mod common;

use common::{frame, random_point, rng};
use crlab_core::geometry::{BoxRegion, CoefficientExpr};
use crlab_core::pseudoconcave::{
    certify_from_levi, certify_metric, certify_region, signature_test, CertifyOptions, CertifyOutcome, LatticeGrid,
    MetricCertificate, Signature, MIN_EIGENVALUE, RESIDUAL_TOLERANCE,
};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;

fn grid(dim: usize, per_axis: usize) -> LatticeGrid {
    LatticeGrid::new(BoxRegion::cube(&vec![0.0; dim], 0.5), per_axis)
}

/// Residuals and eigenvalues recomputed from the returned matrix alone.
fn assert_sound(frame: &crlab_core::cr::CRFrame, cert: &MetricCertificate) {
    let g = &cert.g;
    assert!((g - g.adjoint()).norm() <= 1e-12);
    let ev = g.clone().symmetric_eigenvalues();
    assert!(ev.min() >= MIN_EIGENVALUE);
    assert!((g.trace().re - frame.n() as f64).abs() <= RESIDUAL_TOLERANCE);
    for xi in frame.characteristic_basis(&cert.point).unwrap().xi {
        let a = frame.levi_matrix(&cert.point, &xi).unwrap().a;
        assert!((g * a).trace().norm() <= RESIDUAL_TOLERANCE);
    }
}

#[test]
fn leviflat_certificate_is_identity() {
    let f = frame("leviflat");
    let out = certify_metric(&f, &[0.0; 3]).unwrap();
    let cert = out.certificate().unwrap();
    assert!((cert.g[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    assert!((cert.lambda_min - 1.0).abs() < 1e-12);
    assert!(cert.residuals.iter().all(|r| *r == 0.0));
}

#[test]
fn quadric_certificate_is_identity_at_origin() {
    let f = frame("quadric11");
    let cert = certify_metric(&f, &[0.0; 5]).unwrap().certificate().unwrap().clone();
    assert!((&cert.g - DMatrix::<Complex64>::identity(2, 2)).norm() < 1e-9);
    assert!((cert.lambda_min - 1.0).abs() < 1e-9);
    assert_sound(&f, &cert);
}

#[test]
fn heisenberg_is_infeasible() {
    let out = certify_metric(&frame("heisenberg"), &[0.0; 3]).unwrap();
    assert!(matches!(out, CertifyOutcome::Infeasible { .. }));
}

#[test]
fn region_sweeps() {
    let lf = certify_region(&frame("leviflat"), &grid(3, 5));
    assert_eq!(lf.points.len(), 125);
    assert!(lf.all_certified);
    assert_eq!(lf.continuity_constant, 0.0);

    let q = frame("quadric11");
    let qr = certify_region(&q, &grid(5, 3));
    assert_eq!(qr.points.len(), 243);
    assert!(qr.all_certified);
    for p in &qr.points {
        assert_sound(&q, p.outcome.as_ref().unwrap().certificate().unwrap());
    }

    let hr = certify_region(&frame("heisenberg"), &grid(3, 3));
    assert_eq!(hr.infeasible_count(), 27);
    assert!(!hr.all_certified);
}

#[test]
fn signature_examples() {
    let v = signature_test(&frame("leviflat"), &[0.0; 3], 3).unwrap();
    assert_eq!(v.verdict, Signature::AllZero);

    let v = signature_test(&frame("heisenberg"), &[0.0; 3], 3).unwrap();
    assert_eq!(v.verdict, Signature::Fails);
    let w = v.witness.unwrap();
    assert_eq!(w.xi, vec![0.0, 0.0, 1.0]);
    assert!((w.eigenvalues()[0] - 4.0).abs() < 1e-12);

    let v = signature_test(&frame("quadric11"), &[0.0; 5], 7).unwrap();
    assert_eq!(v.verdict, Signature::IndefiniteEverywhere);
    assert!(signature_test(&frame("quadric11"), &[0.0; 5], 2).is_err());
}

#[test]
fn certified_points_pass_the_signature_test() {
    let mut r = rng(21);
    for name in ["leviflat", "quadric11", "heisenberg"] {
        let f = frame(name);
        for _ in 0..30 {
            let p = random_point(&mut r, f.dim(), 1.5);
            if certify_metric(&f, &p).unwrap().is_certified() {
                assert_ne!(signature_test(&f, &p, 9).unwrap().verdict, Signature::Fails);
            } else {
                assert_eq!(name, "heisenberg");
            }
        }
    }
}

#[test]
fn scaling_the_frame_keeps_verdicts() {
    let scale = CoefficientExpr::parse("1 + 0.25*y1^2 + 0.1*y2", 5).unwrap();
    let q = frame("quadric11");
    let qs = q.scaled(&scale);
    let h = frame("heisenberg");
    let hs = h.scaled(&CoefficientExpr::parse("2 + y3", 3).unwrap());
    let mut r = rng(8);
    for _ in 0..20 {
        let p = random_point(&mut r, 5, 0.8);
        let a = certify_metric(&q, &p).unwrap();
        let b = certify_metric(&qs, &p).unwrap();
        assert!(a.is_certified() && b.is_certified());
        // A scales by a positive factor, so the normalized G is unchanged.
        assert!((&a.certificate().unwrap().g - &b.certificate().unwrap().g).norm() < 1e-8);
        let p3 = &p[..3];
        assert!(!certify_metric(&h, p3).unwrap().is_certified());
        assert!(!certify_metric(&hs, p3).unwrap().is_certified());
    }
}

#[test]
fn certification_is_deterministic() {
    let q = frame("quadric11");
    let a = certify_region(&q, &grid(5, 2));
    let b = certify_region(&q, &grid(5, 2));
    assert_eq!(a, b);
}

fn hermitian_from(u: &[f64], n: usize) -> DMatrix<Complex64> {
    let m = DMatrix::from_fn(n, n, |i, j| Complex64::new(u[2 * (i * n + j)], u[2 * (i * n + j) + 1]));
    (&m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

fn unitary(u: &[f64], n: usize) -> DMatrix<Complex64> {
    let m = DMatrix::from_fn(n, n, |i, j| Complex64::new(u[2 * (i * n + j)], u[2 * (i * n + j) + 1]));
    m.qr().q()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn certificates_are_sound(u in prop::collection::vec(-1.0..1.0f64, 18), v in prop::collection::vec(-1.0..1.0f64, 18)) {
        let levi = vec![hermitian_from(&u, 3), hermitian_from(&v, 3)];
        if let Ok(CertifyOutcome::Certified(c)) = certify_from_levi(&[0.0], 3, &levi, &CertifyOptions::default()) {
            let ev = c.g.clone().symmetric_eigenvalues();
            prop_assert!(ev.min() >= MIN_EIGENVALUE);
            prop_assert!((c.g.trace().re - 3.0).abs() <= RESIDUAL_TOLERANCE);
            for a in &levi {
                prop_assert!((&c.g * a).trace().norm() <= RESIDUAL_TOLERANCE);
            }
        }
    }

    #[test]
    fn indefinite_forms_are_certified(u in prop::collection::vec(-1.0..1.0f64, 8), a in 0.1..5.0f64, b in 0.1..5.0f64) {
        let q = unitary(&u, 2);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![Complex64::new(a, 0.0), Complex64::new(-b, 0.0)]));
        let levi = &q * d * q.adjoint();
        let out = certify_from_levi(&[0.0], 2, &[levi], &CertifyOptions::default()).unwrap();
        prop_assert!(out.is_certified());
    }

    #[test]
    fn definite_forms_are_infeasible(u in prop::collection::vec(-1.0..1.0f64, 8), a in 0.1..5.0f64, b in 0.1..5.0f64) {
        let q = unitary(&u, 2);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![Complex64::new(a, 0.0), Complex64::new(b, 0.0)]));
        let levi = &q * d * q.adjoint();
        let out = certify_from_levi(&[0.0], 2, &[levi], &CertifyOptions::default()).unwrap();
        let infeasible = matches!(out, CertifyOutcome::Infeasible { .. });
        prop_assert!(infeasible);
    }
}
