mod common;

use std::sync::Arc;

use common::{frame, random_point, rng};
use crlab_core::cr::{CRFrame, ComplexFunction, FrameDefinition, FrameError};
use crlab_core::geometry::{lie_bracket, Chart, VectorField};
use num_complex::Complex64;
use rand::Rng;

fn def(n: usize, k: usize, x: &[&[&str]], jx: &[&[&str]]) -> FrameDefinition {
    let owned = |a: &[&[&str]]| a.iter().map(|v| v.iter().map(|s| s.to_string()).collect()).collect();
    FrameDefinition {
        chart: Chart::cube("test", 2 * n + k, 2.0),
        n,
        k,
        x: owned(x),
        jx: owned(jx),
    }
}

/// A type (1,2) structure with a two-dimensional characteristic bundle.
fn codim_two() -> CRFrame {
    CRFrame::build(&def(1, 2, &[&["1", "0", "2*y2", "0"]], &[&["0", "1", "-2*y1", "y1"]])).unwrap()
}

#[test]
fn build_frame_examples() {
    assert!(CRFrame::build(&def(1, 1, &[&["1", "0", "2*y2"]], &[&["0", "1", "-2*y1"]])).is_ok());
    assert!(CRFrame::build(&def(1, 1, &[&["1", "0", "0"]], &[&["0", "1", "0"]])).is_ok());
    let err = CRFrame::build(&def(1, 1, &[&["1", "0", "2*y2"]], &[&["1", "0", "2*y2"]])).unwrap_err();
    assert!(matches!(err, FrameError::RankDeficient { .. }));
    let err = CRFrame::build(&def(1, 2, &[&["1", "0", "0"]], &[&["0", "1", "0"]])).unwrap_err();
    assert!(matches!(err, FrameError::DimensionMismatch { .. } | FrameError::Geometry(_)));
}

#[test]
fn integrability_residuals() {
    let mut r = rng(5);
    for name in ["leviflat", "heisenberg", "quadric11"] {
        let f = frame(name);
        for _ in 0..100 {
            let p = random_point(&mut r, f.dim(), 1.9);
            assert!(f.integrability_residual(&p).unwrap() <= 1e-9, "{name}");
        }
    }
}

#[test]
fn non_integrable_structure_has_positive_residual() {
    // L̄_1 = ∂1 + i∂2, L̄_2 = ∂3 + i(∂4 + y1 ∂5): [L̄_1, L̄_2] = i∂5 ∉ span
    let f = CRFrame::build(&def(
        2,
        1,
        &[&["1", "0", "0", "0", "0"], &["0", "0", "1", "0", "0"]],
        &[&["0", "1", "0", "0", "0"], &["0", "0", "0", "1", "y1"]],
    ))
    .unwrap();
    assert!(f.integrability_residual(&[0.0; 5]).unwrap() > 0.1);
}

#[test]
fn dbar_examples() {
    let m = common::manifold("leviflat");
    let z = &m.cr_functions[0];
    let zbar = ComplexFunction::parse("zbar", "y1", "-y2", 3).unwrap();
    let p = [0.3, -0.7, 0.2];
    assert_eq!(m.frame.dbar_apply(z, &p).unwrap(), vec![Complex64::new(0.0, 0.0)]);
    // (∂x + i∂y)(x − iy) = 2
    assert_eq!(m.frame.dbar_apply(&zbar, &p).unwrap(), vec![Complex64::new(2.0, 0.0)]);

    let q = common::manifold("quadric11");
    let mut r = rng(9);
    for _ in 0..50 {
        let p = random_point(&mut r, 5, 1.5);
        for u in &q.cr_functions {
            for c in q.frame.dbar_apply(u, &p).unwrap() {
                assert!(c.norm() < 1e-12, "{} at {:?}", u.id, p);
            }
        }
    }
}

#[test]
fn characteristic_basis_examples() {
    assert_eq!(frame("leviflat").characteristic_basis(&[0.0; 3]).unwrap().xi, vec![vec![0.0, 0.0, 1.0]]);
    assert_eq!(frame("heisenberg").characteristic_basis(&[0.0; 3]).unwrap().xi, vec![vec![0.0, 0.0, 1.0]]);
    let xi = &frame("heisenberg").characteristic_basis(&[1.0, 0.0, 0.0]).unwrap().xi[0];
    let s = 5f64.sqrt();
    for (a, b) in xi.iter().zip([0.0, 2.0 / s, 1.0 / s]) {
        assert!((a - b).abs() < 1e-14);
    }
}

#[test]
fn characteristic_basis_annihilates_and_is_orthonormal() {
    let f = codim_two();
    let mut r = rng(2);
    for _ in 0..30 {
        let p = random_point(&mut r, 4, 1.5);
        let xi = f.characteristic_basis(&p).unwrap().xi;
        assert_eq!(xi.len(), 2);
        for field in f.fields() {
            let v = field.eval(&p).unwrap();
            for x in &xi {
                assert!(x.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>().abs() <= 1e-10);
            }
        }
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        assert!((dot(&xi[0], &xi[0]) - 1.0).abs() < 1e-12);
        assert!(dot(&xi[0], &xi[1]).abs() < 1e-12);
    }
}

#[test]
fn levi_examples() {
    let dt = [0.0, 0.0, 1.0];
    let a = frame("leviflat").levi_matrix(&[0.4, 0.1, -0.3], &dt).unwrap().a;
    assert_eq!(a[(0, 0)], Complex64::new(0.0, 0.0));
    // [X, JX] = −4∂t so ⟨dt, [JX, X]⟩ = 4
    let a = frame("heisenberg").levi_matrix(&[0.0; 3], &dt).unwrap().a;
    assert!((a[(0, 0)] - Complex64::new(4.0, 0.0)).norm() < 1e-14);
    let ev = frame("quadric11").levi_matrix(&[0.0; 5], &[0.0, 0.0, 0.0, 0.0, 1.0]).unwrap().eigenvalues();
    assert!((ev[0] + 4.0).abs() < 1e-12 && (ev[1] - 4.0).abs() < 1e-12);
}

#[test]
fn non_characteristic_covector_is_rejected() {
    let err = frame("heisenberg").levi_matrix(&[0.0; 3], &[1.0, 0.0, 0.0]).unwrap_err();
    assert!(matches!(err, FrameError::NotCharacteristic { .. }));
}

#[test]
fn levi_form_is_linear_in_the_covector() {
    let f = codim_two();
    let mut r = rng(4);
    for _ in 0..20 {
        let p = random_point(&mut r, 4, 1.5);
        let xi = f.characteristic_basis(&p).unwrap().xi;
        let (a, b): (f64, f64) = (r.random_range(-2.0..2.0), r.random_range(-2.0..2.0));
        let comb: Vec<f64> = xi[0].iter().zip(&xi[1]).map(|(u, v)| a * u + b * v).collect();
        let lhs = f.levi_matrix(&p, &comb).unwrap().a;
        let rhs = f.levi_matrix(&p, &xi[0]).unwrap().a * Complex64::new(a, 0.0)
            + f.levi_matrix(&p, &xi[1]).unwrap().a * Complex64::new(b, 0.0);
        assert!((lhs - rhs).norm() <= 1e-10);
    }
}

/// `⟨ξ, [Jṽ, ṽ]⟩(p)` for the constant-coefficient combination `ṽ`, computed
/// directly from the fields.
fn direct_form(f: &CRFrame, p: &[f64], xi: &[f64], c: &[f64]) -> f64 {
    let n = f.n();
    let fields = f.fields();
    let refs: Vec<&VectorField> = fields.iter().collect();
    let jc: Vec<f64> = (0..2 * n).map(|i| if i < n { -c[n + i] } else { c[i - n] }).collect();
    let v = VectorField::linear_combination(&refs, c);
    let jv = VectorField::linear_combination(&refs, &jc);
    let br = lie_bracket(&jv, &v, p).unwrap();
    xi.iter().zip(&br).map(|(a, b)| a * b).sum()
}

#[test]
fn polarization_and_j_compatibility() {
    let mut r = rng(6);
    let frames: Vec<Arc<CRFrame>> = vec![frame("heisenberg"), frame("quadric11"), Arc::new(codim_two())];
    for f in frames {
        let n = f.n();
        for _ in 0..50 {
            let p = random_point(&mut r, f.dim(), 1.0);
            let xi = f.characteristic_basis(&p).unwrap().xi[0].clone();
            let levi = f.levi_matrix(&p, &xi).unwrap();
            assert!((&levi.a - levi.a.adjoint()).norm() <= 1e-12);
            let c: Vec<f64> = (0..2 * n).map(|_| r.random_range(-1.0..1.0)).collect();
            let q = levi.quadratic_form(&c);
            assert!((q - direct_form(&f, &p, &xi, &c)).abs() <= 1e-9);
            let jc: Vec<f64> = (0..2 * n).map(|i| if i < n { -c[n + i] } else { c[i - n] }).collect();
            assert!((q - direct_form(&f, &p, &xi, &jc)).abs() <= 1e-9);
        }
    }
}
