#![allow(dead_code)]

use crlab_core::cr::CRFrame;
use crlab_core::gallery::{self, LoadedManifold};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FD_STEP: f64 = 1e-4;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn manifold(name: &str) -> LoadedManifold {
    gallery::builtin(name).unwrap()
}

pub fn frame(name: &str) -> std::sync::Arc<CRFrame> {
    manifold(name).frame
}

pub fn random_point(rng: &mut ChaCha8Rng, dim: usize, half: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(-half..half)).collect()
}

/// Central-difference gradient.
pub fn fd_gradient(f: &dyn Fn(&[f64]) -> f64, p: &[f64], h: f64) -> Vec<f64> {
    (0..p.len())
        .map(|i| {
            let mut a = p.to_vec();
            let mut b = p.to_vec();
            a[i] += h;
            b[i] -= h;
            (f(&a) - f(&b)) / (2.0 * h)
        })
        .collect()
}

/// Central-difference Hessian from values only, row-major.
pub fn fd_hessian(f: &dyn Fn(&[f64]) -> f64, p: &[f64], h: f64) -> Vec<f64> {
    let n = p.len();
    let at = |di: usize, si: f64, dj: usize, sj: f64| {
        let mut q = p.to_vec();
        q[di] += si * h;
        q[dj] += sj * h;
        f(&q)
    };
    let mut out = vec![0.0; n * n];
    let f0 = f(p);
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = if i == j {
                let mut a = p.to_vec();
                let mut b = p.to_vec();
                a[i] += h;
                b[i] -= h;
                (f(&a) - 2.0 * f0 + f(&b)) / (h * h)
            } else {
                (at(i, 1.0, j, 1.0) - at(i, 1.0, j, -1.0) - at(i, -1.0, j, 1.0) + at(i, -1.0, j, -1.0)) / (4.0 * h * h)
            };
        }
    }
    out
}

pub fn rel_err(exact: f64, approx: f64) -> f64 {
    (exact - approx).abs() / approx.abs().max(1.0)
}

pub fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
