use nalgebra::DVector;

use super::explore::LeafCloud;
use super::LeafError;
use crate::geometry::VectorField;

/// Hausdorff distance between two clouds, or infinity if it exceeds `cap`.
pub fn hausdorff_distance(a: &LeafCloud, b: &LeafCloud, cap: f64) -> f64 {
    let directed = |from: &LeafCloud, to: &LeafCloud| {
        let idx = to.index(cap);
        let mut worst = 0.0f64;
        for p in from.points() {
            match idx.nearest_within(&to.coords, p, cap) {
                Some((_, d)) => worst = worst.max(d),
                None => return f64::INFINITY,
            }
        }
        worst
    };
    let ab = directed(a, b);
    if ab.is_infinite() {
        return ab;
    }
    ab.max(directed(b, a))
}

/// Largest component of a generator field normal to the PCA tangent space,
/// over every `stride`-th cloud point. Returns the residual and the point.
pub fn tangency_residual(
    cloud: &LeafCloud,
    fields: &[VectorField],
    stride: usize,
) -> Result<(f64, Vec<f64>), LeafError> {
    let idx = cloud.pca_index();
    let mut worst = (0.0, cloud.origin.clone());
    for i in (0..cloud.len()).step_by(stride.max(1)) {
        let p = cloud.point(i);
        let basis = cloud.tangent_space_indexed(&idx, p);
        for f in fields {
            let x = DVector::from_vec(f.eval(p)?);
            let normal = &x - &basis * (basis.transpose() * &x);
            let r = normal.norm();
            if r > worst.0 {
                worst = (r, p.to_vec());
            }
        }
    }
    Ok(worst)
}
