use nalgebra::DMatrix;

use super::LeafError;
use crate::geometry::VectorField;

/// Default bracket depth for rank diagnostics.
pub const LIE_DEPTH: usize = 3;
/// Singular values at or above this are counted.
pub const RANK_TOLERANCE: f64 = 1e-8;

/// Rank at `p` of the span of the fields and their right-nested brackets
/// `[X_a, [X_b, … ]]` up to `depth` factors.
pub fn lie_rank(fields: &[VectorField], p: &[f64], depth: usize) -> Result<usize, LeafError> {
    if depth == 0 {
        return Err(LeafError::ZeroDepth);
    }
    let first = fields.first().ok_or(LeafError::NoFields)?;
    let n = first.dim();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut layer: Vec<VectorField> = fields.to_vec();
    for level in 1..=depth {
        for f in &layer {
            columns.push(f.eval(p)?);
        }
        if level == depth {
            break;
        }
        let mut next = Vec::with_capacity(fields.len() * layer.len());
        for x in fields {
            for y in &layer {
                next.push(x.bracket_field(y)?);
            }
        }
        layer = next;
    }
    let m = DMatrix::from_fn(n, columns.len(), |r, c| columns[c][r]);
    let scale = m.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if scale == 0.0 {
        return Ok(0);
    }
    Ok(m.singular_values().iter().filter(|&&s| s >= RANK_TOLERANCE).count())
}
