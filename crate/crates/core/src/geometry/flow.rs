use super::{GeometryError, VectorField};

/// Endpoint of the integral curve of `x` through `p` after `time`,
/// integrated with the classical fourth-order Runge–Kutta scheme using a
/// fixed step no larger than `step`.
///
/// Every stage point must stay inside the chart bounds.
pub fn flow(x: &VectorField, p: &[f64], time: f64, step: f64) -> Result<Vec<f64>, GeometryError> {
    x.chart().check_point(p)?;
    if time == 0.0 {
        return Ok(p.to_vec());
    }
    if !(step > 0.0) || !time.is_finite() {
        return Err(GeometryError::InvalidStep { step });
    }
    let steps = (time.abs() / step).ceil().max(1.0) as usize;
    let h = time / steps as f64;
    let n = p.len();
    let mut y = p.to_vec();
    let mut tmp = vec![0.0; n];
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for _ in 0..steps {
        x.eval_into(&y, &mut k1)?;
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        x.eval_into(&tmp, &mut k2)?;
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        x.eval_into(&tmp, &mut k3)?;
        for i in 0..n {
            tmp[i] = y[i] + h * k3[i];
        }
        x.eval_into(&tmp, &mut k4)?;
        for i in 0..n {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite { point: y });
        }
        x.chart().check_point(&y)?;
    }
    Ok(y)
}
