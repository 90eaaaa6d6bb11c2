use super::explore::explore_leaf;
use super::LeafError;
use crate::geometry::{BoxRegion, CoefficientExpr, VectorField};

/// Pairings at or below this count as annihilation.
pub const PAIRING_TOLERANCE: f64 = 1e-8;
const MIN_GRADIENT: f64 = 1e-8;
const CONTAINMENT_STARTS: usize = 10;
const NEWTON_ITERATIONS: usize = 50;

/// A boundary point of `{f ≤ c}` with its outward conormal `∇f` and the
/// pairings `⟨∇f, X⟩` for each generator.
#[derive(Clone, Debug, PartialEq)]
pub struct ConormalSample {
    pub point: Vec<f64>,
    pub xi: Vec<f64>,
    pub pairings: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrappingOptions {
    pub region: BoxRegion,
    pub eps: f64,
    pub budget: usize,
}

/// Leaves explored from interior points of `{f ≤ c}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ContainmentCheck {
    pub starts: Vec<Vec<f64>>,
    pub points_checked: usize,
    /// Largest `f(q) − c − eps·|∇f(q)|` over all explored points.
    pub max_excess: f64,
    pub witness: Option<Vec<f64>>,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrappingReport {
    pub level: f64,
    pub samples: Vec<ConormalSample>,
    pub max_pairing: f64,
    /// Sample and generator index attaining `max_pairing`.
    pub witness: Option<(Vec<f64>, usize)>,
    pub hypothesis_holds: bool,
    /// Only run when the hypothesis holds.
    pub containment: Option<ContainmentCheck>,
}

fn gradient(f: &CoefficientExpr, p: &[f64]) -> Result<(f64, Vec<f64>), LeafError> {
    let j = f.jet(p)?;
    Ok((j.value, j.grad))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Newton projection of `p` onto `{f = c}` along the gradient.
fn project(f: &CoefficientExpr, c: f64, p: &[f64]) -> Result<Vec<f64>, LeafError> {
    let mut q = p.to_vec();
    for _ in 0..NEWTON_ITERATIONS {
        let (v, g) = gradient(f, &q)?;
        let gg: f64 = g.iter().map(|x| x * x).sum();
        if gg.sqrt() < MIN_GRADIENT {
            return Err(LeafError::DegenerateGradient {
                point: q,
                norm: gg.sqrt(),
            });
        }
        let r = v - c;
        if r.abs() <= 1e-13 * (1.0 + c.abs()) {
            return Ok(q);
        }
        for (qi, gi) in q.iter_mut().zip(&g) {
            *qi -= r * gi / gg;
        }
    }
    if (f.value(&q)? - c).abs() <= 1e-10 {
        Ok(q)
    } else {
        Err(LeafError::Projection { point: p.to_vec() })
    }
}

/// Check whether every generator annihilates the outward conormal of
/// `{f ≤ c}` at the projections of `samples`, and if so that leaves started
/// just inside the set stay in it.
pub fn trapping_test(
    fields: &[VectorField],
    f: &CoefficientExpr,
    c: f64,
    samples: &[Vec<f64>],
    opts: &TrappingOptions,
) -> Result<TrappingReport, LeafError> {
    if fields.is_empty() {
        return Err(LeafError::NoFields);
    }
    let mut out = Vec::with_capacity(samples.len());
    let mut max_pairing = 0.0f64;
    let mut witness = None;
    for s in samples {
        let p = project(f, c, s)?;
        let (_, xi) = gradient(f, &p)?;
        let mut pairings = Vec::with_capacity(fields.len());
        for (fi, x) in fields.iter().enumerate() {
            let v = x.eval(&p)?;
            let pairing: f64 = v.iter().zip(&xi).map(|(a, b)| a * b).sum();
            if pairing.abs() > max_pairing || witness.is_none() {
                if pairing.abs() > max_pairing {
                    max_pairing = pairing.abs();
                }
                witness = Some((p.clone(), fi));
            }
            pairings.push(pairing);
        }
        out.push(ConormalSample { point: p, xi, pairings });
    }
    let hypothesis_holds = max_pairing <= PAIRING_TOLERANCE;
    let containment = if hypothesis_holds {
        Some(containment(fields, f, c, &out, opts)?)
    } else {
        None
    };
    Ok(TrappingReport {
        level: c,
        samples: out,
        max_pairing,
        witness,
        hypothesis_holds,
        containment,
    })
}

fn containment(
    fields: &[VectorField],
    f: &CoefficientExpr,
    c: f64,
    samples: &[ConormalSample],
    opts: &TrappingOptions,
) -> Result<ContainmentCheck, LeafError> {
    let mut starts = Vec::new();
    for s in samples {
        let n = norm(&s.xi);
        let q: Vec<f64> = s.point.iter().zip(&s.xi).map(|(p, g)| p - 2.0 * opts.eps * g / n).collect();
        if opts.region.contains(&q) && f.value(&q)? < c {
            starts.push(q);
        }
        if starts.len() == CONTAINMENT_STARTS {
            break;
        }
    }
    let mut check = ContainmentCheck {
        starts: Vec::new(),
        points_checked: 0,
        max_excess: f64::NEG_INFINITY,
        witness: None,
        holds: true,
    };
    for q in starts {
        let cloud = explore_leaf(fields, &q, &opts.region, opts.eps, opts.budget)?;
        for p in cloud.points() {
            let (v, g) = gradient(f, p)?;
            let excess = v - c - opts.eps * norm(&g);
            if excess > check.max_excess {
                check.max_excess = excess;
                check.witness = Some(p.to_vec());
            }
        }
        check.points_checked += cloud.len();
        check.starts.push(q);
    }
    check.holds = !check.starts.is_empty() && check.max_excess <= 0.0;
    Ok(check)
}
