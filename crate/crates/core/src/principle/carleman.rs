use std::io::Write;

use super::PrincipleError;
use crate::cr::{CRFrame, ComplexFunction};
use crate::geometry::{BoxRegion, CoefficientExpr};

/// Allowed relative growth of the running maximum of `R` from the lower to
/// the upper half of the τ grid.
pub const GROWTH_LIMIT: f64 = 0.05;
const PHI_ZERO_TOLERANCE: f64 = 1e-12;
const NONCHARACTERISTIC_THRESHOLD: f64 = 1e-6;
const SUPPORT_MARGIN_CELLS: f64 = 2.0;

/// Weighted-norm setup: weight `exp(τ(φ + Aφ²))` on the box `region`, midpoint
/// quadrature with cells of side about `spacing`. Flat axes of `region`
/// (`lo == hi`) are held fixed, which restricts the quadrature to a slice.
#[derive(Clone, Debug, PartialEq)]
pub struct CarlemanConfig {
    pub region: BoxRegion,
    pub x0: Vec<f64>,
    pub phi: CoefficientExpr,
    pub a: f64,
    pub tau_grid: Vec<f64>,
    pub spacing: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CarlemanRow {
    pub function: String,
    pub tau: f64,
    /// `√τ·‖f·w‖`.
    pub numerator: f64,
    /// `‖∂̄f·w‖`.
    pub denominator: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CarlemanTable {
    pub rows: Vec<CarlemanRow>,
    /// Functions whose `∂̄f` vanishes on every node.
    pub skipped: Vec<String>,
    /// Largest ratio over all rows.
    pub c_emp: f64,
    /// Per function: running max of `R` over the whole grid divided by the
    /// running max over its lower half, minus one.
    pub growth: Vec<(String, f64)>,
    pub max_growth: f64,
    pub nodes: usize,
}

impl CarlemanTable {
    pub fn bounded(&self) -> bool {
        self.max_growth <= GROWTH_LIMIT
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(out);
        w.write_record(["function", "tau", "numerator", "denominator", "R"])?;
        for r in &self.rows {
            w.write_record([
                r.function.clone(),
                format!("{:.16e}", r.tau),
                format!("{:.16e}", r.numerator),
                format!("{:.16e}", r.denominator),
                format!("{:.16e}", r.ratio),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

struct Lattice {
    nodes: Vec<Vec<f64>>,
    /// Per node: distance to the boundary in cells, over non-flat axes.
    margin: Vec<f64>,
    volume: f64,
}

fn lattice(region: &BoxRegion, spacing: f64) -> Lattice {
    let n = region.dim();
    let counts: Vec<usize> = (0..n)
        .map(|a| {
            let w = region.hi[a] - region.lo[a];
            if w > 0.0 {
                ((w / spacing).round() as usize).max(1)
            } else {
                1
            }
        })
        .collect();
    let mut volume = 1.0;
    for a in 0..n {
        let w = region.hi[a] - region.lo[a];
        if w > 0.0 {
            volume *= w / counts[a] as f64;
        }
    }
    let total: usize = counts.iter().product();
    let mut nodes = Vec::with_capacity(total);
    let mut margin = Vec::with_capacity(total);
    for code in 0..total {
        let mut c = code;
        let mut p = vec![0.0; n];
        let mut m = f64::INFINITY;
        for a in 0..n {
            let i = c % counts[a];
            c /= counts[a];
            let w = region.hi[a] - region.lo[a];
            if w > 0.0 {
                p[a] = region.lo[a] + (i as f64 + 0.5) * w / counts[a] as f64;
                m = m.min((i as f64 + 0.5).min(counts[a] as f64 - i as f64 - 0.5));
            } else {
                p[a] = region.lo[a];
            }
        }
        nodes.push(p);
        margin.push(m);
    }
    Lattice { nodes, margin, volume }
}

fn validate(frame: &CRFrame, cfg: &CarlemanConfig) -> Result<(), PrincipleError> {
    let bad = |m: String| Err(PrincipleError::InvalidConfig(m));
    if cfg.region.dim() != frame.dim() || cfg.x0.len() != frame.dim() || cfg.phi.dim() != frame.dim() {
        return bad("dimension mismatch with the frame".into());
    }
    if !(cfg.spacing > 0.0) {
        return bad(format!("lattice spacing must be positive, got {}", cfg.spacing));
    }
    if !(cfg.a > 0.0) {
        return bad(format!("A must be positive, got {}", cfg.a));
    }
    match cfg.tau_grid.first() {
        None => return bad("empty τ grid".into()),
        Some(&t) if !(t > 0.0) => return bad(format!("τ grid must start above 0, got {t}")),
        _ => {}
    }
    if cfg.tau_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return bad("τ grid must be strictly increasing".into());
    }
    if !cfg.region.contains(&cfg.x0) {
        return bad(format!("x0 = {:?} is outside the region", cfg.x0));
    }
    let phi = cfg.phi.jet(&cfg.x0)?;
    if phi.value.abs() > PHI_ZERO_TOLERANCE {
        return bad(format!("φ(x0) = {:e} must vanish", phi.value));
    }
    let jets = frame.jets(&cfg.x0)?;
    let pairing = jets
        .x
        .iter()
        .chain(&jets.jx)
        .map(|f| f.value.iter().zip(&phi.grad).map(|(a, b)| a * b).sum::<f64>().abs())
        .fold(0.0, f64::max);
    if pairing < NONCHARACTERISTIC_THRESHOLD {
        return bad("dφ(x0) annihilates every frame field".into());
    }
    Ok(())
}

/// `R(f, τ) = √τ·‖f·w‖ / ‖∂̄f·w‖` with `w = exp(τ(φ + Aφ²))` for every test
/// function and τ, using chart-Euclidean volume and `|∂̄f|² = Σ|L̄_j f|²`.
pub fn carleman_ratio(
    frame: &CRFrame,
    cfg: &CarlemanConfig,
    tests: &[ComplexFunction],
) -> Result<CarlemanTable, PrincipleError> {
    validate(frame, cfg)?;
    let lat = lattice(&cfg.region, cfg.spacing);
    let psi = lat
        .nodes
        .iter()
        .map(|p| {
            let v = cfg.phi.value(p)?;
            Ok(v + cfg.a * v * v)
        })
        .collect::<Result<Vec<f64>, PrincipleError>>()?;

    let mut table = CarlemanTable {
        rows: Vec::new(),
        skipped: Vec::new(),
        c_emp: 0.0,
        growth: Vec::new(),
        max_growth: f64::NEG_INFINITY,
        nodes: lat.nodes.len(),
    };
    let half = cfg.tau_grid.len().div_ceil(2);
    for f in tests {
        let mut f2 = Vec::with_capacity(lat.nodes.len());
        let mut d2 = Vec::with_capacity(lat.nodes.len());
        for (p, &m) in lat.nodes.iter().zip(&lat.margin) {
            let j = f.jet(p)?;
            let v = j.value().norm_sqr();
            if v != 0.0 && m < SUPPORT_MARGIN_CELLS {
                return Err(PrincipleError::SupportViolation {
                    function: f.id.clone(),
                    point: p.clone(),
                });
            }
            f2.push(v);
            d2.push(frame.jets(p)?.dbar(&j).iter().map(|c| c.norm_sqr()).sum::<f64>());
        }
        if d2.iter().all(|&v| v == 0.0) {
            table.skipped.push(f.id.clone());
            continue;
        }
        let mut ratios = Vec::with_capacity(cfg.tau_grid.len());
        for &tau in &cfg.tau_grid {
            let shift = psi.iter().map(|s| 2.0 * tau * s).fold(f64::NEG_INFINITY, f64::max);
            let (mut num, mut den) = (0.0, 0.0);
            for i in 0..psi.len() {
                let w = (2.0 * tau * psi[i] - shift).exp();
                num += w * f2[i];
                den += w * d2[i];
            }
            num *= lat.volume;
            den *= lat.volume;
            let ratio = (tau * num / den).sqrt();
            let scale = (0.5 * shift).exp();
            table.rows.push(CarlemanRow {
                function: f.id.clone(),
                tau,
                numerator: tau.sqrt() * num.sqrt() * scale,
                denominator: den.sqrt() * scale,
                ratio,
            });
            ratios.push(ratio);
        }
        let lower = ratios[..half].iter().copied().fold(0.0, f64::max);
        let all = ratios.iter().copied().fold(0.0, f64::max);
        let g = all / lower - 1.0;
        table.c_emp = table.c_emp.max(all);
        table.max_growth = table.max_growth.max(g);
        table.growth.push((f.id.clone(), g));
    }
    if table.growth.is_empty() {
        table.max_growth = 0.0;
    }
    Ok(table)
}
