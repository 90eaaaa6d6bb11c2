use serde::{Deserialize, Serialize};

use super::explore::{Explorer, LeafCloud};
use super::LeafError;
use crate::geometry::{BoxRegion, VectorField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinimalityVerdict {
    Minimal,
    NotMinimal,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinimalityReport {
    pub verdict: MinimalityVerdict,
    /// Lattice targets `x0 + eps·{−1,0,1}^N` without a cloud point within eps/2.
    pub uncovered: usize,
    pub cloud: LeafCloud,
}

/// Number of targets `x0 + eps·v`, `v ∈ {−1,0,1}^N`, with no cloud point
/// within `eps/2`. Targets outside the region count as uncovered.
fn uncovered_targets(ex: &Explorer<'_>, x0: &[f64], region: &BoxRegion, eps: f64) -> usize {
    let n = x0.len();
    let total = 3usize.pow(n as u32);
    let mut missing = 0;
    let mut target = vec![0.0; n];
    for code in 0..total {
        let mut c = code;
        for (i, t) in target.iter_mut().enumerate() {
            *t = x0[i] + eps * ((c % 3) as f64 - 1.0);
            c /= 3;
        }
        if !region.contains(&target) || ex.nearest(&target, 0.5 * eps).is_none() {
            missing += 1;
        }
    }
    missing
}

/// Decide whether the leaf through `x0` contains a neighbourhood of `x0`.
///
/// Minimal: the cloud's PCA dimension at `x0` equals the chart dimension
/// and every target of the `eps`-lattice around `x0` is covered; exploration
/// stops as soon as this holds. Not minimal: exploration closed within budget
/// without meeting that. Inconclusive: the budget ran out first.
pub fn minimality_test(
    fields: &[VectorField],
    x0: &[f64],
    region: &BoxRegion,
    eps: f64,
    budget: usize,
) -> Result<MinimalityReport, LeafError> {
    let mut ex = Explorer::new(fields, x0, region, eps, budget)?;
    let n = x0.len();
    loop {
        let more = ex.expand_layer();
        let uncovered = uncovered_targets(&ex, x0, region, eps);
        if uncovered == 0 {
            let view = ex.cloud_view();
            if view.local_dimension(x0) == n {
                let cloud = ex.finish();
                return Ok(MinimalityReport {
                    verdict: MinimalityVerdict::Minimal,
                    uncovered,
                    cloud,
                });
            }
        }
        if !more {
            let verdict = if ex.budget_exhausted() {
                MinimalityVerdict::Inconclusive
            } else {
                MinimalityVerdict::NotMinimal
            };
            let cloud = ex.finish();
            return Ok(MinimalityReport {
                verdict,
                uncovered,
                cloud,
            });
        }
    }
}
