use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{GalleryError, LoadedManifold};
use crate::cr::{integrability_residual, ComplexFunction};
use crate::geometry::{BoxRegion, CoefficientExpr};
use crate::operator::{
    assemble_global_operator, assemble_local_operator, beta_coefficients, cr_identity_check, orthonormalize_frame,
    OperatorP, OrthonormalCRFrame, BETA_RESIDUAL_TOLERANCE,
};
use crate::principle::{
    carleman_ratio, max_modulus_on_cloud, max_principle_check, ucp_demo, CarlemanConfig, ModulusMode, UcpOptions,
    Verdict,
};
use crate::pseudoconcave::{certify_region, signature_test, CertifyOutcome, LatticeGrid, RegionReport, Signature};
use crate::sussmann::{explore_leaf, minimality_test, trapping_test, MinimalityVerdict, TrappingOptions};
use crate::util;

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Half width of the box around the origin used by region checks.
const REGION_HALF: f64 = 0.5;
/// Half width of the box used by leaf-based principle scenarios.
const SCENARIO_HALF: f64 = 0.3;
const GRID_PER_AXIS: usize = 3;
const INTEGRABILITY_TOLERANCE: f64 = 1e-8;
const IDENTITY_SAMPLES: usize = 100;
const TRAPPING_SAMPLES: usize = 12;
const CARLEMAN_TAUS: [f64; 4] = [8.0, 16.0, 32.0, 64.0];
const CARLEMAN_SPACING: f64 = 1.0 / 64.0;
const UCP_SAMPLES: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckId {
    Integrability,
    Signature,
    Certify,
    Beta,
    Identities,
    Leaf,
    Minimality,
    Trapping,
    MaxPrinciple,
    MaxModulus,
    Carleman,
    Ucp,
}

impl CheckId {
    pub const ALL: [CheckId; 12] = [
        CheckId::Integrability,
        CheckId::Signature,
        CheckId::Certify,
        CheckId::Beta,
        CheckId::Identities,
        CheckId::Leaf,
        CheckId::Minimality,
        CheckId::Trapping,
        CheckId::MaxPrinciple,
        CheckId::MaxModulus,
        CheckId::Carleman,
        CheckId::Ucp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckId::Integrability => "integrability",
            CheckId::Signature => "signature",
            CheckId::Certify => "certify",
            CheckId::Beta => "beta",
            CheckId::Identities => "identities",
            CheckId::Leaf => "leaf",
            CheckId::Minimality => "minimality",
            CheckId::Trapping => "trapping",
            CheckId::MaxPrinciple => "max-principle",
            CheckId::MaxModulus => "max-modulus",
            CheckId::Carleman => "carleman",
            CheckId::Ucp => "ucp",
        }
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CheckId {
    type Err = GalleryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CheckId::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| GalleryError::UnknownCheck(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub seed: u64,
    /// Leaf resolution; principle scenarios use `2·eps`.
    pub eps: f64,
    pub tol: f64,
    pub budget: usize,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            seed: 0,
            eps: 0.05,
            tol: 1e-7,
            budget: 50_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckVerdict {
    Pass,
    Fail,
    Feasible,
    Infeasible,
    Inconclusive,
    Minimal,
    NotMinimal,
    Consistent,
    HypothesisNotSatisfied,
    Skipped,
    Error,
}

impl From<Verdict> for CheckVerdict {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Pass => CheckVerdict::Pass,
            Verdict::Fail => CheckVerdict::Fail,
            Verdict::HypothesisNotSatisfied => CheckVerdict::HypothesisNotSatisfied,
            Verdict::Consistent => CheckVerdict::Consistent,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub label: String,
    pub point: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub id: CheckId,
    pub verdict: CheckVerdict,
    /// Declared ground truth the verdict is compared against, if any.
    pub expectation: Option<String>,
    /// `Some(false)` when the verdict contradicts the expectation.
    pub met: Option<bool>,
    pub numbers: BTreeMap<String, f64>,
    pub witnesses: Vec<Witness>,
    pub notes: Vec<String>,
}

impl CheckRecord {
    fn new(id: CheckId) -> Self {
        CheckRecord {
            id,
            verdict: CheckVerdict::Pass,
            expectation: None,
            met: None,
            numbers: BTreeMap::new(),
            witnesses: Vec::new(),
            notes: Vec::new(),
        }
    }

    /// Record a number; non-finite values go to the notes so the JSON stays
    /// round-trippable.
    fn number(&mut self, key: &str, v: f64) {
        if v.is_finite() {
            self.numbers.insert(key.to_string(), v);
        } else {
            self.notes.push(format!("{key} = {v}"));
        }
    }

    fn witness(&mut self, label: impl Into<String>, point: &[f64]) {
        self.witnesses.push(Witness {
            label: label.into(),
            point: point.to_vec(),
        });
    }

    fn expect(&mut self, what: &str, expected: Option<bool>, observed: Option<bool>) {
        if let Some(e) = expected {
            self.expectation = Some(format!("{what} = {e}"));
            self.met = observed.map(|o| o == e);
        }
    }

    fn error(id: CheckId, message: impl fmt::Display) -> Self {
        let mut r = CheckRecord::new(id);
        r.verdict = CheckVerdict::Error;
        r.met = Some(false);
        r.notes.push(message.to_string());
        r
    }

    fn skipped(id: CheckId, why: &str) -> Self {
        let mut r = CheckRecord::new(id);
        r.verdict = CheckVerdict::Skipped;
        r.notes.push(why.to_string());
        r
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub manifold: String,
    /// SHA-256 of the canonical definition JSON.
    pub input_hash: String,
    pub seed: u64,
    pub settings: RunSettings,
    pub checks: Vec<CheckRecord>,
}

impl RunReport {
    /// No check contradicted its expectation or errored.
    pub fn expectations_met(&self) -> bool {
        self.checks.iter().all(|c| c.met != Some(false))
    }

    pub fn check(&self, id: CheckId) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn input_hash(m: &LoadedManifold) -> String {
    hex::encode(Sha256::digest(m.definition.canonical_json().as_bytes()))
}

/// Shared, lazily built data for one manifold.
struct Context<'a> {
    m: &'a LoadedManifold,
    settings: RunSettings,
    region: BoxRegion,
    certificate: Option<RegionReport>,
    operator: Option<Result<(Arc<OrthonormalCRFrame>, OperatorP), String>>,
}

impl<'a> Context<'a> {
    fn origin(&self) -> Vec<f64> {
        vec![0.0; self.m.frame.dim()]
    }

    fn scenario_region(&self) -> BoxRegion {
        BoxRegion::cube(&self.origin(), SCENARIO_HALF)
    }

    fn scenario_eps(&self) -> f64 {
        2.0 * self.settings.eps
    }

    fn certificate(&mut self) -> &RegionReport {
        if self.certificate.is_none() {
            let grid = LatticeGrid::new(self.region.clone(), GRID_PER_AXIS);
            self.certificate = Some(certify_region(&self.m.frame, &grid));
        }
        self.certificate.as_ref().expect("just set")
    }

    fn operator(&mut self) -> Result<(Arc<OrthonormalCRFrame>, OperatorP), String> {
        if self.operator.is_none() {
            let built = self.build_operator();
            self.operator = Some(built);
        }
        self.operator.clone().expect("just set")
    }

    fn build_operator(&mut self) -> Result<(Arc<OrthonormalCRFrame>, OperatorP), String> {
        let report = self.certificate().clone();
        if !report.all_certified {
            return Err("no weak pseudoconcavity certificate on the region".into());
        }
        let oframe = Arc::new(orthonormalize_frame(Arc::clone(&self.m.frame), &report).map_err(|e| e.to_string())?);
        let op = if self.m.partition.is_empty() {
            assemble_local_operator(Arc::clone(&oframe), self.region.clone()).map_err(|e| e.to_string())?
        } else {
            let mut pieces = Vec::new();
            let mut bumps: Vec<CoefficientExpr> = Vec::new();
            for (region, w) in &self.m.partition {
                pieces.push(assemble_local_operator(Arc::clone(&oframe), region.clone()).map_err(|e| e.to_string())?);
                bumps.push(w.clone());
            }
            assemble_global_operator(pieces, bumps).map_err(|e| e.to_string())?
        };
        Ok((oframe, op))
    }
}

/// Run `checks` (in check-id order) on one manifold.
pub fn run_gallery(m: &LoadedManifold, checks: &[CheckId], settings: RunSettings) -> RunReport {
    let mut ids = checks.to_vec();
    ids.sort();
    ids.dedup();
    let mut ctx = Context {
        m,
        settings,
        region: unit_box(m),
        certificate: None,
        operator: None,
    };
    let checks = ids
        .into_iter()
        .map(|id| match id {
            CheckId::Integrability => integrability(&mut ctx),
            CheckId::Signature => signature(&mut ctx),
            CheckId::Certify => certify(&mut ctx),
            CheckId::Beta => beta(&mut ctx),
            CheckId::Identities => identities(&mut ctx),
            CheckId::Leaf => leaf(&mut ctx),
            CheckId::Minimality => minimality(&mut ctx),
            CheckId::Trapping => trapping(&mut ctx),
            CheckId::MaxPrinciple => max_principle(&mut ctx),
            CheckId::MaxModulus => max_modulus(&mut ctx),
            CheckId::Carleman => carleman(&mut ctx),
            CheckId::Ucp => ucp(&mut ctx),
        })
        .collect();
    RunReport {
        schema_version: REPORT_SCHEMA_VERSION,
        tool_version: TOOL_VERSION.to_string(),
        manifold: m.definition.name.clone(),
        input_hash: input_hash(m),
        seed: settings.seed,
        settings,
        checks,
    }
}

fn grid_points(ctx: &Context) -> Vec<Vec<f64>> {
    LatticeGrid::new(ctx.region.clone(), GRID_PER_AXIS).points()
}

fn integrability(ctx: &mut Context) -> CheckRecord {
    let id = CheckId::Integrability;
    let mut r = CheckRecord::new(id);
    let mut worst = (0.0f64, ctx.origin());
    for p in grid_points(ctx) {
        match integrability_residual(&ctx.m.frame, &p) {
            Ok(v) if v > worst.0 => worst = (v, p),
            Ok(_) => {}
            Err(e) => return CheckRecord::error(id, e),
        }
    }
    r.number("max_residual", worst.0);
    let integrable = worst.0 <= INTEGRABILITY_TOLERANCE;
    r.verdict = if integrable { CheckVerdict::Pass } else { CheckVerdict::Fail };
    if !integrable {
        r.witness("largest residual", &worst.1);
    }
    r.expect("integrable", ctx.m.definition.expect.integrable, Some(integrable));
    r
}

fn signature(ctx: &mut Context) -> CheckRecord {
    let id = CheckId::Signature;
    let mut r = CheckRecord::new(id);
    let k = ctx.m.frame.k();
    let (mut zero, mut indefinite, mut fails) = (0, 0, 0);
    for p in grid_points(ctx) {
        match signature_test(&ctx.m.frame, &p, 2 * k + 9) {
            Ok(v) => match v.verdict {
                Signature::AllZero => zero += 1,
                Signature::IndefiniteEverywhere => indefinite += 1,
                Signature::Fails => {
                    if fails == 0 {
                        r.witness("definite Levi form", &p);
                        if let Some(w) = &v.witness {
                            let ev = w.eigenvalues();
                            r.number("witness_min_eigenvalue", ev[0]);
                            r.number("witness_max_eigenvalue", ev[ev.len() - 1]);
                        }
                    }
                    fails += 1;
                }
            },
            Err(e) => return CheckRecord::error(id, e),
        }
    }
    r.number("all_zero", zero as f64);
    r.number("indefinite", indefinite as f64);
    r.number("fails", fails as f64);
    r.verdict = if fails == 0 { CheckVerdict::Pass } else { CheckVerdict::Fail };
    r.expect("weakly_pseudoconcave", ctx.m.definition.expect.weakly_pseudoconcave, Some(fails == 0));
    r
}

fn certify(ctx: &mut Context) -> CheckRecord {
    let mut r = CheckRecord::new(CheckId::Certify);
    let report = ctx.certificate().clone();
    let n = ctx.m.frame.n();
    let (mut max_res, mut min_lambda, mut max_dev) = (0.0f64, f64::INFINITY, 0.0f64);
    let identity = nalgebra::DMatrix::<Complex64>::identity(n, n);
    for p in &report.points {
        match &p.outcome {
            Ok(CertifyOutcome::Certified(c)) => {
                max_res = c.residuals.iter().fold(max_res, |a, v| a.max(v.abs()));
                min_lambda = min_lambda.min(c.lambda_min);
                max_dev = max_dev.max((&c.g - &identity).norm());
            }
            Ok(CertifyOutcome::Infeasible { point, .. }) => {
                if !r.witnesses.iter().any(|w| w.label == "infeasible") {
                    r.witness("infeasible", point);
                }
            }
            Ok(CertifyOutcome::Inconclusive { point, .. }) => r.witness("inconclusive", point),
            Err(e) => r.notes.push(format!("{:?}: {e}", p.point)),
        }
    }
    r.number("grid_points", report.points.len() as f64);
    r.number("certified", report.certified_count() as f64);
    r.number("infeasible", report.infeasible_count() as f64);
    r.number("errors", report.error_count() as f64);
    if report.certified_count() > 0 {
        r.number("max_residual", max_res);
        r.number("min_lambda", min_lambda);
        r.number("max_deviation_from_identity", max_dev);
        r.number("continuity_constant", report.continuity_constant);
    }
    r.notes.push(report.label.to_string());
    let observed = if report.all_certified {
        r.verdict = CheckVerdict::Feasible;
        Some(true)
    } else if report.infeasible_count() > 0 {
        r.verdict = CheckVerdict::Infeasible;
        Some(false)
    } else {
        r.verdict = CheckVerdict::Inconclusive;
        None
    };
    r.expect("weakly_pseudoconcave", ctx.m.definition.expect.weakly_pseudoconcave, observed);
    r
}

fn beta(ctx: &mut Context) -> CheckRecord {
    let id = CheckId::Beta;
    let (oframe, _) = match ctx.operator() {
        Ok(x) => x,
        Err(e) => return CheckRecord::skipped(id, &e),
    };
    let mut r = CheckRecord::new(id);
    let (mut max_res, mut max_beta) = (0.0f64, 0.0f64);
    for p in grid_points(ctx) {
        match beta_coefficients(&oframe, &p) {
            Ok(b) => {
                max_res = max_res.max(b.residual);
                max_beta = b.beta.iter().fold(max_beta, |a, c| a.max(c.norm()));
            }
            Err(e) => return CheckRecord::error(id, e),
        }
    }
    r.number("max_residual", max_res);
    r.number("max_abs_beta", max_beta);
    r.verdict = if max_res <= BETA_RESIDUAL_TOLERANCE {
        CheckVerdict::Pass
    } else {
        CheckVerdict::Fail
    };
    r.met = Some(r.verdict == CheckVerdict::Pass);
    r
}

fn identities(ctx: &mut Context) -> CheckRecord {
    let id = CheckId::Identities;
    let (oframe, op) = match ctx.operator() {
        Ok(x) => x,
        Err(e) => return CheckRecord::skipped(id, &e),
    };
    let mut rng = util::rng(ctx.settings.seed);
    let points: Vec<Vec<f64>> = (0..IDENTITY_SAMPLES).map(|_| util::sample_box(&mut rng, &ctx.region)).collect();
    let mut r = CheckRecord::new(id);
    let (mut e1, mut e2, mut e3, mut min_p) = (0.0f64, 0.0f64, 0.0f64, f64::INFINITY);
    let mut pass = true;
    for u in &ctx.m.cr_functions {
        match cr_identity_check(&op, &oframe, u, &points) {
            Ok(rep) => {
                e1 = e1.max(rep.max_e1);
                e2 = e2.max(rep.max_e2);
                e3 = e3.max(rep.max_e3);
                min_p = min_p.min(rep.min_p_modulus_squared);
                if !rep.pass {
                    pass = false;
                    r.notes.push(format!("{} violates an identity", u.id));
                }
            }
            Err(e) => return CheckRecord::error(id, format!("{}: {e}", u.id)),
        }
    }
    r.number("functions", ctx.m.cr_functions.len() as f64);
    r.number("points", points.len() as f64);
    r.number("max_e1", e1);
    r.number("max_e2", e2);
    r.number("max_e3", e3);
    if !ctx.m.cr_functions.is_empty() {
        r.number("min_p_modulus_squared", min_p);
    }
    r.verdict = if pass { CheckVerdict::Pass } else { CheckVerdict::Fail };
    r.met = Some(pass);
    r
}

fn leaf(ctx: &mut Context) -> CheckRecord {
    let id = CheckId::Leaf;
    let s = ctx.settings;
    let cloud = match explore_leaf(&ctx.m.frame.fields(), &ctx.origin(), &ctx.region, s.eps, s.budget) {
        Ok(c) => c,
        Err(e) => return CheckRecord::error(id, e),
    };
    let mut r = CheckRecord::new(id);
    r.number("points", cloud.len() as f64);
    r.number("dim_estimate", cloud.dim_estimate as f64);
    r.number("lie_rank", cloud.lie_rank as f64);
    r.number("budget_exhausted", if cloud.budget_exhausted { 1.0 } else { 0.0 });
    r.number("self_approach_pairs", cloud.self_approach_pairs as f64);
    r.number("max_graph_distance", cloud.graph_distance.iter().copied().max().unwrap_or(0) as f64);
    if cloud.dim_estimate < cloud.lie_rank {
        r.notes.push("PCA dimension is below the bracket rank".into());
    }
    r
}

fn minimality(ctx: &mut Context) -> CheckRecord {
    let id = CheckId::Minimality;
    let s = ctx.settings;
    let rep = match minimality_test(&ctx.m.frame.fields(), &ctx.origin(), &ctx.region, s.eps, s.budget.max(200_000)) {
        Ok(r) => r,
        Err(e) => return CheckRecord::error(id, e),
    };
    let mut r = CheckRecord::new(id);
    r.number("points", rep.cloud.len() as f64);
    r.number("dim_estimate", rep.cloud.dim_estimate as f64);
    r.number("lie_rank", rep.cloud.lie_rank as f64);
    r.number("uncovered_targets", rep.uncovered as f64);
    let observed = match rep.verdict {
        MinimalityVerdict::Minimal => {
            r.verdict = CheckVerdict::Minimal;
            Some(true)
        }
        MinimalityVerdict::NotMinimal => {
            r.verdict = CheckVerdict::NotMinimal;
            Some(false)
        }
        MinimalityVerdict::Inconclusive => {
            r.verdict = CheckVerdict::Inconclusive;
            None
        }
    };
    r.expect("minimal", ctx.m.definition.expect.minimal, observed);
    r
}

fn trapping(ctx: &mut Context) -> CheckRecord {
    let id = CheckId::Trapping;
    let dim = ctx.m.frame.dim();
    let f = CoefficientExpr::parse(&format!("y{dim}"), dim).expect("coordinate parses");
    let mut rng = util::rng(ctx.settings.seed);
    let inner = BoxRegion::cube(&ctx.origin(), 0.8 * REGION_HALF);
    let samples: Vec<Vec<f64>> = (0..TRAPPING_SAMPLES).map(|_| util::sample_box(&mut rng, &inner)).collect();
    let opts = TrappingOptions {
        region: ctx.region.clone(),
        eps: ctx.settings.eps,
        budget: ctx.settings.budget,
    };
    let rep = match trapping_test(&ctx.m.frame.fields(), &f, 0.0, &samples, &opts) {
        Ok(r) => r,
        Err(e) => return CheckRecord::error(id, e),
    };
    let mut r = CheckRecord::new(id);
    r.notes.push(format!("closed set {{y{dim} <= 0}}"));
    r.number("max_pairing", rep.max_pairing);
    if let Some((p, field)) = &rep.witness {
        r.witness(format!("largest pairing, field {field}"), p);
    }
    r.verdict = match &rep.containment {
        None => CheckVerdict::HypothesisNotSatisfied,
        Some(c) => {
            r.number("containment_starts", c.starts.len() as f64);
            r.number("containment_points", c.points_checked as f64);
            r.number("containment_max_excess", c.max_excess);
            if c.holds {
                CheckVerdict::Pass
            } else {
                if let Some(w) = &c.witness {
                    r.witness("leaves the set", w);
                }
                CheckVerdict::Fail
            }
        }
    };
    r.met = Some(r.verdict != CheckVerdict::Fail);
    r
}

fn worst(verdicts: &[Verdict]) -> CheckVerdict {
    if verdicts.contains(&Verdict::Fail) {
        CheckVerdict::Fail
    } else {
        CheckVerdict::Pass
    }
}

fn max_principle(ctx: &mut Context) -> CheckRecord {
    let id = CheckId::MaxPrinciple;
    let (_, op) = match ctx.operator() {
        Ok(x) => x,
        Err(e) => return CheckRecord::skipped(id, &e),
    };
    let dim = ctx.m.frame.dim();
    let region = ctx.scenario_region();
    let cloud = match explore_leaf(&ctx.m.frame.fields(), &ctx.origin(), &region, ctx.scenario_eps(), 200_000) {
        Ok(c) => c,
        Err(e) => return CheckRecord::error(id, e),
    };
    let mut r = CheckRecord::new(id);
    let mut scenarios: Vec<(String, CoefficientExpr)> = vec![("7".into(), CoefficientExpr::constant(7.0, dim))];
    for u in &ctx.m.cr_functions {
        scenarios.push((format!("Re {}", u.id), u.re.clone()));
    }
    let mut verdicts = Vec::new();
    for (label, u) in &scenarios {
        match max_principle_check(&op, u, &cloud, ctx.settings.tol) {
            Ok(rep) => {
                r.notes.push(format!("{label}: {:?}", rep.verdict));
                if let (Verdict::Fail, Some(w)) = (rep.verdict, &rep.witness) {
                    r.witness(label.clone(), w);
                }
                verdicts.push(rep.verdict);
            }
            Err(e) => return CheckRecord::error(id, format!("{label}: {e}")),
        }
    }
    r.number("cloud_points", cloud.len() as f64);
    r.number("scenarios", scenarios.len() as f64);
    r.verdict = worst(&verdicts);
    r.met = Some(r.verdict == CheckVerdict::Pass);
    r
}

fn max_modulus(ctx: &mut Context) -> CheckRecord {
    let id = CheckId::MaxModulus;
    let region = ctx.scenario_region();
    let eps = ctx.scenario_eps();
    let tol = ctx.settings.tol;
    let report = ctx.certificate().clone();
    if !report.all_certified {
        return CheckRecord::skipped(id, "no weak pseudoconcavity certificate on the region");
    }
    let dim = ctx.m.frame.dim();
    let mut rng = util::rng(ctx.settings.seed);
    let starts = vec![ctx.origin(), util::sample_box(&mut rng, &BoxRegion::cube(&ctx.origin(), 0.2))];
    let mut functions = ctx.m.cr_functions.clone();
    functions.push(ComplexFunction::constant("3+4i", Complex64::new(3.0, 4.0), dim));
    let mut r = CheckRecord::new(id);
    let mut verdicts = Vec::new();
    let (mut consistent, mut passed, mut mismatches) = (0, 0, 0);
    for x0 in &starts {
        let cloud = match explore_leaf(&ctx.m.frame.fields(), x0, &region, eps, 200_000) {
            Ok(c) => c,
            Err(e) => return CheckRecord::error(id, e),
        };
        for u in &functions {
            let mut pair = Vec::new();
            for mode in [ModulusMode::Modulus, ModulusMode::RealPart] {
                match max_modulus_on_cloud(&ctx.m.frame, &report, u, &cloud, mode, tol) {
                    Ok(rep) => {
                        match rep.verdict {
                            Verdict::Consistent => consistent += 1,
                            Verdict::Pass => passed += 1,
                            Verdict::Fail => {
                                if let Some(w) = &rep.witness {
                                    r.witness(format!("{} {:?}", u.id, mode), w);
                                }
                            }
                            Verdict::HypothesisNotSatisfied => {}
                        }
                        pair.push(rep.verdict);
                        verdicts.push(rep.verdict);
                    }
                    Err(e) => return CheckRecord::error(id, format!("{}: {e}", u.id)),
                }
            }
            if pair[0] != pair[1] {
                mismatches += 1;
                r.notes.push(format!("{} from {x0:?}: modulus {:?}, real part {:?}", u.id, pair[0], pair[1]));
            }
        }
    }
    r.number("scenarios", verdicts.len() as f64);
    r.number("boundary_maxima", consistent as f64);
    r.number("interior_constant", passed as f64);
    r.number("mode_mismatches", mismatches as f64);
    r.verdict = if mismatches > 0 { CheckVerdict::Fail } else { worst(&verdicts) };
    r.met = Some(r.verdict == CheckVerdict::Pass);
    r
}

/// Product bumps in the first two coordinates.
fn carleman_bumps(dim: usize) -> Vec<ComplexFunction> {
    [(0.0, 0.0, 0.3), (0.15, 0.1, 0.2), (-0.2, -0.15, 0.25), (0.3, -0.25, 0.15), (-0.1, 0.3, 0.12)]
        .iter()
        .enumerate()
        .map(|(i, (cx, cy, rad))| {
            let re = format!("bump((y1 - {cx})/{rad})*bump((y2 - {cy})/{rad})");
            ComplexFunction::parse(&format!("bump{i}"), &re, "0", dim).expect("bump parses")
        })
        .collect()
}

/// Carleman configuration used by the `carleman` check: the `(y1, y2)` slice
/// of the unit box through the origin, `phi = y1`, `A = 1`.
pub fn carleman_scenario(m: &LoadedManifold) -> (CarlemanConfig, Vec<ComplexFunction>) {
    let dim = m.frame.dim();
    let mut lo = vec![0.0; dim];
    let mut hi = vec![0.0; dim];
    lo[..2].copy_from_slice(&[-REGION_HALF; 2]);
    hi[..2].copy_from_slice(&[REGION_HALF; 2]);
    let cfg = CarlemanConfig {
        region: BoxRegion { lo, hi },
        x0: vec![0.0; dim],
        phi: CoefficientExpr::parse("y1", dim).expect("coordinate parses"),
        a: 1.0,
        tau_grid: CARLEMAN_TAUS.to_vec(),
        spacing: CARLEMAN_SPACING,
    };
    (cfg, carleman_bumps(dim))
}

/// Box around the origin used by region checks and the `leaf` check.
pub fn unit_box(m: &LoadedManifold) -> BoxRegion {
    BoxRegion::cube(&vec![0.0; m.frame.dim()], REGION_HALF)
}

fn carleman(ctx: &mut Context) -> CheckRecord {
    let id = CheckId::Carleman;
    let (cfg, bumps) = carleman_scenario(ctx.m);
    let table = match carleman_ratio(&ctx.m.frame, &cfg, &bumps) {
        Ok(t) => t,
        Err(e) => return CheckRecord::error(id, e),
    };
    let mut r = CheckRecord::new(id);
    r.notes.push("phi = y1, A = 1, slice y3.. = 0, tau in {8, 16, 32, 64}, spacing 1/64".into());
    r.number("c_emp", table.c_emp);
    r.number("max_growth", table.max_growth);
    r.number("nodes", table.nodes as f64);
    for row in &table.rows {
        r.number(&format!("R[{}][{}]", row.function, row.tau), row.ratio);
    }
    r.verdict = if table.bounded() {
        r.notes.push("consistent with a uniform bound".into());
        CheckVerdict::Pass
    } else {
        CheckVerdict::Fail
    };
    r.met = Some(r.verdict == CheckVerdict::Pass);
    r
}

fn ucp(ctx: &mut Context) -> CheckRecord {
    let id = CheckId::Ucp;
    let Some(u) = ctx.m.cr_functions.last() else {
        return CheckRecord::skipped(id, "no CR functions declared");
    };
    let origin = ctx.origin();
    let opts = UcpOptions {
        eps: ctx.scenario_eps(),
        budget: 200_000,
        tol: ctx.settings.tol,
        samples: UCP_SAMPLES,
        seed: ctx.settings.seed,
    };
    let rep = match ucp_demo(
        &ctx.m.frame,
        u,
        &origin,
        &BoxRegion::cube(&origin, 0.1),
        &ctx.scenario_region(),
        &opts,
    ) {
        Ok(r) => r,
        Err(e) => return CheckRecord::error(id, format!("{}: {e}", u.id)),
    };
    let mut r = CheckRecord::new(id);
    r.notes.push(format!("function {}", u.id));
    r.notes.extend(rep.report.notes.iter().cloned());
    r.number("vanishing_patch", if rep.vanishing_patch { 1.0 } else { 0.0 });
    r.number("patch_max", rep.patch_max);
    r.number("cloud_max", rep.cloud_max);
    r.number("support_samples", rep.support_samples as f64);
    r.number("support_failures", rep.support_failures as f64);
    r.number("complement_samples", rep.complement_samples as f64);
    r.number("complement_failures", rep.complement_failures as f64);
    if let Some(w) = &rep.report.witness {
        r.witness("propagation failure", w);
    }
    r.verdict = rep.report.verdict.into();
    r.met = Some(r.verdict == CheckVerdict::Pass);
    r
}
