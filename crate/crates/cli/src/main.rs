use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crlab_core::cr::{characteristic_basis, levi_matrix};
use crlab_core::gallery::{
    carleman_scenario, resolve, run_gallery, unit_box, CheckId, LoadedManifold, RunReport, RunSettings,
};
use crlab_core::principle::carleman_ratio;
use crlab_core::pseudoconcave::{certify_region, classify, CertifyOutcome, LatticeGrid, Signature};
use crlab_core::sussmann::explore_leaf;

const EXIT_MET: u8 = 0;
const EXIT_CONTRADICTION: u8 = 1;
const EXIT_INVALID: u8 = 2;

#[derive(Parser)]
#[command(name = "crlab", version, about = "Checks for almost CR structures given in coordinates")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Leaf exploration resolution.
    #[arg(long, global = true, default_value_t = 0.05)]
    eps: f64,
    /// Tolerance for constancy comparisons.
    #[arg(long, global = true, default_value_t = 1e-7)]
    tol: f64,
    /// Write the JSON output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Target {
    /// Gallery name (heisenberg, quadric11, leviflat) or path to a definition file.
    manifold: String,
}

#[derive(Subcommand)]
enum Command {
    /// Formal integrability residual on the unit-box grid.
    CheckIntegrability(Target),
    /// Levi matrices for a basis of characteristic covectors at one point.
    Levi {
        #[command(flatten)]
        target: Target,
        /// Comma-separated coordinates; defaults to the origin.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        point: Option<Vec<f64>>,
    },
    /// Metric certificates on a lattice of the unit box.
    Certify {
        #[command(flatten)]
        target: Target,
        /// Lattice nodes per axis.
        #[arg(long, default_value_t = 3)]
        per_axis: usize,
        /// Also write every grid node's outcome as JSON.
        #[arg(long)]
        grid: Option<PathBuf>,
    },
    /// Leaf through the origin and the minimality verdict.
    Leaf {
        #[command(flatten)]
        target: Target,
        /// Write the leaf cloud as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Drift coefficients and the CR identities of the operator.
    OperatorCheck(Target),
    /// Constancy of subsolutions with an interior maximum.
    MaxPrinciple(Target),
    /// Location of the maximum of |u| and Re u over leaves.
    MaxModulus(Target),
    /// Empirical Carleman ratios.
    Carleman {
        #[command(flatten)]
        target: Target,
        /// Write the ratio table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Unique continuation along leaves.
    Ucp(Target),
    /// Run a set of checks (all by default) on one or more manifolds.
    Report {
        #[arg(required = true)]
        manifolds: Vec<String>,
        /// Comma-separated check ids.
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<String>>,
    },
}

#[derive(Debug)]
enum Failure {
    Invalid(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Invalid(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::from(EXIT_MET),
        Ok(false) => ExitCode::from(EXIT_CONTRADICTION),
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INVALID)
        }
    }
}

fn settings(cli: &Cli) -> Result<RunSettings, Failure> {
    if !(cli.eps > 0.0 && cli.eps.is_finite()) {
        return Err(Failure::Invalid(format!("--eps must be positive, got {}", cli.eps)));
    }
    if !(cli.tol >= 0.0 && cli.tol.is_finite()) {
        return Err(Failure::Invalid(format!("--tol must be nonnegative, got {}", cli.tol)));
    }
    Ok(RunSettings {
        seed: cli.seed,
        eps: cli.eps,
        tol: cli.tol,
        ..RunSettings::default()
    })
}

fn emit<T: Serialize>(out: Option<&Path>, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => std::fs::write(path, text + "\n").map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{text}").and_then(|_| stdout.flush()) {
                Ok(()) => {}
                // A closed pipe (`crlab ... | head`) is not an error.
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                Err(e) => return Err(Failure::Invalid(format!("stdout: {e}"))),
            }
        }
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

/// Run `checks` on one manifold, print the report and return whether its
/// expectations were met.
fn report(cli: &Cli, m: &LoadedManifold, checks: &[CheckId]) -> Result<bool, Failure> {
    let r = run_gallery(m, checks, settings(cli)?);
    emit(cli.out.as_deref(), &r)?;
    Ok(r.expectations_met())
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    match &cli.command {
        Command::CheckIntegrability(t) => report(cli, &resolve(&t.manifold)?, &[CheckId::Integrability]),
        Command::Levi { target, point } => levi(cli, &resolve(&target.manifold)?, point.as_deref()),
        Command::Certify { target, per_axis, grid } => {
            let m = resolve(&target.manifold)?;
            if let Some(path) = grid {
                write_grid(&m, *per_axis, path)?;
            }
            report(cli, &m, &[CheckId::Certify])
        }
        Command::Leaf { target, csv } => {
            let m = resolve(&target.manifold)?;
            let s = settings(cli)?;
            if let Some(path) = csv {
                let origin = vec![0.0; m.frame.dim()];
                let cloud = explore_leaf(&m.frame.fields(), &origin, &unit_box(&m), s.eps, s.budget)?;
                cloud.write_csv(create(path)?)?;
            }
            report(cli, &m, &[CheckId::Leaf, CheckId::Minimality])
        }
        Command::OperatorCheck(t) => report(cli, &resolve(&t.manifold)?, &[CheckId::Beta, CheckId::Identities]),
        Command::MaxPrinciple(t) => report(cli, &resolve(&t.manifold)?, &[CheckId::MaxPrinciple]),
        Command::MaxModulus(t) => report(cli, &resolve(&t.manifold)?, &[CheckId::MaxModulus]),
        Command::Carleman { target, csv } => {
            let m = resolve(&target.manifold)?;
            if let Some(path) = csv {
                let (cfg, bumps) = carleman_scenario(&m);
                carleman_ratio(&m.frame, &cfg, &bumps)?.write_csv(create(path)?)?;
            }
            report(cli, &m, &[CheckId::Carleman])
        }
        Command::Ucp(t) => report(cli, &resolve(&t.manifold)?, &[CheckId::Ucp]),
        Command::Report { manifolds, checks } => {
            let ids = match checks {
                Some(names) => names.iter().map(|n| n.parse()).collect::<Result<Vec<CheckId>, _>>()?,
                None => CheckId::ALL.to_vec(),
            };
            let loaded = manifolds.iter().map(|n| resolve(n)).collect::<Result<Vec<_>, _>>()?;
            let s = settings(cli)?;
            let reports: Vec<RunReport> = loaded.iter().map(|m| run_gallery(m, &ids, s)).collect();
            let met = reports.iter().all(RunReport::expectations_met);
            match reports.as_slice() {
                [single] => emit(cli.out.as_deref(), single)?,
                _ => emit(cli.out.as_deref(), &reports)?,
            }
            Ok(met)
        }
    }
}

#[derive(Serialize)]
struct LeviEntry {
    xi: Vec<f64>,
    /// Rows of `A` as `[re, im]` pairs.
    matrix: Vec<Vec<[f64; 2]>>,
    eigenvalues: Vec<f64>,
    signature: Signature,
}

#[derive(Serialize)]
struct LeviOutput {
    manifold: String,
    point: Vec<f64>,
    forms: Vec<LeviEntry>,
}

fn levi(cli: &Cli, m: &LoadedManifold, point: Option<&[f64]>) -> Result<bool, Failure> {
    let dim = m.frame.dim();
    let p = point.map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; dim]);
    if p.len() != dim {
        return Err(Failure::Invalid(format!("--point needs {dim} coordinates, got {}", p.len())));
    }
    let basis = characteristic_basis(&m.frame, &p)?;
    let mut forms = Vec::new();
    for xi in &basis.xi {
        let l = levi_matrix(&m.frame, &p, xi)?;
        let matrix = (0..l.a.nrows())
            .map(|i| (0..l.a.ncols()).map(|j| [l.a[(i, j)].re, l.a[(i, j)].im]).collect())
            .collect();
        forms.push(LeviEntry {
            xi: xi.clone(),
            matrix,
            eigenvalues: l.eigenvalues(),
            signature: classify(&l),
        });
    }
    emit(
        cli.out.as_deref(),
        &LeviOutput {
            manifold: m.definition.name.clone(),
            point: p,
            forms,
        },
    )?;
    Ok(true)
}

#[derive(Serialize)]
struct GridNode {
    point: Vec<f64>,
    outcome: &'static str,
    /// Rows of `G` as `[re, im]` pairs when certified.
    #[serde(skip_serializing_if = "Option::is_none")]
    gram: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct GridOutput {
    manifold: String,
    label: &'static str,
    per_axis: usize,
    all_certified: bool,
    continuity_constant: f64,
    nodes: Vec<GridNode>,
}

fn write_grid(m: &LoadedManifold, per_axis: usize, path: &Path) -> Result<(), Failure> {
    if per_axis == 0 {
        return Err(Failure::Invalid("--per-axis must be at least 1".into()));
    }
    let report = certify_region(&m.frame, &LatticeGrid::new(unit_box(m), per_axis));
    let nodes = report
        .points
        .iter()
        .map(|rp| {
            let mut node = GridNode {
                point: rp.point.clone(),
                outcome: "error",
                gram: None,
                lambda_min: None,
                max_residual: None,
                error: None,
            };
            match &rp.outcome {
                Ok(CertifyOutcome::Certified(c)) => {
                    node.outcome = "certified";
                    node.gram = Some(
                        (0..c.g.nrows())
                            .map(|i| (0..c.g.ncols()).map(|j| [c.g[(i, j)].re, c.g[(i, j)].im]).collect())
                            .collect(),
                    );
                    node.lambda_min = Some(c.lambda_min);
                    node.max_residual = Some(c.residuals.iter().fold(0.0f64, |a, r| a.max(r.abs())));
                }
                Ok(CertifyOutcome::Infeasible { .. }) => node.outcome = "infeasible",
                Ok(CertifyOutcome::Inconclusive { .. }) => node.outcome = "inconclusive",
                Err(e) => node.error = Some(e.to_string()),
            }
            node
        })
        .collect();
    let out = GridOutput {
        manifold: m.definition.name.clone(),
        label: report.label,
        per_axis,
        all_certified: report.all_certified,
        continuity_constant: report.continuity_constant,
        nodes,
    };
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, &out)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}
