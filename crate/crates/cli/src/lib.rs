//! Configuration-driven experiment runner for scaled Hawkes processes.
//!
//! `run` executes one experiment and writes `report.json`, CSV tables and SVG plots into the
//! output directory; `validate` performs the schema and assumption checks only. Errors carry
//! the exit code of the command-line contract (see [`CliError::exit_code`]).

pub mod config;
pub mod error;
pub mod experiments;
pub mod svg;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use hawkes_core::deviations::tail::write_tail_csv;
use hawkes_core::model::{audit_assumptions, Assumption, ModelAudit};
use hawkes_core::ExperimentReport;

pub use config::{ExperimentConfig, CONFIG_SCHEMA_VERSION};
pub use error::CliError;

use config::OutputFormat;
use experiments::{execute, Model, Outcome};

/// Environment variable overriding `output.directory`.
pub const ENV_OUTPUT_DIR: &str = "HAWKES_OUTPUT_DIR";
/// Environment variable overriding `output.workers`.
pub const ENV_WORKERS: &str = "HAWKES_WORKERS";

/// Settings that take precedence over the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub workers: Option<usize>,
}

impl Overrides {
    pub fn from_env() -> Result<Self, CliError> {
        let output_dir = std::env::var_os(ENV_OUTPUT_DIR).filter(|v| !v.is_empty()).map(PathBuf::from);
        let workers = match std::env::var(ENV_WORKERS) {
            Ok(v) if !v.is_empty() => match v.parse::<usize>() {
                Ok(n) if n > 0 => Some(n),
                _ => return Err(CliError::Schema(format!("{ENV_WORKERS}: expected a positive integer, got {v:?}"))),
            },
            _ => None,
        };
        Ok(Self { output_dir, workers })
    }
}

/// Result of a completed run (whether or not every check passed).
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: ExperimentReport,
    pub directory: PathBuf,
    pub files: Vec<PathBuf>,
}

impl RunOutput {
    /// `Err(ChecksFailed)` naming every failed check, when any failed.
    pub fn into_result(self) -> Result<Self, CliError> {
        if self.report.pass {
            Ok(self)
        } else {
            let failed = self.report.checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect();
            Err(CliError::ChecksFailed(failed))
        }
    }
}

fn audit(cfg: &ExperimentConfig) -> Result<ModelAudit<f64>, CliError> {
    Ok(audit_assumptions(&cfg.model.kernel, &cfg.model.phi, cfg.model.horizon)?)
}

/// Fixed-width table of the assumption audit, marking the assumptions the experiment needs.
pub fn audit_table(audit: &ModelAudit<f64>, required: &[Assumption]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<4} {:<6} {:<9} detail", "id", "holds", "required");
    for a in Assumption::ALL {
        let c = audit.check(a);
        let req = if required.contains(&a) { "yes" } else { "no" };
        let _ = writeln!(s, "{:<4} {:<6} {:<9} {}", a.to_string(), c.holds, req, c.reason);
    }
    let _ = writeln!(
        s,
        "alpha = {}, |h|_L1 = {}, |h|_inf = {}, alpha |h|_L1 = {}, inf phi = {}",
        audit.alpha, audit.h_l1, audit.h_linf, audit.alpha_h_l1, audit.inf_phi
    );
    s
}

fn require(cfg: &ExperimentConfig, audit: &ModelAudit<f64>) -> Result<(), CliError> {
    let required = cfg.experiment.required_assumptions();
    let failed = audit.failed(&required);
    if failed.is_empty() {
        return Ok(());
    }
    let list = failed.iter().map(|a| format!("{a} ({})", audit.check(*a).reason)).collect::<Vec<_>>().join("; ");
    Err(CliError::Assumption(format!(
        "{} experiment requires {}\n{}",
        cfg.experiment.name(),
        list,
        audit_table(audit, &required)
    )))
}

/// Schema and assumption checks without running; returns the audit table followed by `OK`.
pub fn validate(path: &Path) -> Result<String, CliError> {
    let cfg = ExperimentConfig::load(path)?;
    let audit = audit(&cfg)?;
    require(&cfg, &audit)?;
    Ok(format!("{}OK", audit_table(&audit, &cfg.experiment.required_assumptions())))
}

/// Loads, validates and runs the experiment at `path`.
pub fn run(path: &Path, overrides: &Overrides) -> Result<RunOutput, CliError> {
    run_config(&ExperimentConfig::load(path)?, overrides)
}

/// Runs an already parsed configuration. Fails only on schema, assumption or runtime errors;
/// failed checks are reported through [`RunOutput::report`].
pub fn run_config(cfg: &ExperimentConfig, overrides: &Overrides) -> Result<RunOutput, CliError> {
    cfg.validate()?;
    let audit = audit(cfg)?;
    require(cfg, &audit)?;
    let directory = overrides.output_dir.clone().unwrap_or_else(|| cfg.output.directory.clone());
    let workers = overrides.workers.or(cfg.output.workers);
    let inputs = serde_json::to_value(cfg)?;

    let model = Model {
        kernel: &cfg.model.kernel,
        phi: &cfg.model.phi,
        horizon: cfg.model.horizon,
        audit: &audit,
        seed: cfg.output.seed,
    };
    let started = Instant::now();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Runtime(format!("cannot start worker pool: {e}")))?;
    let mut outcome = pool.install(|| execute(&model, &cfg.experiment, inputs))?;
    outcome.report.wall_time_secs = started.elapsed().as_secs_f64();

    let files = write_outputs(&outcome, &directory, cfg)?;
    Ok(RunOutput { report: outcome.report, directory, files })
}

fn write_outputs(outcome: &Outcome, dir: &Path, cfg: &ExperimentConfig) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Runtime(format!("cannot create output directory {}: {e}", dir.display())))?;
    let mut files = Vec::new();
    let report = dir.join("report.json");
    outcome.report.write_json(&report)?;
    files.push(report);
    if cfg.output.formats.contains(&OutputFormat::Csv) {
        for t in &outcome.tables {
            t.write(dir)?;
            files.push(dir.join(format!("{}.csv", t.name)));
        }
        if !outcome.tail_estimates.is_empty() {
            let p = dir.join("tail.csv");
            write_tail_csv(&outcome.tail_estimates, &p)?;
            files.push(p);
        }
    }
    if cfg.output.formats.contains(&OutputFormat::Svg) {
        for (name, plot) in &outcome.plots {
            let p = dir.join(format!("{name}.svg"));
            std::fs::write(&p, plot.render(cfg.output.svg_timestamp))?;
            files.push(p);
        }
    }
    Ok(files)
}

/// Human-readable list of the kernel and intensity families accepted in `[model]`.
pub fn list_models() -> String {
    [
        "kernels (model.kernel.kind):",
        "  exponential        scale, beta          h(t) = scale * exp(-beta t)",
        "  constant           value                h(t) = value",
        "  polynomial-cutoff  scale, cutoff, power h(t) = scale * (1 - t/cutoff)^power on [0, cutoff)",
        "  table              times, values        piecewise linear, constant after the last knot",
        "intensity functions (model.phi.kind):",
        "  linear             nu, slope            phi(x) = nu + slope * x",
        "  constant           value                phi(x) = value",
        "  soft-saturating    base, amplitude, rate phi(x) = base + amplitude * tanh(rate x)",
        "  table              xs, values           piecewise linear, clamped outside the table",
        "experiments (experiment.kind):",
        "  lln, clt, ldp, mdp, mean-field-equivalence, rate-minimize",
    ]
    .join("\n")
}

pub fn version() -> String {
    format!(
        "hawkes {} (config schema {}, report schema {})",
        env!("CARGO_PKG_VERSION"),
        CONFIG_SCHEMA_VERSION,
        hawkes_core::SCHEMA_VERSION
    )
}
