//! One runner per experiment kind. Each returns the report plus the tables and plots to write.

use std::collections::BTreeMap;
use std::path::Path;

use hawkes_core::deviations::optimize::{minimize_rate, ConstraintKind, ConstraintSpec, OptimParams};
use hawkes_core::deviations::rate::{RateFunctional, RateKind};
use hawkes_core::deviations::tail::{tail_probability, TailEstimate, TailMethod, TailRequest};
use hawkes_core::fluctuation::{
    build_gaussian_model, clt_check, covariance_at, default_probes, CltOptions, FluctuationSource,
};
use hawkes_core::limit::{solve_limit, VolterraOptions};
use hawkes_core::model::ModelAudit;
use hawkes_core::rng::{stream_rng, streams};
use hawkes_core::simulate::{
    par_replicas, simulate_mean_field, simulate_scaled_hawkes, step_path, sup_fluctuation, SimConfig,
};
use hawkes_core::stats::{ks_critical_two_sample, ks_two_sample, median, Summary};
use hawkes_core::{Check, ExperimentReport, GridPath, IntensityFn, Kernel};
use rand::Rng;

use crate::config::{
    ConstraintConfig, CltSpec, CrossCheck, DeviationThresholds, ExperimentSpec, LlnSpec, MdpSpec,
    MeanFieldSpec, RateMinimizeSpec,
};
use crate::error::CliError;
use crate::svg::{Plot, Series, Style};

/// Sample paths drawn in the LLN plot.
const PLOTTED_PATHS: usize = 5;
/// Quantiles used to draw empirical distribution functions.
const ECDF_POINTS: usize = 101;

/// A CSV table; every cell is already formatted, so writing is byte-stable.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let mut w = csv::Writer::from_path(dir.join(format!("{}.csv", self.name)))?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Columns are the union of the row keys, in sorted order.
    fn from_results(name: &str, rows: &[BTreeMap<String, f64>]) -> Self {
        let mut keys: Vec<&String> = rows.iter().flat_map(|r| r.keys()).collect();
        keys.sort();
        keys.dedup();
        let mut t = Self { name: name.into(), header: keys.iter().map(|k| k.to_string()).collect(), rows: Vec::new() };
        for r in rows {
            t.push(keys.iter().map(|k| r.get(*k).map(|v| num(*v)).unwrap_or_default()).collect());
        }
        t
    }
}

/// Shortest round-trip decimal form.
pub fn num(v: f64) -> String {
    format!("{v}")
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: ExperimentReport,
    pub tables: Vec<Table>,
    /// Written verbatim in the core tail-estimate CSV format (`tail.csv`).
    pub tail_estimates: Vec<TailEstimate>,
    pub plots: Vec<(String, Plot)>,
}

impl Outcome {
    fn new(report: ExperimentReport) -> Self {
        Self { report, tables: Vec::new(), tail_estimates: Vec::new(), plots: Vec::new() }
    }
}

pub struct Model<'a> {
    pub kernel: &'a Kernel<f64>,
    pub phi: &'a IntensityFn<f64>,
    pub horizon: f64,
    pub audit: &'a ModelAudit<f64>,
    pub seed: u64,
}

pub fn execute(model: &Model<'_>, spec: &ExperimentSpec, inputs: serde_json::Value) -> Result<Outcome, CliError> {
    match spec {
        ExperimentSpec::Lln(s) => lln(model, s, inputs),
        ExperimentSpec::Clt(s) => clt(model, s, inputs),
        ExperimentSpec::Ldp(s) => {
            let x = match (s.threshold, s.threshold_factor) {
                (Some(x), _) => x,
                (None, Some(f)) => f * limit(model, s.grid_steps)?.last(),
                (None, None) => return Err(CliError::Schema("experiment.threshold: missing".into())),
            };
            let d = Deviation {
                kind: RateKind::Ldp,
                epsilons: &s.epsilons,
                x,
                a_exponent: None,
                method: s.method,
                replicas: s.replicas,
                grid_steps: s.grid_steps,
                cross_check: s.cross_check.as_ref(),
                optimizer: &s.optimizer,
                thresholds: &s.thresholds,
            };
            deviation(model, &d, inputs)
        }
        ExperimentSpec::Mdp(s) => deviation(model, &Deviation::mdp(s), inputs),
        ExperimentSpec::MeanFieldEquivalence(s) => mean_field(model, s, inputs),
        ExperimentSpec::RateMinimize(s) => rate_minimize(model, s, inputs),
    }
}

fn limit(model: &Model<'_>, steps: usize) -> Result<GridPath<f64>, CliError> {
    Ok(solve_limit(model.kernel, model.phi, model.horizon, steps, &VolterraOptions::default())?.0)
}

fn descending(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn lln(model: &Model<'_>, s: &LlnSpec, inputs: serde_json::Value) -> Result<Outcome, CliError> {
    let z0 = limit(model, s.grid_steps)?;
    let t = model.horizon;
    let bound = model.phi.eval(0.0) * t * (model.audit.alpha * model.audit.h_linf * t).exp();
    let epsilons = descending(&s.epsilons);
    let mut out = Outcome::new(ExperimentReport::new("lln", inputs));
    let mut table = Table::new(
        "lln",
        &[
            "epsilon",
            "replicas",
            "median_sup_distance",
            "mean_terminal",
            "se_terminal",
            "moment_bound",
            "mean_sup_x2",
            "se_sup_x2",
        ],
    );
    let (mut medians, mut sup_x2) = (Vec::new(), Vec::new());
    let mut plotted = Vec::new();
    for &eps in &epsilons {
        let cfg = SimConfig::scaled(eps, t).with_seed(model.seed);
        let keep = eps == *epsilons.last().unwrap();
        let per: Vec<(f64, f64, Option<GridPath<f64>>)> = par_replicas(s.replicas, |r| {
            let p = simulate_scaled_hawkes(model.kernel, model.phi, &cfg, r)?;
            let shown = (keep && (r as usize) < PLOTTED_PATHS).then(|| step_path(&p, &z0.grid));
            Ok((p.terminal(), sup_fluctuation(&p, &z0), shown))
        })?;
        let terminal: Vec<f64> = per.iter().map(|x| x.0).collect();
        let dist: Vec<f64> = per.iter().map(|x| x.1 * eps.sqrt()).collect();
        let x2: Vec<f64> = per.iter().map(|x| x.1 * x.1).collect();
        plotted.extend(per.into_iter().filter_map(|x| x.2));
        let (st, sx) = (Summary::of(&terminal), Summary::of(&x2));
        let med = median(&dist);
        medians.push(med);
        sup_x2.push(sx.mean);
        let mut row = BTreeMap::new();
        row.insert("epsilon".into(), eps);
        row.insert("median_sup_distance".into(), med);
        row.insert("mean_terminal".into(), st.mean);
        row.insert("se_terminal".into(), st.std_error);
        row.insert("moment_bound".into(), bound);
        row.insert("mean_sup_x2".into(), sx.mean);
        row.insert("se_sup_x2".into(), sx.std_error);
        out.report.results.push(row);
        table.push(vec![
            num(eps),
            s.replicas.to_string(),
            num(med),
            num(st.mean),
            num(st.std_error),
            num(bound),
            num(sx.mean),
            num(sx.std_error),
        ]);
        out.report.push_check(
            Check::at_most(format!("first_moment_bound_eps_{eps}"), st.mean, bound + s.thresholds.moment_se * st.std_error)
                .with_detail(format!("E[Z_T] <= phi(0) T exp(alpha |h|_inf T) + {} SE", s.thresholds.moment_se)),
        );
    }
    if epsilons.len() >= 2 {
        out.report.push_check(Check::decreasing("sup_distance_median_decreasing", &medians));
        let growth = sup_x2.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
        out.report.push_check(
            Check::at_most("sup_x2_growth", growth, s.thresholds.sup_growth_factor)
                .with_detail("largest ratio of E[sup X^2] between adjacent epsilons"),
        );
    }
    out.tables.push(table);

    let z0_series: Vec<(f64, f64)> = z0.grid.times().into_iter().zip(z0.values.iter().copied()).collect();
    let mut paths = Plot::new(
        format!("Z^eps sample paths, eps = {}", num(*epsilons.last().unwrap())),
        "t",
        "Z_t",
    )
    .with(Series::new("Z0", z0_series, Style::Line));
    for (k, p) in plotted.iter().enumerate() {
        let pts = p.grid.times().into_iter().zip(p.values.iter().copied()).collect();
        paths = paths.with(Series::new(format!("replica {k}"), pts, Style::Dashed));
    }
    out.plots.push(("lln_paths".into(), paths));
    let sup = Plot::new("median sup |Z^eps - Z0|", "epsilon", "median sup distance")
        .log_x()
        .with(Series::new("median", epsilons.iter().copied().zip(medians).collect(), Style::Scatter));
    out.plots.push(("lln_sup_distance".into(), sup));
    Ok(out)
}

fn clt(model: &Model<'_>, s: &CltSpec, inputs: serde_json::Value) -> Result<Outcome, CliError> {
    let z0 = limit(model, s.grid_steps)?;
    let mut sources: Vec<FluctuationSource> = s
        .epsilons
        .iter()
        .map(|&e| FluctuationSource::Scaled(e))
        .chain(s.nodes.iter().map(|&n| FluctuationSource::MeanField(n)))
        .collect();
    sources.sort_by(|a, b| b.epsilon().total_cmp(&a.epsilon()));
    let opts = CltOptions {
        ks_level: s.thresholds.ks_level,
        min_replicas: s.thresholds.min_replicas,
        max_var_rel_error: s.thresholds.max_var_rel_error,
    };
    let mut report = clt_check(model.kernel, model.phi, &z0, &sources, s.replicas, model.seed, &opts)?;
    report.inputs = inputs;
    let mut out = Outcome::new(report);
    out.tables.push(Table::from_results("clt", &out.report.results));

    let gm = build_gaussian_model(model.kernel, model.phi, &z0)?;
    let probes = default_probes(&z0.grid);
    let cov = covariance_at(&gm, &probes)?;
    let mut table = Table::new("covariance", &["s", "t", "covariance"]);
    for i in 0..cov.dim() {
        for j in 0..cov.dim() {
            table.push(vec![num(cov.times[i]), num(cov.times[j]), num(cov.get(i, j))]);
        }
    }
    out.tables.push(table);

    let stride = (s.grid_steps / 32).max(1);
    let nodes: Vec<usize> = (0..=s.grid_steps).step_by(stride).collect();
    let diag = covariance_at(&gm, &nodes)?;
    let model_var = (0..diag.dim()).map(|i| (diag.times[i], diag.get(i, i))).collect();
    let mut plot = Plot::new("variance of X_t: model vs empirical", "t", "Var X_t")
        .with(Series::new("model C(t,t)", model_var, Style::Line));
    for row in &out.report.results {
        let (Some(e), Some(v)) = (row.get("epsilon"), row.get("var_emp_T")) else { continue };
        plot = plot.with(Series::new(format!("empirical, eps = {}", num(*e)), vec![(model.horizon, *v)], Style::Scatter));
    }
    out.plots.push(("clt_variance".into(), plot));
    Ok(out)
}

struct Deviation<'a> {
    kind: RateKind,
    epsilons: &'a [f64],
    x: f64,
    a_exponent: Option<f64>,
    method: TailMethod,
    replicas: usize,
    grid_steps: usize,
    cross_check: Option<&'a CrossCheck>,
    optimizer: &'a OptimParams,
    thresholds: &'a DeviationThresholds,
}

impl<'a> Deviation<'a> {
    fn mdp(s: &'a MdpSpec) -> Self {
        Self {
            kind: RateKind::Mdp,
            epsilons: &s.epsilons,
            x: s.threshold,
            a_exponent: Some(s.a_exponent),
            method: s.method,
            replicas: s.replicas,
            grid_steps: s.grid_steps,
            cross_check: s.cross_check.as_ref(),
            optimizer: &s.optimizer,
            thresholds: &s.thresholds,
        }
    }

    fn request(&self, eps: f64, horizon: f64, method: TailMethod, replicas: usize, seed: u64) -> TailRequest {
        let base = match self.a_exponent {
            Some(p) => TailRequest::mdp(self.x, eps, p, horizon, method),
            None => TailRequest::ldp(self.x, eps, horizon, method),
        };
        TailRequest { steps: self.grid_steps, optim: *self.optimizer, ..base.with_replicas(replicas, seed) }
    }
}

fn deviation(model: &Model<'_>, d: &Deviation<'_>, inputs: serde_json::Value) -> Result<Outcome, CliError> {
    let name = match d.kind {
        RateKind::Ldp => "ldp",
        RateKind::Mdp => "mdp",
    };
    let z0 = limit(model, d.grid_steps)?;
    let constraint = ConstraintSpec::endpoint_at_least(d.x, d.kind);
    let (_, inf_rate, _) = minimize_rate(d.kind, &constraint, model.kernel, model.phi, &z0, d.grid_steps, d.optimizer)?;
    let epsilons = descending(d.epsilons);
    let mut out = Outcome::new(ExperimentReport::new(name, inputs));
    let mut table = Table::new(
        name,
        &["epsilon", "a", "method", "estimate", "std_error", "log_scale", "rate_infimum", "gap", "relative_gap"],
    );
    let mut gaps = Vec::new();
    for &eps in &epsilons {
        let est = tail_probability(model.kernel, model.phi, &d.request(eps, model.horizon, d.method, d.replicas, model.seed))?;
        let gap = (est.log_scale + inf_rate).abs();
        let rel = gap / inf_rate;
        gaps.push(gap);
        let mut row = BTreeMap::new();
        row.insert("epsilon".into(), eps);
        row.insert("estimate".into(), est.estimate);
        row.insert("std_error".into(), est.std_error);
        row.insert("log_scale".into(), est.log_scale);
        row.insert("rate_infimum".into(), inf_rate);
        row.insert("gap".into(), gap);
        row.insert("relative_gap".into(), rel);
        table.push(vec![
            num(eps),
            est.a.map(num).unwrap_or_default(),
            est.method.to_string(),
            num(est.estimate),
            num(est.std_error),
            num(est.log_scale),
            num(inf_rate),
            num(gap),
            num(rel),
        ]);
        if let Some(c) = d.cross_check {
            let other = tail_probability(model.kernel, model.phi, &d.request(eps, model.horizon, c.method, c.replicas, model.seed))?;
            let tol = d.thresholds.agreement_se * est.std_error.hypot(other.std_error);
            row.insert("cross_check_estimate".into(), other.estimate);
            row.insert("cross_check_std_error".into(), other.std_error);
            out.report.push_check(
                Check::at_most(format!("cross_check_agreement_eps_{eps}"), (est.estimate - other.estimate).abs(), tol)
                    .with_detail(format!(
                        "|{} - {}| <= {} combined SE",
                        est.method, other.method, d.thresholds.agreement_se
                    )),
            );
            out.tail_estimates.push(est);
            out.tail_estimates.push(other);
        } else {
            out.tail_estimates.push(est);
        }
        out.report.results.push(row);
    }
    let t = d.thresholds;
    if let Some(bound) = t.max_gap {
        out.report.push_check(Check::at_most("max_gap", gaps.iter().copied().fold(0.0, f64::max), bound));
    }
    if let Some(bound) = t.max_final_gap {
        out.report.push_check(Check::at_most("final_gap", *gaps.last().unwrap(), bound));
    }
    if let Some(bound) = t.max_rel_gap {
        let worst = gaps.iter().map(|g| g / inf_rate).fold(0.0, f64::max);
        out.report.push_check(Check::at_most("max_relative_gap", worst, bound));
    }
    if t.gap_decreasing && gaps.len() >= 2 {
        out.report.push_check(Check::decreasing("gap_decreasing", &gaps));
    }
    out.tables.push(table);

    let ylabel = match d.kind {
        RateKind::Ldp => "eps log p",
        RateKind::Mdp => "(eps / a^2) log p",
    };
    let points: Vec<(f64, f64)> = out.tail_estimates.iter().map(|e| (e.epsilon, e.log_scale)).collect();
    let (lo, hi) = (*epsilons.last().unwrap(), epsilons[0]);
    let plot = Plot::new(format!("{name}: scaled log tail vs epsilon"), "epsilon", ylabel)
        .log_x()
        .with(Series::new("estimate", points, Style::Scatter))
        .with(Series::new("-inf rate", vec![(lo, -inf_rate), (hi, -inf_rate)], Style::Dashed));
    out.plots.push((format!("{name}_log_tail"), plot));
    Ok(out)
}

fn ecdf(samples: &[f64]) -> Vec<(f64, f64)> {
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len();
    (0..ECDF_POINTS)
        .map(|k| {
            let i = (k * (n - 1)) / (ECDF_POINTS - 1);
            (xs[i], (i + 1) as f64 / n as f64)
        })
        .collect()
}

fn mean_field(model: &Model<'_>, s: &MeanFieldSpec, inputs: serde_json::Value) -> Result<Outcome, CliError> {
    let t = model.horizon;
    let probes = if s.probe_times.is_empty() { vec![t / 2.0, t] } else { s.probe_times.clone() };
    let mut out = Outcome::new(ExperimentReport::new("mean-field-equivalence", inputs));
    let mut table =
        Table::new("mean_field", &["nodes", "time", "ks", "ks_critical", "mean_network", "mean_scaled"]);
    let crit = ks_critical_two_sample(s.replicas, s.replicas, s.ks_level);
    for (k, &n) in s.nodes.iter().enumerate() {
        let net_cfg = SimConfig::mean_field(n, t).with_seed(model.seed);
        let sc_cfg = SimConfig::scaled(1.0 / n as f64, t).with_seed(model.seed);
        let network = par_replicas(s.replicas, |r| {
            let p = simulate_mean_field(model.kernel, model.phi, &net_cfg, r)?.mean_process();
            Ok(probes.iter().map(|&u| p.z_at(u)).collect::<Vec<f64>>())
        })?;
        let scaled = par_replicas(s.replicas, |r| {
            let p = simulate_scaled_hawkes(model.kernel, model.phi, &sc_cfg, r)?;
            Ok(probes.iter().map(|&u| p.z_at(u)).collect::<Vec<f64>>())
        })?;
        for (j, &u) in probes.iter().enumerate() {
            let a: Vec<f64> = network.iter().map(|v| v[j]).collect();
            let b: Vec<f64> = scaled.iter().map(|v| v[j]).collect();
            let ks = ks_two_sample(&a, &b);
            let (ma, mb) = (Summary::of(&a).mean, Summary::of(&b).mean);
            let mut row = BTreeMap::new();
            row.insert("nodes".into(), n as f64);
            row.insert("time".into(), u);
            row.insert("ks".into(), ks);
            row.insert("ks_critical".into(), crit);
            row.insert("mean_network".into(), ma);
            row.insert("mean_scaled".into(), mb);
            out.report.results.push(row);
            table.push(vec![n.to_string(), num(u), num(ks), num(crit), num(ma), num(mb)]);
            out.report.push_check(Check::below(format!("ks_nodes_{n}_t_{u}"), ks, crit));
            if k == 0 && j + 1 == probes.len() {
                let plot = Plot::new(format!("distribution of Z_t at t = {}, N = {n}", num(u)), "Z_t", "ECDF")
                    .with(Series::new(format!("network mean, N = {n}"), ecdf(&a), Style::Line))
                    .with(Series::new(format!("scaled, eps = 1/{n}"), ecdf(&b), Style::Dashed));
                out.plots.push(("mean_field_ecdf".into(), plot));
            }
        }
    }
    out.tables.push(table);
    Ok(out)
}

/// Random velocity in the domain of the functional: positive for `I`, arbitrary for `J`.
fn random_velocity(kind: RateKind, lambda0: &[f64], seed: u64, sample: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, streams::GRADIENT_PROBES, sample);
    lambda0
        .iter()
        .map(|&l| match kind {
            RateKind::Ldp => l * rng.random_range(-1.0..1.0f64).exp(),
            RateKind::Mdp => rng.random_range(-2.0..2.0),
        })
        .collect()
}

fn rate_minimize(model: &Model<'_>, s: &RateMinimizeSpec, inputs: serde_json::Value) -> Result<Outcome, CliError> {
    let z0 = limit(model, s.grid_steps)?;
    let kind = match s.constraint {
        ConstraintConfig::EndpointEqual { x } => ConstraintKind::EndpointEqual { x },
        ConstraintConfig::EndpointAtLeast { x } => ConstraintKind::EndpointAtLeast { x },
        ConstraintConfig::Tube { radius, reference_scale } => {
            let values = z0.values.iter().map(|v| reference_scale * v).collect();
            ConstraintKind::Tube { reference: GridPath::new(z0.grid, values)?, radius }
        }
    };
    let mut constraint = ConstraintSpec::for_functional(kind, s.functional);
    if let Some(m) = s.monotone {
        constraint.monotone = m;
    }
    let (path, value, rep) =
        minimize_rate(s.functional, &constraint, model.kernel, model.phi, &z0, s.grid_steps, &s.optimizer)?;

    let functional = match s.functional {
        RateKind::Ldp => RateFunctional::ldp(model.kernel, model.phi, z0.grid),
        RateKind::Mdp => RateFunctional::mdp(model.kernel, model.phi, &z0)?,
    };
    let lambda0 = z0.derivative.clone().unwrap_or_default();
    let mut grad = Table::new("gradient_check", &["sample", "relative_error"]);
    let mut worst: f64 = 0.0;
    for k in 0..s.gradient_samples {
        let v = random_velocity(s.functional, &lambda0, model.seed, k as u64);
        let err = functional.gradient_check(&v, s.optimizer.gradient_check_components)?;
        worst = worst.max(err);
        grad.push(vec![k.to_string(), num(err)]);
    }

    let mut out = Outcome::new(ExperimentReport::new("rate-minimize", inputs));
    let mut row = BTreeMap::new();
    row.insert("value".into(), value);
    row.insert("iterations".into(), rep.iterations as f64);
    row.insert("gradient_norm".into(), rep.gradient_norm);
    row.insert("gradient_check_error".into(), rep.gradient_check_error);
    row.insert("constraint_violation".into(), rep.constraint_violation);
    row.insert("max_random_gradient_error".into(), worst);
    out.report.results.push(row);
    if s.gradient_samples > 0 {
        out.report.push_check(
            Check::at_most("gradient_error_random_paths", worst, s.max_gradient_error)
                .with_detail(format!("{} random feasible paths", s.gradient_samples)),
        );
    }
    out.report.push_check(Check::at_most("final_step_norm", rep.gradient_norm, s.optimizer.tol));
    if let ConstraintConfig::Tube { radius, .. } = s.constraint {
        out.report.push_check(Check::at_most("tube_violation", rep.constraint_violation, s.optimizer.tube_tol * radius));
    }

    let mut summary = Table::new(
        "rate_minimize",
        &["functional", "value", "iterations", "gradient_norm", "converged", "gradient_check_error", "best_start", "constraint_violation"],
    );
    summary.push(vec![
        format!("{:?}", s.functional).to_lowercase(),
        num(value),
        rep.iterations.to_string(),
        num(rep.gradient_norm),
        rep.converged.to_string(),
        num(rep.gradient_check_error),
        rep.best_start.to_string(),
        num(rep.constraint_violation),
    ]);
    let mut opt = Table::new("optimal_path", &["t", "eta", "velocity", "z0"]);
    let vel = path.derivative.clone().unwrap_or_default();
    for i in 0..path.grid.len() {
        opt.push(vec![
            num(path.grid.time(i)),
            num(path.values[i]),
            vel.get(i).copied().map(num).unwrap_or_default(),
            num(z0.values[i]),
        ]);
    }
    out.tables.extend([summary, opt, grad]);

    let times = path.grid.times();
    let mut plot = Plot::new(format!("optimal path, value = {value:.6}"), "t", "eta_t")
        .with(Series::new("optimal path", times.iter().copied().zip(path.values.iter().copied()).collect(), Style::Line));
    if s.functional == RateKind::Ldp {
        plot = plot.with(Series::new("Z0", times.iter().copied().zip(z0.values.iter().copied()).collect(), Style::Dashed));
    }
    out.plots.push(("rate_minimize_path".into(), plot));
    Ok(out)
}

