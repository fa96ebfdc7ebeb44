//! Gaussian fluctuation limit `X` of `X^ε = (Z^ε − Z⁰)/√ε`:
//!
//! `dX_t = a(t)(h(0)X_t + ∫₀ᵗ X_u h'(t−u) du) dt + σ(t) dW_t`, with
//! `a(t) = φ'(∫₀ᵗ h(t−u)dZ⁰_u)` and `σ(t)² = λ⁰(t)`.
//!
//! The Euler recursion `X_{i+1} = A_ii X_i + Σ_{j<i} A_ij X_j + σ_i√Δ ξ_i` is linear in the
//! noise, `X = L(σ√Δ ξ)`, so the covariance is `L diag(σ²Δ) Lᵀ`. Rows of `L` are obtained by
//! an adjoint (backward) sweep; exponential kernels reduce every sweep to O(n).

use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HawkesError, Result};
use crate::grid::{GridPath, UniformGrid};
use crate::limit::excitation;
use crate::model::{audit_assumptions, Assumption, IntensityFn, Kernel};
use crate::real::Real;
use crate::report::{Check, ExperimentReport};
use crate::rng::{stream_rng, streams};
use crate::simulate::{par_replicas, simulate_mean_field, simulate_scaled_hawkes, SimConfig};
use crate::stats::{covariance, ks_critical_one_sample, ks_one_sample, normal_cdf, Summary};

/// Coefficients of the limiting Gaussian Volterra equation on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianLimitModel<T> {
    pub grid: UniformGrid<T>,
    /// `a(t_i) = φ'(∫h dZ⁰)`.
    pub drift: Vec<T>,
    /// `σ(t_i) = √λ⁰(t_i)`.
    pub diffusion: Vec<T>,
    pub h0: T,
    /// `h'(kΔ)`, `k = 0..=n`.
    pub hprime: Vec<T>,
    /// `(c, β)` with `h'(t) = c·e^{−βt}` for exponential kernels.
    pub hprime_exponential: Option<(T, T)>,
}

pub fn build_gaussian_model<T: Real>(
    kernel: &Kernel<T>,
    phi: &IntensityFn<T>,
    z0: &GridPath<T>,
) -> Result<GaussianLimitModel<T>> {
    if z0.derivative.is_none() {
        return Err(HawkesError::InvalidArgument("Z0 must carry its derivative (use solve_limit)".into()));
    }
    if !kernel.has_deriv() {
        return Err(HawkesError::Capability("the kernel has no derivative h' (A2)".into()));
    }
    if phi.deriv(T::zero()).is_none() && phi.second_deriv_bound().is_none() {
        return Err(HawkesError::Capability("phi' is unavailable and phi is not declared twice differentiable".into()));
    }
    let grid = z0.grid;
    let x = excitation(z0, kernel);
    let mut drift = Vec::with_capacity(grid.len());
    let mut diffusion = Vec::with_capacity(grid.len());
    for xi in &x {
        let lam = phi.eval(*xi);
        if !(lam >= T::zero()) {
            return Err(HawkesError::ModelViolation(format!("phi({xi}) = {lam} < 0")));
        }
        drift.push(phi.deriv_or_fd(*xi));
        diffusion.push(lam.sqrt());
    }
    let hprime = (0..grid.len()).map(|k| kernel.deriv(grid.time(k)).expect("checked above")).collect();
    let hprime_exponential = kernel.as_exponential().map(|(s, b)| (-b * s, b));
    Ok(GaussianLimitModel { grid, drift, diffusion, h0: kernel.eval(T::zero()), hprime, hprime_exponential })
}

/// One Euler path; `sink(i, X_i)` is called for every node.
fn euler_path<T: Real, R: Rng>(gm: &GaussianLimitModel<T>, rng: &mut R, mut sink: impl FnMut(usize, T)) {
    let n = gm.grid.steps;
    let dt = gm.grid.dt();
    let sqdt = dt.sqrt();
    let mut xs = vec![T::zero(); n + 1];
    sink(0, T::zero());
    let decay = gm.hprime_exponential.map(|(c, b)| (c, (-b * dt).exp()));
    let mut s = T::zero();
    for i in 0..n {
        let memory = match decay {
            Some((c, q)) => {
                if i > 0 {
                    s = q * (s + xs[i - 1]);
                }
                dt * c * s
            }
            None => {
                let mut acc = T::zero();
                for j in 0..i {
                    acc += xs[j] * gm.hprime[i - j];
                }
                dt * acc
            }
        };
        let xi: f64 = rng.sample(StandardNormal);
        let x = xs[i];
        xs[i + 1] = x + gm.drift[i] * (gm.h0 * x + memory) * dt + gm.diffusion[i] * sqdt * T::lit(xi);
        sink(i + 1, xs[i + 1]);
    }
}

/// `replicas` Euler paths of the Gaussian limit, deterministic in `seed`.
pub fn simulate_gaussian_limit<T: Real>(gm: &GaussianLimitModel<T>, replicas: usize, seed: u64) -> Vec<GridPath<T>> {
    (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, streams::GAUSSIAN_LIMIT, r);
            let mut values = vec![T::zero(); gm.grid.len()];
            euler_path(gm, &mut rng, |i, x| values[i] = x);
            GridPath { grid: gm.grid, values, derivative: None, nondecreasing: false }
        })
        .collect()
}

/// Same paths as [`simulate_gaussian_limit`] but only the values at `indices` are kept
/// (one inner vector per replica).
pub fn sample_gaussian_limit_at<T: Real>(
    gm: &GaussianLimitModel<T>,
    replicas: usize,
    seed: u64,
    indices: &[usize],
) -> Vec<Vec<T>> {
    (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, streams::GAUSSIAN_LIMIT, r);
            let mut out = vec![T::zero(); indices.len()];
            euler_path(gm, &mut rng, |i, x| {
                for (k, &idx) in indices.iter().enumerate() {
                    if idx == i {
                        out[k] = x;
                    }
                }
            });
            out
        })
        .collect()
}

/// Covariance of the discretized limit at selected grid nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceMatrix<T> {
    pub indices: Vec<usize>,
    pub times: Vec<T>,
    /// Row-major `m × m`.
    pub values: Vec<T>,
}

impl<T: Real> CovarianceMatrix<T> {
    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[i * self.dim() + j]
    }

    pub fn trace(&self) -> T {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    /// Long format `s,t,covariance`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["s", "t", "covariance"])?;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                w.write_record([self.times[i].to_string(), self.times[j].to_string(), self.get(i, j).to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// `ℓ_r[i] = L_{r,i} σ_i √Δ` for `i < r`, so that `C(r, s) = ⟨ℓ_r, ℓ_s⟩`.
fn scaled_noise_row<T: Real>(gm: &GaussianLimitModel<T>, r: usize) -> Vec<T> {
    let n = gm.grid.steps;
    let dt = gm.grid.dt();
    let dt2 = dt * dt;
    let mut row = vec![T::zero(); n];
    if r == 0 {
        return row;
    }
    // p[k] = ∂X_r/∂X_k
    let mut p = vec![T::zero(); r + 1];
    p[r] = T::one();
    match gm.hprime_exponential {
        Some((c, beta)) => {
            let q = (-beta * dt).exp();
            // acc = Σ_{i=k+1}^{r−1} p[i+1] a_i q^{i−k}
            let mut acc = T::zero();
            for k in (1..r).rev() {
                let diag = T::one() + gm.drift[k] * gm.h0 * dt;
                p[k] = p[k + 1] * diag + dt2 * c * acc;
                acc = q * (p[k + 1] * gm.drift[k] + acc);
            }
        }
        None => {
            for k in (1..r).rev() {
                let mut v = p[k + 1] * (T::one() + gm.drift[k] * gm.h0 * dt);
                for i in k + 1..r {
                    v += p[i + 1] * gm.drift[i] * dt2 * gm.hprime[i - k];
                }
                p[k] = v;
            }
        }
    }
    let sqdt = dt.sqrt();
    for i in 0..r {
        row[i] = p[i + 1] * gm.diffusion[i] * sqdt;
    }
    row
}

/// Covariance at the listed grid nodes.
pub fn covariance_at<T: Real>(gm: &GaussianLimitModel<T>, indices: &[usize]) -> Result<CovarianceMatrix<T>> {
    if let Some(bad) = indices.iter().find(|&&i| i > gm.grid.steps) {
        return Err(HawkesError::InvalidArgument(format!("node index {bad} is outside the grid")));
    }
    let rows: Vec<Vec<T>> = indices.par_iter().map(|&r| scaled_noise_row(gm, r)).collect();
    let m = indices.len();
    let mut values = vec![T::zero(); m * m];
    for i in 0..m {
        for j in 0..=i {
            let v: T = rows[i].iter().zip(&rows[j]).map(|(a, b)| *a * *b).sum();
            values[i * m + j] = v;
            values[j * m + i] = v;
        }
    }
    Ok(CovarianceMatrix { indices: indices.to_vec(), times: indices.iter().map(|&i| gm.grid.time(i)).collect(), values })
}

/// Full-grid covariance `L diag(σ²Δ) Lᵀ` (O(n³) assembly; use [`covariance_at`] for large grids).
pub fn covariance_by_resolvent<T: Real>(gm: &GaussianLimitModel<T>) -> Result<CovarianceMatrix<T>> {
    let all: Vec<usize> = (0..gm.grid.len()).collect();
    covariance_at(gm, &all)
}

/// How the fluctuation samples are produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FluctuationSource {
    /// Univariate scaled process with this `ε`.
    Scaled(f64),
    /// Mean process of an `N`-node network (`ε = 1/N`).
    MeanField(usize),
}

impl FluctuationSource {
    pub fn epsilon(&self) -> f64 {
        match *self {
            Self::Scaled(e) => e,
            Self::MeanField(n) => 1.0 / n as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CltOptions {
    pub ks_level: f64,
    pub min_replicas: usize,
    /// Bound on `|Var_emp(X_T) − C(T,T)| / C(T,T)` at the smallest `ε`.
    pub max_var_rel_error: Option<f64>,
}

impl Default for CltOptions {
    fn default() -> Self {
        Self { ks_level: 0.01, min_replicas: 1000, max_var_rel_error: Some(0.05) }
    }
}

/// Standardized marginals `X^ε` at the probe nodes, one vector per probe.
pub fn fluctuation_samples<T: Real>(
    kernel: &Kernel<T>,
    phi: &IntensityFn<T>,
    z0: &GridPath<T>,
    source: FluctuationSource,
    probes: &[usize],
    replicas: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let horizon = z0.grid.horizon;
    let eps = source.epsilon();
    let per_replica = par_replicas(replicas, |r| {
        let path = match source {
            FluctuationSource::Scaled(e) => {
                simulate_scaled_hawkes(kernel, phi, &SimConfig::scaled(T::lit(e), horizon).with_seed(seed), r)?
            }
            FluctuationSource::MeanField(n) => {
                simulate_mean_field(kernel, phi, &SimConfig::mean_field(n, horizon).with_seed(seed), r)?.mean_process()
            }
        };
        Ok(probes
            .iter()
            .map(|&i| ((path.z_at(z0.grid.time(i)) - z0.values[i]).as_f64()) / eps.sqrt())
            .collect::<Vec<f64>>())
    })?;
    Ok((0..probes.len()).map(|k| per_replica.iter().map(|row| row[k]).collect()).collect())
}

/// Probe nodes closest to `{T/4, T/2, T}`.
pub fn default_probes<T: Real>(grid: &UniformGrid<T>) -> Vec<usize> {
    let t = grid.horizon;
    vec![grid.nearest_index(t * T::lit(0.25)), grid.nearest_index(t * T::lit(0.5)), grid.steps]
}

/// Empirical check of the fluctuation limit at `{T/4, T/2, T}` for each source.
///
/// Per source it records the one-sample KS statistic of every probe marginal against
/// `Normal(0, C(t,t))`, the relative variance error at `T`, and the covariance error
/// `max |C_emp − C| / C(T,T)` over the probe pairs. Checks: every KS statistic at the smallest
/// `ε` below the critical value, the variance error there within `max_var_rel_error`, and both
/// errors decreasing with `ε`.
pub fn clt_check<T: Real>(
    kernel: &Kernel<T>,
    phi: &IntensityFn<T>,
    z0: &GridPath<T>,
    sources: &[FluctuationSource],
    replicas: usize,
    seed: u64,
    opts: &CltOptions,
) -> Result<ExperimentReport> {
    if replicas < opts.min_replicas {
        return Err(HawkesError::Config(format!(
            "clt_check needs at least {} replicas, got {replicas}",
            opts.min_replicas
        )));
    }
    if sources.is_empty() {
        return Err(HawkesError::Config("clt_check needs at least one epsilon".into()));
    }
    audit_assumptions(kernel, phi, z0.grid.horizon)?.require(&[Assumption::A1, Assumption::A2, Assumption::A4])?;
    let gm = build_gaussian_model(kernel, phi, z0)?;
    let probes = default_probes(&z0.grid);
    let model = covariance_at(&gm, &probes)?;
    let m = probes.len();
    let c_tt = model.get(m - 1, m - 1).as_f64();

    let mut order: Vec<usize> = (0..sources.len()).collect();
    order.sort_by(|&a, &b| sources[b].epsilon().total_cmp(&sources[a].epsilon()));

    let mut report = ExperimentReport::new(
        "clt",
        serde_json::json!({ "sources": sources, "replicas": replicas, "seed": seed, "ks_level": opts.ks_level,
                            "probe_times": model.times.iter().map(|t| t.as_f64()).collect::<Vec<_>>() }),
    );
    let crit = ks_critical_one_sample(replicas, opts.ks_level);
    let mut cov_errors = Vec::new();
    let mut var_errors = Vec::new();
    let mut last_ks = Vec::new();
    for &idx in &order {
        let src = sources[idx];
        let samples = fluctuation_samples(kernel, phi, z0, src, &probes, replicas, seed)?;
        let mut row = std::collections::BTreeMap::new();
        row.insert("epsilon".to_string(), src.epsilon());
        let mut cov_err: f64 = 0.0;
        last_ks.clear();
        for a in 0..m {
            let var = model.get(a, a).as_f64();
            let sd = var.sqrt();
            let ks = ks_one_sample(&samples[a], |x| normal_cdf(x / sd));
            row.insert(format!("ks_{a}"), ks);
            last_ks.push(ks);
            for b in 0..=a {
                let emp = covariance(&samples[a], &samples[b]);
                cov_err = cov_err.max((emp - model.get(a, b).as_f64()).abs() / c_tt);
            }
        }
        let s = Summary::of(&samples[m - 1]);
        row.insert("var_emp_T".into(), s.variance);
        row.insert("var_model_T".into(), c_tt);
        let var_err = (s.variance - c_tt).abs() / c_tt;
        var_errors.push(var_err);
        row.insert("var_rel_error_T".into(), var_err);
        row.insert("var_se_T".into(), s.variance_std_error());
        row.insert("cov_error".into(), cov_err);
        row.insert("ks_critical".into(), crit);
        cov_errors.push(cov_err);
        report.results.push(row);
    }
    for (a, ks) in last_ks.iter().enumerate() {
        report.push_check(Check::below(format!("ks_probe_{a}_smallest_epsilon"), *ks, crit));
    }
    if let Some(bound) = opts.max_var_rel_error {
        report.push_check(Check::at_most("variance_error_smallest_epsilon", *var_errors.last().expect("non-empty"), bound));
    }
    if cov_errors.len() >= 2 {
        report.push_check(Check::decreasing("variance_error_decreasing", &var_errors));
        report.push_check(Check::decreasing("covariance_error_decreasing", &cov_errors));
    }
    Ok(report)
}
