//! Probabilities of endpoint deviations `P(Z^ε_T ≥ x)` (large) and
//! `P((Z^ε_T − Z⁰_T)/a(ε) ≥ x)` (moderate, `a(ε) = ε^p`).

use std::path::Path;

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use super::optimize::{minimize_rate, ConstraintSpec, OptimParams};
use super::rate::RateKind;
use crate::error::{HawkesError, Result};
use crate::grid::GridPath;
use crate::limit::{solve_limit, VolterraOptions};
use crate::model::{audit_assumptions, Assumption, IntensityFn, Kernel};
use crate::real::Real;
use crate::rng::{stream_rng, streams};
use crate::simulate::{compensator, par_replicas, simulate_scaled_hawkes, EventPath, Excitation, PieceRule, SimConfig};
use crate::stats::poisson_log_tail;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailMethod {
    PlainMc,
    ImportanceSampling,
    /// Direct Poisson tail summation; needs an unexcited model (`φ` constant or `h ≡ 0`).
    ExactPoisson,
}

impl std::fmt::Display for TailMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::PlainMc => "plain-mc",
            Self::ImportanceSampling => "importance-sampling",
            Self::ExactPoisson => "exact-poisson",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailRequest {
    pub kind: RateKind,
    /// Endpoint threshold `x`.
    pub x: f64,
    pub epsilon: f64,
    pub horizon: f64,
    /// `p` in `a(ε) = ε^p`; required for moderate deviations, `0 < p < ½`.
    #[serde(default)]
    pub a_exponent: Option<f64>,
    pub method: TailMethod,
    #[serde(default)]
    pub replicas: usize,
    #[serde(default)]
    pub seed: u64,
    /// Grid of the optimal path driving the importance-sampling proposal.
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// Lower bound on the proposal velocity (in units of `Z`).
    #[serde(default = "default_floor")]
    pub proposal_floor: f64,
    #[serde(default)]
    pub optim: OptimParams,
}

fn default_steps() -> usize {
    256
}

fn default_floor() -> f64 {
    1e-3
}

impl TailRequest {
    pub fn ldp(x: f64, epsilon: f64, horizon: f64, method: TailMethod) -> Self {
        Self {
            kind: RateKind::Ldp,
            x,
            epsilon,
            horizon,
            a_exponent: None,
            method,
            replicas: 0,
            seed: 0,
            steps: default_steps(),
            proposal_floor: default_floor(),
            optim: OptimParams::default(),
        }
    }

    pub fn mdp(x: f64, epsilon: f64, a_exponent: f64, horizon: f64, method: TailMethod) -> Self {
        Self { kind: RateKind::Mdp, a_exponent: Some(a_exponent), ..Self::ldp(x, epsilon, horizon, method) }
    }

    pub fn with_replicas(mut self, replicas: usize, seed: u64) -> Self {
        self.replicas = replicas;
        self.seed = seed;
        self
    }

    /// `a(ε)`, or `None` for large deviations.
    pub fn a(&self) -> Option<f64> {
        self.a_exponent.map(|p| self.epsilon.powf(p))
    }

    /// Factor turning `ln p` into the rate scale: `ε` or `ε/a(ε)²`.
    pub fn log_scale_factor(&self) -> f64 {
        match self.a() {
            Some(a) if self.kind == RateKind::Mdp => self.epsilon / (a * a),
            _ => self.epsilon,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(HawkesError::InvalidArgument(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(HawkesError::InvalidArgument(format!("horizon must be > 0, got {}", self.horizon)));
        }
        if !self.x.is_finite() {
            return Err(HawkesError::InvalidArgument("threshold must be finite".into()));
        }
        if self.kind == RateKind::Mdp {
            match self.a_exponent {
                None => return Err(HawkesError::InvalidArgument("moderate deviations need a_exponent".into())),
                Some(p) if !(p > 0.0 && p < 0.5) => {
                    return Err(HawkesError::InvalidArgument(format!(
                        "a(eps) = eps^p needs 0 < p < 1/2 so that a -> 0 and eps/a^2 -> 0, got p = {p}"
                    )))
                }
                _ => {}
            }
        }
        if self.method != TailMethod::ExactPoisson && self.replicas == 0 {
            return Err(HawkesError::InvalidArgument("Monte Carlo methods need replicas >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub schema_version: u32,
    pub kind: RateKind,
    pub epsilon: f64,
    pub a: Option<f64>,
    pub event: String,
    pub threshold: f64,
    pub method: TailMethod,
    pub replicas: usize,
    pub estimate: f64,
    pub std_error: f64,
    /// `ln p̂`, kept separately so that tiny exact probabilities keep full precision.
    pub log_estimate: f64,
    /// `ε·ln p̂` or `(ε/a²)·ln p̂`.
    pub log_scale: f64,
    pub hits: Option<usize>,
    /// `Var(W)/E[W]²` of the importance weights.
    pub weight_relative_variance: Option<f64>,
    /// Minimal rate over the event, when it was computed (importance sampling).
    pub rate_infimum: Option<f64>,
    pub warnings: Vec<String>,
}

impl TailEstimate {
    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}

/// One row per estimate: `kind,epsilon,a,threshold,method,replicas,estimate,std_error,log_estimate,log_scale`.
pub fn write_tail_csv(estimates: &[TailEstimate], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "kind", "epsilon", "a", "threshold", "method", "replicas", "estimate", "std_error", "log_estimate", "log_scale",
    ])?;
    for e in estimates {
        let kind = match e.kind {
            RateKind::Ldp => "ldp",
            RateKind::Mdp => "mdp",
        };
        w.write_record([
            kind.to_string(),
            e.epsilon.to_string(),
            e.a.map(|a| a.to_string()).unwrap_or_default(),
            e.threshold.to_string(),
            e.method.to_string(),
            e.replicas.to_string(),
            e.estimate.to_string(),
            e.std_error.to_string(),
            e.log_estimate.to_string(),
            e.log_scale.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Event indicator on the terminal value, evaluated exactly as the estimators do.
struct Event<T> {
    epsilon: T,
    z0_terminal: T,
    a: Option<T>,
    x: T,
}

impl<T: Real> Event<T> {
    fn hit(&self, count: usize) -> bool {
        let z = self.epsilon * T::from_usize_lossy(count);
        match self.a {
            None => z >= self.x,
            Some(a) => (z - self.z0_terminal) / a >= self.x,
        }
    }

    /// Smallest count in the event.
    fn min_count(&self) -> u64 {
        let guess = match self.a {
            None => self.x / self.epsilon,
            Some(a) => (self.z0_terminal + a * self.x) / self.epsilon,
        };
        let mut k = guess.as_f64().floor().max(0.0) as u64;
        k = k.saturating_sub(2);
        while !self.hit(k as usize) {
            k += 1;
        }
        k
    }

    fn describe(&self) -> String {
        match self.a {
            None => format!("Z_T >= {}", self.x),
            Some(a) => format!("(Z_T - Z0_T)/{a} >= {}", self.x),
        }
    }
}

/// Estimates the endpoint tail probability of `req`.
pub fn tail_probability<T: Real>(kernel: &Kernel<T>, phi: &IntensityFn<T>, req: &TailRequest) -> Result<TailEstimate> {
    req.validate()?;
    let horizon = T::lit(req.horizon);
    audit_assumptions(kernel, phi, horizon)?.require(&[Assumption::A1, Assumption::A3, Assumption::A5])?;
    let epsilon = T::lit(req.epsilon);
    let (z0, _) = solve_limit(kernel, phi, horizon, req.steps.max(2), &VolterraOptions::default())?;
    let event = Event { epsilon, z0_terminal: z0.last(), a: req.a().map(T::lit), x: T::lit(req.x) };
    let mut est = TailEstimate {
        schema_version: crate::SCHEMA_VERSION,
        kind: req.kind,
        epsilon: req.epsilon,
        a: req.a(),
        event: event.describe(),
        threshold: req.x,
        method: req.method,
        replicas: if req.method == TailMethod::ExactPoisson { 0 } else { req.replicas },
        estimate: 0.0,
        std_error: 0.0,
        log_estimate: f64::NEG_INFINITY,
        log_scale: f64::NEG_INFINITY,
        hits: None,
        weight_relative_variance: None,
        rate_infimum: None,
        warnings: Vec::new(),
    };
    match req.method {
        TailMethod::ExactPoisson => {
            if !(phi.is_constant() || kernel.is_zero()) {
                return Err(HawkesError::Capability(
                    "the exact Poisson tail needs a constant phi or a zero kernel".into(),
                ));
            }
            let mean = phi.eval(T::zero()).as_f64() * req.horizon / req.epsilon;
            est.log_estimate = poisson_log_tail(mean, event.min_count());
            est.estimate = est.log_estimate.exp();
        }
        TailMethod::PlainMc => {
            let cfg = SimConfig::scaled(epsilon, horizon).with_seed(req.seed);
            let hits: usize = par_replicas(req.replicas, |r| {
                simulate_scaled_hawkes(kernel, phi, &cfg, r).map(|p| event.hit(p.count()) as usize)
            })?
            .into_iter()
            .sum();
            let n = req.replicas as f64;
            let p = hits as f64 / n;
            est.hits = Some(hits);
            est.estimate = p;
            est.std_error = (p * (1.0 - p) / n).sqrt();
            est.log_estimate = p.ln();
            if hits == 0 {
                est.warnings.push(format!(
                    "degenerate estimate: no replica out of {} reached the event; consider importance sampling",
                    req.replicas
                ));
            }
        }
        TailMethod::ImportanceSampling => importance_sampling(kernel, phi, req, &z0, &event, &mut est)?,
    }
    est.log_scale = req.log_scale_factor() * est.log_estimate;
    Ok(est)
}

/// Piecewise-constant proposal intensity on the cells of the optimal-path grid.
struct Proposal<T> {
    dt: T,
    /// Intensity on `[t_i, t_{i+1})`.
    rates: Vec<T>,
}

impl<T: Real> Proposal<T> {
    fn sample<R: Rng>(&self, rng: &mut R) -> Vec<T> {
        let mut times = Vec::new();
        for (i, &q) in self.rates.iter().enumerate() {
            let a = self.dt * T::from_usize_lossy(i);
            let b = a + self.dt;
            let mut t = a;
            loop {
                let e: f64 = rng.sample(Exp1);
                t += T::lit(e) / q;
                if t >= b {
                    break;
                }
                times.push(t);
            }
        }
        times
    }

    fn rate_at(&self, t: T) -> T {
        let i = (t / self.dt).floor().to_usize().unwrap_or(0).min(self.rates.len() - 1);
        self.rates[i]
    }

    fn integral(&self) -> T {
        self.rates.iter().copied().sum::<T>() * self.dt
    }
}

fn importance_sampling<T: Real>(
    kernel: &Kernel<T>,
    phi: &IntensityFn<T>,
    req: &TailRequest,
    z0: &GridPath<T>,
    event: &Event<T>,
    est: &mut TailEstimate,
) -> Result<()> {
    let epsilon = event.epsilon;
    let n = req.steps.max(2);
    let constraint = ConstraintSpec::endpoint_at_least(event.x, req.kind);
    let (eta, value, _) = minimize_rate(req.kind, &constraint, kernel, phi, z0, n, &req.optim)?;
    est.rate_infimum = Some(value.as_f64());
    // Velocity of the tilted path, per unit of Z.
    let tilted: Vec<T> = match (req.kind, event.a) {
        (RateKind::Mdp, Some(a)) => {
            z0.values.iter().zip(&eta.values).map(|(z, e)| *z + a * *e).collect()
        }
        _ => eta.values.clone(),
    };
    let floor = T::lit(req.proposal_floor);
    let dt = eta.grid.dt();
    let rates: Vec<T> = tilted.windows(2).map(|w| ((w[1] - w[0]) / dt).max(floor) / epsilon).collect();
    let proposal = Proposal { dt, rates };
    let horizon = eta.grid.horizon;

    let log_weights: Vec<f64> = par_replicas(req.replicas, |r| {
        let mut rng = stream_rng(req.seed, streams::IMPORTANCE, r);
        let times = proposal.sample(&mut rng);
        if !event.hit(times.len()) {
            return Ok(f64::NEG_INFINITY);
        }
        let mut exc = Excitation::new(kernel);
        let mut log_ratio = T::zero();
        for &tau in &times {
            let lam = phi.eval(epsilon * exc.value_at(tau)) / epsilon;
            if !(lam > T::zero()) {
                return Ok(f64::NEG_INFINITY);
            }
            log_ratio += lam.ln() - proposal.rate_at(tau).ln();
            exc.absorb(tau);
        }
        let path = EventPath { epsilon, horizon, jump_times: times, seed: req.seed, replica: r };
        let comp = compensator(&path, kernel, phi, &[horizon], PieceRule::GaussLegendre5 { panels: 1 })?[0] / epsilon;
        Ok((log_ratio - comp + proposal.integral()).as_f64())
    })?;

    let hits = log_weights.iter().filter(|w| w.is_finite()).count();
    est.hits = Some(hits);
    if hits == 0 {
        est.warnings.push("no importance-sampled replica reached the event".into());
        return Ok(());
    }
    let m = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scaled: Vec<f64> = log_weights.iter().map(|w| (w - m).exp()).collect();
    let count = scaled.len() as f64;
    let mean = scaled.iter().sum::<f64>() / count;
    let var = scaled.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (count - 1.0).max(1.0);
    est.log_estimate = m + mean.ln();
    est.estimate = est.log_estimate.exp();
    est.std_error = m.exp() * (var / count).sqrt();
    let rel_var = var / (mean * mean);
    est.weight_relative_variance = Some(rel_var);
    if rel_var > 1e4 {
        est.warnings.push(format!("unstable importance sampling: weight relative variance {rel_var:.3e} exceeds 1e4"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poisson() -> (Kernel<f64>, IntensityFn<f64>) {
        (Kernel::zero(), IntensityFn::constant(1.0).unwrap())
    }

    #[test]
    fn threshold_counts() {
        let e = Event { epsilon: 0.01, z0_terminal: 1.0, a: None, x: 2.0 };
        assert_eq!(e.min_count(), 200);
        let e = Event { epsilon: 1e-3, z0_terminal: 1.0, a: Some(1e-3f64.powf(0.25)), x: 1.0 };
        assert_eq!(e.min_count(), 1178);
    }

    #[test]
    fn exact_oracle_matches_direct_sum() {
        let (k, f) = poisson();
        let req = TailRequest::ldp(2.0, 0.05, 1.0, TailMethod::ExactPoisson);
        let est = tail_probability(&k, &f, &req).unwrap();
        // P(Poisson(20) >= 40)
        let direct: f64 = (40..200u32)
            .map(|j| (j as f64 * 20f64.ln() - 20.0 - statrs::function::gamma::ln_gamma(j as f64 + 1.0)).exp())
            .sum();
        assert!((est.estimate / direct - 1.0).abs() < 1e-10);
        assert!((est.log_scale - 0.05 * direct.ln()).abs() < 1e-12);
    }

    #[test]
    fn exact_needs_unexcited_model() {
        let k = Kernel::exponential(1.0, 2.0).unwrap();
        let f = IntensityFn::linear(1.0, 1.0).unwrap();
        let req = TailRequest::ldp(2.0, 0.05, 1.0, TailMethod::ExactPoisson);
        let r = tail_probability(&k, &f, &req);
        assert!(matches!(r, Err(HawkesError::Capability(_))), "{r:?}");
    }

    #[test]
    fn mdp_needs_a() {
        let (k, f) = poisson();
        let mut req = TailRequest::mdp(1.0, 0.01, 0.25, 1.0, TailMethod::ExactPoisson);
        req.a_exponent = None;
        assert!(tail_probability(&k, &f, &req).is_err());
        req.a_exponent = Some(0.5);
        assert!(tail_probability(&k, &f, &req).is_err());
    }

    #[test]
    fn importance_sampling_agrees_with_exact() {
        let (k, f) = poisson();
        let exact = tail_probability(&k, &f, &TailRequest::ldp(1.6, 0.05, 1.0, TailMethod::ExactPoisson)).unwrap();
        let req = TailRequest::ldp(1.6, 0.05, 1.0, TailMethod::ImportanceSampling).with_replicas(20_000, 7);
        let is = tail_probability(&k, &f, &req).unwrap();
        assert!((is.estimate - exact.estimate).abs() < 3.0 * is.std_error, "{is:?} vs {}", exact.estimate);
        assert!(is.std_error < 0.05 * is.estimate);
    }

    #[test]
    fn plain_mc_degenerate_warning() {
        let (k, f) = poisson();
        let req = TailRequest::ldp(5.0, 0.05, 1.0, TailMethod::PlainMc).with_replicas(200, 1);
        let est = tail_probability(&k, &f, &req).unwrap();
        assert_eq!(est.hits, Some(0));
        assert_eq!(est.warnings.len(), 1);
    }
}
