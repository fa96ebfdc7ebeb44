//! Exact simulation of the scaled Hawkes process `N^ε` (and `Z^ε = εN^ε`) and of the
//! exchangeable `N`-node mean-field network, by thinning a dominating Poisson stream.
//!
//! Between accepted events the dominating rate is
//! `B = φ(0)/ε + α‖h‖_{L∞[0,T]}·N_{t−}`, which bounds `λ^ε_t = φ(ε Σ h(t−τ))/ε` because
//! `|φ(x) − φ(0)| ≤ α|x|`. It is refreshed after each accepted event.

use std::path::Path;

use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HawkesError, Result};
use crate::grid::{GridPath, UniformGrid};
use crate::model::{Kernel, IntensityFn};
use crate::real::Real;
use crate::rng::{stream_rng, streams};
use crate::stats::{log_mean_exp, Summary};

pub const DEFAULT_MAX_EVENTS: usize = 10_000_000;
pub const EVENT_CSV_FORMAT: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig<T> {
    /// Scale parameter `ε` of the univariate process (`1/N` for mean-field runs).
    pub epsilon: T,
    /// Node count `N` for mean-field runs.
    pub nodes: usize,
    pub horizon: T,
    pub replicas: usize,
    pub seed: u64,
    pub max_events: usize,
}

impl<T: Real> SimConfig<T> {
    pub fn scaled(epsilon: T, horizon: T) -> Self {
        Self { epsilon, nodes: 1, horizon, replicas: 1, seed: 0, max_events: DEFAULT_MAX_EVENTS }
    }

    pub fn mean_field(nodes: usize, horizon: T) -> Self {
        let epsilon = T::one() / T::from_usize_lossy(nodes.max(1));
        Self { epsilon, nodes, horizon, replicas: 1, seed: 0, max_events: DEFAULT_MAX_EVENTS }
    }

    pub fn with_replicas(mut self, replicas: usize) -> Self {
        self.replicas = replicas;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_max_events(mut self, max_events: usize) -> Self {
        self.max_events = max_events;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > T::zero()) || !self.epsilon.is_finite() {
            return Err(HawkesError::InvalidArgument(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if !(self.horizon > T::zero()) || !self.horizon.is_finite() {
            return Err(HawkesError::InvalidArgument(format!("horizon must be > 0, got {}", self.horizon)));
        }
        if self.nodes == 0 {
            return Err(HawkesError::InvalidArgument("node count must be >= 1".into()));
        }
        if self.replicas == 0 {
            return Err(HawkesError::InvalidArgument("replica count must be >= 1".into()));
        }
        if self.max_events == 0 {
            return Err(HawkesError::InvalidArgument("max-event guard must be > 0".into()));
        }
        Ok(())
    }
}

/// Jump times of one realisation of `N^ε` on `(0, T]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventPath<T> {
    pub epsilon: T,
    pub horizon: T,
    pub jump_times: Vec<T>,
    pub seed: u64,
    pub replica: u64,
}

impl<T: Real> EventPath<T> {
    pub fn count(&self) -> usize {
        self.jump_times.len()
    }

    /// `Z^ε_t = ε·#{τ ≤ t}`.
    pub fn z_at(&self, t: T) -> T {
        self.epsilon * T::from_usize_lossy(self.jump_times.partition_point(|&s| s <= t))
    }

    /// `Z^ε_T`.
    pub fn terminal(&self) -> T {
        self.epsilon * T::from_usize_lossy(self.count())
    }
}

/// Jump times of every node of the mean-field network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiEventPath<T> {
    pub nodes: usize,
    pub horizon: T,
    pub node_times: Vec<Vec<T>>,
    pub seed: u64,
    pub replica: u64,
}

impl<T: Real> MultiEventPath<T> {
    pub fn total_count(&self) -> usize {
        self.node_times.iter().map(Vec::len).sum()
    }

    /// The mean process `Z̄^N` as an event path with increments `1/N`.
    pub fn mean_process(&self) -> EventPath<T> {
        let mut all: Vec<T> = self.node_times.iter().flatten().copied().collect();
        all.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
        EventPath {
            epsilon: T::one() / T::from_usize_lossy(self.nodes),
            horizon: self.horizon,
            jump_times: all,
            seed: self.seed,
            replica: self.replica,
        }
    }
}

/// Running value of `Σ_{absorbed τ} h(t − τ)`.
#[derive(Debug, Clone)]
pub(crate) enum Excitation<'a, T> {
    /// `scale · acc · e^{−β(t − anchor)}`.
    Exponential { scale: T, beta: T, acc: T, anchor: T },
    General { kernel: &'a Kernel<T>, times: Vec<T> },
}

impl<'a, T: Real> Excitation<'a, T> {
    pub(crate) fn new(kernel: &'a Kernel<T>) -> Self {
        match kernel.as_exponential() {
            Some((scale, beta)) => Self::Exponential { scale, beta, acc: T::zero(), anchor: T::zero() },
            None => Self::General { kernel, times: Vec::new() },
        }
    }

    #[inline]
    pub(crate) fn value_at(&self, t: T) -> T {
        match self {
            Self::Exponential { scale, beta, acc, anchor } => *scale * *acc * (-*beta * (t - *anchor)).exp(),
            Self::General { kernel, times } => {
                if kernel.is_zero() {
                    return T::zero();
                }
                times.iter().map(|&s| kernel.eval(t - s)).sum()
            }
        }
    }

    #[inline]
    pub(crate) fn absorb(&mut self, tau: T) {
        match self {
            Self::Exponential { beta, acc, anchor, .. } => {
                *acc = *acc * (-*beta * (tau - *anchor)).exp() + T::one();
                *anchor = tau;
            }
            Self::General { times, .. } => times.push(tau),
        }
    }
}

#[inline]
fn checked_phi<T: Real>(phi: &IntensityFn<T>, x: T) -> Result<T> {
    let v = phi.eval(x);
    if v >= T::zero() && v.is_finite() {
        Ok(v)
    } else {
        Err(HawkesError::ModelViolation(format!("phi({x}) = {v} is not a nonnegative finite number")))
    }
}

/// Shared thinning loop. `aggregate` multiplies the per-unit intensity (1 for the univariate
/// process, `N` for the network); `on_accept` receives each accepted time.
fn thin<T: Real, R: Rng>(
    kernel: &Kernel<T>,
    phi: &IntensityFn<T>,
    epsilon: T,
    horizon: T,
    max_events: usize,
    replica: u64,
    rng: &mut R,
    mut on_accept: impl FnMut(T, &mut R),
) -> Result<usize> {
    let alpha = phi.lipschitz_alpha();
    let h_sup = kernel.sup_abs(horizon);
    let phi0 = checked_phi(phi, T::zero())?;
    let slack = T::one() + T::lit(1e-12);
    let mut exc = Excitation::new(kernel);
    let mut t = T::zero();
    let mut accepted = 0usize;
    loop {
        let bound = phi0 / epsilon + alpha * h_sup * T::from_usize_lossy(accepted);
        if !(bound > T::zero()) {
            break;
        }
        let e: f64 = rng.sample(Exp1);
        t += T::lit(e) / bound;
        if t > horizon {
            break;
        }
        let lambda = checked_phi(phi, epsilon * exc.value_at(t))? / epsilon;
        if lambda > bound * slack {
            return Err(HawkesError::InternalLogic(format!(
                "intensity {lambda} exceeds the thinning bound {bound} at t = {t}"
            )));
        }
        let u: f64 = rng.random();
        if T::lit(u) * bound < lambda {
            accepted += 1;
            if accepted > max_events {
                return Err(HawkesError::ExplosionGuard { limit: max_events, replica });
            }
            exc.absorb(t);
            on_accept(t, rng);
        }
    }
    Ok(accepted)
}

/// One replica of `N^ε` with intensity `(1/ε)φ(∫₀^{t−} εh(t−s)dN^ε_s)`; deterministic in
/// `(cfg.seed, replica)`.
pub fn simulate_scaled_hawkes<T: Real>(
    kernel: &Kernel<T>,
    phi: &IntensityFn<T>,
    cfg: &SimConfig<T>,
    replica: u64,
) -> Result<EventPath<T>> {
    cfg.validate()?;
    let mut rng = stream_rng(cfg.seed, streams::SCALED_HAWKES, replica);
    let mut jump_times = Vec::new();
    thin(kernel, phi, cfg.epsilon, cfg.horizon, cfg.max_events, replica, &mut rng, |t, _| jump_times.push(t))?;
    Ok(EventPath { epsilon: cfg.epsilon, horizon: cfg.horizon, jump_times, seed: cfg.seed, replica })
}

/// One replica of the `N`-node network with kernel `h/N` and common intensity
/// `φ(N⁻¹ Σ_j ∫h dZ^{N,j})`. Simulated as a single superposed stream at rate `N·φ`
/// with each accepted event assigned to a uniformly chosen node.
pub fn simulate_mean_field<T: Real>(
    kernel: &Kernel<T>,
    phi: &IntensityFn<T>,
    cfg: &SimConfig<T>,
    replica: u64,
) -> Result<MultiEventPath<T>> {
    cfg.validate()?;
    let nodes = cfg.nodes;
    let epsilon = T::one() / T::from_usize_lossy(nodes);
    let mut rng = stream_rng(cfg.seed, streams::MEAN_FIELD, replica);
    let mut node_times = vec![Vec::new(); nodes];
    thin(kernel, phi, epsilon, cfg.horizon, cfg.max_events, replica, &mut rng, |t, rng| {
        let i = rng.random_range(0..nodes);
        node_times[i].push(t);
    })?;
    Ok(MultiEventPath { nodes, horizon: cfg.horizon, node_times, seed: cfg.seed, replica })
}

/// Maps `f` over replica indices `0..replicas` in parallel; results come back in index order.
pub fn par_replicas<R: Send>(replicas: usize, f: impl Fn(u64) -> Result<R> + Sync + Send) -> Result<Vec<R>> {
    (0..replicas as u64).into_par_iter().map(f).collect()
}

/// All replicas of `cfg`, in replica order.
pub fn simulate_replicas<T: Real>(
    kernel: &Kernel<T>,
    phi: &IntensityFn<T>,
    cfg: &SimConfig<T>,
) -> Result<Vec<EventPath<T>>> {
    cfg.validate()?;
    par_replicas(cfg.replicas, |r| simulate_scaled_hawkes(kernel, phi, cfg, r))
}

/// `Z^ε` sampled (right-continuously) on the grid.
pub fn step_path<T: Real>(path: &EventPath<T>, grid: &UniformGrid<T>) -> GridPath<T> {
    let mut values = Vec::with_capacity(grid.len());
    let mut k = 0usize;
    for i in 0..grid.len() {
        let t = grid.time(i);
        while k < path.jump_times.len() && path.jump_times[k] <= t {
            k += 1;
        }
        values.push(path.epsilon * T::from_usize_lossy(k));
    }
    GridPath { grid: *grid, values, derivative: None, nondecreasing: true }
}

/// Quadrature rule applied on each smooth piece of the compensator integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PieceRule {
    Trapezoid { panels: usize },
    GaussLegendre5 { panels: usize },
}

const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189,
    0.478_628_670_499_366,
    0.568_888_888_888_889,
    0.478_628_670_499_366,
    0.236_926_885_056_189,
];

fn integrate_piece<T: Real>(g: impl Fn(T) -> Result<T>, a: T, b: T, rule: PieceRule) -> Result<T> {
    if !(b > a) {
        return Ok(T::zero());
    }
    let half = T::lit(0.5);
    match rule {
        PieceRule::Trapezoid { panels } => {
            let m = panels.max(1);
            let h = (b - a) / T::from_usize_lossy(m);
            let mut acc = half * (g(a)? + g(b)?);
            for i in 1..m {
                acc += g(a + h * T::from_usize_lossy(i))?;
            }
            Ok(acc * h)
        }
        PieceRule::GaussLegendre5 { panels } => {
            let m = panels.max(1);
            let h = (b - a) / T::from_usize_lossy(m);
            let mut acc = T::zero();
            for p in 0..m {
                let c = a + h * (T::from_usize_lossy(p) + half);
                for (x, w) in GL5_NODES.iter().zip(GL5_WEIGHTS) {
                    acc += T::lit(w) * g(c + half * h * T::lit(*x))?;
                }
            }
            Ok(acc * half * h)
        }
    }
}

/// `∫₀^{t} φ(ε Σ_{τ<s} h(s−τ)) ds` at each (sorted) query time, integrating piecewise
/// between events where the integrand is smooth.
pub fn compensator<T: Real>(
    path: &EventPath<T>,
    kernel: &Kernel<T>,
    phi: &IntensityFn<T>,
    times: &[T],
    rule: PieceRule,
) -> Result<Vec<T>> {
    let eps = path.epsilon;
    let mut exc = Excitation::new(kernel);
    let mut acc = T::zero();
    let mut pos = T::zero();
    let mut e = 0usize;
    let mut out = Vec::with_capacity(times.len());
    for &tq in times {
        if tq < pos {
            return Err(HawkesError::InvalidArgument("compensator query times must be sorted".into()));
        }
        while e < path.jump_times.len() && path.jump_times[e] <= tq {
            let tau = path.jump_times[e];
            acc += integrate_piece(|s| checked_phi(phi, eps * exc.value_at(s)), pos, tau, rule)?;
            pos = tau;
            exc.absorb(tau);
            e += 1;
        }
        acc += integrate_piece(|s| checked_phi(phi, eps * exc.value_at(s)), pos, tq, rule)?;
        pos = tq;
        out.push(acc);
    }
    Ok(out)
}

/// `M^ε_t = Z^ε_t − ∫₀ᵗ φ(∫₀^{s−} h(s−u)dZ^ε_u) ds` on the grid (trapezoid between events).
pub fn martingale_residual<T: Real>(
    path: &EventPath<T>,
    kernel: &Kernel<T>,
    phi: &IntensityFn<T>,
    grid: &UniformGrid<T>,
) -> Result<GridPath<T>> {
    let times = grid.times();
    let comp = compensator(path, kernel, phi, &times, PieceRule::Trapezoid { panels: 4 })?;
    let z = step_path(path, grid);
    let values = z.values.iter().zip(&comp).map(|(a, b)| *a - *b).collect();
    Ok(GridPath { grid: *grid, values, derivative: None, nondecreasing: false })
}

/// `sup_{t≤T} |Z^ε_t − Z⁰_t| / √ε`, evaluated at both one-sided limits of every jump and at the
/// grid nodes of `z0` (linear interpolation of `Z⁰` between nodes).
pub fn sup_fluctuation<T: Real>(path: &EventPath<T>, z0: &GridPath<T>) -> T {
    let eps = path.epsilon;
    let mut m = T::zero();
    for (k, &tau) in path.jump_times.iter().enumerate() {
        let z = z0.interpolate(tau);
        let before = eps * T::from_usize_lossy(k);
        m = m.max((before - z).abs()).max((before + eps - z).abs());
    }
    for i in 0..z0.grid.len() {
        let t = z0.grid.time(i);
        m = m.max((path.z_at(t) - z0.values[i]).abs());
    }
    m / eps.sqrt()
}

/// Moments of `N^ε_T` and `Z^ε_T` across replicas, for the JSON summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicaSummary {
    pub format_version: u32,
    pub epsilon: f64,
    pub horizon: f64,
    pub replicas: usize,
    pub total_events: usize,
    pub count: Summary,
    pub terminal: Summary,
}

impl ReplicaSummary {
    pub fn of<T: Real>(paths: &[EventPath<T>]) -> Self {
        let counts: Vec<f64> = paths.iter().map(|p| p.count() as f64).collect();
        let terms: Vec<f64> = paths.iter().map(|p| p.terminal().as_f64()).collect();
        Self {
            format_version: EVENT_CSV_FORMAT,
            epsilon: paths.first().map(|p| p.epsilon.as_f64()).unwrap_or(f64::NAN),
            horizon: paths.first().map(|p| p.horizon.as_f64()).unwrap_or(f64::NAN),
            replicas: paths.len(),
            total_events: counts.iter().map(|c| *c as usize).sum(),
            count: Summary::of(&counts),
            terminal: Summary::of(&terms),
        }
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

/// One row per jump: `replica,time`.
pub fn write_events_csv<T: Real>(paths: &[EventPath<T>], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["replica", "time"])?;
    for p in paths {
        for t in &p.jump_times {
            w.write_record([p.replica.to_string(), t.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Empirical side and bound of the exponential moment inequality
/// `ε·log E[e^{(θ − (e^θ−1)α‖h‖_{L¹})N^ε_T}] ≤ (e^θ−1)φ(0)T`.
/// Returns `None` when `θ − (e^θ−1)α‖h‖_{L¹} ≤ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentialMoment {
    pub theta: f64,
    pub exponent: f64,
    pub estimate: f64,
    pub bound: f64,
}

pub fn exponential_moment_diagnostic(
    counts: &[f64],
    epsilon: f64,
    theta: f64,
    alpha_h_l1: f64,
    phi0: f64,
    horizon: f64,
) -> Option<ExponentialMoment> {
    let c = theta - theta.exp_m1() * alpha_h_l1;
    if !(c > 0.0) || counts.is_empty() {
        return None;
    }
    let logs: Vec<f64> = counts.iter().map(|n| c * n).collect();
    Some(ExponentialMoment {
        theta,
        exponent: c,
        estimate: epsilon * log_mean_exp(&logs),
        bound: theta.exp_m1() * phi0 * horizon,
    })
}
