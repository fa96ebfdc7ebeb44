//! Projected gradient descent for the discretized rate functionals.
//!
//! Paths are parametrized by node velocities `v`. Steps follow the gradient in the metric
//! `⟨u, v⟩_W = Σ w_i u_i v_i` of the trapezoid weights, so the iteration is a discretization of
//! the `L²[0,T]` gradient flow and its behaviour does not degrade as the grid is refined.
//! Endpoint constraints and monotonicity are handled by exact `W`-projection; tubes by an
//! exterior penalty with increasing weight.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::rate::{RateFunctional, RateKind};
use crate::error::{HawkesError, Result};
use crate::grid::{GridPath, UniformGrid};
use crate::limit::{solve_limit, VolterraOptions};
use crate::model::{IntensityFn, Kernel};
use crate::real::Real;
use crate::rng::{stream_rng, streams};

#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintKind<T> {
    /// `η(T) = x`.
    EndpointEqual { x: T },
    /// `η(T) ≥ x`.
    EndpointAtLeast { x: T },
    /// `sup_t |η(t) − reference(t)| ≤ radius`.
    Tube { reference: GridPath<T>, radius: T },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSpec<T> {
    pub kind: ConstraintKind<T>,
    /// Restrict to nondecreasing paths. Always enforced for `I`.
    pub monotone: bool,
}

impl<T: Real> ConstraintSpec<T> {
    pub fn new(kind: ConstraintKind<T>, monotone: bool) -> Self {
        Self { kind, monotone }
    }

    /// Constraint with the natural domain of `kind` (`AC₀⁺` for `I`, `AC₀` for `J`).
    pub fn for_functional(kind: ConstraintKind<T>, functional: RateKind) -> Self {
        Self { kind, monotone: functional == RateKind::Ldp }
    }

    pub fn endpoint_equal(x: T, functional: RateKind) -> Self {
        Self::for_functional(ConstraintKind::EndpointEqual { x }, functional)
    }

    pub fn endpoint_at_least(x: T, functional: RateKind) -> Self {
        Self::for_functional(ConstraintKind::EndpointAtLeast { x }, functional)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimParams {
    pub step: f64,
    pub backtrack_factor: f64,
    pub armijo_c1: f64,
    pub max_backtracks: usize,
    /// Stop when the `W`-norm of the projected gradient step is at most this.
    pub tol: f64,
    pub max_iterations: usize,
    /// Number of starts (the first is deterministic, the rest random perturbations).
    pub multistart: usize,
    pub seed: u64,
    pub gradient_check_tol: f64,
    pub gradient_check_components: usize,
    pub penalty_initial: f64,
    pub penalty_growth: f64,
    pub penalty_rounds: usize,
    /// Accepted tube violation relative to the radius.
    pub tube_tol: f64,
}

impl Default for OptimParams {
    fn default() -> Self {
        Self {
            step: 1.0,
            backtrack_factor: 0.5,
            armijo_c1: 1e-4,
            max_backtracks: 50,
            tol: 1e-8,
            max_iterations: 5000,
            multistart: 5,
            seed: 0,
            gradient_check_tol: 1e-5,
            gradient_check_components: 256,
            penalty_initial: 10.0,
            penalty_growth: 10.0,
            penalty_rounds: 10,
            tube_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimReport {
    /// Iterations of the selected start (summed over penalty rounds).
    pub iterations: usize,
    /// `W`-norm of the final projected gradient step.
    pub gradient_norm: f64,
    pub converged: bool,
    pub gradient_check_error: f64,
    pub start_values: Vec<f64>,
    pub best_start: usize,
    pub failed_starts: usize,
    /// Tube violation `max(sup|η − ref| − radius, 0)`, zero for endpoint constraints.
    pub constraint_violation: f64,
    pub penalty_weight: Option<f64>,
}

/// Exact `W`-projections of the feasible sets.
#[derive(Debug, Clone)]
struct Projector<T> {
    weights: Vec<T>,
    orthant: bool,
    endpoint: Option<(T, bool)>,
}

impl<T: Real> Projector<T> {
    fn total(&self, v: &[T]) -> T {
        v.iter().zip(&self.weights).map(|(a, w)| *a * *w).sum()
    }

    /// `argmin Σ w (v − y)²` subject to `Σ w v = x` (and `v ≥ 0` when `orthant`).
    fn onto_hyperplane(&self, y: &[T], x: T) -> Vec<T> {
        let w = &self.weights;
        if !self.orthant {
            let wsum: T = w.iter().copied().sum();
            let tau = (x - self.total(y)) / wsum;
            return y.iter().map(|v| *v + tau).collect();
        }
        if x <= T::zero() {
            return vec![T::zero(); y.len()];
        }
        // Σ w max(y + τ, 0) = x is piecewise linear in τ; active set = largest y's.
        let mut order: Vec<usize> = (0..y.len()).collect();
        order.sort_by(|&a, &b| y[b].partial_cmp(&y[a]).unwrap_or(std::cmp::Ordering::Equal));
        let mut wsum = T::zero();
        let mut wysum = T::zero();
        let mut tau = T::zero();
        for (m, &i) in order.iter().enumerate() {
            wsum += w[i];
            wysum += w[i] * y[i];
            tau = (x - wysum) / wsum;
            let next_off = order.get(m + 1).map(|&j| y[j] + tau <= T::zero()).unwrap_or(true);
            if y[i] + tau > T::zero() && next_off {
                break;
            }
        }
        y.iter().map(|v| (*v + tau).max(T::zero())).collect()
    }

    fn project(&self, y: &[T]) -> Vec<T> {
        let base: Vec<T> = if self.orthant { y.iter().map(|v| v.max(T::zero())).collect() } else { y.to_vec() };
        match self.endpoint {
            None => base,
            Some((x, true)) => self.onto_hyperplane(y, x),
            Some((x, false)) => {
                if self.total(&base) >= x {
                    base
                } else {
                    self.onto_hyperplane(y, x)
                }
            }
        }
    }
}

/// Exterior penalty `μ Σ w_i (|η_i − ref_i| − r)₊²` with `η` the cumulative trapezoid of `v`.
#[derive(Debug, Clone)]
struct TubePenalty<T> {
    reference: Vec<T>,
    radius: T,
    weights: Vec<T>,
    dt: T,
}

impl<T: Real> TubePenalty<T> {
    fn excess(&self, v: &[T]) -> Vec<T> {
        let eta = crate::grid::cumulative_trapezoid(v, self.dt);
        eta.iter()
            .zip(&self.reference)
            .map(|(e, r)| {
                let d = *e - *r;
                let over = (d.abs() - self.radius).max(T::zero());
                if d < T::zero() {
                    -over
                } else {
                    over
                }
            })
            .collect()
    }

    fn violation(&self, v: &[T]) -> T {
        self.excess(v).iter().fold(T::zero(), |m, e| m.max(e.abs()))
    }

    fn value(&self, v: &[T], mu: T) -> T {
        mu * self.excess(v).iter().zip(&self.weights).map(|(e, w)| *w * *e * *e).sum::<T>()
    }

    fn gradient(&self, v: &[T], mu: T) -> Vec<T> {
        let two = T::lit(2.0);
        let p: Vec<T> = self.excess(v).iter().zip(&self.weights).map(|(e, w)| two * mu * *w * *e).collect();
        let n = v.len();
        let half = T::lit(0.5);
        let mut g = vec![T::zero(); n];
        let mut suffix = T::zero();
        for k in (0..n).rev() {
            g[k] = if k == 0 { self.dt * half * suffix } else { self.dt * (suffix + half * p[k]) };
            suffix += p[k];
        }
        g
    }
}

struct Objective<'a, T> {
    rate: &'a RateFunctional<T>,
    tube: Option<&'a TubePenalty<T>>,
    mu: T,
}

impl<T: Real> Objective<'_, T> {
    fn value(&self, v: &[T]) -> Result<T> {
        let mut f = self.rate.value(v)?;
        if let Some(t) = self.tube {
            f += t.value(v, self.mu);
        }
        Ok(f)
    }

    fn gradient(&self, v: &[T]) -> Result<Vec<T>> {
        let mut g = self.rate.gradient(v)?;
        if let Some(t) = self.tube {
            for (a, b) in g.iter_mut().zip(t.gradient(v, self.mu)) {
                *a += b;
            }
        }
        Ok(g)
    }
}

struct Descent<T> {
    v: Vec<T>,
    iterations: usize,
    gradient_norm: T,
    converged: bool,
}

fn descend<T: Real>(obj: &Objective<'_, T>, proj: &Projector<T>, v0: Vec<T>, p: &OptimParams) -> Result<Descent<T>> {
    let w = &proj.weights;
    let mut v = proj.project(&v0);
    let mut f = obj.value(&v)?;
    if !f.is_finite() {
        return Err(HawkesError::Constraint("objective is infinite at the projected start".into()));
    }
    let c1 = T::lit(p.armijo_c1);
    let mut gnorm = T::infinity();
    for it in 0..p.max_iterations {
        let g = obj.gradient(&v)?;
        let trial = |s: T| -> Vec<T> { proj.project(&v.iter().zip(&g).zip(w).map(|((x, gi), wi)| *x - s * *gi / *wi).collect::<Vec<T>>()) };
        let unit = trial(T::one());
        gnorm = v.iter().zip(&unit).zip(w).map(|((a, b), wi)| *wi * (*a - *b) * (*a - *b)).sum::<T>().sqrt();
        if gnorm <= T::lit(p.tol) {
            return Ok(Descent { v, iterations: it, gradient_norm: gnorm, converged: true });
        }
        let noise = T::lit(10.0) * T::epsilon() * (T::one() + f.abs());
        let mut s = T::lit(p.step);
        let mut accepted = None;
        for _ in 0..p.max_backtracks {
            let cand = trial(s);
            let fc = obj.value(&cand)?;
            let decrease: T = g.iter().zip(&cand).zip(&v).map(|((gi, c), x)| *gi * (*c - *x)).sum();
            if fc.is_finite() && fc <= f + c1 * decrease + noise {
                accepted = Some((cand, fc));
                break;
            }
            s *= T::lit(p.backtrack_factor);
        }
        match accepted {
            Some((cand, fc)) => {
                v = cand;
                f = fc;
            }
            None => {
                return Err(HawkesError::Stagnation { iterations: it, best_value: f.as_f64() });
            }
        }
    }
    Ok(Descent { v, iterations: p.max_iterations, gradient_norm: gnorm, converged: false })
}

/// Minimizes `I` or `J` over paths satisfying `constraint` on an `n`-step grid.
///
/// `z0` supplies the starting path for `I` and the linearization point of `J`; it is
/// re-solved on the optimization grid when its grid differs. Returns the minimizing path, the
/// value of the functional there (without penalty terms), and the convergence report. The
/// analytic gradient is checked against finite differences at the first iterate.
pub fn minimize_rate<T: Real>(
    functional: RateKind,
    constraint: &ConstraintSpec<T>,
    kernel: &Kernel<T>,
    phi: &IntensityFn<T>,
    z0: &GridPath<T>,
    n: usize,
    params: &OptimParams,
) -> Result<(GridPath<T>, T, OptimReport)> {
    let grid = UniformGrid::new(z0.grid.horizon, n)?;
    let z0 = if z0.grid == grid && z0.derivative.is_some() {
        z0.clone()
    } else {
        solve_limit(kernel, phi, grid.horizon, n, &VolterraOptions::default())?.0
    };
    let rate = match functional {
        RateKind::Ldp => RateFunctional::ldp(kernel, phi, grid),
        RateKind::Mdp => RateFunctional::mdp(kernel, phi, &z0)?,
    };
    let weights = grid.trapezoid_weights();
    let orthant = functional == RateKind::Ldp || constraint.monotone;

    let mut tube = None;
    let endpoint = match &constraint.kind {
        ConstraintKind::EndpointEqual { x } | ConstraintKind::EndpointAtLeast { x } => {
            if !x.is_finite() {
                return Err(HawkesError::Constraint(format!("endpoint {x} is not finite")));
            }
            if orthant && *x < T::zero() {
                return Err(HawkesError::Constraint(format!("no nondecreasing path from 0 ends at {x} < 0")));
            }
            Some((*x, matches!(constraint.kind, ConstraintKind::EndpointEqual { .. })))
        }
        ConstraintKind::Tube { reference, radius } => {
            if !(*radius > T::zero()) {
                return Err(HawkesError::Constraint(format!("tube radius must be > 0, got {radius}")));
            }
            let reference: Vec<T> = grid.times().into_iter().map(|t| reference.interpolate(t)).collect();
            if reference[0].abs() > *radius {
                return Err(HawkesError::Constraint("the tube does not contain eta(0) = 0".into()));
            }
            if orthant {
                let mut lo = T::zero();
                for r in &reference {
                    lo = lo.max(*r - *radius);
                    if lo > *r + *radius {
                        return Err(HawkesError::Constraint("no nondecreasing path fits in the tube".into()));
                    }
                }
            }
            tube = Some(TubePenalty { reference, radius: *radius, weights: weights.clone(), dt: grid.dt() });
            None
        }
    };
    let proj = Projector { weights: weights.clone(), orthant, endpoint };

    let base: Vec<T> = match functional {
        RateKind::Ldp => z0.derivative.clone().expect("solve_limit sets the derivative"),
        RateKind::Mdp => vec![T::zero(); grid.len()],
    };
    let starts = params.multistart.max(1);
    let mut check_error = 0.0;
    let mut start_values = Vec::with_capacity(starts);
    let mut best: Option<(usize, Descent<T>, T, Option<T>)> = None;
    let mut failed = 0usize;
    let mut first_failure = None;
    for s in 0..starts {
        let v0: Vec<T> = if s == 0 {
            base.clone()
        } else {
            let mut rng = stream_rng(params.seed, streams::MULTISTART, s as u64);
            let spread = T::one() + base.iter().map(|b| b.abs()).sum::<T>() / T::from_usize_lossy(base.len());
            base.iter()
                .map(|b| {
                    let z: f64 = rng.sample(StandardNormal);
                    match functional {
                        RateKind::Ldp => b.max(T::lit(1e-3)) * T::lit(0.5 * z).exp(),
                        RateKind::Mdp => *b + T::lit(0.5 * z) * spread,
                    }
                })
                .collect()
        };
        if s == 0 {
            let first = proj.project(&v0);
            check_error = rate.gradient_check(&first, params.gradient_check_components)?;
            if check_error > params.gradient_check_tol {
                return Err(HawkesError::GradientMismatch(check_error));
            }
        }
        let outcome = match &tube {
            None => descend(&Objective { rate: &rate, tube: None, mu: T::zero() }, &proj, v0, params).map(|d| (d, None)),
            Some(t) => {
                let mut mu = T::lit(params.penalty_initial);
                let mut v = v0;
                let mut total = 0;
                let mut result = None;
                for _ in 0..params.penalty_rounds.max(1) {
                    match descend(&Objective { rate: &rate, tube: Some(t), mu }, &proj, v, params) {
                        Ok(mut d) => {
                            total += d.iterations;
                            d.iterations = total;
                            let done = t.violation(&d.v) <= T::lit(params.tube_tol) * t.radius;
                            v = d.v.clone();
                            result = Some(Ok(d));
                            if done {
                                break;
                            }
                            mu *= T::lit(params.penalty_growth);
                        }
                        Err(e) => {
                            result = Some(Err(e));
                            break;
                        }
                    }
                }
                result.expect("at least one round").map(|d| (d, Some(mu)))
            }
        };
        match outcome {
            Ok((d, mu)) => {
                let value = rate.value(&d.v)?;
                start_values.push(value.as_f64());
                if best.as_ref().map(|b| value < b.2).unwrap_or(true) {
                    best = Some((s, d, value, mu));
                }
            }
            Err(e @ HawkesError::Stagnation { .. }) => {
                failed += 1;
                start_values.push(f64::NAN);
                first_failure.get_or_insert(e);
            }
            Err(e) => return Err(e),
        }
    }
    let Some((best_start, d, value, mu)) = best else {
        return Err(first_failure.expect("every start failed"));
    };
    let violation = tube.as_ref().map(|t| t.violation(&d.v).as_f64()).unwrap_or(0.0);
    let report = OptimReport {
        iterations: d.iterations,
        gradient_norm: d.gradient_norm.as_f64(),
        converged: d.converged,
        gradient_check_error: check_error,
        start_values,
        best_start,
        failed_starts: failed,
        constraint_violation: violation,
        penalty_weight: mu.map(|m| m.as_f64()),
    };
    let mut path = GridPath::from_velocity(grid, d.v)?;
    path.nondecreasing = path.nondecreasing || orthant;
    Ok((path, value, report))
}
