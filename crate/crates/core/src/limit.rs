//! The deterministic limit `Z⁰_t = ∫₀ᵗ φ(∫₀ˢ h(s−u) dZ⁰_u) ds`.
//!
//! The unknown is the limit intensity `λ⁰ = (Z⁰)'`, the fixed point of
//! `λ ↦ φ(∫₀^· h(· − s) λ(s) ds)`. Picard iteration starts from `λ ≡ φ(0)` and uses the
//! trapezoid convolution; `Z⁰` is the cumulative trapezoid of `λ⁰`.

use serde::{Deserialize, Serialize};

use crate::convolution::Convolver;
use crate::error::{HawkesError, Result};
use crate::grid::{cumulative_trapezoid, GridPath, UniformGrid};
use crate::model::{IntensityFn, Kernel};
use crate::real::Real;
use crate::simulate::{EventPath, Excitation};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolterraOptions {
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for VolterraOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iterations: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolterraSolveReport {
    pub iterations: usize,
    pub residual: f64,
    pub steps: usize,
    /// Sup-norm difference between successive iterates, one entry per iteration.
    pub residual_history: Vec<f64>,
}

/// Solves for `Z⁰` on `steps` uniform intervals of `[0, horizon]`. The returned path carries
/// `λ⁰` as its derivative.
pub fn solve_limit<T: Real>(
    kernel: &Kernel<T>,
    phi: &IntensityFn<T>,
    horizon: T,
    steps: usize,
    opts: &VolterraOptions,
) -> Result<(GridPath<T>, VolterraSolveReport)> {
    if !(opts.tol > 0.0) {
        return Err(HawkesError::InvalidArgument(format!("tolerance must be > 0, got {}", opts.tol)));
    }
    let grid = UniformGrid::new(horizon, steps)?;
    let conv = Convolver::new(kernel, &grid);
    let tol = T::lit(opts.tol);
    let mut lambda = vec![phi.eval(T::zero()); grid.len()];
    let mut history = Vec::new();
    let mut converged = false;
    for _ in 0..opts.max_iterations {
        let x = conv.apply(&lambda);
        let mut residual = T::zero();
        let mut next = Vec::with_capacity(x.len());
        for (xi, li) in x.iter().zip(&lambda) {
            let v = phi.eval(*xi);
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(HawkesError::ModelViolation(format!(
                    "limit intensity phi({xi}) = {v} is not a nonnegative finite number"
                )));
            }
            residual = residual.max((v - *li).abs());
            next.push(v);
        }
        lambda = next;
        history.push(residual.as_f64());
        if residual <= tol {
            converged = true;
            break;
        }
    }
    let residual = history.last().copied().unwrap_or(f64::INFINITY);
    if !converged {
        return Err(HawkesError::Divergence { iterations: history.len(), residual });
    }
    let values = cumulative_trapezoid(&lambda, grid.dt());
    let path = GridPath { grid, values, derivative: Some(lambda), nondecreasing: true };
    let report = VolterraSolveReport { iterations: history.len(), residual, steps, residual_history: history };
    Ok((path, report))
}

/// `t ↦ φ(∫₀ᵗ h(t−s) dZ_s)` on the path's grid.
///
/// With a derivative the Stieltjes integral is the trapezoid convolution of the density;
/// without one the path is read as a step function whose node increments are atoms, and
/// the integral is the exact sum `Σ_{t_j ≤ t} h(t − t_j) ΔZ_j`.
pub fn limit_intensity<T: Real>(path: &GridPath<T>, kernel: &Kernel<T>, phi: &IntensityFn<T>) -> GridPath<T> {
    let grid = path.grid;
    let x = excitation(path, kernel);
    let values = x.into_iter().map(|v| phi.eval(v)).collect();
    GridPath { grid, values, derivative: None, nondecreasing: false }
}

/// `∫₀^{t_i} h(t_i−s) dZ_s` at every node (see [`limit_intensity`]).
pub fn excitation<T: Real>(path: &GridPath<T>, kernel: &Kernel<T>) -> Vec<T> {
    let grid = path.grid;
    match &path.derivative {
        Some(d) => Convolver::new(kernel, &grid).apply(d),
        None => {
            let n = grid.len();
            let jumps: Vec<T> = (0..n)
                .map(|j| if j == 0 { path.values[0] } else { path.values[j] - path.values[j - 1] })
                .collect();
            (0..n)
                .map(|i| {
                    let ti = grid.time(i);
                    (0..=i).filter(|&j| jumps[j] != T::zero()).map(|j| kernel.eval(ti - grid.time(j)) * jumps[j]).sum()
                })
                .collect()
        }
    }
}

/// Intensity `φ(ε Σ_{τ<t} h(t−τ))` of a simulated path on a grid (left limits at jumps).
pub fn path_intensity<T: Real>(
    path: &EventPath<T>,
    kernel: &Kernel<T>,
    phi: &IntensityFn<T>,
    grid: &UniformGrid<T>,
) -> GridPath<T> {
    let mut exc = Excitation::new(kernel);
    let mut e = 0;
    let mut values = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let t = grid.time(i);
        while e < path.jump_times.len() && path.jump_times[e] < t {
            exc.absorb(path.jump_times[e]);
            e += 1;
        }
        values.push(phi.eval(path.epsilon * exc.value_at(t)));
    }
    GridPath { grid: *grid, values, derivative: None, nondecreasing: false }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_phi_gives_linear_limit() {
        let k = Kernel::exponential(1.0, 2.0).unwrap();
        let f = IntensityFn::constant(1.7).unwrap();
        let (z, rep) = solve_limit(&k, &f, 2.0, 64, &VolterraOptions::default()).unwrap();
        for i in 0..z.grid.len() {
            assert!(f64::abs(z.values[i] - 1.7 * z.grid.time(i)) < 1e-13);
        }
        assert_eq!(rep.iterations, 1);
    }

    #[test]
    fn zero_kernel_gives_phi0_rate() {
        let f = IntensityFn::linear(0.7, 3.0).unwrap();
        let (z, _) = solve_limit(&Kernel::zero(), &f, 1.0, 16, &VolterraOptions::default()).unwrap();
        assert!(f64::abs(z.last() - 0.7) < 1e-14);
    }

    #[test]
    fn bad_arguments() {
        let k = Kernel::exponential(1.0, 2.0).unwrap();
        let f = IntensityFn::constant(1.0).unwrap();
        assert!(solve_limit(&k, &f, 1.0, 1, &VolterraOptions::default()).is_err());
        let bad = VolterraOptions { tol: 0.0, ..Default::default() };
        assert!(solve_limit(&k, &f, 1.0, 8, &bad).is_err());
    }

    #[test]
    fn divergence_is_reported() {
        // α‖h‖ far above one on a long horizon: 2 iterations cannot reach 1e-10.
        let k = Kernel::constant(3.0).unwrap();
        let f = IntensityFn::linear(1.0, 1.0).unwrap();
        let opts = VolterraOptions { tol: 1e-10, max_iterations: 2 };
        match solve_limit(&k, &f, 2.0, 32, &opts) {
            Err(HawkesError::Divergence { iterations, residual }) => {
                assert_eq!(iterations, 2);
                assert!(residual > 1e-10);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_intensity_is_rejected() {
        let k = Kernel::exponential(-10.0, 0.5).unwrap();
        let f = IntensityFn::linear(1.0, 1.0).unwrap();
        assert!(matches!(
            solve_limit(&k, &f, 3.0, 64, &VolterraOptions::default()),
            Err(HawkesError::ModelViolation(_))
        ));
    }

    #[test]
    fn step_path_intensity_single_atom() {
        let g = UniformGrid::new(1.0, 4).unwrap();
        let k = Kernel::exponential(1.0, 2.0).unwrap();
        let f = IntensityFn::linear(1.0, 1.0).unwrap();
        // one jump of size 0.1 at t = 0.5 (node 2)
        let p = GridPath::new(g, vec![0.0, 0.0, 0.1, 0.1, 0.1]).unwrap();
        let lam = limit_intensity(&p, &k, &f);
        assert_eq!(lam.values[1], 1.0);
        for i in 3..5 {
            let want = 1.0 + 0.1 * f64::exp(-2.0 * (g.time(i) - 0.5));
            assert!(f64::abs(lam.values[i] - want) < 1e-14);
        }
        let ev = EventPath { epsilon: 0.1, horizon: 1.0, jump_times: vec![0.4], seed: 0, replica: 0 };
        let li = path_intensity(&ev, &k, &f, &g);
        assert_eq!(li.values[1], 1.0);
        assert!((li.values[2] - (1.0 + 0.1 * (-0.2f64).exp())).abs() < 1e-14);
    }

    #[test]
    fn zero_kernel_intensity_is_flat() {
        let g = UniformGrid::new(1.0, 8).unwrap();
        let f = IntensityFn::linear(2.0, 1.0).unwrap();
        let lam = limit_intensity(&GridPath::linear(g, 3.0), &Kernel::zero(), &f);
        assert!(lam.values.iter().all(|v| *v == 2.0));
    }
}
