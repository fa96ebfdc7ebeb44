//! Discretized rate functionals on velocity vectors `v_i = η'(t_i)`.
//!
//! `I(v) = Σ w_i ℓ(v_i; φ((Kv)_i))` and `J(v) = ½ Σ w_i (v_i − a_i (Kv)_i)² / λ_i`, where `K` is
//! the trapezoid convolution with `h`, `w` the trapezoid weights, and `a`, `λ` are `φ'` and `φ`
//! along the limit path.

use serde::{Deserialize, Serialize};

use super::ell;
use crate::convolution::Convolver;
use crate::error::{HawkesError, Result};
use crate::grid::{GridPath, UniformGrid};
use crate::limit::excitation;
use crate::model::{IntensityFn, Kernel};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateKind {
    /// Large deviations, functional `I`.
    Ldp,
    /// Moderate deviations, functional `J`.
    Mdp,
}

/// `φ'` must be analytic or `φ` declared twice differentiable.
pub(crate) fn require_phi_prime<T: Real>(phi: &IntensityFn<T>) -> Result<()> {
    if phi.deriv(T::zero()).is_none() && phi.second_deriv_bound().is_none() {
        return Err(HawkesError::Capability("phi' is unavailable and phi is not declared twice differentiable".into()));
    }
    Ok(())
}

/// A rate functional frozen on one grid, evaluated on velocity vectors.
#[derive(Debug, Clone)]
pub struct RateFunctional<T> {
    kind: RateKind,
    grid: UniformGrid<T>,
    weights: Vec<T>,
    conv: Convolver<T>,
    phi: IntensityFn<T>,
    drift: Vec<T>,
    lambda: Vec<T>,
}

impl<T: Real> RateFunctional<T> {
    pub fn ldp(kernel: &Kernel<T>, phi: &IntensityFn<T>, grid: UniformGrid<T>) -> Self {
        Self {
            kind: RateKind::Ldp,
            grid,
            weights: grid.trapezoid_weights(),
            conv: Convolver::new(kernel, &grid),
            phi: phi.clone(),
            drift: Vec::new(),
            lambda: Vec::new(),
        }
    }

    /// `J` around the limit path `z0` (which fixes the grid).
    pub fn mdp(kernel: &Kernel<T>, phi: &IntensityFn<T>, z0: &GridPath<T>) -> Result<Self> {
        require_phi_prime(phi)?;
        if z0.derivative.is_none() {
            return Err(HawkesError::InvalidArgument("Z0 must carry its derivative (use solve_limit)".into()));
        }
        let x0 = excitation(z0, kernel);
        let mut drift = Vec::with_capacity(x0.len());
        let mut lambda = Vec::with_capacity(x0.len());
        for x in x0 {
            let l = phi.eval(x);
            if !(l > T::zero()) {
                return Err(HawkesError::Domain(format!("phi({x}) = {l} must be > 0")));
            }
            drift.push(phi.deriv_or_fd(x));
            lambda.push(l);
        }
        let grid = z0.grid;
        Ok(Self {
            kind: RateKind::Mdp,
            grid,
            weights: grid.trapezoid_weights(),
            conv: Convolver::new(kernel, &grid),
            phi: phi.clone(),
            drift,
            lambda,
        })
    }

    pub fn kind(&self) -> RateKind {
        self.kind
    }

    pub fn grid(&self) -> &UniformGrid<T> {
        &self.grid
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    fn check_len(&self, v: &[T]) -> Result<()> {
        if v.len() != self.grid.len() {
            return Err(HawkesError::InvalidArgument(format!(
                "velocity has {} entries, grid has {}",
                v.len(),
                self.grid.len()
            )));
        }
        Ok(())
    }

    fn reference(&self, x: &[T]) -> Result<Vec<T>> {
        x.iter()
            .map(|&xi| {
                let y = self.phi.eval(xi);
                if y > T::zero() {
                    Ok(y)
                } else {
                    Err(HawkesError::Domain(format!("phi({xi}) = {y} must be > 0")))
                }
            })
            .collect()
    }

    /// Value at `v`; `+∞` when `v` has a negative entry for `I`.
    pub fn value(&self, v: &[T]) -> Result<T> {
        self.check_len(v)?;
        match self.kind {
            RateKind::Ldp => {
                if v.iter().any(|x| *x < T::zero()) {
                    return Ok(T::infinity());
                }
                let y = self.reference(&self.conv.apply(v))?;
                let mut acc = T::zero();
                for i in 0..v.len() {
                    acc += self.weights[i] * ell(v[i], y[i])?;
                }
                Ok(acc)
            }
            RateKind::Mdp => {
                let u = self.conv.apply(v);
                let mut acc = T::zero();
                for i in 0..v.len() {
                    let r = v[i] - self.drift[i] * u[i];
                    acc += self.weights[i] * r * r / self.lambda[i];
                }
                Ok(acc * T::lit(0.5))
            }
        }
    }

    /// Exact gradient of [`value`](Self::value) with respect to `v`.
    pub fn gradient(&self, v: &[T]) -> Result<Vec<T>> {
        self.check_len(v)?;
        let w = &self.weights;
        match self.kind {
            RateKind::Ldp => {
                if v.iter().any(|x| *x < T::zero()) {
                    return Err(HawkesError::Domain("gradient of I needs nonnegative velocities".into()));
                }
                let x = self.conv.apply(v);
                let y = self.reference(&x)?;
                let tiny = T::min_positive_value();
                let g: Vec<T> =
                    (0..v.len()).map(|i| w[i] * (T::one() - v[i] / y[i]) * self.phi.deriv_or_fd(x[i])).collect();
                let back = self.conv.apply_transpose(&g);
                Ok((0..v.len()).map(|k| w[k] * (v[k].max(tiny) / y[k]).ln() + back[k]).collect())
            }
            RateKind::Mdp => {
                let u = self.conv.apply(v);
                let s: Vec<T> =
                    (0..v.len()).map(|i| w[i] * (v[i] - self.drift[i] * u[i]) / self.lambda[i]).collect();
                let g: Vec<T> = (0..v.len()).map(|i| s[i] * self.drift[i]).collect();
                let back = self.conv.apply_transpose(&g);
                Ok((0..v.len()).map(|k| s[k] - back[k]).collect())
            }
        }
    }

    fn fd_step(&self, vk: T) -> (T, bool) {
        let h = T::epsilon().cbrt() * vk.abs().max(T::one());
        match self.kind {
            RateKind::Ldp if vk <= T::zero() => (h, false),
            RateKind::Ldp => (h.min(vk * T::lit(0.5)), true),
            RateKind::Mdp => (h, true),
        }
    }

    /// Central differences (forward at `v_k = 0` for `I`) on the listed components.
    pub fn fd_gradient(&self, v: &[T], components: &[usize]) -> Result<Vec<T>> {
        self.check_len(v)?;
        let mut work = v.to_vec();
        let f0 = self.value(v)?;
        components
            .iter()
            .map(|&k| {
                let (h, central) = self.fd_step(v[k]);
                work[k] = v[k] + h;
                let fp = self.value(&work)?;
                let d = if central {
                    work[k] = v[k] - h;
                    let fm = self.value(&work)?;
                    (fp - fm) / (h + h)
                } else {
                    (fp - f0) / h
                };
                work[k] = v[k];
                Ok(d)
            })
            .collect()
    }

    /// Largest discrepancy between the analytic and finite-difference gradients on up to
    /// `max_components` evenly spaced components, relative to the larger gradient sup-norm.
    /// The denominator is floored at `10⁵` times the finite-difference rounding level so that
    /// a vanishing gradient does not turn rounding noise into a mismatch.
    pub fn gradient_check(&self, v: &[T], max_components: usize) -> Result<f64> {
        let n = v.len();
        let m = max_components.clamp(1, n);
        let components: Vec<usize> =
            if m >= n { (0..n).collect() } else { (0..m).map(|i| i * (n - 1) / (m - 1).max(1)).collect() };
        let g = self.gradient(v)?;
        let fd = self.fd_gradient(v, &components)?;
        let f0 = self.value(v)?.as_f64().abs();
        let mut scale: f64 = 0.0;
        let mut worst: f64 = 0.0;
        let mut h_min = f64::INFINITY;
        for (j, &k) in components.iter().enumerate() {
            let (a, b) = (g[k].as_f64(), fd[j].as_f64());
            scale = scale.max(a.abs()).max(b.abs());
            worst = worst.max((a - b).abs());
            h_min = h_min.min(self.fd_step(v[k]).0.as_f64());
        }
        let floor = 1e5 * 4.0 * T::epsilon().as_f64() * (1.0 + f0) / h_min;
        Ok(worst / scale.max(floor))
    }
}

/// `I(η)`; `+∞` when `η` is not in `AC₀⁺`.
pub fn rate_i<T: Real>(eta: &GridPath<T>, kernel: &Kernel<T>, phi: &IntensityFn<T>) -> Result<T> {
    if !eta.is_ac0_plus() {
        return Ok(T::infinity());
    }
    let v: Vec<T> = eta.derivative.as_ref().expect("AC0 paths carry a derivative").iter().map(|x| x.max(T::zero())).collect();
    RateFunctional::ldp(kernel, phi, eta.grid).value(&v)
}

/// `J(η)` around `z0`; `+∞` when `η` is not in `AC₀`.
pub fn rate_j<T: Real>(eta: &GridPath<T>, kernel: &Kernel<T>, phi: &IntensityFn<T>, z0: &GridPath<T>) -> Result<T> {
    if eta.grid != z0.grid {
        return Err(HawkesError::InvalidArgument("eta and Z0 must share a grid".into()));
    }
    let f = RateFunctional::mdp(kernel, phi, z0)?;
    if !eta.is_ac0() {
        return Ok(T::infinity());
    }
    f.value(eta.derivative.as_ref().expect("AC0 paths carry a derivative"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limit::{solve_limit, VolterraOptions};

    fn grid(n: usize) -> UniformGrid<f64> {
        UniformGrid::new(1.0, n).unwrap()
    }

    #[test]
    fn poisson_reduction_of_i() {
        let f = IntensityFn::constant(1.5).unwrap();
        let eta = GridPath::from_velocity(grid(64), vec![3.0; 65]).unwrap();
        let i = rate_i(&eta, &Kernel::zero(), &f).unwrap();
        assert!((i - super::super::ell(3.0, 1.5).unwrap()).abs() < 1e-13);
    }

    #[test]
    fn i_vanishes_on_the_limit() {
        let k = Kernel::exponential(1.0, 2.0).unwrap();
        let f = IntensityFn::linear(1.0, 1.0).unwrap();
        let (z0, _) = solve_limit(&k, &f, 1.0, 256, &VolterraOptions::default()).unwrap();
        assert!(rate_i(&z0, &k, &f).unwrap() < 1e-12);
    }

    #[test]
    fn off_domain_is_infinite() {
        let f = IntensityFn::constant(1.0).unwrap();
        let g = grid(8);
        let mut v = vec![1.0; 9];
        v[3] = -1.0;
        let eta = GridPath::from_velocity(g, v).unwrap();
        assert_eq!(rate_i(&eta, &Kernel::zero(), &f).unwrap(), f64::INFINITY);
        let stepped = GridPath::new(g, (0..9).map(|i| i as f64).collect()).unwrap();
        assert_eq!(rate_i(&stepped, &Kernel::zero(), &f).unwrap(), f64::INFINITY);
        let (z0, _) = solve_limit(&Kernel::zero(), &f, 1.0, 8, &VolterraOptions::default()).unwrap();
        assert_eq!(rate_j(&stepped, &Kernel::zero(), &f, &z0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn j_poisson_reduction() {
        let c = 2.0;
        let f = IntensityFn::constant(c).unwrap();
        let (z0, _) = solve_limit(&Kernel::zero(), &f, 1.0, 32, &VolterraOptions::default()).unwrap();
        let eta = GridPath::from_velocity(z0.grid, vec![1.3; 33]).unwrap();
        let j = rate_j(&eta, &Kernel::zero(), &f, &z0).unwrap();
        assert!(f64::abs(j - 1.3 * 1.3 / (2.0 * c)) < 1e-12);
        let zero = GridPath::from_velocity(z0.grid, vec![0.0; 33]).unwrap();
        assert_eq!(rate_j(&zero, &Kernel::zero(), &f, &z0).unwrap(), 0.0);
    }

    #[test]
    fn domain_error_when_phi_vanishes() {
        let f = IntensityFn::constant(0.0).unwrap();
        let eta = GridPath::from_velocity(grid(4), vec![1.0; 5]).unwrap();
        assert!(matches!(rate_i(&eta, &Kernel::zero(), &f), Err(HawkesError::Domain(_))));
    }

    #[test]
    fn gradients_match_differences() {
        let k = Kernel::polynomial_cutoff(0.7, 0.5, 2.0).unwrap();
        let f = IntensityFn::soft_saturating(1.5, 1.0, 0.8).unwrap();
        let (z0, _) = solve_limit(&k, &f, 1.0, 40, &VolterraOptions::default()).unwrap();
        let v: Vec<f64> = (0..41).map(|i| 1.0 + 0.5 * (i as f64 * 0.3).sin()).collect();
        let ldp = RateFunctional::ldp(&k, &f, z0.grid);
        assert!(ldp.gradient_check(&v, 100).unwrap() < 1e-6);
        let mdp = RateFunctional::mdp(&k, &f, &z0).unwrap();
        assert!(mdp.gradient_check(&v, 100).unwrap() < 1e-6);
    }

    #[test]
    fn table_phi_needs_a_derivative_for_j() {
        let f = IntensityFn::table(vec![0.0, 1.0], vec![1.0, 2.0]).unwrap();
        let (z0, _) = solve_limit(&Kernel::zero(), &f, 1.0, 8, &VolterraOptions::default()).unwrap();
        assert!(matches!(RateFunctional::mdp(&Kernel::zero(), &f, &z0), Err(HawkesError::Capability(_))));
    }
}
