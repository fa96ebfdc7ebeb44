//! Trapezoid discretization of `x(t_i) = ∫₀^{t_i} h(t_i − s) v(s) ds` on a uniform grid.
//!
//! Exponential kernels use an O(n) recursion; every other kernel falls back to the
//! O(n²) direct sum. Both compute the same quadrature.

use crate::grid::UniformGrid;
use crate::model::Kernel;
use crate::real::Real;

#[derive(Debug, Clone)]
pub struct Convolver<T> {
    dt: T,
    /// `h(kΔ)`, `k = 0..=n`.
    samples: Vec<T>,
    /// `(h(0), e^{-βΔ})` for exponential kernels.
    recursive: Option<(T, T)>,
}

impl<T: Real> Convolver<T> {
    pub fn new(kernel: &Kernel<T>, grid: &UniformGrid<T>) -> Self {
        let samples = (0..grid.len()).map(|k| kernel.eval(grid.time(k))).collect();
        let recursive = kernel.as_exponential().map(|(scale, beta)| (scale, (-beta * grid.dt()).exp()));
        Self { dt: grid.dt(), samples, recursive }
    }

    /// Forces the direct O(n²) sum (testing aid).
    pub fn direct(kernel: &Kernel<T>, grid: &UniformGrid<T>) -> Self {
        Self { recursive: None, ..Self::new(kernel, grid) }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `x_0 = 0`, `x_i = Δ(½h(t_i)v_0 + Σ_{0<j<i} h(t_i−t_j)v_j + ½h(0)v_i)`.
    pub fn apply(&self, v: &[T]) -> Vec<T> {
        let n = v.len();
        assert!(n <= self.samples.len(), "vector longer than the convolution grid");
        let half = T::lit(0.5);
        let mut x = vec![T::zero(); n];
        match self.recursive {
            Some((c, q)) => {
                // s = Σ_{j<i} w_j q^{i−j} v_j with w_0 = ½, w_j = 1.
                let mut s = T::zero();
                for i in 1..n {
                    let w = if i == 1 { half } else { T::one() };
                    s = q * (s + w * v[i - 1]);
                    x[i] = self.dt * c * (s + half * v[i]);
                }
            }
            None => {
                let h = &self.samples;
                for i in 1..n {
                    let mut acc = half * (h[i] * v[0] + h[0] * v[i]);
                    for j in 1..i {
                        acc += h[i - j] * v[j];
                    }
                    x[i] = self.dt * acc;
                }
            }
        }
        x
    }

    /// Adjoint of [`apply`](Self::apply): `y_j = Σ_i g_i K_{ij}`.
    pub fn apply_transpose(&self, g: &[T]) -> Vec<T> {
        let n = g.len();
        assert!(n <= self.samples.len(), "vector longer than the convolution grid");
        let half = T::lit(0.5);
        let mut y = vec![T::zero(); n];
        if n < 2 {
            return y;
        }
        match self.recursive {
            Some((c, q)) => {
                // r_j = Σ_{i>j} g_i q^{i−j}
                let mut r = T::zero();
                for j in (0..n).rev() {
                    let w = if j == 0 { half } else { T::one() };
                    let diag = if j >= 1 { half * g[j] } else { T::zero() };
                    y[j] = self.dt * c * (w * r + diag);
                    r = q * (r + g[j]);
                }
            }
            None => {
                let h = &self.samples;
                for i in 1..n {
                    let gi = g[i] * self.dt;
                    y[0] += gi * half * h[i];
                    for j in 1..i {
                        y[j] += gi * h[i - j];
                    }
                    y[i] += gi * half * h[0];
                }
            }
        }
        y
    }
}
