use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{HawkesError, Result};
use crate::real::Real;

/// Uniform time grid `t_i = i·T/steps`, `i = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid<T> {
    pub horizon: T,
    pub steps: usize,
}

impl<T: Real> UniformGrid<T> {
    pub fn new(horizon: T, steps: usize) -> Result<Self> {
        if steps < 2 {
            return Err(HawkesError::InvalidArgument(format!("grid needs at least 2 steps, got {steps}")));
        }
        if !(horizon > T::zero()) || !horizon.is_finite() {
            return Err(HawkesError::InvalidArgument(format!("horizon must be > 0, got {horizon}")));
        }
        Ok(Self { horizon, steps })
    }

    #[inline]
    pub fn dt(&self) -> T {
        self.horizon / T::from_usize_lossy(self.steps)
    }

    #[inline]
    pub fn time(&self, i: usize) -> T {
        if i == self.steps {
            self.horizon
        } else {
            self.horizon * T::from_usize_lossy(i) / T::from_usize_lossy(self.steps)
        }
    }

    /// Number of nodes (`steps + 1`).
    #[inline]
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn times(&self) -> Vec<T> {
        (0..self.len()).map(|i| self.time(i)).collect()
    }

    /// Nearest node index to `t`.
    pub fn nearest_index(&self, t: T) -> usize {
        let x = (t / self.dt()).round().to_usize().unwrap_or(0);
        x.min(self.steps)
    }

    /// Trapezoid weights `Δ·(½, 1, …, 1, ½)`.
    pub fn trapezoid_weights(&self) -> Vec<T> {
        let dt = self.dt();
        let mut w = vec![dt; self.len()];
        w[0] = dt * T::lit(0.5);
        w[self.steps] = dt * T::lit(0.5);
        w
    }
}

/// A path sampled on a uniform grid, optionally with its derivative at the nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPath<T> {
    pub grid: UniformGrid<T>,
    pub values: Vec<T>,
    pub derivative: Option<Vec<T>>,
    /// Set when the path is known to be nondecreasing.
    pub nondecreasing: bool,
}

impl<T: Real> GridPath<T> {
    pub fn new(grid: UniformGrid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(HawkesError::InvalidArgument(format!(
                "path has {} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(HawkesError::InvalidArgument("path values must be finite".into()));
        }
        Ok(Self { grid, values, derivative: None, nondecreasing: false })
    }

    pub fn zeros(grid: UniformGrid<T>) -> Self {
        Self { grid, values: vec![T::zero(); grid.len()], derivative: Some(vec![T::zero(); grid.len()]), nondecreasing: true }
    }

    /// Absolutely continuous path `η(t) = ∫₀ᵗ v` from node velocities, integrated by
    /// cumulative trapezoid.
    pub fn from_velocity(grid: UniformGrid<T>, velocity: Vec<T>) -> Result<Self> {
        if velocity.len() != grid.len() {
            return Err(HawkesError::InvalidArgument(format!(
                "velocity has {} values for a grid of {} nodes",
                velocity.len(),
                grid.len()
            )));
        }
        let values = cumulative_trapezoid(&velocity, grid.dt());
        let nondecreasing = velocity.iter().all(|v| *v >= T::zero());
        Ok(Self { grid, values, derivative: Some(velocity), nondecreasing })
    }

    /// Linear-in-time path `η(t) = slope·t`.
    pub fn linear(grid: UniformGrid<T>, slope: T) -> Self {
        let values = grid.times().into_iter().map(|t| slope * t).collect();
        Self { grid, values, derivative: Some(vec![slope; grid.len()]), nondecreasing: slope >= T::zero() }
    }

    pub fn with_derivative(mut self, derivative: Vec<T>) -> Result<Self> {
        if derivative.len() != self.grid.len() {
            return Err(HawkesError::InvalidArgument("derivative length mismatch".into()));
        }
        self.derivative = Some(derivative);
        Ok(self)
    }

    pub fn last(&self) -> T {
        *self.values.last().expect("non-empty grid")
    }

    /// Linear interpolation between nodes, clamped to `[0, T]`.
    pub fn interpolate(&self, t: T) -> T {
        let dt = self.grid.dt();
        if t <= T::zero() {
            return self.values[0];
        }
        if t >= self.grid.horizon {
            return self.last();
        }
        let s = t / dt;
        let i = s.floor().to_usize().unwrap_or(0).min(self.grid.steps - 1);
        let w = s - T::from_usize_lossy(i);
        self.values[i] + w * (self.values[i + 1] - self.values[i])
    }

    fn scale(&self) -> T {
        self.values.iter().fold(T::one(), |m, v| m.max(v.abs()))
    }

    /// Member of `AC₀[0,T]`: derivative supplied and `η(0) = 0`.
    pub fn is_ac0(&self) -> bool {
        self.derivative.is_some() && self.values[0].abs() <= T::lit(1e-12) * self.scale()
    }

    /// Member of `AC₀⁺[0,T]`: additionally nondecreasing with nonnegative derivative.
    pub fn is_ac0_plus(&self) -> bool {
        let tol = T::lit(1e-12) * self.scale();
        self.is_ac0()
            && self.derivative.as_ref().map(|d| d.iter().all(|v| *v >= -tol)).unwrap_or(false)
            && self.values.windows(2).all(|w| w[1] >= w[0] - tol)
    }

    pub fn sup_distance(&self, other: &GridPath<T>) -> Result<T> {
        if self.grid != other.grid {
            return Err(HawkesError::InvalidArgument("paths live on different grids".into()));
        }
        Ok(self.values.iter().zip(&other.values).fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs())))
    }

    /// Writes `t,value,derivative` rows (RFC 4180, header row).
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["t", "value", "derivative"])?;
        for i in 0..self.grid.len() {
            let d = self.derivative.as_ref().map(|d| d[i].to_string()).unwrap_or_default();
            w.write_record([self.grid.time(i).to_string(), self.values[i].to_string(), d])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `out[i] = ∫₀^{t_i} v` by the trapezoid rule.
pub fn cumulative_trapezoid<T: Real>(v: &[T], dt: T) -> Vec<T> {
    let half = T::lit(0.5) * dt;
    let mut out = Vec::with_capacity(v.len());
    let mut acc = T::zero();
    out.push(acc);
    for w in v.windows(2) {
        acc += half * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_basics() {
        let g = UniformGrid::new(1.0, 4).unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(g.time(4), 1.0);
        assert_eq!(g.dt(), 0.25);
        assert_eq!(g.nearest_index(0.5), 2);
        assert_eq!(g.trapezoid_weights(), vec![0.125, 0.25, 0.25, 0.25, 0.125]);
        assert!(UniformGrid::new(1.0, 1).is_err());
        assert!(UniformGrid::new(0.0, 8).is_err());
    }

    #[test]
    fn velocity_path_and_tags() {
        let g = UniformGrid::new(2.0, 4).unwrap();
        let p = GridPath::from_velocity(g, vec![1.0; 5]).unwrap();
        assert_eq!(p.values, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert!(p.is_ac0_plus());
        let q = GridPath::from_velocity(g, vec![1.0, -1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(q.is_ac0() && !q.is_ac0_plus());
        let r = GridPath::new(g, vec![1.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(!r.is_ac0());
        assert_eq!(p.interpolate(0.25), 0.25);
    }

    #[test]
    fn csv_output() {
        let dir = std::env::temp_dir().join(format!("gridpath-csv-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let f = dir.join("p.csv");
        GridPath::linear(UniformGrid::new(1.0, 2).unwrap(), 2.0).write_csv(&f).unwrap();
        let s = std::fs::read_to_string(&f).unwrap();
        assert_eq!(s, "t,value,derivative\n0,0,2\n0.5,1,2\n1,2,2\n");
    }
}
