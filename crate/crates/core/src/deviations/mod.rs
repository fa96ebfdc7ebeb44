//! Large and moderate deviation rate functionals, their constrained minimization, and
//! rare-event tail estimators.

pub mod optimize;
pub mod rate;
pub mod tail;

use serde::{Deserialize, Serialize};

use crate::error::{HawkesError, Result};
use crate::real::Real;

pub use optimize::{minimize_rate, ConstraintKind, ConstraintSpec, OptimParams, OptimReport};
pub use rate::{rate_i, rate_j, RateFunctional, RateKind};
pub use tail::{tail_probability, TailEstimate, TailMethod, TailRequest};

/// `ℓ(x; y) = x log(x/y) − x + y` with `ℓ(0; y) = y`.
pub fn ell<T: Real>(x: T, y: T) -> Result<T> {
    if !(y > T::zero()) {
        return Err(HawkesError::Domain(format!("ell needs y > 0, got y = {y}")));
    }
    if !(x >= T::zero()) {
        return Err(HawkesError::Domain(format!("ell needs x >= 0, got x = {x}")));
    }
    if x == T::zero() {
        return Ok(y);
    }
    Ok((x * (x / y).ln() - x + y).max(T::zero()))
}

/// A validated argument pair of [`ell`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> RatePoint<T> {
    pub fn new(x: T, y: T) -> Result<Self> {
        ell(x, y)?;
        Ok(Self { x, y })
    }

    pub fn ell(&self) -> T {
        ell(self.x, self.y).expect("validated on construction")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ell_examples() {
        assert_eq!(ell(1.0, 1.0).unwrap(), 0.0);
        assert_eq!(ell(2.5, 2.5).unwrap(), 0.0);
        assert_eq!(ell(0.0, 1.0).unwrap(), 1.0);
        assert!((ell(2.0f64, 1.0).unwrap() - 0.386_294_361_119_890_6).abs() < 1e-15);
    }

    #[test]
    fn ell_domain() {
        assert!(matches!(ell(1.0, 0.0), Err(HawkesError::Domain(_))));
        assert!(matches!(ell(1.0, -1.0), Err(HawkesError::Domain(_))));
        assert!(matches!(ell(-0.1, 1.0), Err(HawkesError::Domain(_))));
        assert!(RatePoint::new(0.0, 0.0).is_err());
        assert!((RatePoint::new(3.0f32, 1.0).unwrap().ell() - (3.0 * 3f32.ln() - 2.0)).abs() < 1e-6);
    }
}
