//! Nonlinear Hawkes processes in the large-intensity / small-excitation regime.
//!
//! The crate simulates the scaled process `Z^ε = εN^ε` and the mean process of exchangeable
//! mean-field networks, computes the deterministic limit `Z⁰`, the Gaussian fluctuation
//! limit, and the large/moderate deviation rate functionals, and provides the Monte Carlo
//! estimators used to check the limit theorems empirically.
//!
//! All numerical code is generic over [`Real`]; the `*64` aliases below fix `f64`.

pub mod convolution;
pub mod deviations;
pub mod error;
pub mod fluctuation;
pub mod grid;
pub mod limit;
pub mod model;
pub mod quadrature;
pub mod real;
pub mod report;
pub mod rng;
pub mod simulate;
pub mod stats;

pub use error::{HawkesError, Result};
pub use grid::{GridPath, UniformGrid};
pub use model::{Assumption, IntensityFn, Kernel, KernelKind, ModelAudit, PhiKind};
pub use real::Real;
pub use report::{Check, ExperimentReport};
pub use simulate::{EventPath, MultiEventPath, SimConfig};

pub type Kernel64 = Kernel<f64>;
pub type IntensityFn64 = IntensityFn<f64>;
pub type GridPath64 = GridPath<f64>;
pub type EventPath64 = EventPath<f64>;
pub type SimConfig64 = SimConfig<f64>;
pub type Kernel32 = Kernel<f32>;
pub type IntensityFn32 = IntensityFn<f32>;
pub type GridPath32 = GridPath<f32>;

/// Semantic version of every JSON/CSV format written by the crate.
pub const SCHEMA_VERSION: u32 = 1;
