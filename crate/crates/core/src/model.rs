//! Exciting kernels `h`, intensity functions `φ`, and the numeric audit of the
//! regularity assumptions the limit theorems rely on.

use serde::{Deserialize, Serialize};

use crate::error::{HawkesError, Result};
use crate::quadrature::{integrate, QuadOptions};
use crate::real::Real;

/// Default number of probe points for the numeric audits.
pub const DEFAULT_PROBE_POINTS: usize = 2048;

/// Parametric family of an exciting function `h : [0, ∞) → ℝ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum KernelKind<T> {
    /// `scale · e^{-beta t}`; a negative `scale` gives an inhibitory kernel.
    Exponential { scale: T, beta: T },
    /// `value` for every `t ≥ 0`.
    Constant { value: T },
    /// `scale · (1 - t/cutoff)^power` on `[0, cutoff)`, zero afterwards.
    PolynomialCutoff { scale: T, cutoff: T, power: T },
    /// Piecewise-linear interpolation of `(times, values)`, held constant after the last knot.
    Table { times: Vec<T>, values: Vec<T> },
}

/// Validated exciting function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelKind<T>", into = "KernelKind<T>")]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct Kernel<T> {
    kind: KernelKind<T>,
}

impl<T: Real> TryFrom<KernelKind<T>> for Kernel<T> {
    type Error = HawkesError;
    fn try_from(kind: KernelKind<T>) -> Result<Self> {
        Kernel::new(kind)
    }
}

impl<T: Real> From<Kernel<T>> for KernelKind<T> {
    fn from(k: Kernel<T>) -> Self {
        k.kind
    }
}

fn finite<T: Real>(name: &str, v: T) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(HawkesError::InvalidKernel(format!("{name} must be finite, got {v}")))
    }
}

impl<T: Real> Kernel<T> {
    pub fn new(kind: KernelKind<T>) -> Result<Self> {
        match &kind {
            KernelKind::Exponential { scale, beta } => {
                finite("scale", *scale)?;
                finite("beta", *beta)?;
                if *beta <= T::zero() {
                    return Err(HawkesError::InvalidKernel(format!("beta must be > 0, got {beta}")));
                }
            }
            KernelKind::Constant { value } => finite("value", *value)?,
            KernelKind::PolynomialCutoff { scale, cutoff, power } => {
                finite("scale", *scale)?;
                finite("cutoff", *cutoff)?;
                finite("power", *power)?;
                if *cutoff <= T::zero() || *power <= T::zero() {
                    return Err(HawkesError::InvalidKernel(
                        "cutoff and power must be > 0".to_string(),
                    ));
                }
            }
            KernelKind::Table { times, values } => {
                if times.len() < 2 || times.len() != values.len() {
                    return Err(HawkesError::InvalidKernel(
                        "table needs at least two knots and matching lengths".to_string(),
                    ));
                }
                if times[0] != T::zero() {
                    return Err(HawkesError::InvalidKernel("first table knot must be t = 0".into()));
                }
                if times.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(HawkesError::InvalidKernel("table knots must be strictly increasing".into()));
                }
                for (t, v) in times.iter().zip(values) {
                    finite("table knot", *t)?;
                    finite("table value", *v)?;
                }
            }
        }
        Ok(Self { kind })
    }

    pub fn exponential(scale: T, beta: T) -> Result<Self> {
        Self::new(KernelKind::Exponential { scale, beta })
    }

    pub fn constant(value: T) -> Result<Self> {
        Self::new(KernelKind::Constant { value })
    }

    pub fn zero() -> Self {
        Self { kind: KernelKind::Constant { value: T::zero() } }
    }

    pub fn polynomial_cutoff(scale: T, cutoff: T, power: T) -> Result<Self> {
        Self::new(KernelKind::PolynomialCutoff { scale, cutoff, power })
    }

    pub fn table(times: Vec<T>, values: Vec<T>) -> Result<Self> {
        Self::new(KernelKind::Table { times, values })
    }

    pub fn kind(&self) -> &KernelKind<T> {
        &self.kind
    }

    /// `(scale, beta)` when the kernel is exponential, enabling O(1) recursive updates.
    pub fn as_exponential(&self) -> Option<(T, T)> {
        match self.kind {
            KernelKind::Exponential { scale, beta } => Some((scale, beta)),
            KernelKind::Constant { value } if value == T::zero() => None,
            _ => None,
        }
    }

    /// True when `h ≥ 0` everywhere, so that excitations stay nonnegative.
    pub fn is_nonnegative(&self) -> bool {
        match &self.kind {
            KernelKind::Exponential { scale, .. } => *scale >= T::zero(),
            KernelKind::Constant { value } => *value >= T::zero(),
            KernelKind::PolynomialCutoff { scale, .. } => *scale >= T::zero(),
            KernelKind::Table { values, .. } => values.iter().all(|v| *v >= T::zero()),
        }
    }

    /// True when `h ≡ 0`.
    pub fn is_zero(&self) -> bool {
        match &self.kind {
            KernelKind::Exponential { scale, .. } => *scale == T::zero(),
            KernelKind::Constant { value } => *value == T::zero(),
            KernelKind::PolynomialCutoff { scale, .. } => *scale == T::zero(),
            KernelKind::Table { values, .. } => values.iter().all(|v| *v == T::zero()),
        }
    }

    pub fn eval(&self, t: T) -> T {
        if t < T::zero() {
            return T::zero();
        }
        match &self.kind {
            KernelKind::Exponential { scale, beta } => *scale * (-*beta * t).exp(),
            KernelKind::Constant { value } => *value,
            KernelKind::PolynomialCutoff { scale, cutoff, power } => {
                if t >= *cutoff {
                    T::zero()
                } else {
                    *scale * (T::one() - t / *cutoff).powf(*power)
                }
            }
            KernelKind::Table { times, values } => {
                let (i, w) = locate(times, t);
                match w {
                    None => values[i],
                    Some(w) => values[i] + w * (values[i + 1] - values[i]),
                }
            }
        }
    }

    /// Pointwise derivative `h'(t)`; `None` when the kind is not differentiable.
    pub fn deriv(&self, t: T) -> Option<T> {
        if !self.has_deriv() {
            return None;
        }
        let t = t.max(T::zero());
        Some(match &self.kind {
            KernelKind::Exponential { scale, beta } => -*beta * *scale * (-*beta * t).exp(),
            KernelKind::Constant { .. } => T::zero(),
            KernelKind::PolynomialCutoff { scale, cutoff, power } => {
                if t >= *cutoff {
                    T::zero()
                } else {
                    -*scale * *power / *cutoff * (T::one() - t / *cutoff).powf(*power - T::one())
                }
            }
            KernelKind::Table { .. } => unreachable!(),
        })
    }

    /// Table kernels are only piecewise differentiable and carry no derivative;
    /// polynomial cutoffs with `power < 1` have an unbounded derivative.
    pub fn has_deriv(&self) -> bool {
        match &self.kind {
            KernelKind::Table { .. } => false,
            KernelKind::PolynomialCutoff { power, .. } => *power >= T::one(),
            _ => true,
        }
    }

    /// Points in `(0, horizon)` where `h` or `h'` may fail to be smooth.
    pub fn breakpoints(&self, horizon: T) -> Vec<T> {
        match &self.kind {
            KernelKind::PolynomialCutoff { cutoff, .. } if *cutoff < horizon => vec![*cutoff],
            KernelKind::Table { times, .. } => {
                times.iter().copied().filter(|&t| t > T::zero() && t < horizon).collect()
            }
            _ => Vec::new(),
        }
    }

    /// `sup_{[0,T]} |h|`, exact for every built-in kind.
    pub fn sup_abs(&self, horizon: T) -> T {
        match &self.kind {
            KernelKind::Exponential { scale, .. } => scale.abs(),
            KernelKind::Constant { value } => value.abs(),
            KernelKind::PolynomialCutoff { scale, .. } => scale.abs(),
            KernelKind::Table { times, values } => {
                // Piecewise linear: the sup sits on a knot or at the horizon.
                let mut m = self.eval(horizon).abs();
                for (t, v) in times.iter().zip(values) {
                    if *t <= horizon {
                        m = m.max(v.abs());
                    }
                }
                m
            }
        }
    }

    /// `sup_{[0,T]} |h'|` estimated on a probe grid (exact for monotone derivatives, which
    /// covers all built-in differentiable kinds). `None` without a derivative.
    pub fn sup_abs_deriv(&self, horizon: T, probes: usize) -> Option<T> {
        if !self.has_deriv() {
            return None;
        }
        let n = probes.max(2);
        let mut m = T::zero();
        for i in 0..n {
            let t = horizon * T::from_usize_lossy(i) / T::from_usize_lossy(n - 1);
            m = m.max(self.deriv(t)?.abs());
        }
        for b in self.breakpoints(horizon) {
            m = m.max(self.deriv(b)?.abs());
        }
        Some(m)
    }

    /// Checks the supplied derivative against central differences on a probe grid,
    /// skipping points within one difference step of a breakpoint. Returns the max
    /// absolute discrepancy.
    pub fn derivative_discrepancy(&self, horizon: T, probes: usize) -> Option<T> {
        if !self.has_deriv() {
            return None;
        }
        let n = probes.max(2);
        let step = T::lit(1e-6) * horizon.max(T::one());
        let breaks = self.breakpoints(horizon);
        let mut worst = T::zero();
        for i in 1..n - 1 {
            let t = horizon * T::from_usize_lossy(i) / T::from_usize_lossy(n - 1);
            if t <= step || breaks.iter().any(|b| (*b - t).abs() <= T::lit(2.0) * step) {
                continue;
            }
            let fd = (self.eval(t + step) - self.eval(t - step)) / (step + step);
            worst = worst.max((fd - self.deriv(t)?).abs());
        }
        Some(worst)
    }
}

/// Index of the segment containing `x` and its interpolation weight; `None` weight
/// means `x` is clamped to a table end.
fn locate<T: Real>(xs: &[T], x: T) -> (usize, Option<T>) {
    let last = xs.len() - 1;
    if x <= xs[0] {
        return (0, None);
    }
    if x >= xs[last] {
        return (last, None);
    }
    let i = xs.partition_point(|&k| k <= x) - 1;
    (i, Some((x - xs[i]) / (xs[i + 1] - xs[i])))
}

/// `‖h‖_{L¹[0,T]} = ∫₀ᵀ |h(t)| dt` by adaptive Gauss–Kronrod quadrature.
pub fn kernel_l1_norm<T: Real>(kernel: &Kernel<T>, horizon: T) -> Result<T> {
    if !(horizon > T::zero()) || !horizon.is_finite() {
        return Err(HawkesError::InvalidArgument(format!("horizon must be > 0, got {horizon}")));
    }
    let mut breaks = kernel.breakpoints(horizon);
    // Sign changes of a table kernel are kinks of |h|.
    if let KernelKind::Table { times, values } = kernel.kind() {
        for i in 0..times.len() - 1 {
            if values[i] * values[i + 1] < T::zero() {
                let z = times[i] + values[i] / (values[i] - values[i + 1]) * (times[i + 1] - times[i]);
                breaks.push(z);
            }
        }
    }
    let opts = QuadOptions { rel_tol: 1e-11, abs_tol: 1e-15, max_depth: 40 };
    integrate(|t| kernel.eval(t).abs(), T::zero(), horizon, &breaks, &opts)
}

/// Parametric family of the intensity function `φ : ℝ → ℝ⁺`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PhiKind<T> {
    /// `nu + slope · x`.
    Linear { nu: T, slope: T },
    /// `value`.
    Constant { value: T },
    /// `base + amplitude · tanh(rate · x)`.
    SoftSaturating { base: T, amplitude: T, rate: T },
    /// Piecewise-linear interpolation of `(xs, values)`, clamped outside the table.
    Table { xs: Vec<T>, values: Vec<T> },
}

/// Intensity function with its declared Lipschitz constant and lower bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PhiKind<T>", into = "PhiKind<T>")]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct IntensityFn<T> {
    kind: PhiKind<T>,
    lipschitz_alpha: T,
    inf_value: T,
    second_deriv_bound: Option<T>,
}

impl<T: Real> TryFrom<PhiKind<T>> for IntensityFn<T> {
    type Error = HawkesError;
    fn try_from(kind: PhiKind<T>) -> Result<Self> {
        IntensityFn::new(kind)
    }
}

impl<T: Real> From<IntensityFn<T>> for PhiKind<T> {
    fn from(f: IntensityFn<T>) -> Self {
        f.kind
    }
}

fn check_phi<T: Real>(name: &str, v: T) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(HawkesError::InvalidIntensity(format!("{name} must be finite, got {v}")))
    }
}

impl<T: Real> IntensityFn<T> {
    /// Builds `φ` and derives `α`, `inf_{x≥0} φ` and `sup|φ''|` from the parameters.
    pub fn new(kind: PhiKind<T>) -> Result<Self> {
        let (alpha, inf_value, second) = match &kind {
            PhiKind::Linear { nu, slope } => {
                check_phi("nu", *nu)?;
                check_phi("slope", *slope)?;
                if *nu < T::zero() || *slope < T::zero() {
                    return Err(HawkesError::InvalidIntensity(
                        "linear intensity needs nu >= 0 and slope >= 0".into(),
                    ));
                }
                (*slope, *nu, Some(T::zero()))
            }
            PhiKind::Constant { value } => {
                check_phi("value", *value)?;
                if *value < T::zero() {
                    return Err(HawkesError::InvalidIntensity("constant intensity must be >= 0".into()));
                }
                (T::zero(), *value, Some(T::zero()))
            }
            PhiKind::SoftSaturating { base, amplitude, rate } => {
                check_phi("base", *base)?;
                check_phi("amplitude", *amplitude)?;
                check_phi("rate", *rate)?;
                if *base < amplitude.abs() {
                    return Err(HawkesError::InvalidIntensity(
                        "soft-saturating intensity needs base >= |amplitude| to stay nonnegative".into(),
                    ));
                }
                let inf = if *amplitude * *rate >= T::zero() { *base } else { *base - amplitude.abs() };
                // sup |d²/dx² tanh| = 4 / (3√3)
                let tanh2 = T::lit(4.0 / (3.0 * 3f64.sqrt()));
                ((*amplitude * *rate).abs(), inf, Some(amplitude.abs() * *rate * *rate * tanh2))
            }
            PhiKind::Table { xs, values } => {
                if xs.len() < 2 || xs.len() != values.len() {
                    return Err(HawkesError::InvalidIntensity(
                        "table needs at least two knots and matching lengths".into(),
                    ));
                }
                if xs.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(HawkesError::InvalidIntensity("table knots must be strictly increasing".into()));
                }
                let mut alpha = T::zero();
                for i in 0..xs.len() - 1 {
                    check_phi("table value", values[i])?;
                    alpha = alpha.max(((values[i + 1] - values[i]) / (xs[i + 1] - xs[i])).abs());
                }
                let min = values.iter().copied().fold(T::infinity(), T::min);
                if min < T::zero() {
                    return Err(HawkesError::InvalidIntensity("table values must be >= 0".into()));
                }
                (alpha, min, None)
            }
        };
        Ok(Self { kind, lipschitz_alpha: alpha, inf_value, second_deriv_bound: second })
    }

    pub fn linear(nu: T, slope: T) -> Result<Self> {
        Self::new(PhiKind::Linear { nu, slope })
    }

    pub fn constant(value: T) -> Result<Self> {
        Self::new(PhiKind::Constant { value })
    }

    pub fn soft_saturating(base: T, amplitude: T, rate: T) -> Result<Self> {
        Self::new(PhiKind::SoftSaturating { base, amplitude, rate })
    }

    pub fn table(xs: Vec<T>, values: Vec<T>) -> Result<Self> {
        Self::new(PhiKind::Table { xs, values })
    }

    /// Overrides the declared Lipschitz constant (audited numerically, never trusted blindly).
    pub fn with_lipschitz(mut self, alpha: T) -> Self {
        self.lipschitz_alpha = alpha;
        self
    }

    /// Overrides the declared lower bound `inf_{x≥0} φ(x)`.
    pub fn with_inf_value(mut self, inf_value: T) -> Self {
        self.inf_value = inf_value;
        self
    }

    pub fn kind(&self) -> &PhiKind<T> {
        &self.kind
    }

    pub fn lipschitz_alpha(&self) -> T {
        self.lipschitz_alpha
    }

    pub fn inf_value(&self) -> T {
        self.inf_value
    }

    pub fn second_deriv_bound(&self) -> Option<T> {
        self.second_deriv_bound
    }

    pub fn is_constant(&self) -> bool {
        match &self.kind {
            PhiKind::Constant { .. } => true,
            PhiKind::Linear { slope, .. } => *slope == T::zero(),
            PhiKind::SoftSaturating { amplitude, rate, .. } => *amplitude * *rate == T::zero(),
            PhiKind::Table { values, .. } => values.iter().all(|v| *v == values[0]),
        }
    }

    pub fn eval(&self, x: T) -> T {
        match &self.kind {
            PhiKind::Linear { nu, slope } => *nu + *slope * x,
            PhiKind::Constant { value } => *value,
            PhiKind::SoftSaturating { base, amplitude, rate } => *base + *amplitude * (*rate * x).tanh(),
            PhiKind::Table { xs, values } => {
                let (i, w) = locate(xs, x);
                match w {
                    None => values[i],
                    Some(w) => values[i] + w * (values[i + 1] - values[i]),
                }
            }
        }
    }

    /// Analytic `φ'(x)` where the kind supplies one.
    pub fn deriv(&self, x: T) -> Option<T> {
        match &self.kind {
            PhiKind::Linear { slope, .. } => Some(*slope),
            PhiKind::Constant { .. } => Some(T::zero()),
            PhiKind::SoftSaturating { amplitude, rate, .. } => {
                let c = (*rate * x).cosh();
                Some(*amplitude * *rate / (c * c))
            }
            PhiKind::Table { .. } => None,
        }
    }

    /// Central difference with step `1e-5·(1 + |x|)`.
    pub fn deriv_fd(&self, x: T) -> T {
        let h = T::lit(1e-5) * (T::one() + x.abs());
        (self.eval(x + h) - self.eval(x - h)) / (h + h)
    }

    /// Analytic derivative when available, otherwise the central difference.
    pub fn deriv_or_fd(&self, x: T) -> T {
        self.deriv(x).unwrap_or_else(|| self.deriv_fd(x))
    }
}

/// Largest difference quotient `|φ(x) − φ(y)| / |x − y|` over the probe points.
///
/// Only adjacent pairs of the sorted probes are compared: every chord slope is a convex
/// combination of adjacent slopes, so the maximum over all pairs is attained there.
/// Errors when the probe exceeds the declared `α` by more than a relative `1e-9`.
pub fn lipschitz_probe<T: Real>(f: &IntensityFn<T>, xs: &[T]) -> Result<T> {
    let mut pts: Vec<T> = xs.iter().copied().filter(|x| x.is_finite()).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    pts.dedup();
    if pts.len() < 2 {
        return Err(HawkesError::InvalidArgument(
            "lipschitz_probe needs at least two distinct probe points".into(),
        ));
    }
    let mut best = T::zero();
    let mut witness = (pts[0], pts[1]);
    for w in pts.windows(2) {
        let q = ((f.eval(w[1]) - f.eval(w[0])) / (w[1] - w[0])).abs();
        if q > best {
            best = q;
            witness = (w[0], w[1]);
        }
    }
    let declared = f.lipschitz_alpha();
    if best > declared * (T::one() + T::lit(1e-9)) {
        return Err(HawkesError::AssumptionViolation(format!(
            "difference quotient {best} between x = {} and y = {} exceeds declared alpha {declared}",
            witness.0, witness.1
        )));
    }
    Ok(best)
}

/// The five regularity assumptions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Assumption {
    A1,
    A2,
    A3,
    A4,
    A5,
}

impl Assumption {
    pub const ALL: [Assumption; 5] = [Self::A1, Self::A2, Self::A3, Self::A4, Self::A5];
}

impl std::fmt::Display for Assumption {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionCheck {
    pub holds: bool,
    pub reason: String,
}

impl AssumptionCheck {
    fn from(holds: bool, ok: impl Into<String>, bad: impl Into<String>) -> Self {
        if holds {
            Self { holds, reason: ok.into() }
        } else {
            Self { holds, reason: bad.into() }
        }
    }
}

/// Flags for A1–A5 together with the numbers that decided them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelAudit<T> {
    pub horizon: T,
    pub a1: AssumptionCheck,
    pub a2: AssumptionCheck,
    pub a3: AssumptionCheck,
    pub a4: AssumptionCheck,
    pub a5: AssumptionCheck,
    pub alpha: T,
    pub h_l1: T,
    pub h_linf: T,
    pub hprime_linf: Option<T>,
    pub alpha_h_l1: T,
    pub inf_phi: T,
}

impl<T: Real> ModelAudit<T> {
    pub fn check(&self, a: Assumption) -> &AssumptionCheck {
        match a {
            Assumption::A1 => &self.a1,
            Assumption::A2 => &self.a2,
            Assumption::A3 => &self.a3,
            Assumption::A4 => &self.a4,
            Assumption::A5 => &self.a5,
        }
    }

    /// The subset of `required` that does not hold.
    pub fn failed(&self, required: &[Assumption]) -> Vec<Assumption> {
        required.iter().copied().filter(|a| !self.check(*a).holds).collect()
    }

    /// Fails with `AssumptionViolation` listing every unmet assumption in `required`.
    pub fn require(&self, required: &[Assumption]) -> Result<()> {
        let failed = self.failed(required);
        if failed.is_empty() {
            return Ok(());
        }
        let msg = failed
            .iter()
            .map(|a| format!("{a}: {}", self.check(*a).reason))
            .collect::<Vec<_>>()
            .join("; ");
        Err(HawkesError::AssumptionViolation(msg))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AuditOptions {
    pub probe_points: usize,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self { probe_points: DEFAULT_PROBE_POINTS }
    }
}

pub fn audit_assumptions<T: Real>(
    kernel: &Kernel<T>,
    phi: &IntensityFn<T>,
    horizon: T,
) -> Result<ModelAudit<T>> {
    audit_assumptions_with(kernel, phi, horizon, &AuditOptions::default())
}

pub fn audit_assumptions_with<T: Real>(
    kernel: &Kernel<T>,
    phi: &IntensityFn<T>,
    horizon: T,
    opts: &AuditOptions,
) -> Result<ModelAudit<T>> {
    let h_l1 = kernel_l1_norm(kernel, horizon)?;
    let h_linf = kernel.sup_abs(horizon);
    let hprime_linf = kernel.sup_abs_deriv(horizon, opts.probe_points);
    let alpha = phi.lipschitz_alpha();
    let inf_phi = phi.inf_value();
    let n = opts.probe_points.max(2);

    // φ is probed on a symmetric range wide enough to cover the excitation levels of interest.
    let reach = T::lit(10.0) * T::one().max(h_l1).max(h_linf * horizon);
    let xs: Vec<T> = (0..n)
        .map(|i| -reach + (reach + reach) * T::from_usize_lossy(i) / T::from_usize_lossy(n - 1))
        .collect();
    let lipschitz = lipschitz_probe(phi, &xs);
    // Positivity only matters where excitations can land: [0, ∞) for h ≥ 0.
    let lowest = if kernel.is_nonnegative() { T::zero() } else { -reach };
    let nonneg = xs.iter().filter(|&&x| x >= lowest).all(|&x| phi.eval(x) >= T::zero());
    let a1 = match (&lipschitz, alpha.is_finite(), h_linf.is_finite(), nonneg) {
        (Ok(q), true, true, true) => AssumptionCheck {
            holds: true,
            reason: format!("alpha = {alpha} (probed {q}); sup|h| = {h_linf}"),
        },
        (Err(e), ..) => AssumptionCheck { holds: false, reason: e.to_string() },
        (_, false, ..) => AssumptionCheck { holds: false, reason: "alpha is not finite".into() },
        (_, _, false, _) => AssumptionCheck { holds: false, reason: "h is unbounded on [0,T]".into() },
        _ => AssumptionCheck { holds: false, reason: "phi takes negative values on the reachable excitation range".into() },
    };

    let deriv_finite = hprime_linf.map(|v| v.is_finite()).unwrap_or(false);
    let a2 = AssumptionCheck::from(
        kernel.has_deriv() && deriv_finite,
        format!("h differentiable, sup|h'| = {}", hprime_linf.unwrap_or(T::nan())),
        "h has no derivative (table kernel or cutoff power < 1)",
    );

    let alpha_h_l1 = alpha * h_l1;
    let a3 = AssumptionCheck::from(
        alpha_h_l1 < T::one(),
        format!("alpha * |h|_L1 = {alpha_h_l1} < 1"),
        format!("alpha * |h|_L1 = {alpha_h_l1} >= 1"),
    );

    let a4 = match phi.second_deriv_bound() {
        Some(b) if b.is_finite() => AssumptionCheck { holds: true, reason: format!("sup|phi''| <= {b}") },
        _ => AssumptionCheck { holds: false, reason: "phi'' bound unavailable".into() },
    };

    let xs_pos: Vec<T> = (0..n).map(|i| reach * T::from_usize_lossy(i) / T::from_usize_lossy(n - 1)).collect();
    let lower_ok = xs_pos.iter().all(|&x| phi.eval(x) >= inf_phi * (T::one() - T::lit(1e-12)));
    let a5 = if !(inf_phi > T::zero()) {
        AssumptionCheck { holds: false, reason: format!("inf phi = {inf_phi} is not > 0") }
    } else if !lower_ok {
        AssumptionCheck { holds: false, reason: format!("phi dips below declared inf {inf_phi}") }
    } else if !(kernel.has_deriv() && deriv_finite) {
        AssumptionCheck { holds: false, reason: "sup|h'| on [0,T] unavailable".into() }
    } else {
        AssumptionCheck {
            holds: true,
            reason: format!("inf phi = {inf_phi} > 0, sup|h'| = {}", hprime_linf.unwrap_or(T::nan())),
        }
    };

    Ok(ModelAudit { horizon, a1, a2, a3, a4, a5, alpha, h_l1, h_linf, hprime_linf, alpha_h_l1, inf_phi })
}
