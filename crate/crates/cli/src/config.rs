//! Versioned experiment configuration (TOML, or JSON with the same schema).

use std::path::{Path, PathBuf};

use hawkes_core::deviations::optimize::OptimParams;
use hawkes_core::deviations::rate::RateKind;
use hawkes_core::deviations::tail::TailMethod;
use hawkes_core::model::{Assumption, IntensityFn, Kernel};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Schema version understood by this build.
pub const CONFIG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub model: ModelSection,
    pub experiment: ExperimentSpec,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub horizon: f64,
    pub kernel: Kernel<f64>,
    pub phi: IntensityFn<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub directory: PathBuf,
    /// Mandatory: runs are never seeded from the clock.
    pub seed: u64,
    #[serde(default = "default_formats")]
    pub formats: Vec<OutputFormat>,
    /// Writes a generation-time comment into SVG files.
    #[serde(default)]
    pub svg_timestamp: bool,
    /// Worker threads; defaults to the number of logical cores.
    #[serde(default)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Svg,
}

fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Csv, OutputFormat::Svg]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExperimentSpec {
    Lln(LlnSpec),
    Clt(CltSpec),
    Ldp(LdpSpec),
    Mdp(MdpSpec),
    MeanFieldEquivalence(MeanFieldSpec),
    RateMinimize(RateMinimizeSpec),
}

impl ExperimentSpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Lln(_) => "lln",
            Self::Clt(_) => "clt",
            Self::Ldp(_) => "ldp",
            Self::Mdp(_) => "mdp",
            Self::MeanFieldEquivalence(_) => "mean-field-equivalence",
            Self::RateMinimize(_) => "rate-minimize",
        }
    }

    /// Assumptions the experiment's limit theorem relies on.
    pub fn required_assumptions(&self) -> Vec<Assumption> {
        use Assumption::*;
        match self {
            Self::Lln(_) | Self::MeanFieldEquivalence(_) => vec![A1],
            Self::Clt(_) => vec![A1, A2, A4],
            Self::Ldp(_) => vec![A1, A3, A5],
            Self::Mdp(_) => vec![A1, A3, A4, A5],
            Self::RateMinimize(r) => match r.functional {
                RateKind::Ldp => vec![A1, A5],
                RateKind::Mdp => vec![A1, A4, A5],
            },
        }
    }
}

fn default_grid() -> usize {
    1024
}

fn default_tail_grid() -> usize {
    256
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LlnSpec {
    pub epsilons: Vec<f64>,
    #[serde(default = "default_lln_replicas")]
    pub replicas: usize,
    #[serde(default = "default_grid")]
    pub grid_steps: usize,
    #[serde(default)]
    pub thresholds: LlnThresholds,
}

fn default_lln_replicas() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlnThresholds {
    /// Multiplier of the standard error added to the first-moment bound.
    pub moment_se: f64,
    /// Largest allowed ratio of `E[sup (X^ε)²]` between adjacent `ε`.
    pub sup_growth_factor: f64,
}

impl Default for LlnThresholds {
    fn default() -> Self {
        Self { moment_se: 3.0, sup_growth_factor: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CltSpec {
    #[serde(default)]
    pub epsilons: Vec<f64>,
    /// Mean-field network sizes (each contributes `ε = 1/N`).
    #[serde(default)]
    pub nodes: Vec<usize>,
    pub replicas: usize,
    #[serde(default = "default_grid")]
    pub grid_steps: usize,
    #[serde(default)]
    pub thresholds: CltThresholds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CltThresholds {
    pub ks_level: f64,
    pub min_replicas: usize,
    pub max_var_rel_error: Option<f64>,
}

impl Default for CltThresholds {
    fn default() -> Self {
        Self { ks_level: 0.01, min_replicas: 1000, max_var_rel_error: Some(0.05) }
    }
}

/// Second estimator run on the same event for a cross-method agreement check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossCheck {
    pub method: TailMethod,
    pub replicas: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviationThresholds {
    /// Bound on `|log-scale estimate + inf rate|` at every `ε`.
    pub max_gap: Option<f64>,
    /// Bound on the same gap at the smallest `ε` only.
    pub max_final_gap: Option<f64>,
    /// Bound on the gap relative to the infimum of the rate, at every `ε`.
    pub max_rel_gap: Option<f64>,
    /// Require the gap to shrink as `ε` decreases.
    pub gap_decreasing: bool,
    /// Agreement of the cross-check, in combined standard errors.
    pub agreement_se: f64,
}

impl DeviationThresholds {
    fn ldp() -> Self {
        Self { max_gap: Some(0.15), max_final_gap: None, max_rel_gap: Some(0.2), gap_decreasing: true, agreement_se: 3.0 }
    }

    fn mdp() -> Self {
        Self { max_gap: None, max_final_gap: Some(0.1), max_rel_gap: None, gap_decreasing: true, agreement_se: 3.0 }
    }
}

impl Default for DeviationThresholds {
    fn default() -> Self {
        Self::ldp()
    }
}

fn default_mdp_thresholds() -> DeviationThresholds {
    DeviationThresholds::mdp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LdpSpec {
    pub epsilons: Vec<f64>,
    /// Endpoint threshold `x` of the event `Z_T ≥ x`.
    #[serde(default)]
    pub threshold: Option<f64>,
    /// Alternative: `x = threshold_factor · Z⁰_T`.
    #[serde(default)]
    pub threshold_factor: Option<f64>,
    pub method: TailMethod,
    #[serde(default)]
    pub replicas: usize,
    #[serde(default = "default_tail_grid")]
    pub grid_steps: usize,
    #[serde(default)]
    pub cross_check: Option<CrossCheck>,
    #[serde(default)]
    pub optimizer: OptimParams,
    #[serde(default)]
    pub thresholds: DeviationThresholds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MdpSpec {
    pub epsilons: Vec<f64>,
    pub threshold: f64,
    /// `p` in `a(ε) = ε^p`, `0 < p < ½`.
    pub a_exponent: f64,
    pub method: TailMethod,
    #[serde(default)]
    pub replicas: usize,
    #[serde(default = "default_tail_grid")]
    pub grid_steps: usize,
    #[serde(default)]
    pub cross_check: Option<CrossCheck>,
    #[serde(default)]
    pub optimizer: OptimParams,
    #[serde(default = "default_mdp_thresholds")]
    pub thresholds: DeviationThresholds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeanFieldSpec {
    pub nodes: Vec<usize>,
    pub replicas: usize,
    /// Probe times; defaults to `{T/2, T}`.
    #[serde(default)]
    pub probe_times: Vec<f64>,
    #[serde(default = "default_ks_level")]
    pub ks_level: f64,
}

fn default_ks_level() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ConstraintConfig {
    EndpointEqual { x: f64 },
    EndpointAtLeast { x: f64 },
    /// Tube of `radius` around `reference_scale · Z⁰`.
    Tube {
        radius: f64,
        #[serde(default = "one")]
        reference_scale: f64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateMinimizeSpec {
    pub functional: RateKind,
    pub constraint: ConstraintConfig,
    /// Defaults to nondecreasing for `ldp`, unrestricted for `mdp`.
    #[serde(default)]
    pub monotone: Option<bool>,
    #[serde(default = "default_tail_grid")]
    pub grid_steps: usize,
    #[serde(default)]
    pub optimizer: OptimParams,
    /// Random feasible paths on which the analytic gradient is checked.
    #[serde(default = "default_gradient_samples")]
    pub gradient_samples: usize,
    #[serde(default = "default_gradient_tol")]
    pub max_gradient_error: f64,
}

fn default_gradient_samples() -> usize {
    20
}

fn default_gradient_tol() -> f64 {
    1e-5
}

fn schema(msg: impl Into<String>) -> CliError {
    CliError::Schema(msg.into())
}

fn positive_list(field: &str, xs: &[f64]) -> Result<(), CliError> {
    if xs.is_empty() {
        return Err(schema(format!("{field}: at least one value is required")));
    }
    if let Some(x) = xs.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
        return Err(schema(format!("{field}: values must be positive and finite, got {x}")));
    }
    Ok(())
}

fn mc_replicas(field: &str, method: TailMethod, replicas: usize) -> Result<(), CliError> {
    if method != TailMethod::ExactPoisson && replicas == 0 {
        return Err(schema(format!("{field}: Monte Carlo methods need replicas >= 1")));
    }
    Ok(())
}

impl ExperimentConfig {
    /// Parses `path` (JSON when the extension is `.json`, TOML otherwise) and validates it.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", path.display())))?;
        let cfg = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            Self::from_json(&text)?
        } else {
            Self::from_toml(&text)?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| schema(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| schema(e.to_string()))
    }

    /// Range and consistency checks beyond the type-level schema.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(schema(format!(
                "schema_version: expected {CONFIG_SCHEMA_VERSION}, got {}",
                self.schema_version
            )));
        }
        if !(self.model.horizon > 0.0 && self.model.horizon.is_finite()) {
            return Err(schema(format!("model.horizon: must be positive, got {}", self.model.horizon)));
        }
        if self.output.workers == Some(0) {
            return Err(schema("output.workers: must be >= 1"));
        }
        let grid = |field: &str, n: usize| {
            if n < 2 {
                Err(schema(format!("{field}: need at least 2 steps, got {n}")))
            } else {
                Ok(())
            }
        };
        match &self.experiment {
            ExperimentSpec::Lln(s) => {
                positive_list("experiment.epsilons", &s.epsilons)?;
                grid("experiment.grid_steps", s.grid_steps)?;
                if s.replicas < 2 {
                    return Err(schema("experiment.replicas: need at least 2"));
                }
            }
            ExperimentSpec::Clt(s) => {
                if s.epsilons.is_empty() && s.nodes.is_empty() {
                    return Err(schema("experiment.epsilons: give epsilons or nodes"));
                }
                if !s.epsilons.is_empty() {
                    positive_list("experiment.epsilons", &s.epsilons)?;
                }
                if s.nodes.contains(&0) {
                    return Err(schema("experiment.nodes: network sizes must be >= 1"));
                }
                grid("experiment.grid_steps", s.grid_steps)?;
                if s.replicas < s.thresholds.min_replicas {
                    return Err(schema(format!(
                        "experiment.replicas: {} is below the minimum of {}",
                        s.replicas, s.thresholds.min_replicas
                    )));
                }
            }
            ExperimentSpec::Ldp(s) => {
                positive_list("experiment.epsilons", &s.epsilons)?;
                match (s.threshold, s.threshold_factor) {
                    (Some(_), None) | (None, Some(_)) => {}
                    _ => return Err(schema("experiment.threshold: give exactly one of threshold, threshold_factor")),
                }
                grid("experiment.grid_steps", s.grid_steps)?;
                mc_replicas("experiment.replicas", s.method, s.replicas)?;
                if let Some(c) = &s.cross_check {
                    mc_replicas("experiment.cross_check.replicas", c.method, c.replicas)?;
                }
            }
            ExperimentSpec::Mdp(s) => {
                positive_list("experiment.epsilons", &s.epsilons)?;
                if !(s.a_exponent > 0.0 && s.a_exponent < 0.5) {
                    return Err(schema(format!(
                        "experiment.a_exponent: a(eps) = eps^p needs 0 < p < 0.5, got {}",
                        s.a_exponent
                    )));
                }
                grid("experiment.grid_steps", s.grid_steps)?;
                mc_replicas("experiment.replicas", s.method, s.replicas)?;
                if let Some(c) = &s.cross_check {
                    mc_replicas("experiment.cross_check.replicas", c.method, c.replicas)?;
                }
            }
            ExperimentSpec::MeanFieldEquivalence(s) => {
                if s.nodes.is_empty() || s.nodes.contains(&0) {
                    return Err(schema("experiment.nodes: need at least one network size >= 1"));
                }
                if s.replicas < 2 {
                    return Err(schema("experiment.replicas: need at least 2"));
                }
                if let Some(t) = s.probe_times.iter().find(|t| !(**t > 0.0 && **t <= self.model.horizon)) {
                    return Err(schema(format!("experiment.probe_times: {t} is outside (0, horizon]")));
                }
            }
            ExperimentSpec::RateMinimize(s) => {
                grid("experiment.grid_steps", s.grid_steps)?;
                if let ConstraintConfig::Tube { radius, .. } = s.constraint {
                    if !(radius > 0.0) {
                        return Err(schema(format!("experiment.constraint.radius: must be > 0, got {radius}")));
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
schema_version = 1

[model]
horizon = 1.0
kernel = { kind = "exponential", scale = 1.0, beta = 2.0 }
phi = { kind = "linear", nu = 1.0, slope = 1.0 }

[experiment]
kind = "lln"
epsilons = [0.1, 0.01]

[output]
directory = "out"
seed = 7
"#;

    #[test]
    fn minimal_config_parses() {
        let cfg = ExperimentConfig::from_toml(MINIMAL).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.experiment.name(), "lln");
        assert_eq!(cfg.output.formats, default_formats());
    }

    #[test]
    fn json_is_the_same_schema() {
        let cfg = ExperimentConfig::from_toml(MINIMAL).unwrap();
        let json = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&json).unwrap(), cfg);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let bad = MINIMAL.replace("seed = 7", "seed = 7\ncolour = \"red\"");
        let err = ExperimentConfig::from_toml(&bad).unwrap_err().to_string();
        assert!(err.contains("colour"), "{err}");
    }

    #[test]
    fn missing_seed_is_a_schema_error() {
        let bad = MINIMAL.replace("seed = 7", "");
        let err = ExperimentConfig::from_toml(&bad).unwrap_err().to_string();
        assert!(err.contains("seed"), "{err}");
    }

    #[test]
    fn mdp_needs_a_exponent() {
        let bad = MINIMAL.replace(
            "kind = \"lln\"\nepsilons = [0.1, 0.01]",
            "kind = \"mdp\"\nepsilons = [0.01]\nthreshold = 1.0\nmethod = \"exact-poisson\"",
        );
        let err = ExperimentConfig::from_toml(&bad).unwrap_err().to_string();
        assert!(err.contains("a_exponent"), "{err}");
    }

    #[test]
    fn clt_replica_minimum() {
        let bad = MINIMAL.replace("kind = \"lln\"\nepsilons = [0.1, 0.01]", "kind = \"clt\"\nepsilons = [0.01]\nreplicas = 10");
        let cfg = ExperimentConfig::from_toml(&bad).unwrap();
        let err = cfg.validate().unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("experiment.replicas"));
    }
}
