//! Run configurations. Every field has a default, so the struct that comes
//! out of parsing is already the fully resolved config that gets echoed.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use assoc_walk::defaults;
use assoc_walk::io::{CorrSpec, GaussianSpec, MarkovSpec, QueueSpec};

use crate::CliError;

fn eigen_tol() -> f64 {
    defaults::EIGEN_TOL
}
fn markov_root_tol() -> f64 {
    defaults::MARKOV_ROOT_TOL
}
fn root_tol() -> f64 {
    defaults::ROOT_TOL
}
fn theta_cap() -> f64 {
    defaults::THETA_CAP
}
fn mc_samples() -> usize {
    defaults::MC_SAMPLES
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkovConfig {
    pub model: MarkovSpec,
    #[serde(default = "eigen_tol")]
    pub eigen_tol: f64,
    #[serde(default = "markov_root_tol")]
    pub root_tol: f64,
    #[serde(default = "theta_cap")]
    pub theta_cap: f64,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussConfig {
    pub model: GaussianSpec,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueueConfig {
    pub model: QueueSpec,
    #[serde(default = "customers")]
    pub customers: usize,
    /// Defaults to 1% of `customers`.
    #[serde(default)]
    pub burn_in: Option<usize>,
    #[serde(default = "root_tol")]
    pub root_tol: f64,
    #[serde(default = "tail_lower_q")]
    pub tail_lower_q: f64,
    #[serde(default = "tail_upper_q")]
    pub tail_upper_q: f64,
    /// Contiguous batches for the batch-means stderr of `theta_hat`.
    #[serde(default = "stderr_batches")]
    pub stderr_batches: usize,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn stderr_batches() -> usize {
    defaults::STDERR_BATCHES
}

fn customers() -> usize {
    1_000_000
}
fn tail_lower_q() -> f64 {
    defaults::TAIL_LOWER_Q
}
fn tail_upper_q() -> f64 {
    defaults::TAIL_UPPER_Q
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub n_grid: Vec<usize>,
    pub tol: f64,
    /// When set, a Monte Carlo scan is run too and must agree with the
    /// exact values within 4 stderr at every n of its own grid.
    #[serde(default)]
    pub mc: Option<McScanConfig>,
}

/// Kept to short paths: the variance of `e^{-θS_n}` grows geometrically.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McScanConfig {
    pub n_grid: Vec<usize>,
    #[serde(default = "mc_samples")]
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub factors: Vec<f64>,
    pub n_grid: Vec<usize>,
    pub flat_tol: f64,
    /// One of "decreasing", "flat", "increasing", "mixed" per factor;
    /// defaults to the trend the dichotomy predicts.
    #[serde(default)]
    pub expected: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MartingaleConfig {
    pub k_max: usize,
    #[serde(default = "mc_samples")]
    pub samples: usize,
    /// Tolerance on `(Qc)_i - c_i` (Markov only).
    #[serde(default)]
    pub identity_tol: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CylinderConfig {
    pub k: usize,
    pub grid: Vec<(usize, usize)>,
    pub tol: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalizationConfig {
    pub ks: Vec<usize>,
    pub tol: f64,
}

/// Requested checks; a missing `checks` object means all of them with
/// their defaults.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkovChecks {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub martingale: Option<MartingaleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cylinders: Option<CylinderConfig>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussChecks {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub martingale: Option<MartingaleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalization: Option<NormalizationConfig>,
}

impl MarkovChecks {
    pub fn full() -> Self {
        Self {
            scan: Some(ScanConfig {
                n_grid: vec![10, 20, 40, 80],
                tol: 1e-10,
                mc: Some(McScanConfig {
                    n_grid: vec![2, 4, 8],
                    samples: defaults::MC_SAMPLES,
                }),
            }),
            sweep: Some(SweepConfig {
                factors: vec![0.5, 1.0, 2.0],
                n_grid: vec![25, 50, 100],
                flat_tol: 1e-8,
                expected: None,
            }),
            martingale: Some(MartingaleConfig {
                k_max: 5,
                samples: defaults::MC_SAMPLES,
                identity_tol: Some(1e-12),
            }),
            cylinders: Some(CylinderConfig {
                k: 1,
                grid: vec![(5, 5), (10, 10), (20, 20), (30, 30)],
                tol: 1e-10,
            }),
        }
    }
}

impl GaussChecks {
    pub fn full() -> Self {
        Self {
            scan: Some(ScanConfig {
                n_grid: vec![50, 100, 200, 400],
                tol: 1e-6,
                mc: None,
            }),
            sweep: Some(SweepConfig {
                factors: vec![0.5, 1.0, 2.0],
                n_grid: vec![50, 100, 200, 400],
                flat_tol: 1e-6,
                expected: None,
            }),
            martingale: Some(MartingaleConfig {
                k_max: 4,
                samples: defaults::MC_SAMPLES,
                identity_tol: None,
            }),
            normalization: Some(NormalizationConfig {
                ks: vec![0, 1, 2],
                tol: 1e-8,
            }),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkovVerifyConfig {
    pub model: MarkovSpec,
    #[serde(default = "eigen_tol")]
    pub eigen_tol: f64,
    #[serde(default = "markov_root_tol")]
    pub root_tol: f64,
    #[serde(default = "theta_cap")]
    pub theta_cap: f64,
    #[serde(default)]
    pub checks: Option<MarkovChecks>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussVerifyConfig {
    pub model: GaussianSpec,
    #[serde(default)]
    pub checks: Option<GaussChecks>,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// Several suites under one seed; suites carrying their own seed keep it.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyRunConfig {
    #[serde(default = "default_markov_suites")]
    pub markov: Vec<MarkovVerifyConfig>,
    #[serde(default = "default_gauss_suites")]
    pub gaussian: Vec<GaussVerifyConfig>,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_markov_suites() -> Vec<MarkovVerifyConfig> {
    vec![MarkovVerifyConfig {
        model: MarkovSpec {
            states: vec![1.0, -1.0],
            p: vec![vec![0.8, 0.2], vec![0.6, 0.4]],
            pi: None,
            associated: false,
        },
        eigen_tol: eigen_tol(),
        root_tol: markov_root_tol(),
        theta_cap: theta_cap(),
        checks: None,
        seed: None,
    }]
}

fn default_gauss_suites() -> Vec<GaussVerifyConfig> {
    vec![GaussVerifyConfig {
        model: GaussianSpec {
            mu: 1.0,
            sigma2: 1.0,
            corr: CorrSpec::Ar1 { phi: 0.5 },
            associated: false,
        },
        checks: None,
        seed: None,
    }]
}

impl Default for VerifyRunConfig {
    fn default() -> Self {
        Self {
            markov: default_markov_suites(),
            gaussian: default_gauss_suites(),
            seed: None,
        }
    }
}

/// Reads a config for `command`. Accepted shapes: a full config object
/// (with a `"model"` field), a bare model spec, or a previous run's output
/// (`{"command", "config", "result"}`), whose embedded config is reused.
pub fn load(path: Option<&std::path::Path>, command: &str, model_required: bool) -> Result<Option<Value>, CliError> {
    let Some(path) = path else {
        return if model_required {
            Err(CliError::Input(format!("{command} needs --config PATH")))
        } else {
            Ok(None)
        };
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("malformed JSON in {}: {e}", path.display())))?;
    let Value::Object(map) = value else {
        return Err(CliError::Input("config must be a JSON object".into()));
    };
    if map.contains_key("command") && map.contains_key("config") {
        let recorded = map["command"].as_str().unwrap_or_default();
        if recorded != command {
            return Err(CliError::Input(format!(
                "embedded config belongs to `{recorded}`, not `{command}`"
            )));
        }
        return Ok(Some(map["config"].clone()));
    }
    if model_required && !map.contains_key("model") {
        let mut wrapped = serde_json::Map::new();
        wrapped.insert("model".into(), Value::Object(map));
        return Ok(Some(Value::Object(wrapped)));
    }
    Ok(Some(Value::Object(map)))
}

pub fn parse<C: serde::de::DeserializeOwned>(value: Value) -> Result<C, CliError> {
    serde_json::from_value(value).map_err(|e| CliError::Input(format!("invalid config: {e}")))
}

pub fn check_positive(name: &str, value: f64) -> Result<(), CliError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(CliError::Input(format!("{name} must be positive, got {value}")))
    }
}
