//! JSON interchange formats for the three model families, in `f64`.
//!
//! Every spec rejects unknown fields and converts both ways, so a model
//! printed by the CLI can be fed back to it unchanged.

use serde::{Deserialize, Serialize};

use crate::gaussian::{Correlation, GaussianModel};
use crate::linalg::Matrix;
use crate::markov::MarkovModel;
use crate::queueing::{Arrivals, ErrorDist, QueueModel, ServiceDist};
use crate::{defaults, Error, Result};

/// `{"states": [...], "P": [[...]], "pi": [...]?, "associated": bool?}`;
/// a missing `pi` is computed as the left Perron vector of `P`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkovSpec {
    pub states: Vec<f64>,
    #[serde(rename = "P")]
    pub p: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub associated: bool,
}

fn is_false(b: &bool) -> bool {
    !*b
}

impl MarkovSpec {
    pub fn to_model(&self) -> Result<MarkovModel<f64>> {
        let p = Matrix::from_rows(&self.p)?;
        match &self.pi {
            Some(pi) => {
                let model = MarkovModel::from_parts(self.states.clone(), p, pi.clone(), self.associated);
                let violations = model.validate();
                if violations.is_empty() {
                    Ok(model)
                } else {
                    Err(Error::InvalidModel(violations.iter().map(ToString::to_string).collect()))
                }
            }
            None => MarkovModel::with_stationary_flagged(self.states.clone(), p, defaults::EIGEN_TOL, self.associated),
        }
    }

    pub fn from_model(model: &MarkovModel<f64>) -> Self {
        Self {
            states: model.states().to_vec(),
            p: model.transition().to_rows(),
            pi: Some(model.pi().to_vec()),
            associated: model.is_associated(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum CorrSpec {
    Iid,
    Ar1 { phi: f64 },
    Ma { coeffs: Vec<f64> },
    Explicit { rho: Vec<f64> },
}

/// `{"mu", "sigma2", "corr": {"type": ...}, "associated": bool?}`. An
/// associated model carries its (negative) mean as `mu`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianSpec {
    pub mu: f64,
    pub sigma2: f64,
    pub corr: CorrSpec,
    #[serde(default, skip_serializing_if = "is_false")]
    pub associated: bool,
}

impl GaussianSpec {
    pub fn to_model(&self) -> Result<GaussianModel<f64>> {
        let corr = match &self.corr {
            CorrSpec::Iid => Correlation::Iid,
            CorrSpec::Ar1 { phi } => Correlation::Ar1 { phi: *phi },
            CorrSpec::Ma { coeffs } => Correlation::Ma { coeffs: coeffs.clone() },
            CorrSpec::Explicit { rho } => Correlation::Explicit { rho: rho.clone() },
        };
        if self.associated {
            if !(self.mu < 0.0) {
                return Err(Error::InvalidModel(vec![format!(
                    "associated model needs a negative mean, got {}",
                    self.mu
                )]));
            }
            Ok(GaussianModel::new(-self.mu, self.sigma2, corr)?.with_negated_mean())
        } else {
            GaussianModel::new(self.mu, self.sigma2, corr)
        }
    }

    pub fn from_model(model: &GaussianModel<f64>) -> Self {
        let corr = match model.correlation() {
            Correlation::Iid => CorrSpec::Iid,
            Correlation::Ar1 { phi } => CorrSpec::Ar1 { phi: *phi },
            Correlation::Ma { coeffs } => CorrSpec::Ma { coeffs: coeffs.clone() },
            Correlation::Explicit { rho } => CorrSpec::Explicit { rho: rho.clone() },
        };
        Self {
            mu: model.mean(),
            sigma2: model.sigma2(),
            corr,
            associated: model.is_associated(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ServiceSpec {
    Exponential { mu: f64 },
    Deterministic { d: f64 },
    Erlang { shape: u32, rate: f64 },
    Uniform { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ErrorSpec {
    None,
    Uniform { a: f64 },
    Triangular { a: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ArrivalsSpec {
    Poisson {
        lambda: f64,
    },
    Appointments {
        lambda: f64,
        #[serde(default = "no_error")]
        error: ErrorSpec,
    },
}

fn no_error() -> ErrorSpec {
    ErrorSpec::None
}

/// `{"arrivals": {"type": "poisson"|"appointments", ...}, "service": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueueSpec {
    pub arrivals: ArrivalsSpec,
    pub service: ServiceSpec,
}

impl QueueSpec {
    pub fn to_model(&self) -> Result<QueueModel<f64>> {
        let service = match self.service {
            ServiceSpec::Exponential { mu } => ServiceDist::Exponential { mu },
            ServiceSpec::Deterministic { d } => ServiceDist::Deterministic { d },
            ServiceSpec::Erlang { shape, rate } => ServiceDist::Erlang { shape, rate },
            ServiceSpec::Uniform { lo, hi } => ServiceDist::Uniform { lo, hi },
        };
        let arrivals = match &self.arrivals {
            ArrivalsSpec::Poisson { lambda } => Arrivals::Poisson { lambda: *lambda },
            ArrivalsSpec::Appointments { lambda, error } => Arrivals::Appointments {
                lambda: *lambda,
                error: match *error {
                    ErrorSpec::None => ErrorDist::None,
                    ErrorSpec::Uniform { a } => ErrorDist::Uniform { a },
                    ErrorSpec::Triangular { a } => ErrorDist::Triangular { a },
                },
            },
        };
        QueueModel::new(arrivals, service)
    }
}
