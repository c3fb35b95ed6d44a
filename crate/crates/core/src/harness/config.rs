//! Experiment configuration files.
//!
//! ```toml
//! seed = 7
//! horizon = 8000
//! replications = 50
//!
//! [instance]
//! ads = 10
//! slots = 2
//!
//! [model]
//! preset = "paper-posdep"
//!
//! [mechanism]
//! kind = "avcg1"
//! tune = "T1"
//! ```

use rand::Rng;
use serde::Deserialize;

use super::HarnessError;
use crate::error::Error;
use crate::mechanisms::{MechanismKind, MechanismParams};
use crate::model::{AuctionEnv, CascadeKind, CascadeModel};
use crate::regret::{tune, BoundInputs, TheoremId};
use crate::simulation::{stream_rng, Stream};

/// A complete experiment: one file determines every draw.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub horizon: u64,
    #[serde(default = "default_replications")]
    pub replications: u64,
    pub instance: InstanceSpec,
    #[serde(default)]
    pub model: ModelSpec,
    pub mechanism: MechanismSpec,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
}

fn default_replications() -> u64 {
    100
}

/// Explicit ads, or a generator drawing `q ~ U[q_min, q_max]`, `v ~ U[0, v_max]`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub slots: usize,
    #[serde(default)]
    pub ads: Option<usize>,
    #[serde(default)]
    pub qualities: Option<Vec<f64>>,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default = "default_v_max")]
    pub v_max: f64,
    #[serde(default = "default_q_min")]
    pub q_min: f64,
    #[serde(default = "default_q_max")]
    pub q_max: f64,
}

fn default_v_max() -> f64 {
    1.0
}

fn default_q_min() -> f64 {
    0.01
}

fn default_q_max() -> f64 {
    0.1
}

/// Named cascade presets or explicit parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelPreset {
    /// Equal continuation probabilities with `Lambda_K = lambda_k`.
    PaperPosdep,
    /// Position-dependent, each `lambda_m ~ U[low, high]`.
    UniformLambda,
    /// Ad- and slot-dependent, each `gamma_{m,i} ~ U[low, high]`.
    PadUniform,
    /// Parameters given in the `cascade` table.
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub preset: ModelPreset,
    #[serde(default = "default_lambda_k")]
    pub lambda_k: f64,
    #[serde(default)]
    pub low: Option<f64>,
    #[serde(default)]
    pub high: Option<f64>,
    #[serde(default)]
    pub cascade: Option<CascadeKind>,
}

fn default_lambda_k() -> f64 {
    0.8
}

impl Default for ModelSpec {
    fn default() -> Self {
        Self { preset: ModelPreset::PaperPosdep, lambda_k: default_lambda_k(), low: None, high: None, cascade: None }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MechanismSpec {
    pub kind: MechanismKind,
    #[serde(default)]
    pub tau: Option<u64>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub mu: Option<f64>,
    /// Theorem whose closed-form parameters fill any unset `tau`, `delta`, `mu`.
    #[serde(default)]
    pub tune: Option<String>,
    /// Theorem used for the reported bound; defaults to the mechanism's revenue theorem.
    #[serde(default)]
    pub bound: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: SweepAxis,
    pub points: Vec<f64>,
}

/// Parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum SweepAxis {
    T,
    N,
    K,
    #[serde(rename = "q_min")]
    QMin,
    #[serde(rename = "mu")]
    Mu,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            Self::T => "T",
            Self::N => "N",
            Self::K => "K",
            Self::QMin => "q_min",
            Self::Mu => "mu",
        }
    }

    pub fn parse(s: &str) -> Result<Self, HarnessError> {
        match s {
            "T" => Ok(Self::T),
            "N" => Ok(Self::N),
            "K" => Ok(Self::K),
            "q_min" => Ok(Self::QMin),
            "mu" => Ok(Self::Mu),
            _ => Err(HarnessError::Config(format!("unknown sweep axis {s:?}; expected T, N, K, q_min or mu"))),
        }
    }
}

fn whole(axis: SweepAxis, x: f64) -> Result<u64, HarnessError> {
    if x >= 0.0 && x.fract() == 0.0 && x <= u64::MAX as f64 {
        Ok(x as u64)
    } else {
        Err(HarnessError::Config(format!("{} = {x} must be a non-negative integer", axis.name())))
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml(&text)
    }

    fn check(&self) -> Result<(), HarnessError> {
        if self.replications == 0 {
            return Err(HarnessError::Config("replications must be at least 1".into()));
        }
        let inst = &self.instance;
        match (&inst.qualities, &inst.values) {
            (Some(q), Some(v)) => {
                if inst.ads.is_some_and(|n| n != q.len()) || q.len() != v.len() {
                    return Err(HarnessError::Config("instance.ads, qualities and values disagree".into()));
                }
            }
            (None, None) => {
                if inst.ads.is_none() {
                    return Err(HarnessError::Config("instance needs ads or explicit qualities and values".into()));
                }
                if !(0.0 <= inst.q_min && inst.q_min <= inst.q_max && inst.q_max <= 1.0) {
                    return Err(HarnessError::Config("need 0 <= q_min <= q_max <= 1".into()));
                }
            }
            _ => return Err(HarnessError::Config("qualities and values must be given together".into())),
        }
        if self.model.preset == ModelPreset::Explicit && self.model.cascade.is_none() {
            return Err(HarnessError::Config("preset \"explicit\" needs a [model.cascade] table".into()));
        }
        if let Some(t) = &self.mechanism.tune {
            t.parse::<TheoremId>()?;
        }
        if let Some(t) = &self.mechanism.bound {
            t.parse::<TheoremId>()?;
        }
        Ok(())
    }

    /// The configuration with one sweep coordinate replaced.
    pub fn with_axis(&self, axis: SweepAxis, value: f64) -> Result<Self, HarnessError> {
        let mut out = self.clone();
        match axis {
            SweepAxis::T => out.horizon = whole(axis, value)?,
            SweepAxis::N => {
                if out.instance.qualities.is_some() {
                    return Err(HarnessError::Config("cannot sweep N over an explicit instance".into()));
                }
                out.instance.ads = Some(whole(axis, value)? as usize);
            }
            SweepAxis::K => out.instance.slots = whole(axis, value)? as usize,
            SweepAxis::QMin => {
                if out.instance.qualities.is_some() {
                    return Err(HarnessError::Config("cannot sweep q_min over an explicit instance".into()));
                }
                out.instance.q_min = value;
            }
            SweepAxis::Mu => out.mechanism.mu = Some(value),
        }
        out.check()?;
        Ok(out)
    }

    /// Instance and cascade model of replication `r`.
    pub fn instance(&self, r: u64) -> Result<(AuctionEnv, CascadeModel), HarnessError> {
        let mut rng = stream_rng(self.seed, r, 0, Stream::Instance);
        let inst = &self.instance;
        let env = match (&inst.qualities, &inst.values) {
            (Some(q), Some(v)) => AuctionEnv::new(q.clone(), v.clone(), inst.slots, inst.v_max)?,
            _ => {
                let n = inst.ads.unwrap_or(0);
                let q = (0..n).map(|_| uniform(&mut rng, inst.q_min, inst.q_max)).collect();
                let v = (0..n).map(|_| uniform(&mut rng, 0.0, inst.v_max)).collect();
                AuctionEnv::new(q, v, inst.slots, inst.v_max)?
            }
        };
        let model = self.model.build(env.n_ads(), env.n_slots(), &mut rng)?;
        model.check_dims(env.n_ads(), env.n_slots())?;
        Ok((env, model))
    }

    /// Mechanism parameters for one instance, tuned where requested.
    pub fn mechanism_params(&self, env: &AuctionEnv, model: &CascadeModel) -> Result<MechanismParams, HarnessError> {
        let spec = &self.mechanism;
        let mut params = MechanismParams::new(spec.kind);
        if let Some(id) = &spec.tune {
            let id: TheoremId = id.parse()?;
            let mut inputs = BoundInputs::for_instance(self.horizon, env, model);
            if let Some(mu) = spec.mu {
                inputs = inputs.with_mu(mu);
            }
            let tuned = tune(id, &inputs)?;
            params.tau = tuned.tau;
            if tuned.delta > 0.0 {
                params.delta = tuned.delta;
            }
            if let Some(mu) = tuned.mu {
                params.mu = mu;
            }
        }
        if let Some(tau) = spec.tau {
            params.tau = tau;
        }
        if let Some(delta) = spec.delta {
            params.delta = delta;
        }
        if let Some(mu) = spec.mu {
            params.mu = mu;
        }
        Ok(params)
    }

    /// Theorem whose bound is reported for this experiment.
    pub fn bound_theorem(&self) -> Result<Option<TheoremId>, HarnessError> {
        match &self.mechanism.bound {
            Some(id) => Ok(Some(id.parse()?)),
            None => Ok(TheoremId::revenue_for(self.mechanism.kind)),
        }
    }
}

fn uniform<R: Rng>(rng: &mut R, low: f64, high: f64) -> f64 {
    low + (high - low) * rng.gen::<f64>()
}

impl ModelSpec {
    fn range(&self, low: f64, high: f64) -> Result<(f64, f64), HarnessError> {
        let (lo, hi) = (self.low.unwrap_or(low), self.high.unwrap_or(high));
        if 0.0 <= lo && lo <= hi && hi <= 1.0 {
            Ok((lo, hi))
        } else {
            Err(HarnessError::Config(format!("model range [{lo}, {hi}] is not inside [0, 1]")))
        }
    }

    pub fn build<R: Rng>(&self, n_ads: usize, n_slots: usize, rng: &mut R) -> Result<CascadeModel, Error> {
        let depth = n_slots.saturating_sub(1);
        let config = |e: HarnessError| Error::Config(e.to_string());
        match self.preset {
            ModelPreset::PaperPosdep => CascadeModel::geometric(n_slots, self.lambda_k),
            ModelPreset::UniformLambda => {
                let (lo, hi) = self.range(0.98, 1.0).map_err(config)?;
                CascadeModel::position_dependent((0..depth).map(|_| uniform(rng, lo, hi)).collect())
            }
            ModelPreset::PadUniform => {
                let (lo, hi) = self.range(0.8, 1.0).map_err(config)?;
                let gamma = (0..n_slots)
                    .map(|m| (0..n_ads).map(|_| if m < depth { uniform(rng, lo, hi) } else { 1.0 }).collect())
                    .collect();
                CascadeModel::general(gamma)
            }
            ModelPreset::Explicit => CascadeModel::new(self.cascade.clone().expect("checked at load")),
        }
    }
}
