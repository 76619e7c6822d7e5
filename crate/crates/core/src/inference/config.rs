use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Hyperparams, RoleSpace};

/// Which coupling the sampler uses.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// Every language on its own; alignments are ignored.
    #[default]
    Mono,
    /// Both languages coupled through CLVs on aligned arguments.
    Bilingual,
    /// Bilingual, with the source language's labels clamped.
    Transfer,
}

impl Regime {
    pub fn is_coupled(self) -> bool {
        !matches!(self, Regime::Mono)
    }
}

/// Sampling schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerConfig {
    pub regime: Regime,
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub chains: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            regime: Regime::Mono,
            iterations: 5000,
            burn_in: 2000,
            seed: 0,
            chains: 1,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be at least 1".into()));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::Config(format!(
                "burn_in ({}) must be below iterations ({})",
                self.burn_in, self.iterations
            )));
        }
        if self.chains == 0 {
            return Err(Error::Config("chains must be at least 1".into()));
        }
        Ok(())
    }
}

/// Where clamped labels come from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClampSource {
    /// Gold roles in the corpus, mapped onto model roles.
    #[default]
    Gold,
    /// A labels file of model role names.
    Labels,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClampConfig {
    #[serde(default)]
    pub source: ClampSource,
    /// Languages whose labels are clamped; empty means all.
    #[serde(default)]
    pub languages: Vec<String>,
    /// Fraction of each language's frames that are clamped.
    #[serde(default = "one")]
    pub fraction: f64,
    /// Seed of the frame selection (defaults to the sampler seed).
    #[serde(default)]
    pub selection_seed: Option<u64>,
    /// Labels file for the `labels` source.
    #[serde(default)]
    pub path: Option<PathBuf>,
}

fn one() -> f64 {
    1.0
}

/// Training configuration as read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    #[serde(default)]
    pub regime: Regime,
    #[serde(default = "defaults::iterations")]
    pub iterations: usize,
    #[serde(default = "defaults::burn_in")]
    pub burn_in: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "defaults::chains")]
    pub chains: usize,
    /// Number of roles.
    #[serde(rename = "N")]
    pub n_roles: usize,
    /// Number of primary roles.
    #[serde(rename = "K")]
    pub n_primary: usize,
    #[serde(default)]
    pub hyper: Hyperparams,
    #[serde(default)]
    pub clamp: Option<ClampConfig>,
    /// Log-joint trace period in sweeps.
    #[serde(default = "defaults::trace_every")]
    pub trace_every: usize,
    #[serde(default)]
    pub decode: DecodeConfig,
}

mod defaults {
    pub fn iterations() -> usize {
        5000
    }
    pub fn burn_in() -> usize {
        2000
    }
    pub fn chains() -> usize {
        1
    }
    pub fn trace_every() -> usize {
        1
    }
    pub fn decode_iterations() -> usize {
        50
    }
}

/// Frozen-parameter decoding schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecodeConfig {
    #[serde(default = "defaults::decode_iterations")]
    pub iterations: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        DecodeConfig {
            iterations: defaults::decode_iterations(),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn new(n_roles: usize, n_primary: usize) -> Self {
        TrainConfig {
            regime: Regime::Mono,
            iterations: defaults::iterations(),
            burn_in: defaults::burn_in(),
            seed: 0,
            chains: defaults::chains(),
            n_roles,
            n_primary,
            hyper: Hyperparams::default(),
            clamp: None,
            trace_every: defaults::trace_every(),
            decode: DecodeConfig::default(),
        }
    }

    pub fn sampler(&self) -> SamplerConfig {
        SamplerConfig {
            regime: self.regime,
            iterations: self.iterations,
            burn_in: self.burn_in,
            seed: self.seed,
            chains: self.chains,
        }
    }

    pub fn space(&self) -> Result<RoleSpace> {
        RoleSpace::new(self.n_roles, self.n_primary)
    }

    pub fn validate(&self) -> Result<()> {
        self.sampler().validate()?;
        self.space()?;
        self.hyper.validate()?;
        if self.trace_every == 0 {
            return Err(Error::Config("trace_every must be at least 1".into()));
        }
        if let Some(c) = &self.clamp {
            if !(0.0..=1.0).contains(&c.fraction) {
                return Err(Error::Config(format!("clamp fraction {} is outside [0, 1]", c.fraction)));
            }
            if c.source == ClampSource::Labels && c.path.is_none() {
                return Err(Error::Config("clamp source \"labels\" needs a path".into()));
            }
        }
        if self.regime == Regime::Transfer && self.clamp.is_none() {
            return Err(Error::Config("the transfer regime needs a [clamp] section".into()));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let c: TrainConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
