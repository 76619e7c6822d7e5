use serde::{Deserialize, Serialize};

use crate::corpus::NUM_FEATURES;
use crate::error::{Error, Result};

/// Prior parameters. Every Dirichlet is symmetric; `beta_stop` is the Beta
/// prior `(stop, continue)` on the stop indicators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparams {
    pub alpha_order: f64,
    pub alpha_sr: f64,
    pub alpha_feat: [f64; NUM_FEATURES],
    pub beta_stop: [f64; 2],
    pub alpha_crp: f64,
    pub alpha_align: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            alpha_order: 1.0,
            alpha_sr: 1.0,
            alpha_feat: [0.1; NUM_FEATURES],
            beta_stop: [1.0, 1.0],
            alpha_crp: 1.0,
            alpha_align: 0.1,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.alpha_order, self.alpha_sr, self.alpha_crp, self.alpha_align]
            .into_iter()
            .chain(self.alpha_feat)
            .chain(self.beta_stop);
        for v in all {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!(
                    "hyperparameters must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }
}
