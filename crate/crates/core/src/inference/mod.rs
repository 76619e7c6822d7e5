//! Collapsed Gibbs training, fitted models and decoding.

mod clamp;
mod config;
mod decode;
mod fitted;
mod sampler;
mod train;

pub use clamp::ClampMask;
pub use config::{ClampConfig, ClampSource, DecodeConfig, Regime, SamplerConfig, TrainConfig};
pub use decode::decode;
pub use fitted::{FittedModel, LanguageModel, Provenance, MODEL_FORMAT, MODEL_VERSION};
pub use sampler::{clv_weights, gibbs_step_clv, gibbs_step_role_coupled, gibbs_step_role_mono};
pub use train::{corpus_digest, gelman_rubin, train, Diagnostics, TraceRecord, TrainOutput};
