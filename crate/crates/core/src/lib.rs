//! Bayesian semantic role induction: a generative model of predicate
//! argument frames, optionally coupled across two languages through
//! word-aligned arguments, trained by collapsed Gibbs sampling.

pub mod corpus;
pub mod crosslingual;
pub mod error;
pub mod eval;
pub mod inference;
pub mod model;
pub mod synth;

pub use error::{Error, Result};
