use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::model::FrameAssignment;

use super::clamp::ClampMask;
use super::config::{Regime, TrainConfig};
use super::fitted::{FittedModel, LanguageModel, Provenance};
use super::sampler::{Chain, TrainData};

/// One point of the log-joint trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub chain: usize,
    pub iteration: usize,
    pub burn_in: bool,
    pub log_joint: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Final log joint of every chain.
    pub final_log_joint: Vec<f64>,
    pub selected_chain: usize,
    /// Potential scale reduction of the post-burn-in log joint; needs at
    /// least two chains and two recorded points per chain.
    pub r_hat: Option<f64>,
    pub clamped: usize,
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub model: FittedModel,
    pub trace: Vec<TraceRecord>,
    pub diagnostics: Diagnostics,
    /// Final sample of the selected chain: per language, per frame in
    /// [`Corpus::frames`] order.
    pub assignments: Vec<Vec<FrameAssignment>>,
}

/// SHA-256 of the corpus document, hex encoded.
pub fn corpus_digest(corpus: &Corpus) -> Result<String> {
    Ok(hex::encode(Sha256::digest(corpus.to_json()?.as_bytes())))
}

/// Runs the configured chains and returns the final sample of the chain
/// with the highest final log joint.
pub fn train(corpus: &Corpus, config: &TrainConfig, clamps: &ClampMask) -> Result<TrainOutput> {
    config.validate()?;
    corpus.validate()?;
    if (0..corpus.num_languages()).all(|l| corpus.num_frames(l) == 0) {
        return Err(Error::Data("the corpus has no frames".into()));
    }
    let coupled = config.regime.is_coupled();
    if coupled && (corpus.num_languages() != 2 || corpus.parallel_pairs.is_empty()) {
        return Err(Error::Config(format!(
            "the {:?} regime needs a two-language corpus with aligned frame pairs",
            config.regime
        )));
    }
    if config.regime == Regime::Transfer && clamps.n_clamped() == 0 {
        return Err(Error::Config("the transfer regime needs clamped source labels".into()));
    }
    let space = config.space()?;
    let clamp_idx = clamps.indices(&space, corpus)?;
    let data = TrainData::new(corpus, space, config.hyper, clamp_idx, coupled)?;
    let digest = corpus_digest(corpus)?;

    let run_chain = |c: usize| -> Result<(Chain<'_>, Vec<TraceRecord>)> {
        let mut chain = Chain::new(&data, config.seed, c as u64)?;
        let mut trace = Vec::new();
        for it in 1..=config.iterations {
            chain.sweep()?;
            if it % config.trace_every == 0 || it == config.iterations {
                trace.push(TraceRecord {
                    chain: c,
                    iteration: it,
                    burn_in: it <= config.burn_in,
                    log_joint: chain.log_joint(),
                });
            }
            log::debug!("chain {c}: sweep {it}/{}", config.iterations);
        }
        Ok((chain, trace))
    };
    let results: Vec<Result<(Chain<'_>, Vec<TraceRecord>)>> = if config.chains == 1 {
        vec![run_chain(0)]
    } else {
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..config.chains).map(|c| s.spawn(move || run_chain(c))).collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|_| Err(Error::Contract("sampler chain panicked".into()))))
                .collect()
        })
    };
    let mut chains = Vec::new();
    let mut trace = Vec::new();
    for r in results {
        let (chain, t) = r?;
        trace.extend(t);
        chains.push(chain);
    }
    let finals: Vec<f64> = chains.iter().map(Chain::log_joint).collect();
    let selected = finals
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > finals[best] { i } else { best });
    let r_hat = gelman_rubin(&trace, config.chains);
    let chain = chains.swap_remove(selected);

    let assignments = chain
        .roles
        .iter()
        .map(|frames| frames.iter().map(|r| FrameAssignment::from_indices(&space, r)).collect())
        .collect();
    let languages = data
        .langs
        .iter()
        .zip(chain.tables)
        .map(|(d, t)| LanguageModel::new(d.name.clone(), d.vocab.clone(), t))
        .collect();
    let model = FittedModel {
        space,
        hyper: config.hyper,
        languages,
        provenance: Provenance {
            regime: config.regime,
            iterations: config.iterations,
            burn_in: config.burn_in,
            seed: config.seed,
            chains: config.chains,
            selected_chain: selected,
            final_log_joint: finals[selected],
            data_digest: digest,
            clamped: data.n_clamped(),
        },
        crosslingual: chain.clv.as_ref().map(|c| c.to_serial()),
    };
    Ok(TrainOutput {
        model,
        trace,
        diagnostics: Diagnostics {
            final_log_joint: finals,
            selected_chain: selected,
            r_hat,
            clamped: data.n_clamped(),
        },
        assignments,
    })
}

/// Gelman-Rubin potential scale reduction over the post-burn-in records.
pub fn gelman_rubin(trace: &[TraceRecord], chains: usize) -> Option<f64> {
    if chains < 2 {
        return None;
    }
    let series: Vec<Vec<f64>> = (0..chains)
        .map(|c| {
            trace
                .iter()
                .filter(|r| r.chain == c && !r.burn_in)
                .map(|r| r.log_joint)
                .collect()
        })
        .collect();
    let n = series.iter().map(Vec::len).min()?;
    if n < 2 {
        return None;
    }
    let m = chains as f64;
    let nf = n as f64;
    let means: Vec<f64> = series.iter().map(|s| s[..n].iter().sum::<f64>() / nf).collect();
    let grand = means.iter().sum::<f64>() / m;
    let b = nf / (m - 1.0) * means.iter().map(|x| (x - grand).powi(2)).sum::<f64>();
    let w = series
        .iter()
        .zip(&means)
        .map(|(s, mu)| s[..n].iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (nf - 1.0))
        .sum::<f64>()
        / m;
    if w <= 0.0 {
        return if b <= 0.0 { Some(1.0) } else { None };
    }
    let var = (nf - 1.0) / nf * w + b / nf;
    Some((var / w).sqrt())
}
