use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::Frame;
use crate::error::Result;
use crate::model::{frame_log_prob_frozen, EncodedFrame, FrameAssignment};

use super::config::DecodeConfig;
use super::fitted::{FittedModel, LanguageModel};
use super::sampler::{candidates, init_frame, sample_log_weights};

/// Labels `frames` of language `lang` by Gibbs sampling against the frozen
/// point estimates of `model`, returning for each frame the assignment with
/// the highest probability seen. Predicates the model never saw use its
/// pooled backoff counts.
pub fn decode(frames: &[&Frame], model: &FittedModel, lang: usize, config: &DecodeConfig) -> Result<Vec<FrameAssignment>> {
    let lm = &model.languages[lang];
    let encoded: Vec<EncodedFrame> = frames.iter().map(|f| lm.vocab.encode(f)).collect();
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(encoded.len().max(1));
    let chunk = encoded.len().div_ceil(threads).max(1);
    let results: Vec<Result<Vec<FrameAssignment>>> = std::thread::scope(|s| {
        let handles: Vec<_> = encoded
            .chunks(chunk)
            .enumerate()
            .map(|(c, frames)| {
                s.spawn(move || {
                    frames
                        .iter()
                        .enumerate()
                        .map(|(i, f)| decode_frame(f, lm, model, config, (c * chunk + i) as u64))
                        .collect::<Result<Vec<_>>>()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("decode worker panicked")).collect()
    });
    let mut out = Vec::with_capacity(frames.len());
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

fn decode_frame(
    frame: &EncodedFrame,
    lm: &LanguageModel,
    model: &FittedModel,
    config: &DecodeConfig,
    stream: u64,
) -> Result<FrameAssignment> {
    let space = model.space;
    let hp = &model.hyper;
    let pt = lm.counts_for(frame.predicate);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(stream);
    let mut roles = init_frame(&space, &vec![None; frame.len()], &mut rng);
    let mut scratch = Vec::new();
    let mut best = roles.clone();
    let mut best_lp = frame_log_prob_frozen(frame, &roles, &lm.tables, pt, hp, &mut scratch)?;
    let mut cands = Vec::with_capacity(space.n_roles());
    let mut w = Vec::with_capacity(space.n_roles());
    for _ in 0..config.iterations {
        for pos in 0..roles.len() {
            candidates(&space, &roles, pos, &mut cands);
            w.clear();
            for &c in &cands {
                roles[pos] = c;
                w.push(frame_log_prob_frozen(frame, &roles, &lm.tables, pt, hp, &mut scratch)?);
            }
            let scores = w.clone();
            let k = sample_log_weights(&mut rng, &mut w);
            roles[pos] = cands[k];
            if scores[k] > best_lp {
                best_lp = scores[k];
                best.clone_from(&roles);
            }
        }
    }
    Ok(FrameAssignment::from_indices(&space, &best))
}
