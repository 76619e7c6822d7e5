use crate::corpus::{Corpus, Frame};
use crate::error::{Error, Result};
use crate::eval::{gold_inventory, select_fraction, LabelSet, RoleMapping, NO_LABEL, PREDICATE_LABEL};
use crate::model::{RoleLabel, RoleSpace};

use super::config::{ClampConfig, ClampSource};

/// Fixed role labels: per language, per frame (in [`Corpus::frames`]
/// order), per argument. `None` positions are sampled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClampMask {
    pub languages: Vec<Vec<Vec<Option<RoleLabel>>>>,
}

impl ClampMask {
    /// Nothing clamped.
    pub fn none(corpus: &Corpus) -> Self {
        ClampMask {
            languages: (0..corpus.num_languages())
                .map(|l| corpus.frames(l).map(|f| vec![None; f.arguments.len()]).collect())
                .collect(),
        }
    }

    /// Clamps chosen by a config section. `labels` is the loaded labels file
    /// for the `labels` source.
    pub fn from_config(
        corpus: &Corpus,
        config: &ClampConfig,
        space: &RoleSpace,
        default_seed: u64,
        labels: Option<&LabelSet>,
    ) -> Result<Self> {
        let mut mask = ClampMask::none(corpus);
        let langs: Vec<usize> = if config.languages.is_empty() {
            (0..corpus.num_languages()).collect()
        } else {
            config
                .languages
                .iter()
                .map(|name| {
                    corpus
                        .language_index(name)
                        .ok_or_else(|| Error::Config(format!("clamp language {name:?} is not in the corpus")))
                })
                .collect::<Result<_>>()?
        };
        let seed = config.selection_seed.unwrap_or(default_seed);
        for l in langs {
            let frames: Vec<&Frame> = corpus.frames(l).collect();
            let selected = select_fraction(frames.len(), config.fraction, seed);
            match config.source {
                ClampSource::Gold => {
                    let mapping = RoleMapping::for_inventory(&gold_inventory(frames.iter().copied()), space)?;
                    mask.clamp_gold(l, &frames, &selected, &mapping);
                }
                ClampSource::Labels => {
                    let labels = labels.ok_or_else(|| Error::Config("clamp labels file was not loaded".into()))?;
                    if labels.language != corpus.languages[l] {
                        continue;
                    }
                    mask.clamp_labels(l, &frames, &selected, labels, space)?;
                }
            }
        }
        Ok(mask)
    }

    /// Clamps the mapped gold role of every labeled argument of the
    /// selected frames.
    pub fn clamp_gold(&mut self, language: usize, frames: &[&Frame], selected: &[usize], mapping: &RoleMapping) {
        for &i in selected {
            for (j, a) in frames[i].arguments.iter().enumerate() {
                let role = a
                    .gold_role
                    .as_deref()
                    .filter(|g| *g != PREDICATE_LABEL)
                    .and_then(|g| mapping.get(g));
                self.languages[language][i][j] = role;
            }
        }
    }

    fn clamp_labels(
        &mut self,
        language: usize,
        frames: &[&Frame],
        selected: &[usize],
        labels: &LabelSet,
        space: &RoleSpace,
    ) -> Result<()> {
        for &i in selected {
            let f = frames[i];
            if !labels.frames.contains_key(&f.id) {
                continue;
            }
            for (j, s) in labels.labels_of(f)?.iter().enumerate() {
                if s == NO_LABEL {
                    continue;
                }
                let role: RoleLabel = s.parse()?;
                if space.index(role).is_none() {
                    return Err(Error::Data(format!("frame {}: {s} is outside the role space", f.id)));
                }
                self.languages[language][i][j] = Some(role);
            }
        }
        Ok(())
    }

    pub fn n_clamped(&self) -> usize {
        self.languages.iter().flatten().flatten().filter(|c| c.is_some()).count()
    }

    pub fn n_clamped_in(&self, language: usize) -> usize {
        self.languages[language].iter().flatten().filter(|c| c.is_some()).count()
    }

    /// Role indices of the clamps, rejecting a primary role clamped twice in
    /// one frame.
    pub(crate) fn indices(&self, space: &RoleSpace, corpus: &Corpus) -> Result<Vec<Vec<Vec<Option<u8>>>>> {
        self.languages
            .iter()
            .enumerate()
            .map(|(l, frames)| {
                let ids: Vec<&Frame> = corpus.frames(l).collect();
                if ids.len() != frames.len() {
                    return Err(Error::Contract("clamp mask does not match the corpus".into()));
                }
                frames
                    .iter()
                    .zip(ids)
                    .map(|(args, frame)| {
                        if args.len() != frame.arguments.len() {
                            return Err(Error::Contract("clamp mask does not match the corpus".into()));
                        }
                        let mut used = 0u64;
                        args.iter()
                            .map(|c| match c {
                                None => Ok(None),
                                Some(label) => {
                                    let r = space.index(*label).ok_or_else(|| {
                                        Error::Data(format!("frame {}: clamp {label} outside the role space", frame.id))
                                    })?;
                                    if space.is_primary(r) {
                                        if used & (1 << r) != 0 {
                                            return Err(Error::Data(format!(
                                                "frame {}: primary role {label} clamped twice",
                                                frame.id
                                            )));
                                        }
                                        used |= 1 << r;
                                    }
                                    Ok(Some(r))
                                }
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }
}
