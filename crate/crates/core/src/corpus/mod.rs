//! Corpus ingestion: CoNLL-2009 sentences, Pharaoh alignments, and the
//! frame/pair structures every other module consumes.

mod align;
mod conll;
mod extract;
mod voice;

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use align::{read_alignments, read_alignments_from_str, AlignmentOptions, LinkSet};
pub use conll::{
    read_conll, read_conll_from_str, read_sidecar, ColumnProfile, ConllOptions, PredicateInstance,
    Sentence, SidecarEntry, SidecarFile,
};
pub use extract::{extract_frames, frames_from_sentences, CorpusStats, ExtractOptions, LanguageInput, LanguageStats};
pub use voice::{infer_voice, VoiceRules};

/// Number of observed feature types per argument.
pub const NUM_FEATURES: usize = 3;

/// Frames with more arguments than this are truncated on construction.
pub const MAX_ARGUMENTS: usize = 25;

pub const CORPUS_FORMAT: &str = "sri-corpus";
pub const CORPUS_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    /// 1-based position in the sentence.
    pub index: usize,
    pub form: String,
    pub lemma: String,
    pub pos: String,
    /// 0 is the root.
    pub head: usize,
    pub deprel: String,
    /// Features column, split on `|`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub feats: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Voice {
    Active,
    Passive,
}

impl Voice {
    pub fn index(self) -> usize {
        match self {
            Voice::Active => 0,
            Voice::Passive => 1,
        }
    }
}

impl fmt::Display for Voice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Voice::Active => f.write_str("active"),
            Voice::Passive => f.write_str("passive"),
        }
    }
}

/// One argument of a predicate instance: its head position and the three
/// observed features `(deprel, head form, head POS)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArgumentMention {
    pub head_token: usize,
    pub features: [String; NUM_FEATURES],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_role: Option<String>,
}

impl ArgumentMention {
    pub fn deprel(&self) -> &str {
        &self.features[0]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Frame {
    /// Corpus-unique identifier, used to key labels and evaluation instances.
    pub id: String,
    pub predicate: String,
    pub voice: Voice,
    pub predicate_position: usize,
    pub arguments: Vec<ArgumentMention>,
}

impl Frame {
    /// Builds a frame, sorting arguments by position and checking the
    /// ordering invariants. Frames over [`MAX_ARGUMENTS`] are truncated.
    pub fn new(
        id: impl Into<String>,
        predicate: impl Into<String>,
        voice: Voice,
        predicate_position: usize,
        mut arguments: Vec<ArgumentMention>,
    ) -> Result<Self> {
        let id = id.into();
        arguments.sort_by_key(|a| a.head_token);
        if arguments.len() > MAX_ARGUMENTS {
            log::warn!(
                "frame {id}: {} arguments, truncating to {MAX_ARGUMENTS}",
                arguments.len()
            );
            arguments.truncate(MAX_ARGUMENTS);
        }
        let frame = Frame {
            id,
            predicate: predicate.into(),
            voice,
            predicate_position,
            arguments,
        };
        frame.validate()?;
        Ok(frame)
    }

    pub fn validate(&self) -> Result<()> {
        for w in self.arguments.windows(2) {
            if w[0].head_token >= w[1].head_token {
                return Err(Error::Data(format!(
                    "frame {}: argument heads not strictly increasing ({} then {})",
                    self.id, w[0].head_token, w[1].head_token
                )));
            }
        }
        if self
            .arguments
            .iter()
            .any(|a| a.head_token == self.predicate_position)
        {
            return Err(Error::Data(format!(
                "frame {}: predicate position {} is also an argument head",
                self.id, self.predicate_position
            )));
        }
        for a in &self.arguments {
            if a.features.iter().any(|f| f.is_empty()) {
                return Err(Error::Data(format!(
                    "frame {}: argument at {} has an empty feature",
                    self.id, a.head_token
                )));
            }
        }
        if self.predicate.is_empty() {
            return Err(Error::Data(format!("frame {}: empty predicate", self.id)));
        }
        Ok(())
    }

    /// Number of arguments linearly before the predicate.
    pub fn predicate_slot(&self) -> usize {
        self.arguments
            .iter()
            .take_while(|a| a.head_token < self.predicate_position)
            .count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlignedFramePair {
    pub frame_a: Frame,
    pub frame_b: Frame,
    /// `(argument index in frame_a, argument index in frame_b)`, sorted.
    pub links: Vec<(usize, usize)>,
}

impl AlignedFramePair {
    pub fn new(frame_a: Frame, frame_b: Frame, mut links: Vec<(usize, usize)>) -> Result<Self> {
        links.sort_unstable();
        links.dedup();
        let pair = AlignedFramePair {
            frame_a,
            frame_b,
            links,
        };
        pair.validate()?;
        Ok(pair)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen_a = BTreeSet::new();
        let mut seen_b = BTreeSet::new();
        for &(a, b) in &self.links {
            if a >= self.frame_a.arguments.len() || b >= self.frame_b.arguments.len() {
                return Err(Error::Data(format!(
                    "pair {}/{}: link ({a}, {b}) out of range",
                    self.frame_a.id, self.frame_b.id
                )));
            }
            if !seen_a.insert(a) || !seen_b.insert(b) {
                return Err(Error::Data(format!(
                    "pair {}/{}: links are not one-to-one",
                    self.frame_a.id, self.frame_b.id
                )));
            }
        }
        self.frame_a.validate()?;
        self.frame_b.validate()
    }

    pub fn frame(&self, side: usize) -> &Frame {
        if side == 0 {
            &self.frame_a
        } else {
            &self.frame_b
        }
    }
}

/// Per-language monolingual frames plus the parallel pairs. A frame lives
/// in exactly one place: either a monolingual list or one side of a pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Corpus {
    pub languages: Vec<String>,
    pub monolingual_frames: Vec<Vec<Frame>>,
    #[serde(default)]
    pub parallel_pairs: Vec<AlignedFramePair>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CorpusFile {
    format: String,
    version: u32,
    #[serde(flatten)]
    corpus: Corpus,
}

impl Corpus {
    pub fn monolingual(language: impl Into<String>, frames: Vec<Frame>) -> Self {
        Corpus {
            languages: vec![language.into()],
            monolingual_frames: vec![frames],
            parallel_pairs: Vec::new(),
        }
    }

    pub fn num_languages(&self) -> usize {
        self.languages.len()
    }

    pub fn language_index(&self, name: &str) -> Option<usize> {
        self.languages.iter().position(|l| l == name)
    }

    /// Every frame of `language`: monolingual ones first, then pair sides.
    pub fn frames(&self, language: usize) -> impl Iterator<Item = &Frame> {
        let mono = self
            .monolingual_frames
            .get(language)
            .map(|v| v.as_slice())
            .unwrap_or(&[]);
        let pairs: &[AlignedFramePair] = if language < 2 {
            &self.parallel_pairs
        } else {
            &[]
        };
        mono.iter().chain(pairs.iter().map(move |p| p.frame(language)))
    }

    pub fn num_frames(&self, language: usize) -> usize {
        self.frames(language).count()
    }

    pub fn validate(&self) -> Result<()> {
        if self.languages.is_empty() {
            return Err(Error::Data("corpus has no languages".into()));
        }
        if self.monolingual_frames.len() != self.languages.len() {
            return Err(Error::Data(format!(
                "{} languages but {} monolingual frame lists",
                self.languages.len(),
                self.monolingual_frames.len()
            )));
        }
        if !self.parallel_pairs.is_empty() && self.languages.len() != 2 {
            return Err(Error::Data(
                "parallel pairs require exactly two languages".into(),
            ));
        }
        for lang in 0..self.languages.len() {
            let mut ids = BTreeSet::new();
            for f in self.frames(lang) {
                f.validate()?;
                if !ids.insert(f.id.as_str()) {
                    return Err(Error::Data(format!(
                        "language {}: duplicate frame id {}",
                        self.languages[lang], f.id
                    )));
                }
            }
        }
        for p in &self.parallel_pairs {
            p.validate()?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let file = CorpusFile {
            format: CORPUS_FORMAT.into(),
            version: CORPUS_VERSION,
            corpus: self.clone(),
        };
        serde_json::to_string_pretty(&file).map_err(|e| Error::json("serializing corpus", e))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CorpusFile =
            serde_json::from_str(text).map_err(|e| Error::json("parsing corpus", e))?;
        if file.format != CORPUS_FORMAT || file.version != CORPUS_VERSION {
            return Err(Error::Data(format!(
                "unsupported corpus format {} v{}",
                file.format, file.version
            )));
        }
        file.corpus.validate()?;
        Ok(file.corpus)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")
            .map_err(|e| Error::io(format!("writing {}", path.display()), e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::from_json(&text)
    }
}
