use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Frame;
use crate::crosslingual::SerialClv;
use crate::error::{Error, Result};
use crate::model::{CountTables, Hyperparams, PredicateParams, PredicateTables, RoleSpace, SerialTables, Vocabularies};

use super::config::Regime;

pub const MODEL_FORMAT: &str = "sri-model";
pub const MODEL_VERSION: u32 = 1;

/// Trained model of one language: vocabularies, the final sample's counts
/// and pooled counts used for predicates never seen in training.
#[derive(Debug, Clone, PartialEq)]
pub struct LanguageModel {
    pub name: String,
    pub vocab: Vocabularies,
    pub tables: CountTables,
    pub backoff: PredicateTables,
}

impl LanguageModel {
    pub fn new(name: String, vocab: Vocabularies, tables: CountTables) -> Self {
        let backoff = tables.pooled();
        LanguageModel {
            name,
            vocab,
            tables,
            backoff,
        }
    }

    pub fn is_seen(&self, predicate: &str) -> bool {
        self.tables.is_predicate_seen(self.vocab.predicates.get(predicate))
    }

    /// Counts used to score frames of `predicate`: its own, or the pooled
    /// backoff counts if it was never seen.
    pub fn counts_for(&self, predicate: Option<u32>) -> &PredicateTables {
        self.tables.resolve(predicate, &self.backoff)
    }

    /// Posterior-mean parameters of `predicate`.
    pub fn params(&self, predicate: &str, hp: &Hyperparams) -> PredicateParams {
        let p = self.vocab.predicates.get(predicate);
        PredicateParams::from_counts(&self.tables, self.counts_for(p), hp)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub regime: Regime,
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub chains: usize,
    /// Chain whose final sample the model holds.
    pub selected_chain: usize,
    pub final_log_joint: f64,
    /// SHA-256 of the training corpus document.
    pub data_digest: String,
    pub clamped: usize,
}

/// A trained model. Point estimates are posterior means of the final
/// sample's counts; crosslingual tables are kept for inspection only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SerialModel", into = "SerialModel")]
pub struct FittedModel {
    pub space: RoleSpace,
    pub hyper: Hyperparams,
    pub languages: Vec<LanguageModel>,
    pub provenance: Provenance,
    pub crosslingual: Option<SerialClv>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SerialModel {
    format: String,
    version: u32,
    n_roles: usize,
    n_primary: usize,
    hyper: Hyperparams,
    languages: Vec<SerialLanguage>,
    provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    crosslingual: Option<SerialClv>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SerialLanguage {
    name: String,
    vocab: Vocabularies,
    counts: SerialTables,
}

impl TryFrom<SerialModel> for FittedModel {
    type Error = Error;

    fn try_from(s: SerialModel) -> Result<Self> {
        if s.format != MODEL_FORMAT || s.version != MODEL_VERSION {
            return Err(Error::Data(format!(
                "not a {MODEL_FORMAT} v{MODEL_VERSION} document: {} v{}",
                s.format, s.version
            )));
        }
        let space = RoleSpace::new(s.n_roles, s.n_primary)?;
        s.hyper.validate()?;
        let languages = s
            .languages
            .into_iter()
            .map(|l| {
                let tables = CountTables::from_serial(space, l.vocab.feature_sizes(), &l.counts)?;
                Ok(LanguageModel::new(l.name, l.vocab, tables))
            })
            .collect::<Result<_>>()?;
        Ok(FittedModel {
            space,
            hyper: s.hyper,
            languages,
            provenance: s.provenance,
            crosslingual: s.crosslingual,
        })
    }
}

impl From<FittedModel> for SerialModel {
    fn from(m: FittedModel) -> Self {
        SerialModel {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            n_roles: m.space.n_roles(),
            n_primary: m.space.n_primary(),
            hyper: m.hyper,
            languages: m
                .languages
                .into_iter()
                .map(|l| SerialLanguage {
                    counts: l.tables.to_serial(),
                    name: l.name,
                    vocab: l.vocab,
                })
                .collect(),
            provenance: m.provenance,
            crosslingual: m.crosslingual,
        }
    }
}

impl FittedModel {
    pub fn language_index(&self, name: &str) -> Option<usize> {
        self.languages.iter().position(|l| l.name == name)
    }

    pub fn language(&self, name: &str) -> Result<&LanguageModel> {
        self.language_index(name)
            .map(|i| &self.languages[i])
            .ok_or_else(|| Error::Data(format!("model has no language {name:?}")))
    }

    /// Whether `frame`'s predicate has its own parameters in language `lang`.
    pub fn covers(&self, lang: usize, frame: &Frame) -> bool {
        self.languages[lang].is_seen(&frame.predicate)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::json("serializing model", e))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::json("reading model", e))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(format!("writing {}", path.display()), e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::from_json(&text)
    }
}
