use serde::{Deserialize, Serialize};

use super::{Sentence, Voice};

/// Passive detection: a past participle attached to (or governing) a
/// passive auxiliary. A `voice=active|passive` entry in the predicate's
/// FEAT column takes precedence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoiceRules {
    pub participle_tags: Vec<String>,
    pub passive_auxiliaries: Vec<String>,
}

impl VoiceRules {
    pub fn english() -> Self {
        VoiceRules {
            participle_tags: vec!["VBN".into()],
            passive_auxiliaries: vec!["be".into(), "get".into()],
        }
    }

    pub fn german() -> Self {
        VoiceRules {
            participle_tags: vec!["VVPP".into(), "VAPP".into(), "VMPP".into()],
            passive_auxiliaries: vec!["werden".into()],
        }
    }
}

impl Default for VoiceRules {
    fn default() -> Self {
        Self::english()
    }
}

pub fn infer_voice(sentence: &Sentence, predicate_position: usize, rules: &VoiceRules) -> Voice {
    let Some(pred) = sentence.token(predicate_position) else {
        return Voice::Active;
    };
    for feat in &pred.feats {
        match feat.as_str() {
            "voice=passive" => return Voice::Passive,
            "voice=active" => return Voice::Active,
            _ => {}
        }
    }
    if !rules.participle_tags.contains(&pred.pos) {
        return Voice::Active;
    }
    let is_aux = |lemma: &str| rules.passive_auxiliaries.iter().any(|a| a == lemma);
    let governed_by_aux = sentence
        .token(pred.head)
        .is_some_and(|h| is_aux(&h.lemma));
    let governs_aux = sentence
        .tokens
        .iter()
        .any(|t| t.head == predicate_position && is_aux(&t.lemma));
    if governed_by_aux || governs_aux {
        Voice::Passive
    } else {
        Voice::Active
    }
}
