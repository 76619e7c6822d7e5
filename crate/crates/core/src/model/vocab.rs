use rustc_hash::FxHashMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::corpus::{Frame, Voice, NUM_FEATURES};

pub const UNK: &str = "<unk>";

/// String interner. Serialized as the list of names in id order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocab {
    names: Vec<String>,
    ids: FxHashMap<String, u32>,
}

impl Vocab {
    /// A vocabulary whose id 0 is the reserved unknown-value slot.
    pub fn with_unk() -> Self {
        let mut v = Vocab::default();
        v.intern(UNK);
        v
    }

    pub fn intern(&mut self, name: &str) -> u32 {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(name.to_string());
        self.ids.insert(name.to_string(), id);
        id
    }

    pub fn get(&self, name: &str) -> Option<u32> {
        self.ids.get(name).copied()
    }

    pub fn name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    fn from_names(names: Vec<String>) -> Self {
        let ids = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i as u32))
            .collect();
        Vocab { names, ids }
    }
}

impl Serialize for Vocab {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.names.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Vocab {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let names = Vec::<String>::deserialize(d)?;
        let v = Vocab::from_names(names);
        if v.ids.len() != v.names.len() {
            return Err(serde::de::Error::custom("duplicate vocabulary entry"));
        }
        Ok(v)
    }
}

/// Predicate and feature vocabularies of one language. Feature vocabularies
/// are global per feature type and reserve id 0 for unseen values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabularies {
    pub predicates: Vocab,
    pub features: [Vocab; NUM_FEATURES],
}

impl Default for Vocabularies {
    fn default() -> Self {
        Vocabularies {
            predicates: Vocab::default(),
            features: std::array::from_fn(|_| Vocab::with_unk()),
        }
    }
}

/// Integer view of a frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedFrame {
    /// `None` for a predicate outside the vocabulary.
    pub predicate: Option<u32>,
    pub voice: Voice,
    pub predicate_slot: usize,
    pub features: Vec<[u32; NUM_FEATURES]>,
}

impl EncodedFrame {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }
}

impl Vocabularies {
    pub fn build<'a>(frames: impl IntoIterator<Item = &'a Frame>) -> Self {
        let mut v = Vocabularies::default();
        for f in frames {
            v.predicates.intern(&f.predicate);
            for a in &f.arguments {
                for (t, val) in a.features.iter().enumerate() {
                    v.features[t].intern(val);
                }
            }
        }
        v
    }

    pub fn feature_sizes(&self) -> [usize; NUM_FEATURES] {
        std::array::from_fn(|t| self.features[t].len())
    }

    /// Unknown predicates map to `None` and unknown feature values to UNK.
    pub fn encode(&self, frame: &Frame) -> EncodedFrame {
        EncodedFrame {
            predicate: self.predicates.get(&frame.predicate),
            voice: frame.voice,
            predicate_slot: frame.predicate_slot(),
            features: frame
                .arguments
                .iter()
                .map(|a| std::array::from_fn(|t| self.features[t].get(&a.features[t]).unwrap_or(0)))
                .collect(),
        }
    }
}
