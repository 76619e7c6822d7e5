use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::align::one_to_one;
use super::{
    infer_voice, AlignedFramePair, ArgumentMention, Corpus, Frame, LinkSet, Sentence,
    SidecarFile, VoiceRules,
};
use crate::error::{Error, Result};

/// Per-language ingestion settings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractOptions {
    /// Predicates with these lemmas are skipped.
    pub auxiliaries: BTreeSet<String>,
    pub voice: VoiceRules,
}

impl ExtractOptions {
    pub fn english() -> Self {
        let aux = [
            "be", "have", "do", "will", "would", "shall", "should", "may", "might", "must", "can",
            "could",
        ];
        ExtractOptions {
            auxiliaries: aux.iter().map(|s| s.to_string()).collect(),
            voice: VoiceRules::english(),
        }
    }

    pub fn german() -> Self {
        let aux = [
            "sein", "haben", "werden", "können", "müssen", "sollen", "wollen", "dürfen", "mögen",
        ];
        ExtractOptions {
            auxiliaries: aux.iter().map(|s| s.to_string()).collect(),
            voice: VoiceRules::german(),
        }
    }
}

impl Default for ExtractOptions {
    fn default() -> Self {
        Self::english()
    }
}

/// Builds the frames of every sentence, grouped by sentence. Arguments come
/// from the APRED columns, or from `sidecar` when given (gold roles are still
/// attached from APRED where the sidecar's predicate has a column).
pub fn frames_from_sentences(
    sentences: &[Sentence],
    sidecar: Option<&SidecarFile>,
    options: &ExtractOptions,
    id_prefix: &str,
) -> Result<Vec<Vec<Frame>>> {
    let mut requests: Vec<Vec<(usize, Vec<usize>)>> = vec![Vec::new(); sentences.len()];
    match sidecar {
        Some(sc) => {
            for e in &sc.entries {
                let slot = requests.get_mut(e.sentence).ok_or_else(|| {
                    Error::Data(format!(
                        "sidecar refers to sentence {} but the file has {}",
                        e.sentence,
                        sentences.len()
                    ))
                })?;
                slot.push((e.predicate_position, e.heads.clone()));
            }
        }
        None => {
            for (s, sent) in sentences.iter().enumerate() {
                for p in &sent.predicates {
                    requests[s].push((p.position, p.arguments.iter().map(|a| a.0).collect()));
                }
            }
        }
    }

    let mut out = Vec::with_capacity(sentences.len());
    for (s, (sent, reqs)) in sentences.iter().zip(requests).enumerate() {
        let mut frames = Vec::new();
        for (position, heads) in reqs {
            let pred = sent.token(position).ok_or_else(|| {
                Error::Data(format!(
                    "sentence {s}: predicate position {position} out of range"
                ))
            })?;
            if options.auxiliaries.contains(&pred.lemma) {
                continue;
            }
            let gold: BTreeMap<usize, &str> = sent
                .predicates
                .iter()
                .find(|p| p.position == position)
                .map(|p| p.arguments.iter().map(|(h, r)| (*h, r.as_str())).collect())
                .unwrap_or_default();
            let mut seen = BTreeSet::new();
            let mut arguments = Vec::new();
            for h in heads {
                if h == position || !seen.insert(h) {
                    continue;
                }
                let tok = sent.token(h).ok_or_else(|| {
                    Error::Data(format!("sentence {s}: argument head {h} out of range"))
                })?;
                arguments.push(ArgumentMention {
                    head_token: h,
                    features: [tok.deprel.clone(), tok.form.clone(), tok.pos.clone()],
                    gold_role: gold.get(&h).map(|r| r.to_string()),
                });
            }
            let voice = infer_voice(sent, position, &options.voice);
            frames.push(Frame::new(
                format!("{id_prefix}s{s}:p{position}"),
                pred.lemma.clone(),
                voice,
                position,
                arguments,
            )?);
        }
        out.push(frames);
    }
    Ok(out)
}

pub struct LanguageInput<'a> {
    pub name: &'a str,
    pub sentences: &'a [Sentence],
    pub sidecar: Option<&'a SidecarFile>,
    pub options: &'a ExtractOptions,
}

/// Builds a corpus from one language, or from two sentence-aligned languages
/// plus their word alignments.
///
/// Two predicate instances in a sentence pair become an [`AlignedFramePair`]
/// when some argument heads are aligned. Each frame joins at most one pair:
/// candidate pairs are taken greedily by descending link count, then by
/// frame order. Everything else is monolingual.
pub fn extract_frames(inputs: &[LanguageInput<'_>], alignments: Option<&[LinkSet]>) -> Result<Corpus> {
    if inputs.is_empty() || inputs.len() > 2 {
        return Err(Error::Config(format!(
            "expected one or two languages, got {}",
            inputs.len()
        )));
    }
    let per_lang: Vec<Vec<Vec<Frame>>> = inputs
        .iter()
        .enumerate()
        .map(|(l, inp)| frames_from_sentences(inp.sentences, inp.sidecar, inp.options, &format!("{}:", inp.name.replace(':', "_"))).map_err(|e| annotate(e, l)))
        .collect::<Result<_>>()?;
    let languages = inputs.iter().map(|i| i.name.to_string()).collect();

    if inputs.len() == 1 {
        if alignments.is_some() {
            return Err(Error::Config("alignments given for a single language".into()));
        }
        let frames = per_lang.into_iter().next().unwrap().into_iter().flatten().collect();
        return Ok(Corpus {
            languages,
            monolingual_frames: vec![frames],
            parallel_pairs: Vec::new(),
        });
    }

    let alignments = alignments
        .ok_or_else(|| Error::Config("bilingual ingestion requires an alignment file".into()))?;
    let (n_a, n_b) = (inputs[0].sentences.len(), inputs[1].sentences.len());
    if n_a != n_b {
        return Err(Error::Data(format!(
            "parallel files have {n_a} and {n_b} sentences"
        )));
    }
    if alignments.len() != n_a {
        return Err(Error::AlignmentDesync {
            alignments: alignments.len(),
            sentences: n_a,
        });
    }

    let mut mono_a = Vec::new();
    let mut mono_b = Vec::new();
    let mut pairs = Vec::new();
    let mut iter = per_lang.into_iter();
    let (frames_a, frames_b) = (iter.next().unwrap(), iter.next().unwrap());
    for ((fa, fb), links) in frames_a.into_iter().zip(frames_b).zip(alignments) {
        let mut candidates = Vec::new();
        for (ia, a) in fa.iter().enumerate() {
            for (ib, b) in fb.iter().enumerate() {
                let l = argument_links(a, b, links);
                if !l.is_empty() {
                    candidates.push((l.len(), ia, ib, l));
                }
            }
        }
        candidates.sort_by(|x, y| y.0.cmp(&x.0).then((x.1, x.2).cmp(&(y.1, y.2))));
        let mut used_a = vec![false; fa.len()];
        let mut used_b = vec![false; fb.len()];
        let mut chosen = Vec::new();
        for (_, ia, ib, l) in candidates {
            if !used_a[ia] && !used_b[ib] {
                used_a[ia] = true;
                used_b[ib] = true;
                chosen.push((ia, ib, l));
            }
        }
        let mut fa: Vec<Option<Frame>> = fa.into_iter().map(Some).collect();
        let mut fb: Vec<Option<Frame>> = fb.into_iter().map(Some).collect();
        for (ia, ib, l) in chosen {
            let a = fa[ia].take().unwrap();
            let b = fb[ib].take().unwrap();
            pairs.push(AlignedFramePair::new(a, b, l)?);
        }
        mono_a.extend(fa.into_iter().flatten());
        mono_b.extend(fb.into_iter().flatten());
    }
    Ok(Corpus {
        languages,
        monolingual_frames: vec![mono_a, mono_b],
        parallel_pairs: pairs,
    })
}

fn annotate(e: Error, lang: usize) -> Error {
    match e {
        Error::Data(m) => Error::Data(format!("language {lang}: {m}")),
        e => e,
    }
}

/// Argument links between two frames whose heads are word-aligned, made
/// one-to-one with the keep-first rule.
fn argument_links(a: &Frame, b: &Frame, links: &LinkSet) -> Vec<(usize, usize)> {
    let mut raw = LinkSet::new();
    for (ia, arg_a) in a.arguments.iter().enumerate() {
        for (ib, arg_b) in b.arguments.iter().enumerate() {
            if links.contains(&(arg_a.head_token - 1, arg_b.head_token - 1)) {
                raw.insert((ia, ib));
            }
        }
    }
    one_to_one(&raw).into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageStats {
    pub language: String,
    pub frames: usize,
    pub predicates: usize,
    pub arguments: usize,
    pub gold_labeled: usize,
    pub aligned_arguments: usize,
}

impl LanguageStats {
    /// Percentage of arguments participating in a crosslingual link.
    pub fn alignment_coverage(&self) -> f64 {
        if self.arguments == 0 {
            0.0
        } else {
            100.0 * self.aligned_arguments as f64 / self.arguments as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub languages: Vec<LanguageStats>,
    pub parallel_pairs: usize,
}

impl CorpusStats {
    pub fn of(corpus: &Corpus) -> Self {
        let languages = (0..corpus.num_languages())
            .map(|l| {
                let mut predicates = BTreeSet::new();
                let (mut frames, mut arguments, mut gold) = (0, 0, 0);
                for f in corpus.frames(l) {
                    frames += 1;
                    predicates.insert(f.predicate.as_str());
                    arguments += f.arguments.len();
                    gold += f.arguments.iter().filter(|a| a.gold_role.is_some()).count();
                }
                let aligned = if l < 2 {
                    corpus.parallel_pairs.iter().map(|p| p.links.len()).sum()
                } else {
                    0
                };
                LanguageStats {
                    language: corpus.languages[l].clone(),
                    frames,
                    predicates: predicates.len(),
                    arguments,
                    gold_labeled: gold,
                    aligned_arguments: aligned,
                }
            })
            .collect();
        CorpusStats {
            languages,
            parallel_pairs: corpus.parallel_pairs.len(),
        }
    }

    pub fn is_parallel(&self) -> bool {
        self.languages.len() == 2
    }
}

impl fmt::Display for CorpusStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.languages {
            writeln!(
                f,
                "{}: {} frames, {} predicates, {} arguments ({} gold-labeled)",
                l.language, l.frames, l.predicates, l.arguments, l.gold_labeled
            )?;
        }
        if self.is_parallel() {
            writeln!(f, "parallel pairs: {}", self.parallel_pairs)?;
            let cov: Vec<String> = self
                .languages
                .iter()
                .map(|l| format!("{} {:.1}%", l.language, l.alignment_coverage()))
                .collect();
            writeln!(f, "alignment coverage: {}", cov.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{read_conll_from_str, ConllOptions, SidecarEntry};
    use std::path::Path;

    fn row(cols: &[&str]) -> String {
        cols.join("\t")
    }

    /// "Mike has written a book" with `has` as an extra FILLPRED predicate.
    fn english() -> Vec<Sentence> {
        let text = [
            row(&["1", "Mike", "mike", "_", "NNP", "_", "_", "_", "2", "_", "SBJ", "_", "_", "_", "_", "A0"]),
            row(&["2", "has", "have", "_", "VBZ", "_", "_", "_", "0", "_", "ROOT", "_", "Y", "have.01", "_", "_"]),
            row(&["3", "written", "write", "_", "VBN", "_", "_", "_", "2", "_", "VC", "_", "Y", "write.01", "_", "_"]),
            row(&["4", "a", "a", "_", "DT", "_", "_", "_", "5", "_", "NMOD", "_", "_", "_", "_", "_"]),
            row(&["5", "book", "book", "_", "NN", "_", "_", "_", "3", "_", "OBJ", "_", "_", "_", "_", "A1"]),
        ]
        .join("\n");
        read_conll_from_str(&text, Path::new("en"), &ConllOptions::default()).unwrap()
    }

    fn german() -> Vec<Sentence> {
        let text = [
            row(&["1", "Mike", "Mike", "_", "NE", "_", "_", "_", "2", "_", "SB", "_", "_", "_", "A0"]),
            row(&["2", "hat", "haben", "_", "VAFIN", "_", "_", "_", "0", "_", "ROOT", "_", "_", "_", "_"]),
            row(&["3", "ein", "ein", "_", "ART", "_", "_", "_", "4", "_", "NK", "_", "_", "_", "_"]),
            row(&["4", "Buch", "Buch", "_", "NN", "_", "_", "_", "5", "_", "OA", "_", "_", "_", "A1"]),
            row(&["5", "geschrieben", "schreiben", "_", "VVPP", "_", "_", "_", "2", "_", "OC", "_", "Y", "schreiben.01", "_"]),
        ]
        .join("\n");
        read_conll_from_str(&text, Path::new("de"), &ConllOptions::default()).unwrap()
    }

    #[test]
    fn auxiliary_predicate_skipped() {
        let frames = frames_from_sentences(&english(), None, &ExtractOptions::english(), "").unwrap();
        assert_eq!(frames[0].len(), 1);
        let f = &frames[0][0];
        assert_eq!(f.predicate, "write");
        assert_eq!(f.arguments.len(), 2);
        assert_eq!(f.arguments[0].features, ["SBJ".to_string(), "Mike".into(), "NNP".into()]);
        assert_eq!(f.arguments[1].gold_role.as_deref(), Some("A1"));
        // "have" is not a passive auxiliary
        assert_eq!(f.voice, crate::corpus::Voice::Active);
    }

    #[test]
    fn aligned_heads_make_a_pair() {
        let en = english();
        let de = german();
        let (eo, go) = (ExtractOptions::english(), ExtractOptions::german());
        let inputs = [
            LanguageInput { name: "en", sentences: &en, sidecar: None, options: &eo },
            LanguageInput { name: "de", sentences: &de, sidecar: None, options: &go },
        ];
        // Mike-Mike, written-geschrieben, book-Buch (0-based)
        let links = vec![LinkSet::from([(0, 0), (2, 4), (4, 3)])];
        let c = extract_frames(&inputs, Some(&links)).unwrap();
        assert_eq!(c.parallel_pairs.len(), 1);
        assert_eq!(c.parallel_pairs[0].links, vec![(0, 0), (1, 1)]);
        assert!(c.monolingual_frames.iter().all(|m| m.is_empty()));

        let none = vec![LinkSet::new()];
        let c = extract_frames(&inputs, Some(&none)).unwrap();
        assert!(c.parallel_pairs.is_empty());
        assert_eq!(c.monolingual_frames[0].len(), 1);
        assert_eq!(c.monolingual_frames[1].len(), 1);

        let stats = CorpusStats::of(&extract_frames(&inputs, Some(&links)).unwrap());
        assert_eq!(stats.languages[0].alignment_coverage(), 100.0);
    }

    #[test]
    fn alignment_count_mismatch_is_desync() {
        let en = english();
        let de = german();
        let eo = ExtractOptions::english();
        let inputs = [
            LanguageInput { name: "en", sentences: &en, sidecar: None, options: &eo },
            LanguageInput { name: "de", sentences: &de, sidecar: None, options: &eo },
        ];
        let links = vec![LinkSet::new(), LinkSet::new()];
        assert!(matches!(
            extract_frames(&inputs, Some(&links)),
            Err(Error::AlignmentDesync { alignments: 2, sentences: 1 })
        ));
        assert!(matches!(extract_frames(&inputs, None), Err(Error::Config(_))));
    }

    #[test]
    fn sidecar_supplies_arguments() {
        let sc = SidecarFile {
            version: 1,
            entries: vec![SidecarEntry { sentence: 0, predicate_position: 3, heads: vec![5, 1, 3] }],
        };
        let frames = frames_from_sentences(&english(), Some(&sc), &ExtractOptions::english(), "").unwrap();
        let f = &frames[0][0];
        // predicate position dropped from the head list, order normalised
        assert_eq!(f.arguments.iter().map(|a| a.head_token).collect::<Vec<_>>(), vec![1, 5]);
        assert_eq!(f.arguments[0].gold_role.as_deref(), Some("A0"));
    }
}
