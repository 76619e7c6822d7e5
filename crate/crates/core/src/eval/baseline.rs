use std::collections::BTreeMap;

use super::labels::LabelSet;
use super::mapping::RoleMapping;
use crate::corpus::{Corpus, Frame};
use crate::error::{Error, Result};
use crate::inference::{decode, train, ClampMask, TrainConfig};

/// Deprel → cluster map of the syntactic-function baseline: the `n - 1`
/// most frequent functions get clusters `c1..c(n-1)` (ties by name), every
/// other function shares `cn`.
pub fn syntactic_clusters<'a>(frames: impl IntoIterator<Item = &'a Frame>, n: usize) -> BTreeMap<String, usize> {
    let mut freq: BTreeMap<&str, usize> = BTreeMap::new();
    for f in frames {
        for a in &f.arguments {
            *freq.entry(a.deprel()).or_insert(0) += 1;
        }
    }
    let mut ranked: Vec<(&str, usize)> = freq.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let n = n.max(1);
    ranked
        .into_iter()
        .enumerate()
        .map(|(i, (d, _))| (d.to_string(), i.min(n - 1) + 1))
        .collect()
}

/// Labels every argument with its syntactic-function cluster `c1..cn`.
pub fn syntactic_baseline(language: &str, frames: &[&Frame], n: usize) -> LabelSet {
    let clusters = syntactic_clusters(frames.iter().copied(), n);
    let mut out = LabelSet::new(language);
    for f in frames {
        let labels = f
            .arguments
            .iter()
            .map(|a| format!("c{}", clusters[a.deprel()]))
            .collect();
        out.frames.insert(f.id.clone(), labels);
    }
    out
}

/// Supervised baseline: parameters estimated from the mapped gold labels of
/// `labeled`, used to decode the `unlabeled` frames of predicates seen
/// there; every other predicate gets the syntactic baseline computed over
/// `unlabeled`.
pub fn supervised_baseline(
    language: &str,
    labeled: &[&Frame],
    unlabeled: &[&Frame],
    mapping: &RoleMapping,
    config: &TrainConfig,
) -> Result<LabelSet> {
    let fallback = syntactic_baseline(language, unlabeled, config.n_roles);
    if labeled.is_empty() {
        return Ok(fallback);
    }
    let corpus = Corpus::monolingual(language, labeled.iter().map(|&f| f.clone()).collect());
    let mut mask = ClampMask::none(&corpus);
    let all: Vec<usize> = (0..labeled.len()).collect();
    mask.clamp_gold(0, labeled, &all, mapping);
    let mut cfg = config.clone();
    cfg.clamp = None;
    cfg.regime = crate::inference::Regime::Mono;
    let fitted = train(&corpus, &cfg, &mask)?;
    let model = fitted.model;
    let seen: Vec<&Frame> = unlabeled.iter().copied().filter(|f| model.covers(0, f)).collect();
    let decoded = decode(&seen, &model, 0, &config.decode)?;
    let mut out = fallback;
    for (f, a) in seen.iter().zip(decoded) {
        let labels = a.roles.iter().map(|r| r.to_string()).collect();
        if out.frames.insert(f.id.clone(), labels).is_none() {
            return Err(Error::Contract(format!("frame {} decoded twice", f.id)));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{ArgumentMention, Voice};

    fn frame(id: &str, deprels: &[&str]) -> Frame {
        let args = deprels
            .iter()
            .enumerate()
            .map(|(i, d)| ArgumentMention {
                head_token: i + 2,
                features: [d.to_string(), "w".into(), "NN".into()],
                gold_role: None,
            })
            .collect();
        Frame::new(id, "p", Voice::Active, 1, args).unwrap()
    }

    #[test]
    fn top_functions_get_clusters() {
        let f = [frame("a", &["SBJ", "SBJ", "OBJ", "SBJ", "OBJ", "OPRD", "SBJ", "OBJ", "SBJ"])];
        let c = syntactic_clusters(f.iter(), 3);
        assert_eq!(c["SBJ"], 1);
        assert_eq!(c["OBJ"], 2);
        assert_eq!(c["OPRD"], 3);
    }

    #[test]
    fn ties_break_lexicographically() {
        let f = [frame("a", &["SBJ", "SBJ", "SBJ", "SBJ", "OBJ", "OBJ", "OBJ", "NMOD", "NMOD", "NMOD"])];
        let c = syntactic_clusters(f.iter(), 3);
        assert_eq!(c["NMOD"], 2);
        assert_eq!(c["OBJ"], 3);
    }

    #[test]
    fn one_cluster() {
        let f = frame("a", &["SBJ", "OBJ"]);
        let l = syntactic_baseline("en", &[&f], 1);
        assert_eq!(l.frames["a"], vec!["c1", "c1"]);
    }
}
