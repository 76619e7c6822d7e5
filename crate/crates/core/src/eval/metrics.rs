use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::labels::{LabelSet, NO_LABEL};
use crate::corpus::Frame;
use crate::error::{Error, Result};

/// Gold label of the predicate token itself; never scored.
pub const PREDICATE_LABEL: &str = "V";

/// An argument: frame id and argument index.
pub type InstanceKey = (String, usize);

/// Labels of argument instances grouped by predicate.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Clustering {
    pub by_predicate: BTreeMap<String, BTreeMap<InstanceKey, String>>,
}

impl Clustering {
    /// Gold clustering of `frames`: every argument with a gold label other
    /// than [`PREDICATE_LABEL`].
    pub fn gold<'a>(frames: impl IntoIterator<Item = &'a Frame>, gold: &LabelSet) -> Result<Self> {
        let mut c = Clustering::default();
        for f in frames {
            for (i, l) in gold.labels_of(f)?.iter().enumerate() {
                if l != NO_LABEL && l != PREDICATE_LABEL {
                    c.insert(&f.predicate, (f.id.clone(), i), l.clone());
                }
            }
        }
        Ok(c)
    }

    /// Labels from `labels` for exactly the instances of `reference`.
    pub fn restricted<'a>(
        frames: impl IntoIterator<Item = &'a Frame>,
        labels: &LabelSet,
        reference: &Clustering,
    ) -> Result<Self> {
        let mut c = Clustering::default();
        let mut missing = Vec::new();
        for f in frames {
            let Some(inst) = reference.by_predicate.get(&f.predicate) else {
                continue;
            };
            let ls = match labels.labels_of(f) {
                Ok(ls) => ls,
                Err(_) => {
                    if inst.keys().any(|k| k.0 == f.id) {
                        missing.push(format!("{} (frame)", f.id));
                    }
                    continue;
                }
            };
            for (i, l) in ls.iter().enumerate() {
                let key = (f.id.clone(), i);
                if inst.contains_key(&key) {
                    if l == NO_LABEL {
                        missing.push(format!("{}#{i}", f.id));
                    } else {
                        c.insert(&f.predicate, key, l.clone());
                    }
                }
            }
        }
        if !missing.is_empty() {
            return Err(Error::Data(format!(
                "{} instances have no label, first: {}",
                missing.len(),
                missing.iter().take(10).cloned().collect::<Vec<_>>().join(", ")
            )));
        }
        Ok(c)
    }

    pub fn insert(&mut self, predicate: &str, key: InstanceKey, label: String) {
        self.by_predicate
            .entry(predicate.to_string())
            .or_default()
            .insert(key, label);
    }

    pub fn n_instances(&self) -> usize {
        self.by_predicate.values().map(BTreeMap::len).sum()
    }

    /// First instances present in only one of the two clusterings.
    fn mismatches(&self, other: &Clustering, limit: usize) -> (usize, Vec<String>) {
        let mut count = 0;
        let mut out = Vec::new();
        let mut note = |p: &str, k: &InstanceKey| {
            count += 1;
            if out.len() < limit {
                out.push(format!("{p}:{}#{}", k.0, k.1));
            }
        };
        let empty = BTreeMap::new();
        let preds: std::collections::BTreeSet<&String> =
            self.by_predicate.keys().chain(other.by_predicate.keys()).collect();
        for p in preds {
            let a = self.by_predicate.get(p).unwrap_or(&empty);
            let b = other.by_predicate.get(p).unwrap_or(&empty);
            for k in a.keys().filter(|k| !b.contains_key(*k)) {
                note(p, k);
            }
            for k in b.keys().filter(|k| !a.contains_key(*k)) {
                note(p, k);
            }
        }
        (count, out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredicateScore {
    pub predicate: String,
    pub instances: usize,
    pub pu: f64,
    pub co: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignificanceEntry {
    pub comparison: String,
    pub p_value: f64,
    pub iterations: usize,
    pub seed: u64,
}

pub const REPORT_FORMAT: &str = "sri-eval-report";
pub const REPORT_VERSION: u32 = 1;

/// Clustering scores per predicate and micro-averaged over instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalReport {
    pub format: String,
    pub version: u32,
    pub instances: usize,
    pub pu: f64,
    pub co: f64,
    pub f1: f64,
    pub predicates: Vec<PredicateScore>,
    #[serde(default)]
    pub significance: Vec<SignificanceEntry>,
}

pub fn harmonic(a: f64, b: f64) -> f64 {
    if a + b > 0.0 {
        2.0 * a * b / (a + b)
    } else {
        0.0
    }
}

/// Sum over the groups of `left` of the largest overlap with a group of
/// `right`, for parallel label lists.
pub(crate) fn max_overlap_sum(left: &[&str], right: &[&str]) -> usize {
    let mut table: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    for (&l, &r) in left.iter().zip(right) {
        *table.entry((l, r)).or_insert(0) += 1;
    }
    let mut best: BTreeMap<&str, usize> = BTreeMap::new();
    for (&(l, _), &n) in &table {
        let b = best.entry(l).or_insert(0);
        *b = (*b).max(n);
    }
    best.values().sum()
}

/// Purity and collocation numerators of one predicate: `(sum_i max_j
/// |C_i ∩ G_j|, sum_j max_i |C_i ∩ G_j|, n)`.
pub(crate) fn predicate_counts(
    clusters: &BTreeMap<InstanceKey, String>,
    gold: &BTreeMap<InstanceKey, String>,
) -> (usize, usize, usize) {
    let c: Vec<&str> = clusters.values().map(String::as_str).collect();
    let g: Vec<&str> = gold.values().map(String::as_str).collect();
    (max_overlap_sum(&c, &g), max_overlap_sum(&g, &c), c.len())
}

/// Purity, collocation and F1 of `clusters` against `gold`, per predicate
/// and micro-averaged with each predicate weighted by its instance count.
pub fn purity_collocation(clusters: &Clustering, gold: &Clustering) -> Result<EvalReport> {
    let (bad, first) = clusters.mismatches(gold, 10);
    if bad > 0 {
        return Err(Error::Data(format!(
            "labels and gold cover different instances ({bad} differ), first: {}",
            first.join(", ")
        )));
    }
    let mut predicates = Vec::new();
    let (mut pu_sum, mut co_sum, mut total) = (0usize, 0usize, 0usize);
    for (p, g) in &gold.by_predicate {
        let (pu_n, co_n, n) = predicate_counts(&clusters.by_predicate[p], g);
        if n == 0 {
            continue;
        }
        let (pu, co) = (pu_n as f64 / n as f64, co_n as f64 / n as f64);
        predicates.push(PredicateScore {
            predicate: p.clone(),
            instances: n,
            pu,
            co,
            f1: harmonic(pu, co),
        });
        pu_sum += pu_n;
        co_sum += co_n;
        total += n;
    }
    let (pu, co) = if total > 0 {
        (pu_sum as f64 / total as f64, co_sum as f64 / total as f64)
    } else {
        (0.0, 0.0)
    };
    Ok(EvalReport {
        format: REPORT_FORMAT.into(),
        version: REPORT_VERSION,
        instances: total,
        pu,
        co,
        f1: harmonic(pu, co),
        predicates,
        significance: Vec::new(),
    })
}

/// Scores `labels` against the gold labels of `frames`.
pub fn evaluate(frames: &[&Frame], labels: &LabelSet, gold: &LabelSet) -> Result<EvalReport> {
    let g = Clustering::gold(frames.iter().copied(), gold)?;
    let c = Clustering::restricted(frames.iter().copied(), labels, &g)?;
    purity_collocation(&c, &g)
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::json("serializing report", e))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: EvalReport = serde_json::from_str(text).map_err(|e| Error::json("reading report", e))?;
        if r.format != REPORT_FORMAT || r.version != REPORT_VERSION {
            return Err(Error::Data(format!(
                "not a {REPORT_FORMAT} v{REPORT_VERSION} document: {} v{}",
                r.format, r.version
            )));
        }
        let in_range = |x: f64| (0.0..=1.0).contains(&x);
        if !in_range(r.pu) || !in_range(r.co) || !in_range(r.f1) {
            return Err(Error::Data("report scores outside [0, 1]".into()));
        }
        Ok(r)
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .predicates
            .iter()
            .map(|p| p.predicate.len())
            .max()
            .unwrap_or(0)
            .max(9);
        writeln!(f, "{:<width$} {:>9} {:>7} {:>7} {:>7}", "predicate", "instances", "PU", "CO", "F1")?;
        for p in &self.predicates {
            writeln!(
                f,
                "{:<width$} {:>9} {:>7.3} {:>7.3} {:>7.3}",
                p.predicate,
                p.instances,
                p.pu,
                p.co,
                p.f1
            )?;
        }
        writeln!(
            f,
            "{:<width$} {:>9} {:>7.3} {:>7.3} {:>7.3}",
            "(micro)", self.instances, self.pu, self.co, self.f1
        )?;
        writeln!(f, "F1 = {:.3}", self.f1)?;
        for s in &self.significance {
            writeln!(f, "{}: p = {:.4} ({} shuffles, seed {})", s.comparison, s.p_value, s.iterations, s.seed)?;
        }
        Ok(())
    }
}
