//! Synthetic corpora drawn from the generative model, with the generating
//! roles as gold labels.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::corpus::{AlignedFramePair, Corpus, Frame, Voice, MAX_ARGUMENTS, NUM_FEATURES};
use crate::crosslingual::{generate_pair, ClvGenerator, LinkPolicy};
use crate::error::{Error, Result};
use crate::eval::LabelSet;
use crate::model::{
    enumerate_orderings, generate_frame, ArgCountPolicy, GenerativeParams, PredicateParams, RoleSpace,
};

/// Generation settings of one language.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticLanguage {
    pub name: String,
    /// Monolingual frames, in addition to pair sides.
    #[serde(default)]
    pub frames: usize,
    /// Vocabulary sizes of (deprel, head word, head POS).
    pub feature_sizes: [usize; NUM_FEATURES],
    /// Mass each role puts on its preferred value of every feature type.
    pub peakiness: f64,
}

/// Parallel part of a two-language synthetic corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticPairs {
    pub count: usize,
    pub link_rate: f64,
    #[serde(default = "one")]
    pub alpha_crp: f64,
    /// Mass a CLV table puts on its anchor role.
    #[serde(default = "default_clv_peakiness")]
    pub peakiness: f64,
}

fn one() -> f64 {
    1.0
}

fn default_clv_peakiness() -> f64 {
    0.9
}

fn default_passive() -> f64 {
    0.2
}

fn default_stop() -> [f64; 2] {
    [0.6, 0.8]
}

fn default_max_arguments() -> usize {
    8
}

/// Synthetic corpus recipe, read from TOML.
///
/// Every role prefers one value per feature type. Deprel and POS
/// preferences are `role mod size` and shared by all predicates, so a
/// deprel vocabulary smaller than `N` merges roles syntactically; head
/// word preferences are distinct per role and drawn per predicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticConfig {
    pub seed: u64,
    #[serde(rename = "N")]
    pub n_roles: usize,
    #[serde(rename = "K")]
    pub n_primary: usize,
    pub predicates: usize,
    #[serde(default = "default_passive")]
    pub passive_rate: f64,
    /// Stop probability of an interval's first and subsequent decisions.
    #[serde(default = "default_stop")]
    pub stop: [f64; 2],
    #[serde(default = "default_max_arguments")]
    pub max_arguments: usize,
    pub languages: Vec<SyntheticLanguage>,
    #[serde(default)]
    pub pairs: Option<SyntheticPairs>,
}

impl SyntheticConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: SyntheticConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            e => e,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn space(&self) -> Result<RoleSpace> {
        RoleSpace::new(self.n_roles, self.n_primary).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let space = self.space()?;
        if space.n_secondary() == 0 {
            return Err(Error::Config("N must exceed K so secondary roles exist".into()));
        }
        if self.predicates == 0 {
            return Err(Error::Config("predicates must be positive".into()));
        }
        let prob = |name: &str, x: f64| {
            if (0.0..=1.0).contains(&x) {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must lie in [0, 1], got {x}")))
            }
        };
        prob("passive_rate", self.passive_rate)?;
        for s in self.stop {
            if !(s > 0.0 && s <= 1.0) {
                return Err(Error::Config(format!("stop probabilities must lie in (0, 1], got {s}")));
            }
        }
        if self.max_arguments == 0 || self.max_arguments > MAX_ARGUMENTS {
            return Err(Error::Config(format!("max_arguments must lie in 1..={MAX_ARGUMENTS}")));
        }
        if self.languages.is_empty() {
            return Err(Error::Config("at least one language is required".into()));
        }
        for (i, l) in self.languages.iter().enumerate() {
            if self.languages[..i].iter().any(|o| o.name == l.name) {
                return Err(Error::Config(format!("duplicate language {}", l.name)));
            }
            prob("peakiness", l.peakiness)?;
            if l.feature_sizes.contains(&0) {
                return Err(Error::Config(format!("{}: feature vocabularies must be non-empty", l.name)));
            }
            if l.feature_sizes[1] < self.n_roles {
                return Err(Error::Config(format!(
                    "{}: the head word vocabulary needs at least N = {} values",
                    l.name, self.n_roles
                )));
            }
        }
        if let Some(p) = &self.pairs {
            if self.languages.len() != 2 {
                return Err(Error::Config("pairs require exactly two languages".into()));
            }
            prob("link_rate", p.link_rate)?;
            prob("pairs.peakiness", p.peakiness)?;
            if !(p.alpha_crp > 0.0 && p.alpha_crp.is_finite()) {
                return Err(Error::Config("alpha_crp must be positive".into()));
            }
        }
        Ok(())
    }
}

/// A generated corpus with the parameters it was drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub corpus: Corpus,
    pub params: Vec<GenerativeParams>,
    /// CLV generator of predicate pair `(p, p)`, by `p`; empty without pairs.
    pub clv: Vec<ClvGenerator>,
}

impl SyntheticCorpus {
    /// Generating roles of every frame of language `lang`.
    pub fn gold(&self, lang: usize) -> LabelSet {
        LabelSet::gold(&self.corpus.languages[lang], self.corpus.frames(lang))
    }

    /// Links over language-1 arguments of the pairs.
    pub fn link_rate(&self) -> f64 {
        let args: usize = self.corpus.parallel_pairs.iter().map(|p| p.frame_a.arguments.len()).sum();
        let links: usize = self.corpus.parallel_pairs.iter().map(|p| p.links.len()).sum();
        if args == 0 { 0.0 } else { links as f64 / args as f64 }
    }
}

fn dirichlet_one<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let x: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = x.iter().sum();
    x.into_iter().map(|v| v / s).collect()
}

fn peaked(size: usize, at: usize, peakiness: f64) -> Vec<f64> {
    let u = (1.0 - peakiness) / size as f64;
    (0..size).map(|v| if v == at { peakiness + u } else { u }).collect()
}

/// Draws one language's parameters.
pub fn synthetic_params<R: Rng + ?Sized>(
    config: &SyntheticConfig,
    lang: &SyntheticLanguage,
    rng: &mut R,
) -> Result<GenerativeParams> {
    let space = config.space()?;
    let n_orderings = enumerate_orderings(space.n_primary()).len();
    let sizes = lang.feature_sizes;
    let mut words: Vec<usize> = (0..sizes[1]).collect();
    let predicates = (0..config.predicates)
        .map(|_| {
            let mut pp = PredicateParams::uniform(&space, n_orderings, sizes);
            pp.order = [dirichlet_one(rng, n_orderings), dirichlet_one(rng, n_orderings)];
            for sr in &mut pp.sr {
                *sr = dirichlet_one(rng, space.n_secondary());
            }
            for (i, s) in pp.stop.iter_mut().enumerate() {
                *s = config.stop[i % 2];
            }
            words.shuffle(rng);
            for r in 0..space.n_roles() {
                let pref = [r % sizes[0], words[r], r % sizes[2]];
                for t in 0..NUM_FEATURES {
                    pp.feat[r * NUM_FEATURES + t] = peaked(sizes[t], pref[t], lang.peakiness);
                }
            }
            pp
        })
        .collect();
    let params = GenerativeParams::new(space, sizes, predicates);
    params.validate()?;
    Ok(params)
}

fn feature_names(sizes: [usize; NUM_FEATURES]) -> [Vec<String>; NUM_FEATURES] {
    let prefix = ["dep", "w", "pos"];
    std::array::from_fn(|t| (0..sizes[t]).map(|v| format!("{}{v}", prefix[t])).collect())
}

fn predicate_name(p: usize) -> String {
    format!("pred{p}")
}

/// Draws a corpus: each language's monolingual frames, then the pairs.
/// Everything follows from `config.seed`.
pub fn generate_corpus(config: &SyntheticConfig) -> Result<SyntheticCorpus> {
    config.validate()?;
    let space = config.space()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let params: Vec<GenerativeParams> = config
        .languages
        .iter()
        .map(|l| synthetic_params(config, l, &mut rng))
        .collect::<Result<_>>()?;
    let names: Vec<_> = config.languages.iter().map(|l| feature_names(l.feature_sizes)).collect();
    let policy = ArgCountPolicy::AtMost(config.max_arguments);
    let voice = |rng: &mut ChaCha8Rng| {
        if rng.random_bool(config.passive_rate) { Voice::Passive } else { Voice::Active }
    };

    let mut monolingual_frames = Vec::new();
    for (li, lang) in config.languages.iter().enumerate() {
        let mut frames = Vec::with_capacity(lang.frames);
        for i in 0..lang.frames {
            let p = rng.random_range(0..config.predicates);
            let v = voice(&mut rng);
            let g = generate_frame(&params[li], p, v, policy, &mut rng)?;
            let (f, _) = g.to_frame(format!("{}-m{i}", lang.name), &predicate_name(p), &space, &names[li])?;
            frames.push(f);
        }
        monolingual_frames.push(frames);
    }

    let mut clv = Vec::new();
    let mut parallel_pairs = Vec::new();
    if let Some(pc) = &config.pairs {
        clv = (0..config.predicates)
            .map(|_| ClvGenerator::new(space.n_roles(), pc.alpha_crp, pc.peakiness))
            .collect();
        let links = LinkPolicy { rate: pc.link_rate };
        for i in 0..pc.count {
            let p = rng.random_range(0..config.predicates);
            let voices = [voice(&mut rng), voice(&mut rng)];
            let g = generate_pair([&params[0], &params[1]], (p, p), voices, &mut clv[p], links, policy, &mut rng)?;
            let [a, b] = g.frames;
            let side = |li: usize, g: &crate::model::GeneratedFrame| -> Result<Frame> {
                let id = format!("{}-p{i}", config.languages[li].name);
                Ok(g.to_frame(id, &predicate_name(p), &space, &names[li])?.0)
            };
            parallel_pairs.push(AlignedFramePair::new(side(0, &a)?, side(1, &b)?, g.links)?);
        }
    }

    let corpus = Corpus {
        languages: config.languages.iter().map(|l| l.name.clone()).collect(),
        monolingual_frames,
        parallel_pairs,
    };
    corpus.validate()?;
    Ok(SyntheticCorpus { corpus, params, clv })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mono(frames: usize) -> SyntheticConfig {
        SyntheticConfig::from_toml(&format!(
            r#"
seed = 3
N = 6
K = 2
predicates = 4
[[languages]]
name = "l1"
frames = {frames}
feature_sizes = [4, 20, 5]
peakiness = 0.9
"#
        ))
        .unwrap()
    }

    #[test]
    fn frame_count_and_gold() {
        let s = generate_corpus(&mono(100)).unwrap();
        assert_eq!(s.corpus.num_frames(0), 100);
        let gold = s.gold(0);
        assert_eq!(gold.frames.len(), 100);
        for f in s.corpus.frames(0) {
            assert_eq!(gold.frames[&f.id].len(), f.arguments.len());
            assert!(f.arguments.len() <= 8);
        }
    }

    #[test]
    fn seeded() {
        let a = generate_corpus(&mono(50)).unwrap();
        let b = generate_corpus(&mono(50)).unwrap();
        assert_eq!(a, b);
        let mut c = mono(50);
        c.seed = 4;
        assert_ne!(generate_corpus(&c).unwrap().corpus, a.corpus);
    }

    #[test]
    fn rejects_bad_values() {
        let mut c = mono(10);
        c.languages[0].peakiness = 1.5;
        assert!(c.validate().is_err());
        let mut c = mono(10);
        c.n_primary = 6;
        assert!(c.validate().is_err());
        let mut c = mono(10);
        c.pairs = Some(SyntheticPairs {
            count: 1,
            link_rate: 0.3,
            alpha_crp: 1.0,
            peakiness: 0.9,
        });
        assert!(c.validate().is_err());
        assert!(SyntheticConfig::from_toml("seed = 1\nN = 3\nK = 1\npredicates = 1\nlanguages = []\nbogus = 1").is_err());
    }

    #[test]
    fn toml_roundtrip() {
        let c = mono(10);
        assert_eq!(SyntheticConfig::from_toml(&c.to_toml().unwrap()).unwrap(), c);
    }

    #[test]
    fn pairs_and_links() {
        let mut c = mono(0);
        c.languages.push(SyntheticLanguage {
            name: "l2".into(),
            frames: 10,
            feature_sizes: [4, 20, 5],
            peakiness: 0.3,
        });
        c.pairs = Some(SyntheticPairs {
            count: 200,
            link_rate: 0.3,
            alpha_crp: 1.0,
            peakiness: 0.9,
        });
        let s = generate_corpus(&c).unwrap();
        assert_eq!(s.corpus.parallel_pairs.len(), 200);
        assert_eq!(s.corpus.num_frames(1), 210);
        assert!(s.link_rate() > 0.15 && s.link_rate() < 0.45);
    }
}
