use rand::Rng;
use serde::{Deserialize, Serialize};

use super::hyper::Hyperparams;
use super::ordering::OrderingIndex;
use super::roles::{FrameAssignment, RoleSpace, PR_END, PR_PRED};
use super::tables::{CountTables, Dist, Event, PredicateTables, STOP};
use super::vocab::EncodedFrame;
use crate::corpus::{ArgumentMention, Frame, Voice, MAX_ARGUMENTS, NUM_FEATURES};
use crate::error::{Error, Result};

/// Point-estimate parameters of one predicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredicateParams {
    /// Per voice, a distribution over ordering indices.
    pub order: [Vec<f64>; 2],
    /// Per interval, a distribution over secondary roles.
    pub sr: Vec<Vec<f64>>,
    /// Probability of stopping, indexed `interval * 2 + adj`.
    pub stop: Vec<f64>,
    /// Per `role * 3 + feature type`, a distribution over feature values.
    pub feat: Vec<Vec<f64>>,
}

impl PredicateParams {
    /// Uniform parameters over every categorical.
    pub fn uniform(space: &RoleSpace, n_orderings: usize, feature_sizes: [usize; NUM_FEATURES]) -> Self {
        let u = |n: usize| vec![1.0 / n as f64; n];
        let ni = space.n_intervals();
        PredicateParams {
            order: [u(n_orderings), u(n_orderings)],
            sr: vec![u(space.n_secondary()); ni],
            stop: vec![0.5; ni * 2],
            feat: (0..space.n_roles() * NUM_FEATURES)
                .map(|k| u(feature_sizes[k % NUM_FEATURES]))
                .collect(),
        }
    }

    /// Posterior means of the categoricals given the counts `pt`.
    pub fn from_counts(tables: &CountTables, pt: &PredicateTables, hp: &Hyperparams) -> Self {
        let space = tables.space();
        let pred = |dist: Dist, n: usize| -> Vec<f64> {
            (0..n as u32)
                .map(|o| tables.predictive_in(hp, pt, Event { dist, outcome: o }))
                .collect()
        };
        let ni = space.n_intervals();
        let fs = tables.feature_sizes();
        PredicateParams {
            order: std::array::from_fn(|v| pred(Dist::Order { voice: v as u8 }, tables.n_orderings())),
            sr: (0..ni)
                .map(|i| pred(Dist::Sr { interval: i as u16 }, space.n_secondary()))
                .collect(),
            stop: (0..ni * 2)
                .map(|k| {
                    let dist = Dist::Stop {
                        interval: (k / 2) as u16,
                        adj: (k % 2) as u8,
                    };
                    tables.predictive_in(hp, pt, Event { dist, outcome: STOP })
                })
                .collect(),
            feat: (0..space.n_roles() * NUM_FEATURES)
                .map(|k| {
                    let dist = Dist::Feat {
                        role: (k / NUM_FEATURES) as u8,
                        feature: (k % NUM_FEATURES) as u8,
                    };
                    pred(dist, fs[k % NUM_FEATURES])
                })
                .collect(),
        }
    }

    /// Largest deviation of any categorical's total mass from 1.
    pub fn max_normalization_error(&self) -> f64 {
        let dev = |v: &Vec<f64>| (v.iter().sum::<f64>() - 1.0).abs();
        self.order
            .iter()
            .chain(&self.sr)
            .chain(&self.feat)
            .map(dev)
            .fold(0.0, f64::max)
    }
}

/// Forward-sampling parameters of the monolingual model for a set of
/// predicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SerialParams", into = "SerialParams")]
pub struct GenerativeParams {
    space: RoleSpace,
    feature_sizes: [usize; NUM_FEATURES],
    pub predicates: Vec<PredicateParams>,
    orderings: OrderingIndex,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SerialParams {
    n_roles: usize,
    n_primary: usize,
    feature_sizes: [usize; NUM_FEATURES],
    predicates: Vec<PredicateParams>,
}

impl TryFrom<SerialParams> for GenerativeParams {
    type Error = Error;

    fn try_from(s: SerialParams) -> Result<Self> {
        let space = RoleSpace::new(s.n_roles, s.n_primary)?;
        let p = GenerativeParams::new(space, s.feature_sizes, s.predicates);
        p.validate()?;
        Ok(p)
    }
}

impl From<GenerativeParams> for SerialParams {
    fn from(p: GenerativeParams) -> Self {
        SerialParams {
            n_roles: p.space.n_roles(),
            n_primary: p.space.n_primary(),
            feature_sizes: p.feature_sizes,
            predicates: p.predicates,
        }
    }
}

impl GenerativeParams {
    pub fn new(space: RoleSpace, feature_sizes: [usize; NUM_FEATURES], predicates: Vec<PredicateParams>) -> Self {
        GenerativeParams {
            orderings: OrderingIndex::new(&space),
            space,
            feature_sizes,
            predicates,
        }
    }

    pub fn space(&self) -> &RoleSpace {
        &self.space
    }

    pub fn n_orderings(&self) -> usize {
        self.orderings.len()
    }

    pub fn feature_sizes(&self) -> [usize; NUM_FEATURES] {
        self.feature_sizes
    }

    /// PR ids of ordering `index` (START=0, PRED=1, END=2, `Pk`=2+k).
    pub fn ordering_ids(&self, index: u32) -> &[u8] {
        self.orderings.ids(index)
    }

    pub fn validate(&self) -> Result<()> {
        let ni = self.space.n_intervals();
        for (i, p) in self.predicates.iter().enumerate() {
            let shape_ok = p.order.iter().all(|o| o.len() == self.orderings.len())
                && p.sr.len() == ni
                && p.sr.iter().all(|s| s.len() == self.space.n_secondary())
                && p.stop.len() == ni * 2
                && p.feat.len() == self.space.n_roles() * NUM_FEATURES
                && p
                    .feat
                    .iter()
                    .enumerate()
                    .all(|(k, f)| f.len() == self.feature_sizes[k % NUM_FEATURES]);
            if !shape_ok {
                return Err(Error::Config(format!("predicate {i}: parameter shapes do not match N/K")));
            }
            let all = p.order.iter().chain(&p.sr).chain(&p.feat).flatten().chain(&p.stop);
            if all.clone().any(|&x| !(0.0..=1.0).contains(&x)) {
                return Err(Error::Config(format!("predicate {i}: probability outside [0, 1]")));
            }
            if p.max_normalization_error() > 1e-6 {
                return Err(Error::Config(format!("predicate {i}: a distribution does not sum to 1")));
            }
        }
        Ok(())
    }
}

/// How many arguments a generated frame may have.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArgCountPolicy {
    /// Whatever the stop process produces, up to the corpus-wide limit.
    Natural,
    /// Redraw the frame until it has at most this many arguments.
    AtMost(usize),
}

impl ArgCountPolicy {
    fn limit(self) -> usize {
        match self {
            ArgCountPolicy::Natural => MAX_ARGUMENTS,
            ArgCountPolicy::AtMost(n) => n.min(MAX_ARGUMENTS),
        }
    }
}

/// A forward sample: argument roles in linear order with their features.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedFrame {
    pub voice: Voice,
    pub predicate_slot: usize,
    pub roles: Vec<u8>,
    pub features: Vec<[u32; NUM_FEATURES]>,
}

impl GeneratedFrame {
    pub fn encoded(&self, predicate: Option<u32>) -> EncodedFrame {
        EncodedFrame {
            predicate,
            voice: self.voice,
            predicate_slot: self.predicate_slot,
            features: self.features.clone(),
        }
    }

    /// Materializes the sample as a corpus frame. Argument `i` sits at token
    /// `i + 1`, shifted by one past the predicate. Gold roles are the
    /// generating role labels.
    pub fn to_frame(
        &self,
        id: impl Into<String>,
        predicate: &str,
        space: &RoleSpace,
        value_names: &[Vec<String>; NUM_FEATURES],
    ) -> Result<(Frame, FrameAssignment)> {
        let predicate_position = self.predicate_slot + 1;
        let arguments = self
            .roles
            .iter()
            .zip(&self.features)
            .enumerate()
            .map(|(i, (&r, f))| {
                let features = std::array::from_fn(|t| {
                    value_names[t]
                        .get(f[t] as usize)
                        .cloned()
                        .unwrap_or_else(|| format!("v{}", f[t]))
                });
                ArgumentMention {
                    head_token: if i < self.predicate_slot { i + 1 } else { i + 2 },
                    features,
                    gold_role: Some(space.label(r).to_string()),
                }
            })
            .collect();
        let frame = Frame::new(id, predicate, self.voice, predicate_position, arguments)?;
        Ok((frame, FrameAssignment::from_indices(space, &self.roles)))
    }
}

/// Draws an index from a discrete distribution.
pub fn sample_categorical<R: Rng + ?Sized>(rng: &mut R, probs: &[f64]) -> usize {
    let total: f64 = probs.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &p) in probs.iter().enumerate() {
        if u < p {
            return i;
        }
        u -= p;
    }
    // rounding left a sliver of mass: take the last non-zero outcome
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

const MAX_REDRAWS: usize = 10_000;

/// Forward-samples a frame of predicate `p`: the ordering, the SRs of every
/// interval through the stop process, then the features of every role.
pub fn generate_frame<R: Rng + ?Sized>(
    params: &GenerativeParams,
    p: usize,
    voice: Voice,
    policy: ArgCountPolicy,
    rng: &mut R,
) -> Result<GeneratedFrame> {
    let pp = params
        .predicates
        .get(p)
        .ok_or_else(|| Error::Domain(format!("no parameters for predicate {p}")))?;
    let space = params.space;
    let limit = policy.limit();
    'redraw: for _ in 0..MAX_REDRAWS {
        let o = sample_categorical(rng, &pp.order[voice.index()]);
        let ids = params.orderings.ids(o as u32);
        let mut roles = Vec::new();
        let mut slot = 0;
        for w in ids.windows(2) {
            let interval = space.interval_index(w[0], w[1]);
            let mut adj = 0;
            while rng.random::<f64>() >= pp.stop[interval * 2 + adj] {
                let s = sample_categorical(rng, &pp.sr[interval]);
                roles.push((space.n_primary() + s) as u8);
                if roles.len() > limit {
                    continue 'redraw;
                }
                adj = 1;
            }
            match w[1] {
                PR_PRED => slot = roles.len(),
                PR_END => {}
                id => roles.push(id - 3),
            }
            if roles.len() > limit {
                continue 'redraw;
            }
        }
        let features = roles
            .iter()
            .map(|&r| {
                std::array::from_fn(|t| {
                    sample_categorical(rng, &pp.feat[r as usize * NUM_FEATURES + t]) as u32
                })
            })
            .collect();
        return Ok(GeneratedFrame {
            voice,
            predicate_slot: slot,
            roles,
            features,
        });
    }
    Err(Error::Domain(format!(
        "could not draw a frame within {limit} arguments; the stop probabilities are too low"
    )))
}
