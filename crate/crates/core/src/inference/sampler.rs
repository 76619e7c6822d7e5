use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, Frame};
use crate::crosslingual::{ClvState, PredicatePair, TableChoice};
use crate::error::{Error, Result};
use crate::model::{
    frame_events, frame_log_joint_idx, sample_categorical, CountTables, EncodedFrame, Event, Hyperparams, RoleSpace,
    TableMode, Vocabularies,
};

/// Encoded training data of one language.
#[derive(Debug, Clone)]
pub(crate) struct LangData {
    pub name: String,
    pub vocab: Vocabularies,
    pub frames: Vec<EncodedFrame>,
    pub clamps: Vec<Vec<Option<u8>>>,
}

#[derive(Debug, Clone)]
pub(crate) struct PairData {
    pub key: PredicatePair,
    /// Frame index of each side in its language.
    pub frames: [usize; 2],
    pub links: Vec<(usize, usize)>,
}

/// Everything a chain reads but never mutates.
#[derive(Debug, Clone)]
pub(crate) struct TrainData {
    pub space: RoleSpace,
    pub hp: Hyperparams,
    pub langs: Vec<LangData>,
    /// Empty unless the regime is coupled.
    pub pairs: Vec<PairData>,
    /// Per language, frame, position: the `(pair, link)` ids touching it.
    pub links_at: Vec<Vec<Vec<Vec<(u32, u32)>>>>,
}

impl TrainData {
    pub fn new(
        corpus: &Corpus,
        space: RoleSpace,
        hp: Hyperparams,
        clamps: Vec<Vec<Vec<Option<u8>>>>,
        coupled: bool,
    ) -> Result<Self> {
        let mut langs = Vec::new();
        for (l, clamps) in clamps.into_iter().enumerate() {
            let frames: Vec<&Frame> = corpus.frames(l).collect();
            let vocab = Vocabularies::build(frames.iter().copied());
            let encoded = frames.iter().map(|f| vocab.encode(f)).collect();
            langs.push(LangData {
                name: corpus.languages[l].clone(),
                vocab,
                frames: encoded,
                clamps,
            });
        }
        let mut pairs = Vec::new();
        let mut links_at: Vec<Vec<Vec<Vec<(u32, u32)>>>> = langs
            .iter()
            .map(|d| d.frames.iter().map(|f| vec![Vec::new(); f.len()]).collect())
            .collect();
        if coupled {
            let n_mono: Vec<usize> = corpus.monolingual_frames.iter().map(Vec::len).collect();
            for (q, pair) in corpus.parallel_pairs.iter().enumerate() {
                let frames = [n_mono[0] + q, n_mono[1] + q];
                let key = (
                    langs[0].frames[frames[0]].predicate.expect("training predicate in vocabulary"),
                    langs[1].frames[frames[1]].predicate.expect("training predicate in vocabulary"),
                );
                for (k, &(i, j)) in pair.links.iter().enumerate() {
                    links_at[0][frames[0]][i].push((q as u32, k as u32));
                    links_at[1][frames[1]][j].push((q as u32, k as u32));
                }
                pairs.push(PairData {
                    key,
                    frames,
                    links: pair.links.clone(),
                });
            }
        }
        Ok(TrainData {
            space,
            hp,
            langs,
            pairs,
            links_at,
        })
    }

    pub fn n_clamped(&self) -> usize {
        self.langs
            .iter()
            .flat_map(|d| d.clamps.iter().flatten())
            .filter(|c| c.is_some())
            .count()
    }
}

/// Roles a position may take: every SR and every PR not used at another
/// position of the frame.
pub(crate) fn candidates(space: &RoleSpace, roles: &[u8], position: usize, out: &mut Vec<u8>) {
    out.clear();
    let mut used = 0u64;
    for (i, &r) in roles.iter().enumerate() {
        if i != position && space.is_primary(r) {
            used |= 1 << r;
        }
    }
    for r in 0..space.n_roles() as u8 {
        if !space.is_primary(r) || used & (1 << r) == 0 {
            out.push(r);
        }
    }
}

/// Samples an index with probability proportional to `exp(log_w)`.
pub(crate) fn sample_log_weights<R: Rng + ?Sized>(rng: &mut R, log_w: &mut [f64]) -> usize {
    let m = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for w in log_w.iter_mut() {
        *w = (*w - m).exp();
    }
    sample_categorical(rng, log_w)
}

/// Log weights of every candidate role at `position`: the frame joint with
/// the candidate plugged in plus `extra(candidate)`. The frame's events must
/// not be in `tables`.
fn position_log_weights(
    frame: &EncodedFrame,
    roles: &mut [u8],
    position: usize,
    tables: &CountTables,
    hp: &Hyperparams,
    cands: &[u8],
    extra: &dyn Fn(u8) -> f64,
) -> Result<Vec<f64>> {
    let keep = roles[position];
    let mut out = Vec::with_capacity(cands.len());
    for &c in cands {
        roles[position] = c;
        out.push(frame_log_joint_idx(frame, roles, tables, hp, TableMode::Excluded)? + extra(c));
    }
    roles[position] = keep;
    Ok(out)
}

/// One collapsed Gibbs move for argument `position` of a monolingual frame.
/// The frame's events must already be removed from `tables`; they are added
/// back, with the new role, before returning.
pub fn gibbs_step_role_mono<R: Rng + ?Sized>(
    frame: &EncodedFrame,
    roles: &mut [u8],
    position: usize,
    tables: &mut CountTables,
    hp: &Hyperparams,
    rng: &mut R,
) -> Result<u8> {
    let p = training_predicate(frame)?;
    let mut cands = Vec::new();
    candidates(tables.space(), roles, position, &mut cands);
    let mut w = position_log_weights(frame, roles, position, tables, hp, &cands, &|_| 0.0)?;
    roles[position] = cands[sample_log_weights(rng, &mut w)];
    let mut ev = Vec::new();
    frame_events(tables, frame, roles, &mut ev)?;
    tables.add_all(p, &ev);
    Ok(roles[position])
}

/// Gibbs move for a position of side `side` of aligned pair `pair` whose
/// links are `links`. Each link's CLV table additionally predicts the role.
/// As for [`gibbs_step_role_mono`], the frame's events must be removed from
/// `tables` and are re-added; link counts stay in `clv` throughout.
#[allow(clippy::too_many_arguments)]
pub fn gibbs_step_role_coupled<R: Rng + ?Sized>(
    frame: &EncodedFrame,
    roles: &mut [u8],
    position: usize,
    side: usize,
    pair: usize,
    links: &[usize],
    tables: &mut CountTables,
    clv: &mut ClvState,
    hp: &Hyperparams,
    rng: &mut R,
) -> Result<u8> {
    let p = training_predicate(frame)?;
    let ids: Vec<(u32, u32)> = links.iter().map(|&k| (pair as u32, k as u32)).collect();
    resample_position(frame, roles, position, side, &ids, tables, Some(clv), hp, rng)?;
    let mut ev = Vec::new();
    frame_events(tables, frame, roles, &mut ev)?;
    tables.add_all(p, &ev);
    Ok(roles[position])
}

#[allow(clippy::too_many_arguments)]
fn resample_position<R: Rng + ?Sized>(
    frame: &EncodedFrame,
    roles: &mut [u8],
    position: usize,
    side: usize,
    links: &[(u32, u32)],
    tables: &CountTables,
    clv: Option<&mut ClvState>,
    hp: &Hyperparams,
    rng: &mut R,
) -> Result<()> {
    let space = *tables.space();
    let mut cands = Vec::with_capacity(space.n_roles());
    candidates(&space, roles, position, &mut cands);
    let old = roles[position];
    match clv {
        Some(clv) if !links.is_empty() => {
            let mut tabs = Vec::with_capacity(links.len());
            for &(q, k) in links {
                let key = clv.crp.pair_key(q as usize);
                let t = clv
                    .crp
                    .table_of(q as usize, k as usize)
                    .ok_or_else(|| Error::Contract("link without a CLV table".into()))?;
                clv.align.remove(key, t, side, old)?;
                tabs.push((key, t));
            }
            let align = &clv.align;
            let extra = |c: u8| {
                tabs.iter()
                    .map(|&(key, t)| align.predictive(hp, key, Some(t), side, c).ln())
                    .sum()
            };
            let mut w = position_log_weights(frame, roles, position, tables, hp, &cands, &extra)?;
            let new = cands[sample_log_weights(rng, &mut w)];
            roles[position] = new;
            for (key, t) in tabs {
                clv.align.add(key, t, side, new);
            }
        }
        _ => {
            let mut w = position_log_weights(frame, roles, position, tables, hp, &cands, &|_| 0.0)?;
            roles[position] = cands[sample_log_weights(rng, &mut w)];
        }
    }
    Ok(())
}

/// CLV weights of a link with roles `roles` that is not currently seated:
/// existing table `c` gets `n_c * P(r1 | c) * P(r2 | c)`, a new table
/// `alpha * (1/N)^2`.
pub fn clv_weights(pair: usize, roles: [u8; 2], clv: &ClvState, hp: &Hyperparams) -> Vec<(TableChoice, f64)> {
    let key = clv.crp.pair_key(pair);
    let r = clv.crp.restaurant_of(pair);
    let mut out: Vec<(TableChoice, f64)> = r
        .tables()
        .map(|(t, n)| {
            let w = n as f64
                * clv.align.predictive(hp, key, Some(t), 0, roles[0])
                * clv.align.predictive(hp, key, Some(t), 1, roles[1]);
            (TableChoice::Existing(t), w)
        })
        .collect();
    let fresh = clv.align.predictive(hp, key, None, 0, roles[0]) * clv.align.predictive(hp, key, None, 1, roles[1]);
    out.push((TableChoice::New, hp.alpha_crp * fresh));
    out
}

/// Seats an unseated link by sampling from [`clv_weights`]; returns its
/// table id.
pub fn gibbs_step_clv<R: Rng + ?Sized>(
    pair: usize,
    link: usize,
    roles: [u8; 2],
    clv: &mut ClvState,
    hp: &Hyperparams,
    rng: &mut R,
) -> Result<u32> {
    let w = clv_weights(pair, roles, clv, hp);
    let probs: Vec<f64> = w.iter().map(|x| x.1).collect();
    let choice = w[sample_categorical(rng, &probs)].0;
    clv.assign(pair, link, choice, roles)
}

fn training_predicate(frame: &EncodedFrame) -> Result<u32> {
    frame
        .predicate
        .ok_or_else(|| Error::Contract("training frame with a predicate outside the vocabulary".into()))
}

/// Mutable state of one chain.
#[derive(Debug, Clone)]
pub(crate) struct Chain<'a> {
    pub data: &'a TrainData,
    pub tables: Vec<CountTables>,
    pub roles: Vec<Vec<Vec<u8>>>,
    pub clv: Option<ClvState>,
    pub rng: ChaCha8Rng,
}

impl<'a> Chain<'a> {
    /// Random initial state: each unclamped argument uniform over the PRs not
    /// yet used in its frame and all SRs, left to right; links seated by the
    /// CRP prior.
    pub fn new(data: &'a TrainData, seed: u64, stream: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let space = data.space;
        let mut tables = Vec::new();
        let mut roles = Vec::new();
        let mut ev = Vec::new();
        for d in &data.langs {
            let mut t = CountTables::new(space, d.vocab.feature_sizes(), d.vocab.predicates.len());
            let mut lang_roles = Vec::with_capacity(d.frames.len());
            for (f, clamps) in d.frames.iter().zip(&d.clamps) {
                let r = init_frame(&space, clamps, &mut rng);
                ev.clear();
                frame_events(&t, f, &r, &mut ev)?;
                t.add_all(training_predicate(f)?, &ev);
                lang_roles.push(r);
            }
            tables.push(t);
            roles.push(lang_roles);
        }
        let clv = if data.pairs.is_empty() {
            None
        } else {
            let keys = data.pairs.iter().map(|p| p.key).collect();
            let counts: Vec<usize> = data.pairs.iter().map(|p| p.links.len()).collect();
            let mut s = ClvState::new(space.n_roles(), keys, &counts);
            for (q, p) in data.pairs.iter().enumerate() {
                for (k, &(i, j)) in p.links.iter().enumerate() {
                    let r = s.crp.restaurant_of(q);
                    let mut w: Vec<f64> = r.tables().map(|(_, n)| n as f64).collect();
                    w.push(data.hp.alpha_crp);
                    let c = sample_categorical(&mut rng, &w);
                    let choice = r.tables().nth(c).map_or(TableChoice::New, |(t, _)| TableChoice::Existing(t));
                    let pr = [roles[0][p.frames[0]][i], roles[1][p.frames[1]][j]];
                    s.assign(q, k, choice, pr)?;
                }
            }
            Some(s)
        };
        Ok(Chain {
            data,
            tables,
            roles,
            clv,
            rng,
        })
    }

    /// One sweep: every unclamped role, then every CLV.
    pub fn sweep(&mut self) -> Result<()> {
        let data = self.data;
        let hp = &data.hp;
        let mut ev: Vec<Event> = Vec::new();
        for (l, d) in data.langs.iter().enumerate() {
            for (f, frame) in d.frames.iter().enumerate() {
                let clamps = &d.clamps[f];
                if clamps.iter().all(Option::is_some) {
                    continue;
                }
                let p = training_predicate(frame)?;
                let roles = &mut self.roles[l][f];
                let tables = &mut self.tables[l];
                ev.clear();
                frame_events(tables, frame, roles, &mut ev)?;
                tables.remove_all(p, &ev)?;
                for pos in 0..roles.len() {
                    if clamps[pos].is_some() {
                        continue;
                    }
                    let links = &data.links_at[l][f][pos];
                    resample_position(frame, roles, pos, l, links, tables, self.clv.as_mut(), hp, &mut self.rng)?;
                }
                ev.clear();
                frame_events(tables, frame, roles, &mut ev)?;
                tables.add_all(p, &ev);
            }
        }
        if let Some(clv) = self.clv.as_mut() {
            for (q, pair) in data.pairs.iter().enumerate() {
                for (k, &(i, j)) in pair.links.iter().enumerate() {
                    let r = [self.roles[0][pair.frames[0]][i], self.roles[1][pair.frames[1]][j]];
                    clv.release(q, k, r)?;
                    gibbs_step_clv(q, k, r, clv, hp, &mut self.rng)?;
                }
            }
        }
        Ok(())
    }

    /// Collapsed log joint of the whole state.
    pub fn log_joint(&self) -> f64 {
        let hp = &self.data.hp;
        let mono: f64 = self.tables.iter().map(|t| t.log_evidence(hp)).sum();
        mono + self.clv.as_ref().map_or(0.0, |c| c.log_prob(hp))
    }
}

pub(crate) fn init_frame<R: Rng + ?Sized>(space: &RoleSpace, clamps: &[Option<u8>], rng: &mut R) -> Vec<u8> {
    let mut used = 0u64;
    for r in clamps.iter().flatten() {
        if space.is_primary(*r) {
            used |= 1 << r;
        }
    }
    let mut roles = Vec::with_capacity(clamps.len());
    let mut cands = Vec::with_capacity(space.n_roles());
    for c in clamps {
        let r = match c {
            Some(r) => *r,
            None => {
                cands.clear();
                cands.extend((0..space.n_roles() as u8).filter(|&r| !space.is_primary(r) || used & (1 << r) == 0));
                let r = cands[rng.random_range(0..cands.len())];
                if space.is_primary(r) {
                    used |= 1 << r;
                }
                r
            }
        };
        roles.push(r);
    }
    roles
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Voice;

    #[test]
    fn candidate_sets() {
        let s = RoleSpace::new(4, 2).unwrap();
        let mut c = Vec::new();
        candidates(&s, &[0, 1, 3], 2, &mut c);
        assert_eq!(c, vec![2, 3]);
        candidates(&s, &[0, 1, 3], 0, &mut c);
        assert_eq!(c, vec![0, 2, 3]);
    }

    #[test]
    fn forced_move_returns_only_sr() {
        // K=1, N=2: the other argument holds P1, so S1 is the only option
        let s = RoleSpace::new(2, 1).unwrap();
        let t = CountTables::new(s, [2, 2, 2], 1);
        let hp = Hyperparams::default();
        let f = EncodedFrame {
            predicate: Some(0),
            voice: Voice::Active,
            predicate_slot: 1,
            features: vec![[1, 1, 1], [0, 1, 0]],
        };
        let mut roles = vec![0, 1];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..20 {
            let mut t2 = t.clone();
            assert_eq!(gibbs_step_role_mono(&f, &mut roles, 1, &mut t2, &hp, &mut rng).unwrap(), 1);
        }
    }

    #[test]
    fn init_respects_clamps_and_uniqueness() {
        let s = RoleSpace::new(4, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let r = init_frame(&s, &[None, Some(1), None, None, None], &mut rng);
            assert_eq!(r[1], 1);
            crate::model::check_no_primary_repeat(&s, &r).unwrap();
        }
    }
}
