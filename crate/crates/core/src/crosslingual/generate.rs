use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Voice, MAX_ARGUMENTS, NUM_FEATURES};
use crate::error::{Error, Result};
use crate::model::{generate_frame, sample_categorical, ArgCountPolicy, GeneratedFrame, GenerativeParams};

/// Role distributions of one CLV table, one per language.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClvTableParams {
    pub size: u32,
    pub roles: [Vec<f64>; 2],
}

/// Generation-time CRP over CLV tables for one predicate pair.
///
/// A new table picks an anchor role `a` and puts mass `peakiness` on `a` in
/// both languages, spreading the rest uniformly. Peakiness 0 makes every
/// table uniform, which leaves the seating a pure CRP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClvGenerator {
    pub n_roles: usize,
    pub alpha_crp: f64,
    pub peakiness: f64,
    pub tables: Vec<ClvTableParams>,
}

impl ClvGenerator {
    pub fn new(n_roles: usize, alpha_crp: f64, peakiness: f64) -> Self {
        ClvGenerator {
            n_roles,
            alpha_crp,
            peakiness,
            tables: Vec::new(),
        }
    }

    fn anchored(&self, a: usize) -> Vec<f64> {
        let u = (1.0 - self.peakiness) / self.n_roles as f64;
        (0..self.n_roles)
            .map(|r| if r == a { self.peakiness + u } else { u })
            .collect()
    }

    /// Seats a link whose language-1 role is `r1`: an existing table `c` with
    /// weight `n_c * theta_c(r1)`, a new one with `alpha / N`.
    pub fn draw_table<R: Rng + ?Sized>(&mut self, r1: u8, rng: &mut R) -> usize {
        let mut w: Vec<f64> = self
            .tables
            .iter()
            .map(|t| t.size as f64 * t.roles[0][r1 as usize])
            .collect();
        w.push(self.alpha_crp / self.n_roles as f64);
        let c = if w.iter().sum::<f64>() > 0.0 {
            sample_categorical(rng, &w)
        } else {
            self.tables.len()
        };
        if c == self.tables.len() {
            // anchor drawn from its posterior given r1
            let post = self.anchored(r1 as usize);
            let a = sample_categorical(rng, &post);
            let theta = self.anchored(a);
            self.tables.push(ClvTableParams {
                size: 0,
                roles: [theta.clone(), theta],
            });
        }
        self.tables[c].size += 1;
        c
    }

    pub fn draw_role<R: Rng + ?Sized>(&self, table: usize, lang: usize, rng: &mut R) -> u8 {
        sample_categorical(rng, &self.tables[table].roles[lang]) as u8
    }
}

/// Which language-1 arguments get an aligned counterpart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkPolicy {
    /// Probability that a language-1 argument is linked.
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedPair {
    pub frames: [GeneratedFrame; 2],
    pub links: Vec<(usize, usize)>,
    /// CLV table of every link.
    pub tables: Vec<usize>,
}

/// Forward-samples an aligned pair. The language-1 frame comes from the
/// monolingual model; each linked argument draws a CLV table and the
/// language-2 role from that table alone, skipping primary roles that are
/// already linked. A linked language-2 role that is a primary role already
/// present is aligned to that argument; otherwise a new
/// argument with that role is inserted at a random position. Unlinked
/// language-2 arguments come from the language-2 monolingual model.
#[allow(clippy::too_many_arguments)]
pub fn generate_pair<R: Rng + ?Sized>(
    params: [&GenerativeParams; 2],
    predicates: (usize, usize),
    voices: [Voice; 2],
    clv: &mut ClvGenerator,
    links: LinkPolicy,
    policy: ArgCountPolicy,
    rng: &mut R,
) -> Result<GeneratedPair> {
    if params[0].space() != params[1].space() {
        return Err(Error::Config("both languages need the same role space".into()));
    }
    if clv.n_roles != params[0].space().n_roles() {
        return Err(Error::Config("CLV tables and role space disagree on N".into()));
    }
    let space = *params[0].space();
    let a = generate_frame(params[0], predicates.0, voices[0], policy, rng)?;
    let mut b = generate_frame(params[1], predicates.1, voices[1], policy, rng)?;
    let mut out_links: Vec<(usize, usize)> = Vec::new();
    let mut tables = Vec::new();
    let b_params = &params[1].predicates[predicates.1];
    for (i, &r1) in a.roles.iter().enumerate() {
        if !rng.random_bool(links.rate.clamp(0.0, 1.0)) {
            continue;
        }
        let c = clv.draw_table(r1, rng);
        // primaries already linked are excluded so the link rate is kept
        let mut w = clv.tables[c].roles[1].clone();
        for l in &out_links {
            if space.is_primary(b.roles[l.1]) {
                w[b.roles[l.1] as usize] = 0.0;
            }
        }
        if w.iter().sum::<f64>() <= 0.0 {
            continue;
        }
        let r2 = sample_categorical(rng, &w) as u8;
        let existing = space
            .is_primary(r2)
            .then(|| b.roles.iter().position(|&r| r == r2))
            .flatten();
        let j = match existing {
            Some(j) => j,
            None => {
                if b.roles.len() >= MAX_ARGUMENTS {
                    continue;
                }
                let q = rng.random_range(0..=b.roles.len());
                let before_pred = q < b.predicate_slot || (q == b.predicate_slot && rng.random_bool(0.5));
                if before_pred {
                    b.predicate_slot += 1;
                }
                let feats: [u32; NUM_FEATURES] = std::array::from_fn(|t| {
                    sample_categorical(rng, &b_params.feat[r2 as usize * NUM_FEATURES + t]) as u32
                });
                b.roles.insert(q, r2);
                b.features.insert(q, feats);
                for l in &mut out_links {
                    if l.1 >= q {
                        l.1 += 1;
                    }
                }
                q
            }
        };
        out_links.push((i, j));
        tables.push(c);
    }
    Ok(GeneratedPair {
        frames: [a, b],
        links: out_links,
        tables,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{check_no_primary_repeat, PredicateParams, RoleSpace};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params() -> GenerativeParams {
        let space = RoleSpace::new(5, 2).unwrap();
        let fs = [3, 3, 3];
        let n_ord = GenerativeParams::new(space, fs, vec![]).n_orderings();
        GenerativeParams::new(space, fs, vec![PredicateParams::uniform(&space, n_ord, fs)])
    }

    #[test]
    fn zero_rate_gives_no_links() {
        let p = params();
        let mut clv = ClvGenerator::new(5, 1.0, 0.9);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let g = generate_pair(
                [&p, &p],
                (0, 0),
                [Voice::Active; 2],
                &mut clv,
                LinkPolicy { rate: 0.0 },
                ArgCountPolicy::Natural,
                &mut rng,
            )
            .unwrap();
            assert!(g.links.is_empty());
        }
        assert!(clv.tables.is_empty());
    }

    #[test]
    fn links_are_valid_and_roles_consistent() {
        let p = params();
        let mut clv = ClvGenerator::new(5, 1.0, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..300 {
            let g = generate_pair(
                [&p, &p],
                (0, 0),
                [Voice::Active, Voice::Passive],
                &mut clv,
                LinkPolicy { rate: 1.0 },
                ArgCountPolicy::Natural,
                &mut rng,
            )
            .unwrap();
            let [a, b] = &g.frames;
            assert_eq!(b.roles.len(), b.features.len());
            assert!(b.predicate_slot <= b.roles.len());
            check_no_primary_repeat(p.space(), &b.roles).unwrap();
            let mut seen = std::collections::BTreeSet::new();
            for &(i, j) in &g.links {
                assert!(i < a.roles.len() && j < b.roles.len());
                assert!(seen.insert(j));
                // fully peaky tables copy the role across
                assert_eq!(a.roles[i], b.roles[j]);
            }
        }
    }

    #[test]
    fn degenerate_table_fixes_role_pair() {
        let mut clv = ClvGenerator::new(5, 0.0, 0.0);
        let one_hot = |r: usize| (0..5).map(|x| if x == r { 1.0 } else { 0.0 }).collect::<Vec<f64>>();
        clv.tables.push(ClvTableParams {
            size: 1,
            roles: [one_hot(4), one_hot(2)],
        });
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let c = clv.draw_table(4, &mut rng);
            assert_eq!(c, 0);
            assert_eq!(clv.draw_role(c, 1, &mut rng), 2);
        }
    }
}
