use std::collections::BTreeMap;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::crp::{log_partition_prob, Restaurant, TableChoice};
use crate::error::{Error, Result};
use crate::model::Hyperparams;

/// Predicate ids of an aligned frame pair, first language first.
pub type PredicatePair = (u32, u32);

/// CRP seating of every aligned link, one restaurant per predicate pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrpState {
    restaurants: BTreeMap<PredicatePair, Restaurant>,
    pair_keys: Vec<PredicatePair>,
    seating: Vec<Vec<Option<u32>>>,
}

impl CrpState {
    /// State for aligned frame pairs with the given predicate pairs and link
    /// counts; no link is seated yet.
    pub fn new(pair_keys: Vec<PredicatePair>, links_per_pair: &[usize]) -> Self {
        let restaurants = pair_keys.iter().map(|&k| (k, Restaurant::new())).collect();
        CrpState {
            restaurants,
            seating: links_per_pair.iter().map(|&n| vec![None; n]).collect(),
            pair_keys,
        }
    }

    pub fn n_pairs(&self) -> usize {
        self.pair_keys.len()
    }

    pub fn pair_key(&self, pair: usize) -> PredicatePair {
        self.pair_keys[pair]
    }

    pub fn restaurant(&self, key: PredicatePair) -> Option<&Restaurant> {
        self.restaurants.get(&key)
    }

    pub fn restaurant_of(&self, pair: usize) -> &Restaurant {
        &self.restaurants[&self.pair_keys[pair]]
    }

    pub fn restaurants(&self) -> impl Iterator<Item = (PredicatePair, &Restaurant)> {
        self.restaurants.iter().map(|(&k, r)| (k, r))
    }

    pub fn table_of(&self, pair: usize, link: usize) -> Option<u32> {
        self.seating[pair][link]
    }

    pub fn seat(&mut self, pair: usize, link: usize, choice: TableChoice) -> Result<u32> {
        if self.seating[pair][link].is_some() {
            return Err(Error::Contract(format!("link {link} of pair {pair} is already seated")));
        }
        let key = self.pair_keys[pair];
        let t = self.restaurants.get_mut(&key).expect("restaurant per pair key").seat(choice)?;
        self.seating[pair][link] = Some(t);
        Ok(t)
    }

    /// Unseats a link; returns its table and whether the table was dropped.
    pub fn unseat(&mut self, pair: usize, link: usize) -> Result<(u32, bool)> {
        let t = self.seating[pair][link]
            .take()
            .ok_or_else(|| Error::Contract(format!("link {link} of pair {pair} is not seated")))?;
        let key = self.pair_keys[pair];
        let dropped = self.restaurants.get_mut(&key).expect("restaurant per pair key").unseat(t)?;
        Ok((t, dropped))
    }

    /// Sum of the log partition probabilities of every restaurant.
    pub fn log_prob(&self, alpha_crp: f64) -> f64 {
        self.restaurants
            .values()
            .map(|r| {
                let sizes: Vec<u32> = r.tables().map(|(_, n)| n).collect();
                log_partition_prob(&sizes, alpha_crp)
            })
            .sum()
    }
}

/// Role counts of every CLV table, per language.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignCounts {
    n_roles: usize,
    tables: FxHashMap<(PredicatePair, u32), [Vec<u32>; 2]>,
}

impl AlignCounts {
    pub fn new(n_roles: usize) -> Self {
        AlignCounts {
            n_roles,
            tables: FxHashMap::default(),
        }
    }

    pub fn n_roles(&self) -> usize {
        self.n_roles
    }

    pub fn n_tables(&self) -> usize {
        self.tables.len()
    }

    pub fn count(&self, key: PredicatePair, table: u32, lang: usize, role: u8) -> u32 {
        self.tables
            .get(&(key, table))
            .map_or(0, |c| c[lang][role as usize])
    }

    pub fn total(&self, key: PredicatePair, table: u32, lang: usize) -> u32 {
        self.tables
            .get(&(key, table))
            .map_or(0, |c| c[lang].iter().sum())
    }

    pub fn add(&mut self, key: PredicatePair, table: u32, lang: usize, role: u8) {
        let n = self.n_roles;
        self.tables
            .entry((key, table))
            .or_insert_with(|| [vec![0; n], vec![0; n]])[lang][role as usize] += 1;
    }

    pub fn remove(&mut self, key: PredicatePair, table: u32, lang: usize, role: u8) -> Result<()> {
        let slot = self
            .tables
            .get_mut(&(key, table))
            .map(|c| &mut c[lang][role as usize])
            .filter(|c| **c > 0)
            .ok_or_else(|| {
                Error::Contract(format!("alignment count of role {role} in table {table} would go negative"))
            })?;
        *slot -= 1;
        Ok(())
    }

    pub(crate) fn drop_table(&mut self, key: PredicatePair, table: u32) {
        self.tables.remove(&(key, table));
    }

    /// Predictive probability of `role` in language `lang` under `table`
    /// (`None` for a fresh table, which is uniform).
    pub fn predictive(&self, hp: &Hyperparams, key: PredicatePair, table: Option<u32>, lang: usize, role: u8) -> f64 {
        let (c, t) = match table.and_then(|t| self.tables.get(&(key, t))) {
            Some(counts) => (counts[lang][role as usize], counts[lang].iter().sum::<u32>()),
            None => (0, 0),
        };
        (c as f64 + hp.alpha_align) / (t as f64 + hp.alpha_align * self.n_roles as f64)
    }

    /// Log Dirichlet-multinomial evidence of all counted roles.
    pub fn log_evidence(&self, hp: &Hyperparams) -> f64 {
        let a = hp.alpha_align;
        let big_a = a * self.n_roles as f64;
        let mut lp = 0.0;
        for counts in self.tables.values() {
            for c in counts {
                let total: u32 = c.iter().sum();
                if total == 0 {
                    continue;
                }
                lp += ln_gamma(big_a) - ln_gamma(big_a + total as f64);
                for &n in c.iter().filter(|&&n| n > 0) {
                    lp += ln_gamma(a + n as f64) - ln_gamma(a);
                }
            }
        }
        lp
    }
}

/// Complete crosslingual state: seating plus the role counts of every table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClvState {
    pub crp: CrpState,
    pub align: AlignCounts,
}

impl ClvState {
    pub fn new(n_roles: usize, pair_keys: Vec<PredicatePair>, links_per_pair: &[usize]) -> Self {
        ClvState {
            crp: CrpState::new(pair_keys, links_per_pair),
            align: AlignCounts::new(n_roles),
        }
    }

    /// Seats a link at `choice` and counts its two roles there.
    pub fn assign(&mut self, pair: usize, link: usize, choice: TableChoice, roles: [u8; 2]) -> Result<u32> {
        let t = self.crp.seat(pair, link, choice)?;
        let key = self.crp.pair_key(pair);
        self.align.add(key, t, 0, roles[0]);
        self.align.add(key, t, 1, roles[1]);
        Ok(t)
    }

    /// Inverse of [`ClvState::assign`]; returns the table the link left.
    pub fn release(&mut self, pair: usize, link: usize, roles: [u8; 2]) -> Result<u32> {
        let key = self.crp.pair_key(pair);
        let t = self
            .crp
            .table_of(pair, link)
            .ok_or_else(|| Error::Contract(format!("link {link} of pair {pair} is not seated")))?;
        self.align.remove(key, t, 0, roles[0])?;
        self.align.remove(key, t, 1, roles[1])?;
        let (_, dropped) = self.crp.unseat(pair, link)?;
        if dropped {
            self.align.drop_table(key, t);
        }
        Ok(t)
    }

    /// CRP plus alignment log probability of the whole state.
    pub fn log_prob(&self, hp: &Hyperparams) -> f64 {
        self.crp.log_prob(hp.alpha_crp) + self.align.log_evidence(hp)
    }

    pub fn to_serial(&self) -> SerialClv {
        let mut restaurants = Vec::new();
        for (key, r) in self.crp.restaurants() {
            if r.n_tables() == 0 {
                continue;
            }
            let tables = r
                .tables()
                .map(|(id, size)| {
                    let roles = std::array::from_fn(|l| {
                        self.align.tables[&(key, id)][l]
                            .iter()
                            .enumerate()
                            .filter(|(_, &c)| c > 0)
                            .map(|(r, &c)| (r as u8, c))
                            .collect()
                    });
                    SerialTable { id, size, roles }
                })
                .collect();
            restaurants.push(SerialRestaurant {
                predicates: key,
                next_table: r.next_table_id(),
                tables,
            });
        }
        SerialClv {
            n_roles: self.align.n_roles,
            restaurants,
        }
    }
}

/// On-disk form of the CLV tables (link seating is not stored).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SerialClv {
    pub n_roles: usize,
    pub restaurants: Vec<SerialRestaurant>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SerialRestaurant {
    pub predicates: PredicatePair,
    pub next_table: u32,
    pub tables: Vec<SerialTable>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SerialTable {
    pub id: u32,
    pub size: u32,
    /// Per language, `(role index, count)`.
    pub roles: [Vec<(u8, u32)>; 2],
}

impl SerialClv {
    pub fn n_tables(&self) -> usize {
        self.restaurants.iter().map(|r| r.tables.len()).sum()
    }

    /// Restaurants and alignment counts described by this record.
    pub fn restore(&self) -> Result<(BTreeMap<PredicatePair, Restaurant>, AlignCounts)> {
        let mut align = AlignCounts::new(self.n_roles);
        let mut out = BTreeMap::new();
        for r in &self.restaurants {
            let mut rest = Restaurant::new();
            for t in &r.tables {
                rest.restore(t.id, t.size);
                for (l, roles) in t.roles.iter().enumerate() {
                    for &(role, c) in roles {
                        if role as usize >= self.n_roles {
                            return Err(Error::Data(format!("CLV role {role} out of range")));
                        }
                        for _ in 0..c {
                            align.add(r.predicates, t.id, l, role);
                        }
                    }
                }
            }
            out.insert(r.predicates, rest);
        }
        Ok((out, align))
    }
}
