use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::hyper::Hyperparams;
use super::ordering::OrderingIndex;
use super::roles::RoleSpace;
use crate::corpus::NUM_FEATURES;
use crate::error::{Error, Result};

pub const STOP: u32 = 0;
pub const CONTINUE: u32 = 1;

/// One categorical distribution of a predicate's model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dist {
    /// Orderings given the voice.
    Order { voice: u8 },
    /// Secondary roles within an interval.
    Sr { interval: u16 },
    /// Stop/continue within an interval; `adj` is 1 once an SR was generated.
    Stop { interval: u16, adj: u8 },
    /// Values of one feature type given the role.
    Feat { role: u8, feature: u8 },
}

impl Dist {
    pub(crate) fn key(self) -> u32 {
        match self {
            Dist::Order { voice } => voice as u32,
            Dist::Sr { interval } => 1 << 28 | interval as u32,
            Dist::Stop { interval, adj } => 2 << 28 | (interval as u32) << 1 | adj as u32,
            Dist::Feat { role, feature } => 3 << 28 | (role as u32) << 2 | feature as u32,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Event {
    pub dist: Dist,
    pub outcome: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SparseCounts {
    pub counts: FxHashMap<u32, u32>,
    pub total: u32,
}

impl SparseCounts {
    pub fn get(&self, v: u32) -> u32 {
        self.counts.get(&v).copied().unwrap_or(0)
    }

    fn add(&mut self, v: u32) {
        *self.counts.entry(v).or_insert(0) += 1;
        self.total += 1;
    }

    fn remove(&mut self, v: u32) -> bool {
        match self.counts.get_mut(&v) {
            Some(c) => {
                *c -= 1;
                if *c == 0 {
                    self.counts.remove(&v);
                }
                self.total -= 1;
                true
            }
            None => false,
        }
    }

    fn sorted(&self) -> Vec<(u32, u32)> {
        let mut v: Vec<_> = self.counts.iter().map(|(&k, &c)| (k, c)).collect();
        v.sort_unstable();
        v
    }
}

/// Counts of one predicate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateTables {
    order: [Vec<u32>; 2],
    order_total: [u32; 2],
    /// `interval * n_sr + sr`
    sr: Vec<u32>,
    sr_total: Vec<u32>,
    /// `interval * 2 + adj` → `[stop, continue]`
    stop: Vec<[u32; 2]>,
    /// `role * NUM_FEATURES + feature`
    feat: Vec<SparseCounts>,
}

impl PredicateTables {
    fn new(space: &RoleSpace, n_orderings: usize) -> Self {
        let ni = space.n_intervals();
        PredicateTables {
            order: [vec![0; n_orderings], vec![0; n_orderings]],
            order_total: [0; 2],
            sr: vec![0; ni * space.n_secondary()],
            sr_total: vec![0; ni],
            stop: vec![[0; 2]; ni * 2],
            feat: vec![SparseCounts::default(); space.n_roles() * NUM_FEATURES],
        }
    }

    pub(crate) fn count(&self, n_sr: usize, dist: Dist, outcome: u32) -> u32 {
        match dist {
            Dist::Order { voice } => self.order[voice as usize][outcome as usize],
            Dist::Sr { interval } => self.sr[interval as usize * n_sr + outcome as usize],
            Dist::Stop { interval, adj } => {
                self.stop[interval as usize * 2 + adj as usize][outcome as usize]
            }
            Dist::Feat { role, feature } => {
                self.feat[role as usize * NUM_FEATURES + feature as usize].get(outcome)
            }
        }
    }

    pub(crate) fn total(&self, dist: Dist) -> u32 {
        match dist {
            Dist::Order { voice } => self.order_total[voice as usize],
            Dist::Sr { interval } => self.sr_total[interval as usize],
            Dist::Stop { interval, adj } => {
                let s = self.stop[interval as usize * 2 + adj as usize];
                s[0] + s[1]
            }
            Dist::Feat { role, feature } => {
                self.feat[role as usize * NUM_FEATURES + feature as usize].total
            }
        }
    }

    fn add(&mut self, n_sr: usize, ev: Event) {
        let o = ev.outcome as usize;
        match ev.dist {
            Dist::Order { voice } => {
                self.order[voice as usize][o] += 1;
                self.order_total[voice as usize] += 1;
            }
            Dist::Sr { interval } => {
                self.sr[interval as usize * n_sr + o] += 1;
                self.sr_total[interval as usize] += 1;
            }
            Dist::Stop { interval, adj } => {
                self.stop[interval as usize * 2 + adj as usize][o] += 1;
            }
            Dist::Feat { role, feature } => {
                self.feat[role as usize * NUM_FEATURES + feature as usize].add(ev.outcome)
            }
        }
    }

    fn remove(&mut self, n_sr: usize, ev: Event) -> bool {
        let o = ev.outcome as usize;
        let dec = |c: &mut u32| {
            if *c == 0 {
                false
            } else {
                *c -= 1;
                true
            }
        };
        match ev.dist {
            Dist::Order { voice } => {
                let v = voice as usize;
                dec(&mut self.order[v][o]) && dec(&mut self.order_total[v])
            }
            Dist::Sr { interval } => {
                let i = interval as usize;
                dec(&mut self.sr[i * n_sr + o]) && dec(&mut self.sr_total[i])
            }
            Dist::Stop { interval, adj } => {
                dec(&mut self.stop[interval as usize * 2 + adj as usize][o])
            }
            Dist::Feat { role, feature } => {
                self.feat[role as usize * NUM_FEATURES + feature as usize].remove(ev.outcome)
            }
        }
    }

    fn accumulate(&mut self, other: &PredicateTables) {
        for v in 0..2 {
            for (a, b) in self.order[v].iter_mut().zip(&other.order[v]) {
                *a += b;
            }
            self.order_total[v] += other.order_total[v];
        }
        for (a, b) in self.sr.iter_mut().zip(&other.sr) {
            *a += b;
        }
        for (a, b) in self.sr_total.iter_mut().zip(&other.sr_total) {
            *a += b;
        }
        for (a, b) in self.stop.iter_mut().zip(&other.stop) {
            a[0] += b[0];
            a[1] += b[1];
        }
        for (a, b) in self.feat.iter_mut().zip(&other.feat) {
            for (&k, &c) in &b.counts {
                *a.counts.entry(k).or_insert(0) += c;
            }
            a.total += b.total;
        }
    }

    pub fn is_empty(&self) -> bool {
        self.order_total == [0, 0]
    }
}

/// Collapsed sufficient statistics of the monolingual model for one
/// language: how often each outcome of each categorical was generated by
/// the current role assignments.
#[derive(Debug, Clone, PartialEq)]
pub struct CountTables {
    space: RoleSpace,
    orderings: OrderingIndex,
    feature_sizes: [usize; NUM_FEATURES],
    preds: Vec<PredicateTables>,
    empty: PredicateTables,
}

impl PartialEq for OrderingIndex {
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len()
    }
}

impl CountTables {
    pub fn new(space: RoleSpace, feature_sizes: [usize; NUM_FEATURES], n_predicates: usize) -> Self {
        let orderings = OrderingIndex::new(&space);
        let empty = PredicateTables::new(&space, orderings.len());
        CountTables {
            space,
            preds: vec![empty.clone(); n_predicates],
            orderings,
            feature_sizes,
            empty,
        }
    }

    pub fn space(&self) -> &RoleSpace {
        &self.space
    }

    pub(crate) fn orderings(&self) -> &OrderingIndex {
        &self.orderings
    }

    pub fn n_orderings(&self) -> usize {
        self.orderings.len()
    }

    pub fn feature_sizes(&self) -> [usize; NUM_FEATURES] {
        self.feature_sizes
    }

    pub fn n_predicates(&self) -> usize {
        self.preds.len()
    }

    /// Tables of predicate `p`; out-of-range or `None` reads as all zeros.
    pub fn predicate(&self, p: Option<u32>) -> &PredicateTables {
        p.and_then(|p| self.preds.get(p as usize)).unwrap_or(&self.empty)
    }

    pub fn count(&self, p: Option<u32>, dist: Dist, outcome: u32) -> u32 {
        self.predicate(p).count(self.space.n_secondary(), dist, outcome)
    }

    pub fn total(&self, p: Option<u32>, dist: Dist) -> u32 {
        self.predicate(p).total(dist)
    }

    /// Number of outcomes of `dist`.
    pub fn support(&self, dist: Dist) -> usize {
        match dist {
            Dist::Order { .. } => self.orderings.len(),
            Dist::Sr { .. } => self.space.n_secondary(),
            Dist::Stop { .. } => 2,
            Dist::Feat { feature, .. } => self.feature_sizes[feature as usize],
        }
    }

    /// Prior pseudo-count of `outcome` and the prior mass of the whole
    /// distribution.
    pub fn prior(&self, hp: &Hyperparams, dist: Dist, outcome: u32) -> (f64, f64) {
        let sym = |a: f64| (a, a * self.support(dist) as f64);
        match dist {
            Dist::Order { .. } => sym(hp.alpha_order),
            Dist::Sr { .. } => sym(hp.alpha_sr),
            Dist::Stop { .. } => (
                hp.beta_stop[outcome as usize],
                hp.beta_stop[0] + hp.beta_stop[1],
            ),
            Dist::Feat { feature, .. } => sym(hp.alpha_feat[feature as usize]),
        }
    }

    /// Posterior predictive of `ev` given the current counts.
    pub fn predictive(&self, hp: &Hyperparams, p: Option<u32>, ev: Event) -> f64 {
        self.predictive_in(hp, self.predicate(p), ev)
    }

    fn slot(&mut self, p: u32) -> &mut PredicateTables {
        let p = p as usize;
        if p >= self.preds.len() {
            self.preds.resize(p + 1, self.empty.clone());
        }
        &mut self.preds[p]
    }

    pub fn add(&mut self, p: u32, ev: Event) {
        let n_sr = self.space.n_secondary();
        self.slot(p).add(n_sr, ev);
    }

    pub fn remove(&mut self, p: u32, ev: Event) -> Result<()> {
        let n_sr = self.space.n_secondary();
        if self.slot(p).remove(n_sr, ev) {
            Ok(())
        } else {
            Err(Error::Contract(format!(
                "count for {ev:?} of predicate {p} would go negative"
            )))
        }
    }

    pub fn add_all(&mut self, p: u32, events: &[Event]) {
        for &e in events {
            self.add(p, e);
        }
    }

    pub fn remove_all(&mut self, p: u32, events: &[Event]) -> Result<()> {
        events.iter().try_for_each(|&e| self.remove(p, e))
    }

    /// Counts summed over every predicate, used as backoff for predicates
    /// never seen in training.
    pub fn pooled(&self) -> PredicateTables {
        let mut acc = self.empty.clone();
        for t in &self.preds {
            acc.accumulate(t);
        }
        acc
    }

    /// Total number of events per kind: `[orderings, SR draws, stop
    /// decisions, feature values]`.
    pub fn event_totals(&self) -> [u64; 4] {
        let mut out = [0u64; 4];
        for t in &self.preds {
            out[0] += (t.order_total[0] + t.order_total[1]) as u64;
            out[1] += t.sr_total.iter().map(|&c| c as u64).sum::<u64>();
            out[2] += t.stop.iter().map(|s| (s[0] + s[1]) as u64).sum::<u64>();
            out[3] += t.feat.iter().map(|f| f.total as u64).sum::<u64>();
        }
        out
    }

    /// Log Dirichlet-multinomial evidence of all counted events, i.e. the
    /// collapsed log joint of the current assignment.
    pub fn log_evidence(&self, hp: &Hyperparams) -> f64 {
        let n_sr = self.space.n_secondary();
        let mut lp = 0.0;
        let mut dm = |dist: Dist, counts: &mut dyn Iterator<Item = (u32, u32)>, total: u32| {
            if total == 0 {
                return;
            }
            let (_, big_a) = self.prior(hp, dist, 0);
            lp += ln_gamma(big_a) - ln_gamma(big_a + total as f64);
            for (o, c) in counts {
                let (a, _) = self.prior(hp, dist, o);
                lp += ln_gamma(a + c as f64) - ln_gamma(a);
            }
        };
        for t in &self.preds {
            for v in 0..2u8 {
                let d = Dist::Order { voice: v };
                let mut it = t.order[v as usize].iter().enumerate().map(|(o, &c)| (o as u32, c));
                dm(d, &mut it, t.order_total[v as usize]);
            }
            for i in 0..self.space.n_intervals() {
                let d = Dist::Sr { interval: i as u16 };
                let row = &t.sr[i * n_sr..(i + 1) * n_sr];
                let mut it = row.iter().enumerate().map(|(o, &c)| (o as u32, c));
                dm(d, &mut it, t.sr_total[i]);
                for adj in 0..2u8 {
                    let d = Dist::Stop { interval: i as u16, adj };
                    let s = t.stop[i * 2 + adj as usize];
                    let mut it = [(STOP, s[0]), (CONTINUE, s[1])].into_iter();
                    dm(d, &mut it, s[0] + s[1]);
                }
            }
            for (k, f) in t.feat.iter().enumerate() {
                let d = Dist::Feat {
                    role: (k / NUM_FEATURES) as u8,
                    feature: (k % NUM_FEATURES) as u8,
                };
                let mut it = f.counts.iter().map(|(&o, &c)| (o, c));
                dm(d, &mut it, f.total);
            }
        }
        lp
    }

    pub(crate) fn to_serial(&self) -> SerialTables {
        let n_sr = self.space.n_secondary();
        let preds = self
            .preds
            .iter()
            .map(|t| {
                let order = std::array::from_fn(|v| nonzero(&t.order[v]));
                let mut sr = Vec::new();
                let mut stop = Vec::new();
                for i in 0..self.space.n_intervals() {
                    for (j, &c) in t.sr[i * n_sr..(i + 1) * n_sr].iter().enumerate() {
                        if c > 0 {
                            sr.push((i as u16, j as u32, c));
                        }
                    }
                    for adj in 0..2 {
                        let s = t.stop[i * 2 + adj];
                        if s != [0, 0] {
                            stop.push((i as u16, adj as u8, s[0], s[1]));
                        }
                    }
                }
                let feat = t
                    .feat
                    .iter()
                    .enumerate()
                    .filter(|(_, f)| f.total > 0)
                    .map(|(k, f)| (k as u32, f.sorted()))
                    .collect();
                SerialPredicate { order, sr, stop, feat }
            })
            .collect();
        SerialTables { preds }
    }

    pub(crate) fn from_serial(
        space: RoleSpace,
        feature_sizes: [usize; NUM_FEATURES],
        s: &SerialTables,
    ) -> Result<Self> {
        let mut t = CountTables::new(space, feature_sizes, s.preds.len());
        let bad = |m: &str| Error::Data(format!("model count table: {m}"));
        let n_sr = space.n_secondary();
        for (p, sp) in s.preds.iter().enumerate() {
            let pt = &mut t.preds[p];
            for v in 0..2 {
                for &(o, c) in &sp.order[v] {
                    let slot = pt.order[v].get_mut(o as usize).ok_or_else(|| bad("ordering out of range"))?;
                    *slot = c;
                    pt.order_total[v] += c;
                }
            }
            for &(i, j, c) in &sp.sr {
                if i as usize >= space.n_intervals() || j as usize >= n_sr {
                    return Err(bad("SR entry out of range"));
                }
                pt.sr[i as usize * n_sr + j as usize] = c;
                pt.sr_total[i as usize] += c;
            }
            for &(i, adj, st, co) in &sp.stop {
                if i as usize >= space.n_intervals() || adj > 1 {
                    return Err(bad("stop entry out of range"));
                }
                pt.stop[i as usize * 2 + adj as usize] = [st, co];
            }
            for (k, entries) in &sp.feat {
                let k = *k as usize;
                if k >= pt.feat.len() {
                    return Err(bad("feature entry out of range"));
                }
                let size = feature_sizes[k % NUM_FEATURES];
                for &(v, c) in entries {
                    if v as usize >= size {
                        return Err(bad("feature value out of range"));
                    }
                    pt.feat[k].counts.insert(v, c);
                    pt.feat[k].total += c;
                }
            }
        }
        Ok(t)
    }

    pub fn is_predicate_seen(&self, p: Option<u32>) -> bool {
        !self.predicate(p).is_empty()
    }

    /// Tables of `p`, or `backoff` if `p` has no events.
    pub fn resolve<'a>(&'a self, p: Option<u32>, backoff: &'a PredicateTables) -> &'a PredicateTables {
        let t = self.predicate(p);
        if t.is_empty() {
            backoff
        } else {
            t
        }
    }

    /// Posterior predictive of `ev` under the counts `t`.
    pub fn predictive_in(&self, hp: &Hyperparams, t: &PredicateTables, ev: Event) -> f64 {
        let (a, total_a) = self.prior(hp, ev.dist, ev.outcome);
        (t.count(self.space.n_secondary(), ev.dist, ev.outcome) as f64 + a)
            / (t.total(ev.dist) as f64 + total_a)
    }
}

fn nonzero(v: &[u32]) -> Vec<(u32, u32)> {
    v.iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, &c)| (i as u32, c))
        .collect()
}

/// Sparse, deterministic on-disk form of [`CountTables`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct SerialTables {
    preds: Vec<SerialPredicate>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SerialPredicate {
    /// Per voice: `(ordering index, count)`.
    order: [Vec<(u32, u32)>; 2],
    /// `(interval, secondary role, count)`
    sr: Vec<(u16, u32, u32)>,
    /// `(interval, adj, stop, continue)`
    stop: Vec<(u16, u8, u32, u32)>,
    /// `(role * 3 + feature, [(value, count)])`
    feat: Vec<(u32, Vec<(u32, u32)>)>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tables() -> CountTables {
        CountTables::new(RoleSpace::new(3, 1).unwrap(), [4, 4, 4], 2)
    }

    #[test]
    fn add_remove_roundtrip() {
        let mut t = tables();
        let before = t.clone();
        let evs = [
            Event { dist: Dist::Order { voice: 1 }, outcome: 2 },
            Event { dist: Dist::Sr { interval: 3 }, outcome: 1 },
            Event { dist: Dist::Stop { interval: 3, adj: 0 }, outcome: CONTINUE },
            Event { dist: Dist::Feat { role: 2, feature: 1 }, outcome: 3 },
        ];
        t.add_all(1, &evs);
        assert_eq!(t.event_totals(), [1, 1, 1, 1]);
        assert_eq!(t.count(Some(1), evs[3].dist, 3), 1);
        t.remove_all(1, &evs).unwrap();
        assert_eq!(t, before);
    }

    #[test]
    fn remove_below_zero_is_contract_error() {
        let mut t = tables();
        let e = Event { dist: Dist::Feat { role: 0, feature: 0 }, outcome: 1 };
        assert!(matches!(t.remove(0, e), Err(Error::Contract(_))));
        let e = Event { dist: Dist::Order { voice: 0 }, outcome: 0 };
        assert!(t.remove(0, e).is_err());
    }

    #[test]
    fn predictive_uses_priors() {
        let mut t = tables();
        let hp = Hyperparams::default();
        let e = Event { dist: Dist::Stop { interval: 0, adj: 0 }, outcome: STOP };
        assert!((t.predictive(&hp, Some(0), e) - 0.5).abs() < 1e-15);
        t.add(0, e);
        // (1 + 1) / (1 + 2)
        assert!((t.predictive(&hp, Some(0), e) - 2.0 / 3.0).abs() < 1e-15);
        let o = Event { dist: Dist::Order { voice: 0 }, outcome: 0 };
        assert!((t.predictive(&hp, Some(0), o) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn serial_roundtrip() {
        let mut t = tables();
        t.add(0, Event { dist: Dist::Order { voice: 0 }, outcome: 1 });
        t.add(1, Event { dist: Dist::Feat { role: 1, feature: 2 }, outcome: 2 });
        t.add(1, Event { dist: Dist::Sr { interval: 4 }, outcome: 1 });
        t.add(1, Event { dist: Dist::Stop { interval: 4, adj: 1 }, outcome: STOP });
        let s = t.to_serial();
        let back = CountTables::from_serial(*t.space(), t.feature_sizes(), &s).unwrap();
        assert_eq!(back, t);
    }
}
