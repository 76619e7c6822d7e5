use std::collections::HashMap;
use std::hash::{BuildHasher, Hash};

use statrs::function::gamma::ln_gamma;

use super::hyper::Hyperparams;
use super::ordering::pack;
use super::roles::{check_no_primary_repeat, FrameAssignment, RoleSpace, PR_END, PR_PRED, PR_START};
use super::tables::{CountTables, Dist, Event, PredicateTables, CONTINUE, STOP};
use super::vocab::EncodedFrame;
use crate::corpus::NUM_FEATURES;
use crate::error::{Error, Result};

/// Whether the scored frame's own events are currently in the tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableMode {
    /// The tables hold everything except this frame (the Gibbs contract).
    Excluded,
    /// The tables already count this frame; its events are discounted first.
    Included,
}

/// Largest frame [`marginal_prob`] will enumerate.
pub const MAX_ENUMERATED_ARGUMENTS: usize = 8;

/// Cap on the number of assignments [`marginal_prob`] will enumerate.
pub const MAX_ENUMERATED_ASSIGNMENTS: u64 = 5_000_000;

/// Appends the generative events of a frame under `roles` to `out`: the
/// ordering, then per interval the stop/continue indicators, SR draws and SR
/// features, and the features of each primary role.
pub fn frame_events(
    tables: &CountTables,
    frame: &EncodedFrame,
    roles: &[u8],
    out: &mut Vec<Event>,
) -> Result<()> {
    let space = tables.space();
    if roles.len() != frame.len() {
        return Err(Error::Contract(format!(
            "{} roles for a frame of {} arguments",
            roles.len(),
            frame.len()
        )));
    }
    if let Some(&r) = roles.iter().find(|&&r| r as usize >= space.n_roles()) {
        return Err(Error::Contract(format!("role index {r} out of range")));
    }
    check_no_primary_repeat(space, roles)?;

    let n = roles.len();
    let slot = frame.predicate_slot;
    // PR ids in linear order
    let mut ids = [0u8; 16];
    let mut len = 0;
    ids[len] = PR_START;
    len += 1;
    for pos in 0..=n {
        if pos == slot {
            ids[len] = PR_PRED;
            len += 1;
        }
        if pos < n && space.is_primary(roles[pos]) {
            ids[len] = space.pr_id(roles[pos]);
            len += 1;
        }
    }
    ids[len] = PR_END;
    len += 1;
    let ordering = tables
        .orderings()
        .index_of_packed(pack(&ids[..len]))
        .ok_or_else(|| Error::Contract("role sequence has no valid ordering".into()))?;
    out.push(Event {
        dist: Dist::Order {
            voice: frame.voice.index() as u8,
        },
        outcome: ordering,
    });

    let n_primary = space.n_primary() as u8;
    let push_feats = |out: &mut Vec<Event>, role: u8, pos: usize| {
        for t in 0..NUM_FEATURES {
            out.push(Event {
                dist: Dist::Feat {
                    role,
                    feature: t as u8,
                },
                outcome: frame.features[pos][t],
            });
        }
    };
    // close the interval (left, right) holding the SRs at positions from..upto
    let close = |out: &mut Vec<Event>, left: u8, right: u8, from: usize, upto: usize| {
        let interval = space.interval_index(left, right) as u16;
        let mut adj = 0u8;
        for pos in from..upto {
            let r = roles[pos];
            out.push(Event {
                dist: Dist::Stop { interval, adj },
                outcome: CONTINUE,
            });
            out.push(Event {
                dist: Dist::Sr { interval },
                outcome: (r - n_primary) as u32,
            });
            push_feats(out, r, pos);
            adj = 1;
        }
        out.push(Event {
            dist: Dist::Stop { interval, adj },
            outcome: STOP,
        });
    };
    let mut left = PR_START;
    let mut from = 0usize;
    for pos in 0..=n {
        if pos == slot {
            close(out, left, PR_PRED, from, pos);
            left = PR_PRED;
            from = pos;
        }
        if pos == n {
            close(out, left, PR_END, from, pos);
        } else if space.is_primary(roles[pos]) {
            let id = space.pr_id(roles[pos]);
            close(out, left, id, from, pos);
            push_feats(out, roles[pos], pos);
            left = id;
            from = pos + 1;
        }
    }
    Ok(())
}

/// Small scratch table of count deltas keyed by event.
#[derive(Default)]
struct Overlay {
    outcomes: Vec<(u32, u32, i32)>,
    totals: Vec<(u32, i32)>,
}

impl Overlay {
    fn get(&self, key: u32, outcome: u32) -> (i32, i32) {
        let c = self
            .outcomes
            .iter()
            .find(|e| e.0 == key && e.1 == outcome)
            .map_or(0, |e| e.2);
        let t = self.totals.iter().find(|e| e.0 == key).map_or(0, |e| e.1);
        (c, t)
    }

    fn bump(&mut self, key: u32, outcome: u32, d: i32) {
        match self.outcomes.iter_mut().find(|e| e.0 == key && e.1 == outcome) {
            Some(e) => e.2 += d,
            None => self.outcomes.push((key, outcome, d)),
        }
        match self.totals.iter_mut().find(|e| e.0 == key) {
            Some(e) => e.1 += d,
            None => self.totals.push((key, d)),
        }
    }
}

/// Log collapsed probability of a set of events given the tables, adding
/// each event to a scratch copy of the counts after scoring it (the
/// within-frame Pólya urn).
pub(crate) fn sequential_log_prob(
    tables: &CountTables,
    pt: &PredicateTables,
    hp: &Hyperparams,
    events: &[Event],
    mode: TableMode,
) -> Result<f64> {
    let mut overlay = Overlay::default();
    if mode == TableMode::Included {
        for e in events {
            overlay.bump(e.dist.key(), e.outcome, -1);
        }
    }
    let n_sr = tables.space().n_secondary();
    let mut lp = 0.0;
    for e in events {
        let key = e.dist.key();
        let (dc, dt) = overlay.get(key, e.outcome);
        let c = pt.count(n_sr, e.dist, e.outcome) as i64 + dc as i64;
        let t = pt.total(e.dist) as i64 + dt as i64;
        if c < 0 || t < 0 {
            return Err(Error::Contract(
                "frame events are not contained in the tables".into(),
            ));
        }
        let (a, big_a) = tables.prior(hp, e.dist, e.outcome);
        lp += ((c as f64 + a) / (t as f64 + big_a)).ln();
        overlay.bump(key, e.outcome, 1);
    }
    Ok(lp)
}

/// Log joint `P(r, f | p, vc, D)` of one frame under role indices `roles`,
/// with every parameter integrated out against the counts in `tables`.
pub fn frame_log_joint_idx(
    frame: &EncodedFrame,
    roles: &[u8],
    tables: &CountTables,
    hp: &Hyperparams,
    mode: TableMode,
) -> Result<f64> {
    frame_log_joint_in(frame, roles, tables, tables.predicate(frame.predicate), hp, mode)
}

/// [`frame_log_joint_idx`] scored against the counts `pt` (for example the
/// pooled backoff counts of an unseen predicate).
pub fn frame_log_joint_in(
    frame: &EncodedFrame,
    roles: &[u8],
    tables: &CountTables,
    pt: &PredicateTables,
    hp: &Hyperparams,
    mode: TableMode,
) -> Result<f64> {
    let mut events = Vec::with_capacity(4 + roles.len() * 6);
    frame_events(tables, frame, roles, &mut events)?;
    sequential_log_prob(tables, pt, hp, &events, mode)
}

pub fn frame_log_joint(
    frame: &EncodedFrame,
    assignment: &FrameAssignment,
    tables: &CountTables,
    hp: &Hyperparams,
    mode: TableMode,
) -> Result<f64> {
    let roles = assignment.to_indices(tables.space())?;
    frame_log_joint_idx(frame, &roles, tables, hp, mode)
}

/// Log probability of a frame under point-estimate parameters: every factor
/// is the posterior mean read from `pt`, with no within-frame updating.
pub fn frame_log_prob_frozen(
    frame: &EncodedFrame,
    roles: &[u8],
    tables: &CountTables,
    pt: &PredicateTables,
    hp: &Hyperparams,
    scratch: &mut Vec<Event>,
) -> Result<f64> {
    scratch.clear();
    frame_events(tables, frame, roles, scratch)?;
    Ok(scratch
        .iter()
        .map(|&e| tables.predictive_in(hp, pt, e).ln())
        .sum())
}

/// Dirichlet-multinomial posterior predictive
/// `(count(value) + alpha) / (total + alpha * vocab_size)`.
pub fn predictive_prob<K, S>(
    counts: &HashMap<K, u32, S>,
    value: &K,
    alpha: f64,
    vocab_size: usize,
) -> Result<f64>
where
    K: Eq + Hash,
    S: BuildHasher,
{
    if vocab_size == 0 {
        return Err(Error::Domain("vocabulary size must be at least 1".into()));
    }
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    let total: u64 = counts.values().map(|&c| c as u64).sum();
    let c = counts.get(value).copied().unwrap_or(0) as f64;
    Ok((c + alpha) / (total as f64 + alpha * vocab_size as f64))
}

/// Same quantity as [`frame_log_joint_idx`] in `Excluded` mode, computed as
/// a ratio of Gamma functions per distribution instead of a product of
/// sequential predictives.
pub(crate) fn frame_log_joint_gamma(
    frame: &EncodedFrame,
    roles: &[u8],
    tables: &CountTables,
    hp: &Hyperparams,
) -> Result<f64> {
    let mut events = Vec::new();
    frame_events(tables, frame, roles, &mut events)?;
    // group by distribution, then by outcome
    let mut keyed: Vec<(u32, u32, Dist)> = events
        .iter()
        .map(|e| (e.dist.key(), e.outcome, e.dist))
        .collect();
    keyed.sort_unstable_by_key(|e| (e.0, e.1));
    let p = frame.predicate;
    let mut lp = 0.0;
    let mut i = 0;
    while i < keyed.len() {
        let (key, _, dist) = keyed[i];
        let mut j = i;
        while j < keyed.len() && keyed[j].0 == key {
            j += 1;
        }
        let m = (j - i) as f64;
        let (_, big_a) = tables.prior(hp, dist, 0);
        let n = tables.total(p, dist) as f64;
        lp += ln_gamma(n + big_a) - ln_gamma(n + big_a + m);
        let mut k = i;
        while k < j {
            let o = keyed[k].1;
            let mut l = k;
            while l < j && keyed[l].1 == o {
                l += 1;
            }
            let (a, _) = tables.prior(hp, dist, o);
            let c = tables.count(p, dist, o) as f64;
            lp += ln_gamma(c + a + (l - k) as f64) - ln_gamma(c + a);
            k = l;
        }
        i = j;
    }
    Ok(lp)
}

/// Calls `f` with every valid role assignment of an `n`-argument frame
/// (primary roles used at most once).
pub fn for_each_assignment(space: &RoleSpace, n: usize, mut f: impl FnMut(&[u8])) {
    fn rec(space: &RoleSpace, n: usize, cur: &mut Vec<u8>, used: u64, f: &mut dyn FnMut(&[u8])) {
        if cur.len() == n {
            f(cur);
            return;
        }
        for r in 0..space.n_roles() as u8 {
            let primary = space.is_primary(r);
            if primary && used & (1 << r) != 0 {
                continue;
            }
            cur.push(r);
            rec(space, n, cur, if primary { used | 1 << r } else { used }, f);
            cur.pop();
        }
    }
    rec(space, n, &mut Vec::with_capacity(n), 0, &mut f);
}

/// Number of valid assignments of an `n`-argument frame.
pub fn count_assignments(space: &RoleSpace, n: usize) -> u64 {
    // choose which m positions hold distinct primaries, the rest any SR
    let (k, s) = (space.n_primary() as u64, space.n_secondary() as u64);
    let mut total = 0u64;
    for m in 0..=n.min(k as usize) as u64 {
        let choose_pos = binom(n as u64, m);
        let perms: u64 = (0..m).map(|i| k - i).product();
        total = total.saturating_add(
            choose_pos
                .saturating_mul(perms)
                .saturating_mul(s.saturating_pow((n as u64 - m) as u32)),
        );
    }
    total
}

fn binom(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Marginal likelihood `P(f | p, vc, D)` of a frame's features: the sum of
/// the joint over every valid role assignment. The frame must not be in the
/// tables.
pub fn marginal_prob(frame: &EncodedFrame, tables: &CountTables, hp: &Hyperparams) -> Result<f64> {
    Ok(log_marginal_prob(frame, tables, hp)?.exp())
}

pub fn log_marginal_prob(frame: &EncodedFrame, tables: &CountTables, hp: &Hyperparams) -> Result<f64> {
    if frame.len() > MAX_ENUMERATED_ARGUMENTS {
        return Err(Error::Domain(format!(
            "{} arguments exceed the enumeration limit of {MAX_ENUMERATED_ARGUMENTS}; use sampling",
            frame.len()
        )));
    }
    let space = *tables.space();
    let count = count_assignments(&space, frame.len());
    if count > MAX_ENUMERATED_ASSIGNMENTS {
        return Err(Error::Domain(format!(
            "{count} assignments exceed the enumeration limit; use sampling"
        )));
    }
    let mut terms = Vec::with_capacity(count as usize);
    let mut err = None;
    for_each_assignment(&space, frame.len(), |roles| {
        match frame_log_joint_gamma(frame, roles, tables, hp) {
            Ok(v) => terms.push(v),
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(log_sum_exp(&terms))
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}
