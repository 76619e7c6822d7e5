use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use super::roles::{RoleLabel, RoleSpace, PR_END, PR_PRED, PR_START};
use crate::error::{Error, Result};

/// The sequence of primary roles in a frame, START first and END last.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ordering {
    pub sequence: Vec<RoleLabel>,
}

impl Ordering {
    /// Projects a full role sequence onto its primary roles.
    pub fn of(sequence: &[RoleLabel]) -> Self {
        Ordering {
            sequence: sequence.iter().copied().filter(|l| l.is_primary()).collect(),
        }
    }

    pub fn intervals(&self) -> Vec<(RoleLabel, RoleLabel)> {
        self.sequence.windows(2).map(|w| (w[0], w[1])).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.sequence;
        let ok = s.first() == Some(&RoleLabel::Start)
            && s.last() == Some(&RoleLabel::End)
            && s.iter().filter(|&&l| l == RoleLabel::Pred).count() == 1
            && s.iter().all(|l| l.is_primary())
            && {
                let mut v = s.clone();
                v.sort();
                v.windows(2).all(|w| w[0] != w[1])
            };
        if ok {
            Ok(())
        } else {
            Err(Error::Contract(format!("invalid ordering {s:?}")))
        }
    }
}

/// All orderings over `K` primary roles: START, then PRED and any subset of
/// `P1..PK` in any order, then END.
pub fn enumerate_orderings(k: usize) -> Vec<Ordering> {
    let space = RoleSpace::new(k + 1, k).expect("k within MAX_PRIMARY");
    enumerate_ids(k)
        .into_iter()
        .map(|ids| Ordering {
            sequence: ids.iter().map(|&i| space.pr_label(i)).collect(),
        })
        .collect()
}

fn enumerate_ids(k: usize) -> Vec<Vec<u8>> {
    fn rec(k: usize, cur: &mut Vec<u8>, used: &mut [bool], pred_used: bool, out: &mut Vec<Vec<u8>>) {
        if pred_used {
            cur.push(PR_END);
            out.push(cur.clone());
            cur.pop();
        } else {
            cur.push(PR_PRED);
            rec(k, cur, used, true, out);
            cur.pop();
        }
        for p in 0..k {
            if !used[p] {
                used[p] = true;
                cur.push(p as u8 + 3);
                rec(k, cur, used, pred_used, out);
                cur.pop();
                used[p] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(k, &mut vec![PR_START], &mut vec![false; k], false, &mut out);
    out
}

/// Dense index over the ordering space of a role space.
#[derive(Debug, Clone)]
pub(crate) struct OrderingIndex {
    seqs: Vec<Vec<u8>>,
    map: FxHashMap<u64, u32>,
}

pub(crate) fn pack(ids: &[u8]) -> u64 {
    ids.iter().fold(0u64, |acc, &i| (acc << 4) | (i as u64 + 1))
}

impl OrderingIndex {
    pub fn new(space: &RoleSpace) -> Self {
        let seqs = enumerate_ids(space.n_primary());
        let map = seqs
            .iter()
            .enumerate()
            .map(|(i, s)| (pack(s), i as u32))
            .collect();
        OrderingIndex { seqs, map }
    }

    pub fn len(&self) -> usize {
        self.seqs.len()
    }

    pub fn index_of_packed(&self, key: u64) -> Option<u32> {
        self.map.get(&key).copied()
    }

    pub fn ids(&self, index: u32) -> &[u8] {
        &self.seqs[index as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::roles::role_sequence;
    use RoleLabel::*;

    fn expected_count(k: usize) -> usize {
        let fact = |n: usize| (1..=n).product::<usize>();
        let choose = |n: usize, m: usize| fact(n) / (fact(m) * fact(n - m));
        (0..=k).map(|m| choose(k, m) * fact(m + 1)).sum()
    }

    #[test]
    fn ordering_counts() {
        assert_eq!(enumerate_orderings(0).len(), 1);
        assert_eq!(enumerate_orderings(1).len(), 3);
        assert_eq!(enumerate_orderings(2).len(), 11);
        for k in 0..=6 {
            let all = enumerate_orderings(k);
            assert_eq!(all.len(), expected_count(k), "k={k}");
            let distinct: std::collections::HashSet<_> = all.iter().collect();
            assert_eq!(distinct.len(), all.len());
            for o in &all {
                o.validate().unwrap();
            }
        }
    }

    #[test]
    fn example_sequence_ordering_and_intervals() {
        let seq = vec![Start, Primary(3), Secondary(1), Secondary(1), Pred, Primary(2), Secondary(5), End];
        let o = Ordering::of(&seq);
        assert_eq!(o.sequence, vec![Start, Primary(3), Pred, Primary(2), End]);
        assert_eq!(
            o.intervals(),
            vec![(Start, Primary(3)), (Primary(3), Pred), (Pred, Primary(2)), (Primary(2), End)]
        );
        // (P3, PRED) holds the two S1s
        let i = seq.iter().position(|&l| l == Primary(3)).unwrap();
        let j = seq.iter().position(|&l| l == Pred).unwrap();
        assert_eq!(&seq[i + 1..j], &[Secondary(1), Secondary(1)]);
    }

    #[test]
    fn index_lookup() {
        let space = RoleSpace::new(4, 2).unwrap();
        let idx = OrderingIndex::new(&space);
        assert_eq!(idx.len(), 11);
        for i in 0..idx.len() as u32 {
            assert_eq!(idx.index_of_packed(pack(idx.ids(i))), Some(i));
        }
        let o = Ordering::of(&role_sequence(&[Primary(2), Secondary(1)], 2));
        assert_eq!(o.sequence, vec![Start, Primary(2), Pred, End]);
    }
}
