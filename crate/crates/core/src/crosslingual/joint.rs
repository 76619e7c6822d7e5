use super::state::{ClvState, PredicatePair};
use crate::error::{Error, Result};
use crate::model::{frame_log_joint_idx, CountTables, EncodedFrame, Hyperparams, TableMode};

/// Integer view of an aligned frame pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedPair {
    pub frames: [EncodedFrame; 2],
    /// `(argument in frame 0, argument in frame 1)`
    pub links: Vec<(usize, usize)>,
}

/// The CLV value of one link: a table already in the restaurant, or a new
/// table identified by a local label (links sharing a label share the table).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClvRef {
    Existing(u32),
    Fresh(u32),
}

/// Log joint of an aligned pair under role sequences `roles` and CLV values
/// `clv` (one per link): the CRP probability of the seating, both
/// monolingual frame joints, and every aligned role generated once more by
/// its CLV. The model is deficient, so these values sum to less than one.
///
/// Neither the frames' events nor the links may be in `tables` / `state`.
pub fn coupled_log_joint(
    pair: &EncodedPair,
    roles: [&[u8]; 2],
    clv: &[Option<ClvRef>],
    tables: [&CountTables; 2],
    state: &ClvState,
    key: PredicatePair,
    hp: &Hyperparams,
) -> Result<f64> {
    if clv.len() != pair.links.len() {
        return Err(Error::Contract(format!(
            "{} CLV values for {} links",
            clv.len(),
            pair.links.len()
        )));
    }
    let mut lp = 0.0;
    for l in 0..2 {
        lp += frame_log_joint_idx(&pair.frames[l], roles[l], tables[l], hp, TableMode::Excluded)?;
    }
    let empty = super::crp::Restaurant::new();
    let restaurant = state.crp.restaurant(key).unwrap_or(&empty);
    let n_roles = state.align.n_roles() as f64;
    // customers added by this pair, per table
    let mut extra: Vec<(ClvRef, u32, [Vec<u32>; 2])> = Vec::new();
    for (k, (&(i, j), z)) in pair.links.iter().zip(clv).enumerate() {
        let z = z.ok_or_else(|| Error::Contract(format!("link {k} has no CLV value")))?;
        let base = match z {
            ClvRef::Existing(t) => restaurant
                .size(t)
                .ok_or_else(|| Error::Contract(format!("link {k} refers to missing table {t}")))?,
            ClvRef::Fresh(_) => 0,
        };
        let n = restaurant.customers() + extra.iter().map(|e| e.1).sum::<u32>();
        let pos = extra.iter().position(|e| e.0 == z);
        let added = pos.map_or(0, |p| extra[p].1);
        let size = base + added;
        lp += if size == 0 {
            (hp.alpha_crp / (n as f64 + hp.alpha_crp)).ln()
        } else {
            (size as f64 / (n as f64 + hp.alpha_crp)).ln()
        };
        let p = match pos {
            Some(p) => p,
            None => {
                let zero = vec![0u32; n_roles as usize];
                extra.push((z, 0, [zero.clone(), zero]));
                extra.len() - 1
            }
        };
        let table = match z {
            ClvRef::Existing(t) => Some(t),
            ClvRef::Fresh(_) => None,
        };
        for (l, r) in [roles[0][i], roles[1][j]].into_iter().enumerate() {
            let (c0, t0) = match table {
                Some(t) => (state.align.count(key, t, l, r), state.align.total(key, t, l)),
                None => (0, 0),
            };
            let c = c0 + extra[p].2[l][r as usize];
            let t = t0 + extra[p].2[l].iter().sum::<u32>();
            lp += ((c as f64 + hp.alpha_align) / (t as f64 + hp.alpha_align * n_roles)).ln();
            extra[p].2[l][r as usize] += 1;
        }
        extra[p].1 += 1;
    }
    Ok(lp)
}
