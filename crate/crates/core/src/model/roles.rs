use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest supported number of primary roles. The ordering space grows
/// factorially (K=6 already has 11,743 orderings).
pub const MAX_PRIMARY: usize = 6;

/// Largest supported total role count.
pub const MAX_ROLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RoleLabel {
    Start,
    End,
    Pred,
    /// `P_k`, 1-based.
    Primary(u8),
    /// `S_j`, 1-based.
    Secondary(u8),
}

impl RoleLabel {
    pub fn is_primary(self) -> bool {
        !matches!(self, RoleLabel::Secondary(_))
    }

    pub fn is_structural(self) -> bool {
        matches!(self, RoleLabel::Start | RoleLabel::End | RoleLabel::Pred)
    }
}

impl fmt::Display for RoleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RoleLabel::Start => f.write_str("START"),
            RoleLabel::End => f.write_str("END"),
            RoleLabel::Pred => f.write_str("PRED"),
            RoleLabel::Primary(k) => write!(f, "P{k}"),
            RoleLabel::Secondary(j) => write!(f, "S{j}"),
        }
    }
}

impl FromStr for RoleLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Data(format!("not a role label: {s:?}"));
        match s {
            "START" => Ok(RoleLabel::Start),
            "END" => Ok(RoleLabel::End),
            "PRED" => Ok(RoleLabel::Pred),
            _ => {
                let (kind, num) = s.split_at(s.chars().next().map_or(0, char::len_utf8));
                let n: u8 = num.parse().map_err(|_| bad())?;
                if n == 0 {
                    return Err(bad());
                }
                match kind {
                    "P" => Ok(RoleLabel::Primary(n)),
                    "S" => Ok(RoleLabel::Secondary(n)),
                    _ => Err(bad()),
                }
            }
        }
    }
}

impl Serialize for RoleLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RoleLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The role inventory of a model: `N` roles per predicate of which the first
/// `K` are primary.
///
/// Argument roles are indexed `0..N` (`P1..PK` then `S1..S(N-K)`). Primary
/// roles used as ordering/interval endpoints get a separate id space of size
/// `K + 3`: `START=0, PRED=1, END=2, Pk=2+k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleSpace {
    n_roles: usize,
    n_primary: usize,
}

pub(crate) const PR_START: u8 = 0;
pub(crate) const PR_PRED: u8 = 1;
pub(crate) const PR_END: u8 = 2;

impl RoleSpace {
    pub fn new(n_roles: usize, n_primary: usize) -> Result<Self> {
        if n_roles <= n_primary {
            return Err(Error::Config(format!(
                "need more roles than primary roles (N={n_roles}, K={n_primary})"
            )));
        }
        if n_primary > MAX_PRIMARY {
            return Err(Error::Config(format!(
                "at most {MAX_PRIMARY} primary roles are supported (K={n_primary})"
            )));
        }
        if n_roles > MAX_ROLES {
            return Err(Error::Config(format!(
                "at most {MAX_ROLES} roles are supported (N={n_roles})"
            )));
        }
        Ok(RoleSpace { n_roles, n_primary })
    }

    pub fn n_roles(&self) -> usize {
        self.n_roles
    }

    pub fn n_primary(&self) -> usize {
        self.n_primary
    }

    pub fn n_secondary(&self) -> usize {
        self.n_roles - self.n_primary
    }

    pub fn is_primary(&self, role: u8) -> bool {
        (role as usize) < self.n_primary
    }

    /// Label of argument role index `role`.
    pub fn label(&self, role: u8) -> RoleLabel {
        let r = role as usize;
        if r < self.n_primary {
            RoleLabel::Primary(role + 1)
        } else {
            RoleLabel::Secondary((r - self.n_primary + 1) as u8)
        }
    }

    /// Argument role index of `label`, if it is an argument role of this space.
    pub fn index(&self, label: RoleLabel) -> Option<u8> {
        match label {
            RoleLabel::Primary(k) if (1..=self.n_primary).contains(&(k as usize)) => Some(k - 1),
            RoleLabel::Secondary(j) if (1..=self.n_secondary()).contains(&(j as usize)) => {
                Some((self.n_primary + j as usize - 1) as u8)
            }
            _ => None,
        }
    }

    pub fn labels(&self) -> impl Iterator<Item = RoleLabel> + '_ {
        (0..self.n_roles as u8).map(|r| self.label(r))
    }

    pub(crate) fn n_pr_ids(&self) -> usize {
        self.n_primary + 3
    }

    /// PR id of a primary argument role.
    pub(crate) fn pr_id(&self, role: u8) -> u8 {
        debug_assert!(self.is_primary(role));
        role + 3
    }

    pub(crate) fn pr_label(&self, id: u8) -> RoleLabel {
        match id {
            PR_START => RoleLabel::Start,
            PR_PRED => RoleLabel::Pred,
            PR_END => RoleLabel::End,
            k => RoleLabel::Primary(k - 2),
        }
    }

    pub(crate) fn n_intervals(&self) -> usize {
        self.n_pr_ids() * self.n_pr_ids()
    }

    pub(crate) fn interval_index(&self, left: u8, right: u8) -> usize {
        left as usize * self.n_pr_ids() + right as usize
    }

}

/// The role sequence of one frame: a primary or secondary role per argument.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameAssignment {
    pub roles: Vec<RoleLabel>,
}

impl FrameAssignment {
    pub fn new(roles: Vec<RoleLabel>) -> Self {
        FrameAssignment { roles }
    }

    /// Checks the roles belong to `space` and no primary role repeats.
    pub fn to_indices(&self, space: &RoleSpace) -> Result<Vec<u8>> {
        let idx: Vec<u8> = self
            .roles
            .iter()
            .map(|&l| {
                space
                    .index(l)
                    .ok_or_else(|| Error::Contract(format!("{l} is not an argument role here")))
            })
            .collect::<Result<_>>()?;
        check_no_primary_repeat(space, &idx)?;
        Ok(idx)
    }

    pub fn from_indices(space: &RoleSpace, roles: &[u8]) -> Self {
        FrameAssignment {
            roles: roles.iter().map(|&r| space.label(r)).collect(),
        }
    }
}

/// Errors if a primary role appears more than once in `roles`.
pub fn check_no_primary_repeat(space: &RoleSpace, roles: &[u8]) -> Result<()> {
    let mut used = 0u64;
    for &r in roles {
        if space.is_primary(r) {
            if used & (1 << r) != 0 {
                return Err(Error::Contract(format!(
                    "primary role {} repeats within a frame",
                    space.label(r)
                )));
            }
            used |= 1 << r;
        }
    }
    Ok(())
}

/// Inserts START, PRED (after `predicate_slot` arguments) and END around
/// the argument roles.
pub fn role_sequence(roles: &[RoleLabel], predicate_slot: usize) -> Vec<RoleLabel> {
    let mut seq = Vec::with_capacity(roles.len() + 3);
    seq.push(RoleLabel::Start);
    seq.extend_from_slice(&roles[..predicate_slot]);
    seq.push(RoleLabel::Pred);
    seq.extend_from_slice(&roles[predicate_slot..]);
    seq.push(RoleLabel::End);
    seq
}
