use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::metrics::PREDICATE_LABEL;
use crate::corpus::Frame;
use crate::error::{Error, Result};
use crate::model::{RoleLabel, RoleSpace};

/// Gold label → model role, used to clamp labeled arguments.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleMapping {
    pub map: BTreeMap<String, RoleLabel>,
}

impl RoleMapping {
    pub fn get(&self, gold: &str) -> Option<RoleLabel> {
        self.map.get(gold).copied()
    }

    /// Maps every role name of `space` to itself, for corpora whose gold
    /// labels are already model roles (as in generated data).
    pub fn identity(space: &RoleSpace) -> Self {
        RoleMapping {
            map: space.labels().map(|l| (l.to_string(), l)).collect(),
        }
    }

    /// Identity when every label of the inventory is a role of `space`,
    /// otherwise [`default_role_mapping`].
    pub fn for_inventory(inventory: &BTreeMap<String, usize>, space: &RoleSpace) -> Result<Self> {
        let all_roles = inventory
            .keys()
            .all(|l| l.parse::<RoleLabel>().ok().and_then(|r| space.index(r)).is_some());
        if all_roles {
            Ok(RoleMapping::identity(space))
        } else {
            default_role_mapping(inventory, space)
        }
    }
}

/// Gold label frequencies over `frames`, excluding the predicate label.
pub fn gold_inventory<'a>(frames: impl IntoIterator<Item = &'a Frame>) -> BTreeMap<String, usize> {
    let mut inv = BTreeMap::new();
    for f in frames {
        for a in &f.arguments {
            if let Some(g) = &a.gold_role {
                if g != PREDICATE_LABEL {
                    *inv.entry(g.clone()).or_insert(0) += 1;
                }
            }
        }
    }
    inv
}

/// A0 → P1, A1 → P2, and the remaining labels to S1, S2, … in order of
/// decreasing frequency (ties by label). Labels beyond the last SR share it.
pub fn default_role_mapping(inventory: &BTreeMap<String, usize>, space: &RoleSpace) -> Result<RoleMapping> {
    let mut map = BTreeMap::new();
    for (k, name) in ["A0", "A1"].iter().enumerate() {
        if inventory.contains_key(*name) {
            if k >= space.n_primary() {
                return Err(Error::Config(format!(
                    "{name} needs primary role P{} but only {} primary roles exist",
                    k + 1,
                    space.n_primary()
                )));
            }
            map.insert(name.to_string(), RoleLabel::Primary(k as u8 + 1));
        }
    }
    let mut rest: Vec<(&String, usize)> = inventory
        .iter()
        .filter(|(l, _)| !map.contains_key(*l) && l.as_str() != PREDICATE_LABEL)
        .map(|(l, &n)| (l, n))
        .collect();
    rest.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let n_sr = space.n_secondary();
    for (i, (l, _)) in rest.into_iter().enumerate() {
        map.insert(l.clone(), RoleLabel::Secondary(i.min(n_sr - 1) as u8 + 1));
    }
    Ok(RoleMapping { map })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inv(items: &[(&str, usize)]) -> BTreeMap<String, usize> {
        items.iter().map(|&(l, n)| (l.to_string(), n)).collect()
    }

    #[test]
    fn footnote_rule() {
        let s = RoleSpace::new(5, 2).unwrap();
        let m = default_role_mapping(&inv(&[("A0", 9), ("A1", 7), ("AM-TMP", 5), ("A2", 3)]), &s).unwrap();
        assert_eq!(m.get("A0"), Some(RoleLabel::Primary(1)));
        assert_eq!(m.get("A1"), Some(RoleLabel::Primary(2)));
        assert_eq!(m.get("AM-TMP"), Some(RoleLabel::Secondary(1)));
        assert_eq!(m.get("A2"), Some(RoleLabel::Secondary(2)));
    }

    #[test]
    fn only_primaries() {
        let s = RoleSpace::new(3, 2).unwrap();
        let m = default_role_mapping(&inv(&[("A0", 1), ("A1", 1)]), &s).unwrap();
        assert_eq!(m.map.len(), 2);
        assert!(m.map.values().all(|r| !matches!(r, RoleLabel::Secondary(_))));
    }

    #[test]
    fn nineteen_secondaries_cover_residual_labels() {
        let s = RoleSpace::new(21, 2).unwrap();
        let mut items: Vec<(String, usize)> = vec![("A0".into(), 100), ("A1".into(), 90)];
        items.extend((0..19).map(|i| (format!("AM-{i:02}"), 50 - i)));
        let inv: BTreeMap<String, usize> = items.into_iter().collect();
        let m = default_role_mapping(&inv, &s).unwrap();
        let mut srs: Vec<RoleLabel> = m
            .map
            .values()
            .copied()
            .filter(|r| matches!(r, RoleLabel::Secondary(_)))
            .collect();
        srs.sort();
        srs.dedup();
        assert_eq!(srs.len(), 19);
    }

    #[test]
    fn overflow_collapses_and_ties_break_by_label() {
        let s = RoleSpace::new(4, 2).unwrap();
        let m = default_role_mapping(&inv(&[("B", 2), ("A", 2), ("C", 1)]), &s).unwrap();
        assert_eq!(m.get("A"), Some(RoleLabel::Secondary(1)));
        assert_eq!(m.get("B"), Some(RoleLabel::Secondary(2)));
        assert_eq!(m.get("C"), Some(RoleLabel::Secondary(2)));
    }

    #[test]
    fn too_few_primaries() {
        let s = RoleSpace::new(4, 1).unwrap();
        assert!(default_role_mapping(&inv(&[("A0", 1), ("A1", 1)]), &s).is_err());
    }

    #[test]
    fn role_named_inventory_maps_to_itself() {
        let s = RoleSpace::new(4, 1).unwrap();
        let m = RoleMapping::for_inventory(&inv(&[("P1", 3), ("S2", 1)]), &s).unwrap();
        assert_eq!(m.get("S2"), Some(RoleLabel::Secondary(2)));
    }
}
