use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Which table a customer sits at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TableChoice {
    Existing(u32),
    New,
}

/// Seating state of one Chinese restaurant. Empty tables are removed as
/// soon as their last customer leaves; ids are never reused.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Restaurant {
    sizes: BTreeMap<u32, u32>,
    next_table: u32,
    customers: u32,
}

impl Restaurant {
    pub fn new() -> Self {
        Restaurant::default()
    }

    pub fn customers(&self) -> u32 {
        self.customers
    }

    pub fn n_tables(&self) -> usize {
        self.sizes.len()
    }

    pub fn size(&self, table: u32) -> Option<u32> {
        self.sizes.get(&table).copied()
    }

    /// `(table id, size)` in id order.
    pub fn tables(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.sizes.iter().map(|(&t, &n)| (t, n))
    }

    pub fn next_table_id(&self) -> u32 {
        self.next_table
    }

    /// Seats one customer and returns the table id.
    pub fn seat(&mut self, choice: TableChoice) -> Result<u32> {
        let id = match choice {
            TableChoice::Existing(t) => {
                let n = self
                    .sizes
                    .get_mut(&t)
                    .ok_or_else(|| Error::Domain(format!("no table {t}")))?;
                *n += 1;
                t
            }
            TableChoice::New => {
                let t = self.next_table;
                self.next_table += 1;
                self.sizes.insert(t, 1);
                t
            }
        };
        self.customers += 1;
        Ok(id)
    }

    /// Removes one customer from `table`; returns whether the table emptied
    /// and was dropped.
    pub fn unseat(&mut self, table: u32) -> Result<bool> {
        let n = self
            .sizes
            .get_mut(&table)
            .ok_or_else(|| Error::Contract(format!("unseating from missing table {table}")))?;
        *n -= 1;
        self.customers -= 1;
        if *n == 0 {
            self.sizes.remove(&table);
            Ok(true)
        } else {
            Ok(false)
        }
    }

    /// Restores a table with a given id and size, used when loading state.
    pub(crate) fn restore(&mut self, table: u32, size: u32) {
        if size > 0 {
            self.customers += size;
            *self.sizes.entry(table).or_insert(0) += size;
            self.next_table = self.next_table.max(table + 1);
        }
    }
}

/// CRP seating probability: `n_c / (n + alpha)` for an existing table,
/// `alpha / (n + alpha)` for a new one.
pub fn crp_assignment_prob(r: &Restaurant, choice: TableChoice, alpha_crp: f64) -> Result<f64> {
    if !(alpha_crp > 0.0) {
        return Err(Error::Domain(format!("CRP concentration must be positive, got {alpha_crp}")));
    }
    let denom = r.customers as f64 + alpha_crp;
    match choice {
        TableChoice::New => Ok(alpha_crp / denom),
        TableChoice::Existing(t) => r
            .size(t)
            .map(|n| n as f64 / denom)
            .ok_or_else(|| Error::Domain(format!("no table {t}"))),
    }
}

/// Exchangeable partition probability of a seating with the given table
/// sizes: `alpha^T Gamma(alpha) / Gamma(alpha + n) * prod (n_c - 1)!`.
pub fn log_partition_prob(sizes: &[u32], alpha_crp: f64) -> f64 {
    let n: u32 = sizes.iter().sum();
    let mut lp = sizes.len() as f64 * alpha_crp.ln() + ln_gamma(alpha_crp) - ln_gamma(alpha_crp + n as f64);
    for &s in sizes {
        lp += ln_gamma(s as f64);
    }
    lp
}

/// Probability of seating customers one at a time at the labelled tables
/// `seating` (equal labels share a table), starting from an empty restaurant.
pub fn log_sequential_seating_prob(seating: &[usize], alpha_crp: f64) -> f64 {
    let mut sizes: BTreeMap<usize, u32> = BTreeMap::new();
    let mut lp = 0.0;
    for (i, &t) in seating.iter().enumerate() {
        let denom = i as f64 + alpha_crp;
        let entry = sizes.entry(t).or_insert(0);
        lp += if *entry == 0 {
            (alpha_crp / denom).ln()
        } else {
            (*entry as f64 / denom).ln()
        };
        *entry += 1;
    }
    lp
}
