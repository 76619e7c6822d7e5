use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::metrics::{harmonic, predicate_counts, Clustering};
use crate::error::{Error, Result};

/// Conventional significance threshold for the shuffling test.
pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

/// Two-sided stratified shuffling test of the F1 difference between systems
/// `a` and `b`. Each shuffle swaps the two systems' outputs for a whole
/// predicate with probability 1/2; the p-value is `(c + 1) / (iterations +
/// 1)` where `c` counts shuffles at least as extreme as the observed gap.
pub fn stratified_shuffling(
    a: &Clustering,
    b: &Clustering,
    gold: &Clustering,
    iterations: usize,
    seed: u64,
) -> Result<f64> {
    // per stratum: PU and CO numerators of a and b
    let mut strata = Vec::new();
    let mut n_total = 0usize;
    for (p, g) in &gold.by_predicate {
        let (sa, sb) = match (a.by_predicate.get(p), b.by_predicate.get(p)) {
            (Some(sa), Some(sb)) if sa.len() == g.len() && sb.len() == g.len() => (sa, sb),
            _ => return Err(Error::Data(format!("systems do not label the same instances of {p}"))),
        };
        if sa.keys().ne(g.keys()) || sb.keys().ne(g.keys()) {
            return Err(Error::Data(format!("systems do not label the same instances of {p}")));
        }
        let (pa, ca, n) = predicate_counts(sa, g);
        let (pb, cb, _) = predicate_counts(sb, g);
        strata.push([pa as i64, ca as i64, pb as i64, cb as i64]);
        n_total += n;
    }
    if a.by_predicate.len() != gold.by_predicate.len() || b.by_predicate.len() != gold.by_predicate.len() {
        return Err(Error::Data("systems do not label the same predicates".into()));
    }
    if n_total == 0 {
        return Ok(1.0);
    }
    let n = n_total as f64;
    let diff = |sums: [i64; 4]| {
        harmonic(sums[0] as f64 / n, sums[1] as f64 / n) - harmonic(sums[2] as f64 / n, sums[3] as f64 / n)
    };
    let mut totals = [0i64; 4];
    for s in &strata {
        for k in 0..4 {
            totals[k] += s[k];
        }
    }
    let observed = diff(totals).abs();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut extreme = 0usize;
    for _ in 0..iterations {
        let mut t = totals;
        for s in &strata {
            if rng.random_bool(0.5) {
                // move the stratum's a-output to b and vice versa
                let (dp, dc) = (s[2] - s[0], s[3] - s[1]);
                t[0] += dp;
                t[1] += dc;
                t[2] -= dp;
                t[3] -= dc;
            }
        }
        if diff(t).abs() >= observed - 1e-12 {
            extreme += 1;
        }
    }
    Ok((extreme + 1) as f64 / (iterations + 1) as f64)
}

/// Indices of `round(fraction * n)` items drawn uniformly without
/// replacement, in increasing order.
pub fn select_fraction(n: usize, fraction: f64, seed: u64) -> Vec<usize> {
    let k = ((fraction.clamp(0.0, 1.0) * n as f64).round() as usize).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = sample(&mut rng, n, k).into_vec();
    idx.sort_unstable();
    idx
}
