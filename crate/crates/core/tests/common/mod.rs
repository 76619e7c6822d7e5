//! Reference computations written directly from the model definition,
//! sharing no code with the library beyond its public data types.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use statrs::function::gamma::ln_gamma;

use sri_core::corpus::{ArgumentMention, Frame, Voice};
use sri_core::model::EncodedFrame;

/// Priors of the reference model.
#[derive(Debug, Clone, Copy)]
pub struct OracleSpec {
    pub n_roles: usize,
    pub n_primary: usize,
    pub feature_sizes: [usize; 3],
    pub alpha_order: f64,
    pub alpha_sr: f64,
    pub alpha_feat: [f64; 3],
    pub beta_stop: [f64; 2],
}

impl OracleSpec {
    pub fn new(n_roles: usize, n_primary: usize, feature_sizes: [usize; 3]) -> Self {
        OracleSpec {
            n_roles,
            n_primary,
            feature_sizes,
            alpha_order: 1.0,
            alpha_sr: 1.0,
            alpha_feat: [0.1; 3],
            beta_stop: [1.0, 1.0],
        }
    }
}

/// Number of orderings over `k` primaries: choose the `m` present, then
/// place them and PRED in any order.
pub fn ordering_count(k: usize) -> usize {
    let fact = |n: usize| (1..=n).product::<usize>();
    (0..=k).map(|m| fact(k) / (fact(m) * fact(k - m)) * fact(m + 1)).sum()
}

/// Every role vector of length `n` with no repeated primary role.
pub fn assignments(n: usize, n_roles: usize, n_primary: usize) -> Vec<Vec<u8>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::new();
        for a in &out {
            for r in 0..n_roles as u8 {
                if (r as usize) < n_primary && a.contains(&r) {
                    continue;
                }
                let mut b = a.clone();
                b.push(r);
                next.push(b);
            }
        }
        out = next;
    }
    out
}

fn pr_name(spec: &OracleSpec, r: u8) -> Option<String> {
    ((r as usize) < spec.n_primary).then(|| format!("P{}", r + 1))
}

/// (distribution, outcome) pairs generated by one frame. Events are keyed
/// by strings so the bookkeeping is independent of the library's indices.
pub fn events(spec: &OracleSpec, f: &EncodedFrame, roles: &[u8]) -> Vec<(String, String)> {
    let mut out = Vec::new();
    // linear sequence of markers: Some(pr) or None for an SR, with position
    let mut seq: Vec<(String, Option<usize>)> = vec![("START".into(), None)];
    for pos in 0..=roles.len() {
        if pos == f.predicate_slot {
            seq.push(("PRED".into(), None));
        }
        if pos < roles.len() {
            match pr_name(spec, roles[pos]) {
                Some(n) => seq.push((n, Some(pos))),
                None => seq.push(("SR".into(), Some(pos))),
            }
        }
    }
    seq.push(("END".into(), None));
    let prs: Vec<&str> = seq.iter().filter(|s| s.0 != "SR").map(|s| s.0.as_str()).collect();
    out.push((format!("order/{}", f.voice.index()), prs.join(",")));

    let feats = |out: &mut Vec<(String, String)>, pos: usize| {
        for t in 0..3 {
            out.push((format!("feat/{}/{t}", roles[pos]), f.features[pos][t].to_string()));
        }
    };
    let mut left = "START".to_string();
    let mut pending: Vec<usize> = Vec::new();
    for (name, pos) in seq.iter().skip(1) {
        if name == "SR" {
            pending.push(pos.unwrap());
            continue;
        }
        for (j, &p) in pending.iter().enumerate() {
            out.push((format!("stop/{left}/{name}/{}", (j > 0) as u8), "continue".into()));
            out.push((format!("sr/{left}/{name}"), (roles[p] as usize - spec.n_primary).to_string()));
            feats(&mut out, p);
        }
        out.push((format!("stop/{left}/{name}/{}", !pending.is_empty() as u8), "stop".into()));
        pending.clear();
        if let Some(p) = pos {
            feats(&mut out, *p);
        }
        left = name.clone();
    }
    out
}

fn prior(spec: &OracleSpec, dist: &str, outcome: &str) -> (f64, f64) {
    let kind = dist.split('/').next().unwrap();
    match kind {
        "order" => (spec.alpha_order, spec.alpha_order * ordering_count(spec.n_primary) as f64),
        "sr" => (spec.alpha_sr, spec.alpha_sr * (spec.n_roles - spec.n_primary) as f64),
        "stop" => {
            let b = if outcome == "stop" { spec.beta_stop[0] } else { spec.beta_stop[1] };
            (b, spec.beta_stop[0] + spec.beta_stop[1])
        }
        "feat" => {
            let t: usize = dist.rsplit('/').next().unwrap().parse().unwrap();
            (spec.alpha_feat[t], spec.alpha_feat[t] * spec.feature_sizes[t] as f64)
        }
        _ => unreachable!(),
    }
}

/// Dirichlet-multinomial evidence of all the events, in closed form.
pub fn log_evidence(spec: &OracleSpec, evs: &[(String, String)]) -> f64 {
    let mut counts: BTreeMap<&str, BTreeMap<&str, u32>> = BTreeMap::new();
    for (d, o) in evs {
        *counts.entry(d).or_default().entry(o).or_insert(0) += 1;
    }
    let mut lp = 0.0;
    for (d, outs) in counts {
        let n: u32 = outs.values().sum();
        let (_, total) = prior(spec, d, "stop");
        lp += ln_gamma(total) - ln_gamma(total + n as f64);
        for (o, c) in outs {
            let (a, _) = prior(spec, d, o);
            lp += ln_gamma(a + c as f64) - ln_gamma(a);
        }
    }
    lp
}

/// Joint log probability of several frames of one predicate.
pub fn log_joint(spec: &OracleSpec, frames: &[EncodedFrame], roles: &[Vec<u8>]) -> f64 {
    let evs: Vec<_> = frames.iter().zip(roles).flat_map(|(f, r)| events(spec, f, r)).collect();
    log_evidence(spec, &evs)
}

/// Exact posterior over the joint assignments of `frames`, by enumeration.
pub fn posterior(spec: &OracleSpec, frames: &[EncodedFrame]) -> Vec<(Vec<Vec<u8>>, f64)> {
    let mut states: Vec<Vec<Vec<u8>>> = vec![Vec::new()];
    for f in frames {
        let opts = assignments(f.features.len(), spec.n_roles, spec.n_primary);
        states = states
            .into_iter()
            .flat_map(|s| {
                opts.iter().map(move |o| {
                    let mut s = s.clone();
                    s.push(o.clone());
                    s
                })
            })
            .collect();
    }
    let lps: Vec<f64> = states.iter().map(|s| log_joint(spec, frames, s)).collect();
    let m = lps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = lps.iter().map(|l| (l - m).exp()).sum();
    states.into_iter().zip(lps).map(|(s, l)| (s, (l - m).exp() / z)).collect()
}

/// Monte-Carlo estimate of `E[theta_v]` under `Dirichlet(alpha + counts)`
/// and its standard error.
pub fn mc_predictive<R: Rng>(counts: &[u32], alpha: f64, v: usize, draws: usize, rng: &mut R) -> (f64, f64) {
    let gammas: Vec<Gamma<f64>> = counts.iter().map(|&c| Gamma::new(alpha + c as f64, 1.0).unwrap()).collect();
    let mut sum = 0.0;
    let mut sq = 0.0;
    for _ in 0..draws {
        let x: Vec<f64> = gammas.iter().map(|g| g.sample(rng)).collect();
        let theta = x[v] / x.iter().sum::<f64>();
        sum += theta;
        sq += theta * theta;
    }
    let mean = sum / draws as f64;
    let var = (sq / draws as f64 - mean * mean).max(0.0);
    (mean, (var / draws as f64).sqrt())
}

/// Hoppe urn: each customer joins the table of a uniformly chosen earlier
/// customer, or a new table with weight `alpha`. Returns table labels in
/// order of first appearance.
pub fn hoppe_urn<R: Rng>(n: usize, alpha: f64, rng: &mut R) -> Vec<usize> {
    let mut seats: Vec<usize> = Vec::with_capacity(n);
    let mut tables = 0;
    for i in 0..n {
        let u = rng.random::<f64>() * (i as f64 + alpha);
        if u < i as f64 {
            seats.push(seats[u as usize]);
        } else {
            seats.push(tables);
            tables += 1;
        }
    }
    seats
}

/// Every set partition of `n` items as restricted growth strings.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, cur: &mut Vec<usize>, max: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for b in 0..=max {
            cur.push(b);
            rec(n, cur, max.max(b + 1), out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, &mut Vec::new(), 0, &mut out);
    out
}

/// Ewens probability of a labelled set partition with the given block sizes.
pub fn ewens(sizes: &[u32], alpha: f64) -> f64 {
    let n: u32 = sizes.iter().sum();
    let mut p = alpha.powi(sizes.len() as i32);
    for &s in sizes {
        p *= (1..s).map(f64::from).product::<f64>();
    }
    p / (0..n).map(|i| alpha + i as f64).product::<f64>()
}

/// Purity and collocation by direct counting over parallel label lists
/// grouped by predicate.
pub fn pu_co(items: &[(String, String, String)]) -> (f64, f64) {
    let mut by_pred: BTreeMap<&str, Vec<(&str, &str)>> = BTreeMap::new();
    for (p, c, g) in items {
        by_pred.entry(p).or_default().push((c, g));
    }
    let mut pu = 0usize;
    let mut co = 0usize;
    for pairs in by_pred.values() {
        let mut joint: HashMap<(&str, &str), usize> = HashMap::new();
        for &(c, g) in pairs {
            *joint.entry((c, g)).or_insert(0) += 1;
        }
        let mut best_c: HashMap<&str, usize> = HashMap::new();
        let mut best_g: HashMap<&str, usize> = HashMap::new();
        for (&(c, g), &n) in &joint {
            let e = best_c.entry(c).or_insert(0);
            *e = (*e).max(n);
            let e = best_g.entry(g).or_insert(0);
            *e = (*e).max(n);
        }
        pu += best_c.values().sum::<usize>();
        co += best_g.values().sum::<usize>();
    }
    let n = items.len() as f64;
    (pu as f64 / n, co as f64 / n)
}

/// A frame with the given (deprel, word, pos) features, predicate at
/// `slot`, and optional gold labels.
pub fn make_frame(id: &str, predicate: &str, voice: Voice, slot: usize, args: &[[&str; 3]], gold: Option<&[&str]>) -> Frame {
    let arguments = args
        .iter()
        .enumerate()
        .map(|(i, f)| ArgumentMention {
            head_token: if i < slot { i + 1 } else { i + 2 },
            features: [f[0].into(), f[1].into(), f[2].into()],
            gold_role: gold.map(|g| g[i].to_string()),
        })
        .collect();
    Frame::new(id, predicate, voice, slot + 1, arguments).unwrap()
}
