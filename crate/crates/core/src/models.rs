//! Random k-partite hypergraphs and the upper-bound construction.
//!
//! [`sample_hknp`] draws from `H(k, N, p)`: every one of the `N^k`
//! transversals is an edge independently with probability `p`.
//! [`trim_top_degree`] then deletes the highest-degree vertices of each part,
//! and [`union_bound_bis`] evaluates the first-moment bound on the existence
//! of a balanced independent set of a given side.

use std::collections::HashSet;

use log::warn;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, ln_binomial, Combinations};
use crate::error::{Error, Result};
use crate::hypergraph::{KPartiteHypergraph, Remap};
use crate::rng::Seed;
use crate::sets::{membership, BalancedSet};

/// Largest `N^k` sampled edge by edge; above it the edge count is drawn first.
pub const PER_EDGE_LIMIT: u64 = 10_000_000;

/// Default cap on enumerated candidate sets for the brute-force oracles.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 50_000_000;

/// The parameter ledger of the upper-bound construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpperBoundParams {
    pub epsilon: f64,
    pub k: usize,
    pub max_degree: f64,
    pub n: usize,
    pub gamma: f64,
    /// `n / (1 - gamma)`, real valued.
    pub big_n: f64,
    pub p: f64,
    /// Per-part side of the excluded balanced independent set, real valued.
    pub s: f64,
}

impl UpperBoundParams {
    pub fn new(epsilon: f64, k: usize, max_degree: f64, n: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::Argument(format!("k={k} must be at least 2")));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Argument(format!("epsilon={epsilon} outside (0, 1)")));
        }
        if max_degree <= 1.0 || n == 0 {
            return Err(Error::Argument("need max degree > 1 and n >= 1".into()));
        }
        let kf = k as f64;
        let gamma = epsilon / (2.0 * kf * kf);
        let big_n = n as f64 / (1.0 - gamma);
        let p = max_degree / ((1.0 + gamma) * big_n.powi(k as i32 - 1));
        let s = ((kf + epsilon) / (kf - 1.0) * max_degree.ln() / max_degree).powf(1.0 / (kf - 1.0))
            * n as f64;
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::Regime(format!(
                "edge probability p={p} outside (0, 1]"
            )));
        }
        if s > n as f64 {
            return Err(Error::Regime(format!("side s={s} exceeds n={n}")));
        }
        Ok(Self {
            epsilon,
            k,
            max_degree,
            n,
            gamma,
            big_n,
            p,
            s,
        })
    }

    /// Vertices removed per part, `ceil(gamma * N)`.
    pub fn trim_count(&self) -> usize {
        (self.gamma * self.big_n).ceil() as usize
    }

    /// Part size to sample so that trimming leaves exactly `n`.
    pub fn sample_size(&self) -> usize {
        self.n + self.trim_count()
    }

    /// `floor(s)`.
    pub fn side(&self) -> usize {
        self.s.floor() as usize
    }
}

/// Samples `H(k, N, p)`.
///
/// Up to [`PER_EDGE_LIMIT`] transversals the sampler walks the lexicographic
/// edge order with geometric skips; above it, it draws the edge count from
/// `Binomial(N^k, p)` and then a uniform set of that many distinct
/// transversals. Both give independent inclusion.
pub fn sample_hknp(k: usize, big_n: usize, p: f64, seed: Seed) -> Result<KPartiteHypergraph> {
    if k < 2 || big_n == 0 {
        return Err(Error::Argument(format!(
            "need k >= 2 and N >= 1 (k={k}, N={big_n})"
        )));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Argument(format!("p={p} outside [0, 1]")));
    }
    let total = (big_n as u64)
        .checked_pow(k as u32)
        .filter(|&t| t <= u32::MAX as u64 * 16)
        .ok_or_else(|| Error::Argument(format!("N^k = {big_n}^{k} too large to sample")))?;
    let mut rng = seed.rng();
    let indices: Vec<u64> = if p == 0.0 {
        Vec::new()
    } else if p == 1.0 {
        (0..total).collect()
    } else if total <= PER_EDGE_LIMIT {
        let log_fail = (-p).ln_1p();
        let mut out = Vec::with_capacity((total as f64 * p * 1.1) as usize + 8);
        let mut idx: u64 = 0;
        loop {
            // Failures before the next success: Geometric(p).
            let u: f64 = 1.0 - rng.random::<f64>();
            let skip = (u.ln() / log_fail).floor();
            if skip >= (total - idx) as f64 {
                break;
            }
            idx += skip as u64;
            out.push(idx);
            idx += 1;
            if idx >= total {
                break;
            }
        }
        out
    } else {
        let m = Binomial::new(total, p)
            .map_err(|e| Error::Argument(e.to_string()))?
            .sample(&mut rng);
        // Floyd's algorithm for a uniform m-subset of 0..total.
        let mut chosen: HashSet<u64> = HashSet::with_capacity(m as usize);
        for j in total - m..total {
            let t = rng.random_range(0..=j);
            if !chosen.insert(t) {
                chosen.insert(j);
            }
        }
        let mut v: Vec<u64> = chosen.into_iter().collect();
        v.sort_unstable();
        v
    };
    let mut members = Vec::with_capacity(indices.len() * k);
    for idx in indices {
        let start = members.len();
        members.resize(start + k, 0);
        let mut rest = idx;
        for slot in (0..k).rev() {
            members[start + slot] = (rest % big_n as u64) as u32;
            rest /= big_n as u64;
        }
    }
    Ok(KPartiteHypergraph::from_sorted_members(
        vec![big_n; k],
        members,
    ))
}

/// Removes the `t` highest-degree vertices of every part (ties: lowest index
/// removed first) and returns the induced remainder.
pub fn trim_top_degree(host: &KPartiteHypergraph, t: usize) -> Result<(KPartiteHypergraph, Remap)> {
    if let Some((part, &size)) = host.part_sizes().iter().enumerate().find(|(_, &s)| t >= s) {
        return Err(Error::Argument(format!(
            "cannot remove {t} vertices from part {part} of size {size}"
        )));
    }
    let keep: Vec<Vec<u32>> = (0..host.k())
        .map(|part| {
            let degrees = host.degrees(part);
            let mut order: Vec<u32> = (0..degrees.len() as u32).collect();
            order.sort_by(|&a, &b| {
                degrees[b as usize]
                    .cmp(&degrees[a as usize])
                    .then(a.cmp(&b))
            });
            let mut kept = order[t..].to_vec();
            kept.sort_unstable();
            kept
        })
        .collect();
    host.induced(&keep)
}

/// Natural log of `C(N, s)^k (1 - p)^(s^k)`; `-inf` when the bound is 0.
pub fn ln_union_bound_bis(k: usize, big_n: u64, s: u64, p: f64) -> Result<f64> {
    if s > big_n {
        return Err(Error::Argument(format!("s={s} exceeds N={big_n}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Argument(format!("p={p} outside [0, 1]")));
    }
    if s == 0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(k as f64 * ln_binomial(big_n, s) + (s as f64).powi(k as i32) * (-p).ln_1p())
}

/// `C(N, s)^k (1 - p)^(s^k)`, the expected number of balanced independent
/// sets of side `s` in `H(k, N, p)`. Evaluated in log space; saturates to
/// `+inf` only when the true value exceeds `f64::MAX`. Small cases are
/// computed directly so exact values stay exact.
pub fn union_bound_bis(k: usize, big_n: u64, s: u64, p: f64) -> Result<f64> {
    let ln = ln_union_bound_bis(k, big_n, s, p)?;
    let c = binomial(big_n, s);
    if c < 1u128 << 53 && s <= u32::MAX as u64 {
        let cells = (s as f64).powi(k as i32);
        let direct = (c as f64).powi(k as i32) * (1.0 - p).powf(cells);
        if direct.is_normal() {
            return Ok(direct);
        }
    }
    Ok(ln.exp())
}

/// Candidate sets the brute-force search enumerates for side `s`.
pub fn enumeration_size(host: &KPartiteHypergraph, s: usize) -> u128 {
    host.part_sizes()[..host.k() - 1]
        .iter()
        .map(|&n| binomial(n as u64, s as u64))
        .fold(1u128, |a, b| a.saturating_mul(b))
}

/// Whether a balanced independent set of side `s` exists (brute force).
pub fn exists_balanced_is(host: &KPartiteHypergraph, s: usize, budget: u128) -> Result<bool> {
    Ok(find_balanced_is(host, s, budget)?.is_some())
}

/// The first balanced independent set of side `s` in enumeration order.
///
/// Every `s`-subset of parts `1..k-1` is tried in lexicographic order. For
/// each, the last part is resolved exactly: a vertex can join iff none of its
/// edges has every other member inside the chosen subsets, and a witness
/// exists iff at least `s` vertices qualify (the lowest `s` are returned).
pub fn find_balanced_is(
    host: &KPartiteHypergraph,
    s: usize,
    budget: u128,
) -> Result<Option<BalancedSet>> {
    let k = host.k();
    if s == 0 {
        return Ok(Some(BalancedSet::empty(k)));
    }
    if host.part_sizes().iter().any(|&n| n < s) {
        return Ok(None);
    }
    let needed = enumeration_size(host, s);
    if needed > budget {
        return Err(Error::TooLarge { needed, budget });
    }
    let mut chosen: Vec<Vec<u32>> = vec![Vec::new(); k - 1];
    Ok(search_prefix(host, s, &mut chosen, 0))
}

fn search_prefix(
    host: &KPartiteHypergraph,
    s: usize,
    chosen: &mut Vec<Vec<u32>>,
    part: usize,
) -> Option<BalancedSet> {
    let k = host.k();
    if part == k - 1 {
        let inside = membership(host, chosen);
        let last = k - 1;
        let allowed: Vec<u32> = (0..host.part_size(last) as u32)
            .filter(|&v| {
                host.incident(last, v).iter().all(|&id| {
                    let e = host.edge(id as usize);
                    !(0..last).all(|p| inside[p][e[p] as usize])
                })
            })
            .take(s)
            .collect();
        if allowed.len() < s {
            return None;
        }
        let mut parts = chosen.clone();
        parts.push(allowed);
        return Some(BalancedSet::new(parts).expect("equal sides by construction"));
    }
    for combo in Combinations::new(host.part_size(part), s) {
        chosen[part] = combo.into_iter().map(|x| x as u32).collect();
        if let Some(found) = search_prefix(host, s, chosen, part + 1) {
            return Some(found);
        }
    }
    None
}

/// The full upper-bound construction: sample at part size `n + ceil(gamma N)`
/// and trim back to `n`.
pub fn upper_bound_instance(
    params: &UpperBoundParams,
    seed: Seed,
) -> Result<(KPartiteHypergraph, Remap)> {
    let sampled = sample_hknp(params.k, params.sample_size(), params.p, seed)?;
    let (trimmed, remap) = trim_top_degree(&sampled, params.trim_count())?;
    if trimmed.max_degree() as f64 > params.max_degree {
        warn!(
            "trimmed instance has max degree {} above the target {}",
            trimmed.max_degree(),
            params.max_degree
        );
    }
    Ok((trimmed, remap))
}
