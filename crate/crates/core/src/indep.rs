//! Randomized balanced independent sets.
//!
//! One trial of [`run_ind`]:
//! 1. every vertex outside the last part joins `I` with probability `p`;
//! 2. a vertex `v` of the last part joins iff no edge through `v` has all of
//!    its other members in `I`;
//! 3. every part is cut down to the smallest part size, dropping the highest
//!    indices first.
//!
//! Step 2 makes `I` independent, step 3 makes it balanced.

use log::warn;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::KPartiteHypergraph;
use crate::models::find_balanced_is;
use crate::rng::Seed;
use crate::sets::BalancedSet;

pub const MAX_TRIALS: usize = 100_000;

/// Parameter ledger for the lower-bound procedure. `log` is natural.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndParams {
    pub epsilon: f64,
    pub k: usize,
    pub avg_degree: f64,
    pub n: usize,
    /// Inclusion probability for parts `1..k-1`.
    pub p: f64,
    pub delta: f64,
    /// Per-part size the asymptotic statement guarantees.
    pub target: f64,
}

impl IndParams {
    pub fn new(k: usize, epsilon: f64, avg_degree: f64, n: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::Argument(format!("k={k} must be at least 2")));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Argument(format!("epsilon={epsilon} outside (0, 1)")));
        }
        if avg_degree < 2.0 {
            return Err(Error::Regime(format!(
                "average degree D={avg_degree} below 2; the inclusion probability formula needs log D > 0"
            )));
        }
        let exponent = 1.0 / (k as f64 - 1.0);
        let ratio = avg_degree.ln() / avg_degree / (k as f64 - 1.0);
        let p = ((1.0 - epsilon / 4.0) * ratio).powf(exponent);
        let delta = avg_degree.powf(-(1.0 - epsilon / 8.0) * exponent);
        let target = ((1.0 - epsilon) * ratio).powf(exponent) * n as f64;
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Regime(format!(
                "inclusion probability p={p} outside (0, 1) for D={avg_degree}"
            )));
        }
        Ok(Self {
            epsilon,
            k,
            avg_degree,
            n,
            p,
            delta,
            target,
        })
    }

    /// Ledger for an n-balanced host, `D = |E| / n`.
    pub fn for_hypergraph(host: &KPartiteHypergraph, epsilon: f64) -> Result<Self> {
        let n = host.require_balanced()?;
        Self::new(host.k(), epsilon, host.num_edges() as f64 / n as f64, n)
    }

    /// Like [`IndParams::for_hypergraph`], but hosts too sparse for the
    /// formula (`D < 2` or `p >= 1`) get `p = 1`: every vertex of the first
    /// parts is taken and step 2 repairs the last part.
    pub fn for_hypergraph_clamped(host: &KPartiteHypergraph, epsilon: f64) -> Result<Self> {
        match Self::for_hypergraph(host, epsilon) {
            Err(Error::Regime(msg)) => {
                warn!("{msg}; using inclusion probability 1");
                let n = host.require_balanced()?;
                Ok(Self {
                    epsilon,
                    k: host.k(),
                    avg_degree: host.num_edges() as f64 / n as f64,
                    n,
                    p: 1.0,
                    delta: 1.0,
                    target: n as f64,
                })
            }
            other => other,
        }
    }

    /// `ceil(8 / delta)` clamped to `1..=MAX_TRIALS`.
    pub fn default_trials(&self) -> usize {
        let t = (8.0 / self.delta).ceil();
        if t.is_finite() {
            (t as usize).clamp(1, MAX_TRIALS)
        } else {
            MAX_TRIALS
        }
    }

    /// Whether `target / n <= delta / 2`, the comparison the success
    /// probability argument needs. Usually false at small `D`.
    pub fn target_supported(&self) -> bool {
        self.target / self.n as f64 <= self.delta / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndOutcome {
    /// `I` before balancing, per part, increasing.
    pub raw: Vec<Vec<u32>>,
    /// `I'`, the truncation of `I` to the minimum part size.
    pub balanced: BalancedSet,
    pub seed: Seed,
}

impl IndOutcome {
    pub fn raw_sizes(&self) -> Vec<usize> {
        self.raw.iter().map(Vec::len).collect()
    }

    pub fn side(&self) -> usize {
        self.balanced.side()
    }
}

/// Steps 1 and 2: the raw set `I`.
pub fn raw_independent_set(host: &KPartiteHypergraph, p: f64, seed: Seed) -> Result<Vec<Vec<u32>>> {
    let n = host.require_balanced()?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Argument(format!("p={p} outside [0, 1]")));
    }
    let k = host.k();
    let last = k - 1;
    let mut rng = seed.rng();
    let mut inside: Vec<Vec<bool>> = vec![vec![false; n]; last];
    for row in inside.iter_mut() {
        for slot in row.iter_mut() {
            *slot = rng.random::<f64>() < p;
        }
    }
    let mut raw: Vec<Vec<u32>> = inside
        .iter()
        .map(|row| (0..n as u32).filter(|&v| row[v as usize]).collect())
        .collect();
    let tail: Vec<u32> = (0..n as u32)
        .filter(|&v| {
            host.incident(last, v).iter().all(|&id| {
                let e = host.edge(id as usize);
                !(0..last).all(|part| inside[part][e[part] as usize])
            })
        })
        .collect();
    raw.push(tail);
    Ok(raw)
}

/// One full trial: steps 1-3.
pub fn run_ind(host: &KPartiteHypergraph, p: f64, seed: Seed) -> Result<IndOutcome> {
    let raw = raw_independent_set(host, p, seed)?;
    let side = raw.iter().map(Vec::len).min().unwrap_or(0);
    let balanced = BalancedSet::new(raw.iter().map(|xs| xs[..side].to_vec()).collect())?;
    Ok(IndOutcome {
        raw,
        balanced,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestOfTrials {
    pub best: IndOutcome,
    pub best_trial: usize,
    /// Raw part sizes `|I ∩ V_j|` of every trial, in trial order.
    pub trial_sizes: Vec<Vec<usize>>,
}

impl BestOfTrials {
    pub fn sides(&self) -> Vec<usize> {
        self.trial_sizes
            .iter()
            .map(|s| *s.iter().min().unwrap_or(&0))
            .collect()
    }
}

/// Runs `trials` independent streams `Seed::new(seed, t)` and keeps the
/// largest `I'` (ties go to the lowest trial index). Trials run in parallel;
/// selection depends only on trial index.
pub fn best_of_trials(
    host: &KPartiteHypergraph,
    params: &IndParams,
    trials: usize,
    seed: u64,
) -> Result<BestOfTrials> {
    if trials == 0 {
        return Err(Error::Argument("trial count must be at least 1".into()));
    }
    if !params.target_supported() {
        warn!(
            "target side {:.3} is not below delta/2 = {:.3e} of n at D={}; reporting the best outcome anyway",
            params.target,
            params.delta / 2.0,
            params.avg_degree
        );
    }
    let trial_sizes: Vec<Vec<usize>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            raw_independent_set(host, params.p, Seed::new(seed, t as u64))
                .map(|raw| raw.iter().map(Vec::len).collect())
        })
        .collect::<Result<_>>()?;
    let best_trial = trial_sizes
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| {
            let sa = a.iter().min().unwrap_or(&0);
            let sb = b.iter().min().unwrap_or(&0);
            sa.cmp(sb).then(ib.cmp(ia))
        })
        .map(|(i, _)| i)
        .unwrap_or(0);
    let best = run_ind(host, params.p, Seed::new(seed, best_trial as u64))?;
    Ok(BestOfTrials {
        best,
        best_trial,
        trial_sizes,
    })
}

/// Exact `α_b`: the largest side admitting a balanced independent set, with
/// a witness. Sides are tried upward; existence is monotone in the side.
pub fn exact_alpha_b(host: &KPartiteHypergraph, budget: u128) -> Result<(usize, BalancedSet)> {
    let mut best = BalancedSet::empty(host.k());
    let max_side = host.part_sizes().iter().copied().min().unwrap_or(0);
    let mut spent: u128 = 0;
    for s in 1..=max_side {
        let left = budget.saturating_sub(spent);
        let cost = crate::models::enumeration_size(host, s);
        if cost > left {
            return Err(Error::TooLarge {
                needed: spent.saturating_add(cost),
                budget,
            });
        }
        spent += cost;
        match find_balanced_is(host, s, left)? {
            Some(w) => best = w,
            None => break,
        }
    }
    Ok((best.side(), best))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::is_balanced_independent;

    fn h(k: usize, n: usize, edges: &[&[u32]]) -> KPartiteHypergraph {
        KPartiteHypergraph::balanced(k, n, edges.iter().map(|e| e.to_vec()).collect()).unwrap()
    }

    #[test]
    fn ledger_k2() {
        let p = IndParams::new(2, 0.2, 100.0, 1000).unwrap();
        assert!((p.p - 0.95 * 100f64.ln() / 100.0).abs() < 1e-15);
        assert!((p.p - 0.043749).abs() < 1e-6);
        assert!((p.delta - 100f64.powf(-0.975)).abs() < 1e-15);
        assert!((p.delta - 0.011220).abs() < 1e-6);
        assert!((p.target - 0.8 * 100f64.ln() / 100.0 * 1000.0).abs() < 1e-9);
    }

    #[test]
    fn ledger_k3() {
        let p = IndParams::new(3, 0.3, 1000.0, 10).unwrap();
        assert!((p.p - (0.925 * 1000f64.ln() / 2000.0).sqrt()).abs() < 1e-15);
        assert!((p.p - 0.0565229).abs() < 1e-7);
    }

    #[test]
    fn ledger_rejects_degenerate() {
        assert!(IndParams::new(2, 0.2, 2.0, 10).is_ok());
        assert!(matches!(
            IndParams::new(2, 0.2, 1.0, 10),
            Err(Error::Regime(_))
        ));
        assert!(IndParams::new(2, 0.0, 100.0, 10).is_err());
    }

    #[test]
    fn default_trials_clamped() {
        let p = IndParams::new(2, 0.2, 100.0, 1000).unwrap();
        assert_eq!(p.default_trials(), (8.0 / p.delta).ceil() as usize);
        let huge = IndParams::new(2, 0.2, 1e9, 1000).unwrap();
        assert_eq!(huge.default_trials(), MAX_TRIALS);
    }

    #[test]
    fn edgeless_takes_everything() {
        let g = h(3, 4, &[]);
        let out = run_ind(&g, 1.0, Seed::new(0, 0)).unwrap();
        assert_eq!(out.raw_sizes(), vec![4, 4, 4]);
        assert_eq!(out.balanced, BalancedSet::full(3, 4));
    }

    #[test]
    fn complete_forces_empty_last_part() {
        let g = KPartiteHypergraph::complete(3, 3).unwrap();
        let out = run_ind(&g, 1.0, Seed::new(0, 0)).unwrap();
        assert_eq!(out.raw_sizes(), vec![3, 3, 0]);
        assert!(out.balanced.is_empty());
    }

    #[test]
    fn truncation_drops_highest_indices() {
        // Vertex 0 of the last part sits on an edge with the full first part.
        let g = h(2, 3, &[&[0, 0]]);
        let out = run_ind(&g, 1.0, Seed::new(0, 0)).unwrap();
        assert_eq!(out.raw, vec![vec![0, 1, 2], vec![1, 2]]);
        assert_eq!(out.balanced.parts(), &[vec![0, 1], vec![1, 2]]);
    }

    #[test]
    fn rejects_unbalanced_host() {
        let g = KPartiteHypergraph::new(vec![2, 3], vec![]).unwrap();
        assert!(matches!(
            run_ind(&g, 0.5, Seed::new(0, 0)),
            Err(Error::NotBalanced(_))
        ));
    }

    #[test]
    fn best_of_one_is_run_ind() {
        let g = crate::models::sample_hknp(2, 20, 0.2, Seed::new(9, 0)).unwrap();
        let params = IndParams::for_hypergraph(&g, 0.2).unwrap();
        let best = best_of_trials(&g, &params, 1, 77).unwrap();
        assert_eq!(best.best, run_ind(&g, params.p, Seed::new(77, 0)).unwrap());
        assert_eq!(best.best_trial, 0);
        assert!(is_balanced_independent(&g, &best.best.balanced).unwrap());
    }

    #[test]
    fn best_of_trials_picks_first_maximum() {
        let g = crate::models::sample_hknp(2, 16, 0.3, Seed::new(2, 0)).unwrap();
        let params = IndParams::for_hypergraph(&g, 0.2).unwrap();
        let best = best_of_trials(&g, &params, 50, 5).unwrap();
        let sides = best.sides();
        let max = *sides.iter().max().unwrap();
        assert_eq!(
            best.best_trial,
            sides.iter().position(|&s| s == max).unwrap()
        );
        assert_eq!(best.best.side(), max);
        assert!(best_of_trials(&g, &params, 0, 5).is_err());
    }

    #[test]
    fn exact_alpha_examples() {
        assert_eq!(exact_alpha_b(&h(2, 3, &[]), 1000).unwrap().0, 3);
        assert_eq!(
            exact_alpha_b(&KPartiteHypergraph::complete(3, 3).unwrap(), 1000)
                .unwrap()
                .0,
            0
        );
        let (s, w) = exact_alpha_b(&h(2, 2, &[&[0, 0]]), 1000).unwrap();
        assert_eq!(s, 1);
        assert_eq!(w.parts(), &[vec![0], vec![1]]);
        assert!(matches!(
            exact_alpha_b(&h(3, 9, &[]), 100),
            Err(Error::TooLarge { .. })
        ));
    }
}
