//! Two-stage balanced coloring.
//!
//! Stage one colors most of the hypergraph with `q` colors:
//! - parts `1..k-1` get independent uniform colors;
//! - each last-part vertex `v` takes a uniform color from `L(v)`, the colors
//!   `c` such that no edge through `v` has all its other members colored `c`,
//!   and stays uncolored when `L(v)` is empty;
//! - every class is cut down to a common size `n_c` per part, uncoloring
//!   vertices of the last part first and then, in the other parts, only
//!   vertices with few edges into the uncolored last-part set.
//!
//! Stage two colors the hypergraph induced by the uncolored vertices with
//! fresh colors through a perfect matching of its complement. An attempt is
//! accepted only after its runtime checks pass; otherwise the next stream is
//! tried, and after `max_retries` the whole instance is colored by the
//! matching method alone.

use log::{info, warn};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{KPartiteHypergraph, Remap};
use crate::matching::fallback_coloring;
use crate::rng::{derive_seed, Seed};
use crate::sets::{check_coloring, is_proper, ColoringVerdict, PartialColoring};

/// Parameter ledger of the coloring procedure. `log` is natural.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColParams {
    pub epsilon: f64,
    pub k: usize,
    pub max_degree: usize,
    pub n: usize,
    pub gamma: f64,
    pub q_real: f64,
    pub q: u32,
    /// Target bound on the expected fraction of last-part vertices left
    /// uncolored by the random phase.
    pub delta: f64,
    pub omega: f64,
    pub delta_tilde: f64,
    pub delta_tilde_eff: usize,
    /// Common class size per part after rebalancing, `floor((1 - 2ω) n / q)`.
    pub n_c: usize,
    /// `q + k * delta_tilde_eff`.
    pub final_budget: usize,
}

impl ColParams {
    pub fn new(k: usize, epsilon: f64, max_degree: usize, n: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::Argument(format!("k={k} must be at least 2")));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Argument(format!("epsilon={epsilon} outside (0, 1)")));
        }
        if max_degree < 3 {
            return Err(Error::Regime(format!(
                "max degree {max_degree} below 3 (need log Δ > 1)"
            )));
        }
        let kf = k as f64;
        let d = max_degree as f64;
        let log_d = d.ln();
        let gamma = epsilon / (2.0 * kf * kf);
        let base = ((kf - 1.0) * d / log_d).powf(1.0 / (kf - 1.0));
        let q_real = (1.0 + gamma / 2.0) * base;
        let q = q_real.ceil() as u32;
        let delta = (-d.powf(gamma / 50.0)).exp();
        let omega = 1.0 / (d * log_d.powf(1.0 / (2.0 * (kf - 1.0))));
        let delta_tilde = gamma / (2.0 * kf) * base;
        let delta_tilde_eff = (delta_tilde.ceil() as usize).max(1);
        if n < q as usize {
            return Err(Error::Regime(format!(
                "n={n} is smaller than the palette q={q}"
            )));
        }
        let n_c = ((1.0 - 2.0 * omega) * n as f64 / q as f64).floor() as usize;
        if delta_tilde < 1.0 {
            info!("residual degree target {delta_tilde:.4} < 1 at Δ={max_degree}; using 1");
        }
        Ok(Self {
            epsilon,
            k,
            max_degree,
            n,
            gamma,
            q_real,
            q,
            delta,
            omega,
            delta_tilde,
            delta_tilde_eff,
            n_c,
            final_budget: q as usize + k * delta_tilde_eff,
        })
    }

    /// True when the residual-degree target is below 1, i.e. far from the
    /// large-Δ regime.
    pub fn desk_scale(&self) -> bool {
        self.delta_tilde < 1.0
    }
}

/// Outcome of the rebalancing step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rebalance {
    /// `n_c` from the ledger.
    pub n_c_target: usize,
    /// `n_c` actually used, `min(n_c_target, smallest class)`.
    pub n_c: usize,
    /// Some class was smaller than the ledger's `n_c`.
    pub clamped: bool,
    /// Some class lacked enough good vertices and had to uncolor bad ones.
    pub bad_shortfall: bool,
    /// `U_k'`: the last-part vertices uncolored after the last-part cut.
    pub enlarged_failed: Vec<u32>,
    /// `bad_sets[i][c - 1] = B_i(c)` for parts `i < k - 1`.
    pub bad_sets: Vec<Vec<Vec<u32>>>,
    /// Vertices uncolored by this step, `[part][c - 1]`.
    pub uncolored: Vec<Vec<Vec<u32>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseState {
    pub q: u32,
    pub coloring: PartialColoring,
    /// `U_k`: last-part vertices whose list of available colors was empty.
    pub failed: Vec<u32>,
    pub rebalance: Option<Rebalance>,
}

impl PhaseState {
    pub fn class_sizes(&self) -> Vec<Vec<usize>> {
        self.coloring.class_sizes()
    }
}

/// `L(v)` for last-part vertex `v`: colors `c` such that no edge through `v`
/// has all of its other members colored `c`. Increasing.
pub fn available_colors(host: &KPartiteHypergraph, coloring: &PartialColoring, v: u32) -> Vec<u32> {
    let q = coloring.palette();
    let last = host.k() - 1;
    let mut blocked = vec![false; q as usize + 1];
    for &id in host.incident(last, v) {
        let e = host.edge(id as usize);
        let Some(c) = coloring.get(0, e[0]) else {
            continue;
        };
        if (1..last).all(|p| coloring.get(p, e[p]) == Some(c)) {
            blocked[c as usize] = true;
        }
    }
    (1..=q).filter(|&c| !blocked[c as usize]).collect()
}

/// The random phase: uniform colors on parts `1..k-1`, then list colors on
/// the last part. The last part draws one uniform `T_v ∈ (0, 1]` per vertex
/// and takes the `ceil(T_v |L(v)|)`-th element of `L(v)`.
pub fn col_random_phase(host: &KPartiteHypergraph, q: u32, seed: Seed) -> Result<PhaseState> {
    let n = host.require_balanced()?;
    if q == 0 {
        return Err(Error::Argument(
            "palette must have at least one color".into(),
        ));
    }
    let k = host.k();
    let last = k - 1;
    let mut rng = seed.rng();
    let mut coloring = PartialColoring::uncolored(host.part_sizes(), q);
    for part in 0..last {
        for v in 0..n as u32 {
            let c = 1 + rng.random_range(0..q as u64) as u32;
            coloring.set(part, v, Some(c));
        }
    }
    let mut failed = Vec::new();
    for v in 0..n as u32 {
        let t: f64 = 1.0 - rng.random::<f64>();
        let list = available_colors(host, &coloring, v);
        if list.is_empty() {
            failed.push(v);
            continue;
        }
        let rank = ((t * list.len() as f64).ceil() as usize).clamp(1, list.len());
        coloring.set(last, v, Some(list[rank - 1]));
    }
    assert!(
        is_proper(host, &coloring),
        "random phase produced a monochromatic edge"
    );
    Ok(PhaseState {
        q,
        coloring,
        failed,
        rebalance: None,
    })
}

/// Number of edges at `(part, u)` that meet the uncolored last-part set.
fn edges_into(host: &KPartiteHypergraph, part: usize, u: u32, in_failed: &[bool]) -> usize {
    let last = host.k() - 1;
    host.incident(part, u)
        .iter()
        .filter(|&&id| in_failed[host.edge(id as usize)[last] as usize])
        .count()
}

/// Cuts every class down to a common per-part size.
///
/// Last part: the lowest-index members of each class are uncolored. Other
/// parts: members with fewer than `delta_tilde_eff` edges into the
/// uncolored last-part set ("good" vertices) are uncolored first, lowest
/// index first; bad ones are used only when good ones run out, which sets
/// `bad_shortfall`.
pub fn rebalance(host: &KPartiteHypergraph, state: &PhaseState, params: &ColParams) -> PhaseState {
    let k = host.k();
    let last = k - 1;
    let q = state.q;
    let sizes = state.class_sizes();
    let smallest = sizes.iter().flatten().copied().min().unwrap_or(0);
    let n_c = params.n_c.min(smallest);
    let clamped = n_c < params.n_c;

    let mut coloring = state.coloring.clone();
    let mut uncolored: Vec<Vec<Vec<u32>>> = vec![vec![Vec::new(); q as usize]; k];
    for c in 1..=q {
        let class = coloring.class(last, c);
        let drop = class.len() - n_c;
        for &v in &class[..drop] {
            coloring.set(last, v, None);
        }
        uncolored[last][c as usize - 1] = class[..drop].to_vec();
    }
    let enlarged_failed = coloring.uncolored_in(last);
    let mut in_failed = vec![false; host.part_size(last)];
    for &v in &enlarged_failed {
        in_failed[v as usize] = true;
    }

    let mut bad_shortfall = false;
    let mut bad_sets = vec![vec![Vec::new(); q as usize]; last];
    for part in 0..last {
        for c in 1..=q {
            let class = coloring.class(part, c);
            let need = class.len() - n_c;
            let (bad, good): (Vec<u32>, Vec<u32>) = class
                .iter()
                .partition(|&&u| edges_into(host, part, u, &in_failed) >= params.delta_tilde_eff);
            let mut chosen: Vec<u32> = good.iter().copied().take(need).collect();
            if chosen.len() < need {
                bad_shortfall = true;
                chosen.extend(bad.iter().copied().take(need - chosen.len()));
                chosen.sort_unstable();
            }
            for &u in &chosen {
                coloring.set(part, u, None);
            }
            uncolored[part][c as usize - 1] = chosen;
            bad_sets[part][c as usize - 1] = bad;
        }
    }
    PhaseState {
        q,
        coloring,
        failed: state.failed.clone(),
        rebalance: Some(Rebalance {
            n_c_target: params.n_c,
            n_c,
            clamped,
            bad_shortfall,
            enlarged_failed,
            bad_sets,
            uncolored,
        }),
    }
}

/// The hypergraph induced by the uncolored vertices.
pub fn residual(
    host: &KPartiteHypergraph,
    state: &PhaseState,
) -> Result<(KPartiteHypergraph, Remap)> {
    let keep: Vec<Vec<u32>> = (0..host.k())
        .map(|p| state.coloring.uncolored_in(p))
        .collect();
    host.induced(&keep)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColoringPath {
    Main,
    Fallback,
}

/// What happened in one random-phase attempt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub attempt: usize,
    /// `|U_k|` after the random phase.
    pub failed: usize,
    /// `|U_k| >= 2δn`.
    pub failed_large: bool,
    pub clamped: bool,
    pub bad_shortfall: bool,
    pub n_c: usize,
    /// Uncolored vertices per part after rebalancing.
    pub residual_n: usize,
    pub residual_max_degree: usize,
    pub accepted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColoringOptions {
    pub seed: u64,
    pub max_retries: usize,
    pub matching_restarts: u64,
}

impl Default for ColoringOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            max_retries: 50,
            matching_restarts: 1_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColoringReport {
    pub coloring: PartialColoring,
    pub path: ColoringPath,
    pub params: Option<ColParams>,
    /// Colors in the final palette.
    pub palette: u32,
    pub retries_used: usize,
    pub attempts: Vec<AttemptRecord>,
    pub verdict: ColoringVerdict,
    /// Class size per color (equal across parts).
    pub per_class_sizes: Vec<usize>,
    pub notes: Vec<String>,
}

fn report(
    host: &KPartiteHypergraph,
    coloring: PartialColoring,
    path: ColoringPath,
    params: Option<ColParams>,
    attempts: Vec<AttemptRecord>,
    notes: Vec<String>,
) -> ColoringReport {
    let verdict = check_coloring(host, &coloring);
    assert!(
        verdict.passes(true),
        "final coloring failed validation: {verdict:?}"
    );
    let per_class_sizes = coloring.class_sizes()[0].clone();
    ColoringReport {
        palette: coloring.palette(),
        retries_used: attempts.len(),
        coloring,
        path,
        params,
        attempts,
        verdict,
        per_class_sizes,
        notes,
    }
}

const RESIDUAL_TAG: u64 = 0x7265_7369_6475_616c;
const ESCAPE_TAG: u64 = 0x6573_6361_7065_0000;

/// Runs the two-stage procedure and falls back to the matching coloring of
/// the whole instance when no attempt is accepted.
///
/// An attempt is accepted when no class had to be clamped, the residual
/// hypergraph has max degree at most `delta_tilde_eff` and at most half its
/// part size, and the residual matching search succeeds.
pub fn full_coloring(
    host: &KPartiteHypergraph,
    epsilon: f64,
    opts: ColoringOptions,
) -> Result<ColoringReport> {
    let n = host.require_balanced()?;
    let k = host.k();
    let max_degree = host.max_degree();
    let mut notes = Vec::new();
    let mut attempts = Vec::new();

    if max_degree == 0 {
        let coloring = PartialColoring::from_colors(1, vec![vec![Some(1); n]; k])?;
        notes.push("edgeless: one color class".into());
        return Ok(report(
            host,
            coloring,
            ColoringPath::Main,
            None,
            attempts,
            notes,
        ));
    }

    let params = match ColParams::new(k, epsilon, max_degree, n) {
        Ok(p) => Some(p),
        Err(e @ Error::Regime(_)) => {
            notes.push(format!("random phase skipped: {e}"));
            None
        }
        Err(e) => return Err(e),
    };

    if let Some(params) = params {
        let q = params.q;
        for attempt in 0..opts.max_retries {
            let state = col_random_phase(host, q, Seed::new(opts.seed, attempt as u64))?;
            let failed = state.failed.len();
            let state = rebalance(host, &state, &params);
            let info = state.rebalance.as_ref().expect("rebalanced");
            let (res, remap) = residual(host, &state)?;
            let residual_n = res.part_size(0);
            debug_assert_eq!(residual_n, n - q as usize * info.n_c);
            let res_degree = res.max_degree();
            let mut record = AttemptRecord {
                attempt,
                failed,
                failed_large: failed as f64 >= 2.0 * params.delta * n as f64,
                clamped: info.clamped,
                bad_shortfall: info.bad_shortfall,
                n_c: info.n_c,
                residual_n,
                residual_max_degree: res_degree,
                accepted: false,
            };
            let fits = !info.clamped
                && res_degree <= params.delta_tilde_eff
                && 2 * res_degree <= residual_n;
            if !fits {
                attempts.push(record);
                continue;
            }
            let mut merged = state.coloring.clone();
            if residual_n > 0 {
                let seed = derive_seed(opts.seed, RESIDUAL_TAG ^ attempt as u64);
                let completion = match fallback_coloring(&res, seed, opts.matching_restarts) {
                    Ok(c) => c,
                    Err(e) => {
                        warn!("attempt {attempt}: residual completion failed: {e}");
                        attempts.push(record);
                        continue;
                    }
                };
                let extra = completion.colors();
                assert!(
                    extra as usize <= k * res_degree + 1,
                    "residual used {extra} colors, above kΔ+1 = {}",
                    k * res_degree + 1
                );
                merged.grow_palette(q + extra);
                for (part, row) in completion.coloring.rows().iter().enumerate() {
                    for (i, c) in row.iter().enumerate() {
                        let c = c.expect("completion is total");
                        merged.set(part, remap.old(part, i as u32), Some(q + c));
                    }
                }
            }
            record.accepted = true;
            attempts.push(record);
            assert!(
                merged.palette() as usize <= q as usize + k * res_degree + 1,
                "main path palette above q + kΔ(H_φ) + 1"
            );
            return Ok(report(
                host,
                merged,
                ColoringPath::Main,
                Some(params),
                attempts,
                notes,
            ));
        }
        notes.push(format!(
            "no attempt accepted in {} retries",
            opts.max_retries
        ));
    }

    let escape = fallback_coloring(
        host,
        derive_seed(opts.seed, ESCAPE_TAG),
        opts.matching_restarts,
    )?;
    assert!(
        escape.colors() as usize <= k * max_degree + 1,
        "fallback used {} colors, above kΔ+1",
        escape.colors()
    );
    Ok(report(
        host,
        escape.coloring,
        ColoringPath::Fallback,
        params,
        attempts,
        notes,
    ))
}
