//! Perfect matchings in the k-partite complement, and the balanced colorings
//! they induce.
//!
//! A perfect matching of `H^c` is a partition of `V(H)` into transversals
//! that are not edges of `H`. Giving each transversal one color yields a
//! balanced coloring; choosing each color greedily against the `≤ kΔ` edges
//! touching the transversal keeps it proper with at most `kΔ + 1` colors.

use std::collections::HashMap;

use log::warn;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::KPartiteHypergraph;
use crate::rng::{below, shuffle, Seed};
use crate::sets::PartialColoring;

/// Pairwise disjoint transversals of a host hypergraph's complement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    pub tuples: Vec<Vec<u32>>,
    pub perfect: bool,
}

/// Default restart budget for [`find_pm_complement`].
pub const DEFAULT_RESTARTS: u64 = 10_000;

/// Default node budget for [`exact_pm_complement`].
pub const DEFAULT_EXACT_NODES: u64 = 50_000_000;

const REPAIR_TRIES: usize = 8;

/// Checks disjointness, that no tuple is an edge of `host`, and coverage
/// when the matching claims to be perfect.
pub fn check_complement_matching(host: &KPartiteHypergraph, m: &Matching) -> Result<()> {
    let k = host.k();
    let mut used: Vec<Vec<bool>> = host.part_sizes().iter().map(|&s| vec![false; s]).collect();
    for (i, t) in m.tuples.iter().enumerate() {
        if t.len() != k {
            return Err(Error::BadMatching(format!(
                "tuple {i} has {} members, expected {k}",
                t.len()
            )));
        }
        for (part, &x) in t.iter().enumerate() {
            if x as usize >= host.part_size(part) {
                return Err(Error::BadMatching(format!(
                    "tuple {i} member {x} out of range in part {part}"
                )));
            }
            if std::mem::replace(&mut used[part][x as usize], true) {
                return Err(Error::BadMatching(format!(
                    "vertex ({part}, {x}) covered twice"
                )));
            }
        }
        if host.contains_edge(t) {
            return Err(Error::BadMatching(format!(
                "tuple {i} {t:?} is an edge of the host"
            )));
        }
    }
    if m.perfect {
        if let Some((part, row)) = used.iter().enumerate().find(|(_, r)| r.iter().any(|&b| !b)) {
            let v = row.iter().position(|&b| !b).unwrap();
            return Err(Error::BadMatching(format!(
                "vertex ({part}, {v}) uncovered"
            )));
        }
    }
    Ok(())
}

struct OutOfNodes;

/// Depth-first search for a perfect matching of the complement restricted to
/// `pool` (equal-size vertex lists, one per part).
struct Backtracker<'a> {
    host: &'a KPartiteHypergraph,
    pool: Vec<Vec<u32>>,
    used: Vec<Vec<bool>>,
    nodes: u64,
    limit: u64,
}

impl<'a> Backtracker<'a> {
    fn new(host: &'a KPartiteHypergraph, pool: Vec<Vec<u32>>, limit: u64) -> Self {
        let used = host.part_sizes().iter().map(|&s| vec![false; s]).collect();
        Self {
            host,
            pool,
            used,
            nodes: 0,
            limit,
        }
    }

    fn solve(&mut self) -> std::result::Result<Option<Vec<Vec<u32>>>, OutOfNodes> {
        let rows = self.pool[0].clone();
        let mut out = Vec::with_capacity(rows.len());
        Ok(self.rows(&rows, &mut out)?.then_some(out))
    }

    fn rows(
        &mut self,
        rows: &[u32],
        out: &mut Vec<Vec<u32>>,
    ) -> std::result::Result<bool, OutOfNodes> {
        let Some((&u, rest)) = rows.split_first() else {
            return Ok(true);
        };
        let mut tuple = vec![u];
        self.extend(&mut tuple, rest, out)
    }

    fn extend(
        &mut self,
        tuple: &mut Vec<u32>,
        rest: &[u32],
        out: &mut Vec<Vec<u32>>,
    ) -> std::result::Result<bool, OutOfNodes> {
        let part = tuple.len();
        if part == self.host.k() {
            self.nodes += 1;
            if self.nodes > self.limit {
                return Err(OutOfNodes);
            }
            if self.host.contains_edge(tuple) {
                return Ok(false);
            }
            for (p, &x) in tuple.iter().enumerate().skip(1) {
                self.used[p][x as usize] = true;
            }
            out.push(tuple.clone());
            if self.rows(rest, out)? {
                return Ok(true);
            }
            out.pop();
            for (p, &x) in tuple.iter().enumerate().skip(1) {
                self.used[p][x as usize] = false;
            }
            return Ok(false);
        }
        for i in 0..self.pool[part].len() {
            let x = self.pool[part][i];
            if self.used[part][x as usize] {
                continue;
            }
            tuple.push(x);
            let found = self.extend(tuple, rest, out)?;
            tuple.pop();
            if found {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Exhaustive backtracking: a perfect matching of `H^c` iff one exists.
/// Explores at most `node_budget` complete transversals.
pub fn exact_pm_complement(
    host: &KPartiteHypergraph,
    node_budget: u64,
) -> Result<Option<Matching>> {
    let n = host.require_balanced()?;
    let pool = vec![(0..n as u32).collect(); host.k()];
    match Backtracker::new(host, pool, node_budget).solve() {
        Ok(found) => Ok(found.map(|tuples| Matching {
            tuples,
            perfect: true,
        })),
        Err(OutOfNodes) => Err(Error::TooLarge {
            needed: node_budget as u128 + 1,
            budget: node_budget as u128,
        }),
    }
}

/// Uncovered vertices per part with O(1) removal.
struct FreeLists {
    lists: Vec<Vec<u32>>,
    pos: Vec<Vec<usize>>,
}

const ABSENT: usize = usize::MAX;

impl FreeLists {
    fn full(k: usize, n: usize) -> Self {
        Self {
            lists: vec![(0..n as u32).collect(); k],
            pos: vec![(0..n).collect(); k],
        }
    }

    fn is_free(&self, part: usize, v: u32) -> bool {
        self.pos[part][v as usize] != ABSENT
    }

    fn remove(&mut self, part: usize, v: u32) {
        let i = std::mem::replace(&mut self.pos[part][v as usize], ABSENT);
        let list = &mut self.lists[part];
        list.swap_remove(i);
        if let Some(&moved) = list.get(i) {
            self.pos[part][moved as usize] = i;
        }
    }
}

/// Number of completions of a partial transversal over `remaining` parts
/// when each has `free` uncovered vertices, saturating.
fn completions(free: usize, remaining: usize) -> u128 {
    (0..remaining).fold(1u128, |acc, _| acc.saturating_mul(free as u128))
}

/// Greedily extends row vertex `u` into a complement transversal over the
/// uncovered vertices, choosing each member uniformly among those that keep
/// a non-edge completion available.
fn greedy_tuple(
    host: &KPartiteHypergraph,
    free: &FreeLists,
    u: u32,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<u32>> {
    let k = host.k();
    let r = free.lists[0].len();
    let edges = host.incident(0, u);
    if (edges.len() as u128) >= completions(r, k - 1) {
        // Cheap pre-check: count only edges that still lie on free vertices.
        let live = edges
            .iter()
            .filter(|&&id| {
                let e = host.edge(id as usize);
                (1..k).all(|p| free.is_free(p, e[p]))
            })
            .count();
        if live as u128 >= completions(r, k - 1) {
            return None;
        }
    }
    let mut tuple = vec![u];
    for part in 1..k {
        let capacity = completions(r, k - 1 - part);
        let mut tally: HashMap<u32, u128> = HashMap::new();
        for &id in edges {
            let e = host.edge(id as usize);
            if e[1..part] != tuple[1..part] {
                continue;
            }
            if (part..k).all(|p| free.is_free(p, e[p])) {
                *tally.entry(e[part]).or_default() += 1;
            }
        }
        let ok = |x: &u32| tally.get(x).copied().unwrap_or(0) < capacity;
        let list = &free.lists[part];
        let mut pick = None;
        for _ in 0..16 {
            let x = list[below(rng, list.len())];
            if ok(&x) {
                pick = Some(x);
                break;
            }
        }
        let x = match pick {
            Some(x) => x,
            None => {
                let valid: Vec<u32> = list.iter().copied().filter(ok).collect();
                if valid.is_empty() {
                    return None;
                }
                valid[below(rng, valid.len())]
            }
        };
        tuple.push(x);
    }
    debug_assert!(!host.contains_edge(&tuple));
    Some(tuple)
}

/// Frees one or two random matched tuples and asks the bounded backtracker
/// to match everything still uncovered.
fn repair(
    host: &KPartiteHypergraph,
    free: &mut FreeLists,
    tuples: &mut Vec<Vec<u32>>,
    rng: &mut ChaCha8Rng,
) -> bool {
    let k = host.k();
    for depth in 1..=2usize {
        if tuples.len() < depth {
            break;
        }
        for _ in 0..REPAIR_TRIES {
            let mut picks: Vec<usize> = Vec::with_capacity(depth);
            while picks.len() < depth {
                let i = below(rng, tuples.len());
                if !picks.contains(&i) {
                    picks.push(i);
                }
            }
            let mut pool = free.lists.clone();
            for &i in &picks {
                for (p, &x) in tuples[i].iter().enumerate() {
                    pool[p].push(x);
                }
            }
            for list in pool.iter_mut() {
                shuffle(rng, list);
            }
            let limit = 2_000 + 64 * (pool[0].len() as u64) * k as u64;
            if let Ok(Some(found)) = Backtracker::new(host, pool, limit).solve() {
                picks.sort_unstable_by(|a, b| b.cmp(a));
                for i in picks {
                    tuples.swap_remove(i);
                }
                for t in &found {
                    for (p, &x) in t.iter().enumerate() {
                        if free.is_free(p, x) {
                            free.remove(p, x);
                        }
                    }
                }
                tuples.extend(found);
                return true;
            }
        }
    }
    false
}

fn greedy_attempt(
    host: &KPartiteHypergraph,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<Vec<u32>>> {
    let k = host.k();
    let mut free = FreeLists::full(k, n);
    let mut tuples: Vec<Vec<u32>> = Vec::with_capacity(n);
    for u in 0..n as u32 {
        if !free.is_free(0, u) {
            continue;
        }
        match greedy_tuple(host, &free, u, rng) {
            Some(t) => {
                for (p, &x) in t.iter().enumerate() {
                    free.remove(p, x);
                }
                tuples.push(t);
            }
            None => {
                if !repair(host, &mut free, &mut tuples, rng) {
                    return None;
                }
                break;
            }
        }
    }
    debug_assert!(free.lists.iter().all(Vec::is_empty));
    Some(tuples)
}

/// Randomized greedy search with local repair and restarts.
///
/// Restart `i` uses stream `Seed::new(seed, i)`; the first success wins.
/// Fails fast when some vertex lies on every transversal through it (the
/// complement then has an isolated vertex).
pub fn find_pm_complement(host: &KPartiteHypergraph, seed: u64, restarts: u64) -> Result<Matching> {
    let n = host.require_balanced()?;
    let k = host.k();
    let full_degree = completions(n, k - 1);
    for part in 0..k {
        if let Some(v) = host
            .degrees(part)
            .iter()
            .position(|&d| d as u128 == full_degree)
        {
            return Err(Error::NoPerfectMatching(format!(
                "vertex ({part}, {v}) has no non-edge transversal"
            )));
        }
    }
    let max_degree = host.max_degree();
    if 2 * max_degree > n {
        warn!(
            "max degree {max_degree} exceeds n/2 = {}; the complement may lack a perfect matching",
            n as f64 / 2.0
        );
    }
    for attempt in 0..restarts {
        let mut rng = Seed::new(seed, attempt).rng();
        if let Some(mut tuples) = greedy_attempt(host, n, &mut rng) {
            tuples.sort_unstable();
            let m = Matching {
                tuples,
                perfect: true,
            };
            debug_assert!(check_complement_matching(host, &m).is_ok());
            return Ok(m);
        }
    }
    Err(Error::BudgetExhausted(restarts))
}

/// Colors each tuple of `matching` (in order) with the smallest color that
/// leaves no monochromatic edge among the vertices colored so far.
pub fn color_from_matching(
    host: &KPartiteHypergraph,
    matching: &Matching,
) -> Result<PartialColoring> {
    if !matching.perfect {
        return Err(Error::BadMatching("matching is not perfect".into()));
    }
    check_complement_matching(host, matching)?;
    let k = host.k();
    let bound = (k * host.max_degree() + 1) as u32;
    let mut coloring = PartialColoring::uncolored(host.part_sizes(), bound);
    let mut forbidden: Vec<bool> = vec![false; bound as usize + 2];
    for t in &matching.tuples {
        let mut touched = Vec::new();
        for (part, &x) in t.iter().enumerate() {
            for &id in host.incident(part, x) {
                let e = host.edge(id as usize);
                // Members outside t must all be colored alike for e to close.
                let mut shared: Option<u32> = None;
                let mut closes = true;
                for (p, &y) in e.iter().enumerate() {
                    if y == t[p] {
                        continue;
                    }
                    match (coloring.get(p, y), shared) {
                        (None, _) => {
                            closes = false;
                            break;
                        }
                        (Some(c), None) => shared = Some(c),
                        (Some(c), Some(s)) if c != s => {
                            closes = false;
                            break;
                        }
                        _ => {}
                    }
                }
                if let (true, Some(c)) = (closes, shared) {
                    if !forbidden[c as usize] {
                        forbidden[c as usize] = true;
                        touched.push(c);
                    }
                }
            }
        }
        let color = (1..).find(|&c| !forbidden[c as usize]).unwrap();
        assert!(
            color <= bound,
            "greedy color {color} exceeds k*Delta+1 = {bound}"
        );
        for (part, &x) in t.iter().enumerate() {
            coloring.set(part, x, Some(color));
        }
        for c in touched {
            forbidden[c as usize] = false;
        }
    }
    let used = coloring
        .rows()
        .iter()
        .flatten()
        .flatten()
        .copied()
        .max()
        .unwrap_or(1);
    let mut tight = PartialColoring::uncolored(host.part_sizes(), used);
    for (part, row) in coloring.rows().iter().enumerate() {
        for (i, c) in row.iter().enumerate() {
            tight.set(part, i as u32, *c);
        }
    }
    Ok(tight)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FallbackColoring {
    pub coloring: PartialColoring,
    pub matching: Matching,
}

impl FallbackColoring {
    pub fn colors(&self) -> u32 {
        self.coloring.palette()
    }
}

/// Perfect matching of the complement, then greedy coloring along it. Uses
/// at most `kΔ(H) + 1` colors whenever the matching is found.
pub fn fallback_coloring(
    host: &KPartiteHypergraph,
    seed: u64,
    restarts: u64,
) -> Result<FallbackColoring> {
    let n = host.require_balanced()?;
    if 2 * host.max_degree() > n {
        warn!(
            "fallback coloring outside its guarantee: max degree {} > n/2 = {}",
            host.max_degree(),
            n as f64 / 2.0
        );
    }
    let matching = find_pm_complement(host, seed, restarts)?;
    let coloring = color_from_matching(host, &matching)?;
    Ok(FallbackColoring { coloring, matching })
}
