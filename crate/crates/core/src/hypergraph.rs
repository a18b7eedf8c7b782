//! k-uniform k-partite hypergraphs.
//!
//! Edges are stored positionally: slot `i` of an edge holds the index of its
//! member in part `i`, so "one vertex per part" holds by construction. Parts
//! and indices are both 0-based. Edges are kept sorted lexicographically and
//! duplicate free; per-vertex incidence lists are built once at construction.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Vertex {
    pub part: usize,
    pub index: u32,
}

impl Vertex {
    pub const fn new(part: usize, index: u32) -> Self {
        Self { part, index }
    }
}

/// A single invariant violation found by [`RawHypergraph::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    UniformityTooSmall {
        k: usize,
    },
    EmptyPart {
        part: usize,
    },
    WrongArity {
        edge: usize,
        len: usize,
        k: usize,
    },
    IndexOutOfRange {
        edge: usize,
        part: usize,
        index: u32,
        size: usize,
    },
    DuplicateEdge {
        edge: usize,
        first: usize,
    },
    NotBalanced {
        part_sizes: Vec<usize>,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UniformityTooSmall { k } => write!(f, "uniformity k={k} is below 2"),
            Violation::EmptyPart { part } => write!(f, "part {part} is empty"),
            Violation::WrongArity { edge, len, k } => {
                write!(f, "edge {edge} has {len} members, expected {k}")
            }
            Violation::IndexOutOfRange {
                edge,
                part,
                index,
                size,
            } => write!(
                f,
                "index out of range: edge {edge} slot {part} holds {index}, part size {size}"
            ),
            Violation::DuplicateEdge { edge, first } => {
                write!(f, "duplicate edge: edge {edge} repeats edge {first}")
            }
            Violation::NotBalanced { part_sizes } => {
                write!(f, "not n-balanced: part sizes {part_sizes:?}")
            }
        }
    }
}

/// Unchecked hypergraph data, as read from a file or assembled by hand.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RawHypergraph {
    pub part_sizes: Vec<usize>,
    pub edges: Vec<Vec<u32>>,
}

impl RawHypergraph {
    pub fn new(part_sizes: Vec<usize>, edges: Vec<Vec<u32>>) -> Self {
        Self { part_sizes, edges }
    }

    /// Every violated invariant, in edge order. Never aborts early.
    pub fn validate(&self) -> Vec<Violation> {
        let k = self.part_sizes.len();
        let mut out = Vec::new();
        if k < 2 {
            out.push(Violation::UniformityTooSmall { k });
        }
        for (part, &size) in self.part_sizes.iter().enumerate() {
            if size == 0 {
                out.push(Violation::EmptyPart { part });
            }
        }
        let mut seen: HashMap<&[u32], usize> = HashMap::with_capacity(self.edges.len());
        for (i, e) in self.edges.iter().enumerate() {
            if e.len() != k {
                out.push(Violation::WrongArity {
                    edge: i,
                    len: e.len(),
                    k,
                });
                continue;
            }
            let mut in_range = true;
            for (part, (&index, &size)) in e.iter().zip(&self.part_sizes).enumerate() {
                if index as usize >= size {
                    out.push(Violation::IndexOutOfRange {
                        edge: i,
                        part,
                        index,
                        size,
                    });
                    in_range = false;
                }
            }
            if in_range {
                if let Some(&first) = seen.get(e.as_slice()) {
                    out.push(Violation::DuplicateEdge { edge: i, first });
                } else {
                    seen.insert(e, i);
                }
            }
        }
        out
    }
}

/// An immutable k-partite hypergraph with cached incidence lists.
#[derive(Clone, PartialEq, Eq)]
pub struct KPartiteHypergraph {
    k: usize,
    part_sizes: Vec<usize>,
    /// Flat edge storage, `k` members per edge, lexicographically sorted.
    members: Vec<u32>,
    /// Per part: CSR offsets into `incidence[part]`, one row per vertex.
    offsets: Vec<Vec<usize>>,
    incidence: Vec<Vec<u32>>,
}

impl fmt::Debug for KPartiteHypergraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KPartiteHypergraph")
            .field("part_sizes", &self.part_sizes)
            .field("edges", &self.edges().collect::<Vec<_>>())
            .finish()
    }
}

impl KPartiteHypergraph {
    /// Validates and builds. Edge order in the input is irrelevant.
    pub fn new(part_sizes: Vec<usize>, edges: Vec<Vec<u32>>) -> Result<Self> {
        Self::try_from(RawHypergraph::new(part_sizes, edges))
    }

    pub fn balanced(k: usize, n: usize, edges: Vec<Vec<u32>>) -> Result<Self> {
        Self::new(vec![n; k], edges)
    }

    pub fn empty(k: usize, n: usize) -> Result<Self> {
        Self::balanced(k, n, Vec::new())
    }

    /// Every transversal is an edge.
    pub fn complete(k: usize, n: usize) -> Result<Self> {
        let empty = Self::empty(k, n)?;
        let mut members = Vec::new();
        for e in empty.complement_edges() {
            members.extend_from_slice(&e);
        }
        Ok(Self::from_sorted_members(vec![n; k], members))
    }

    /// Builds from flat, strictly increasing, in-range members.
    pub(crate) fn from_sorted_members(part_sizes: Vec<usize>, members: Vec<u32>) -> Self {
        let k = part_sizes.len();
        debug_assert!(k >= 2 && members.len().is_multiple_of(k));
        debug_assert!(members
            .chunks_exact(k)
            .zip(members.chunks_exact(k).skip(1))
            .all(|(a, b)| a < b));
        let m = members.len() / k;
        let mut offsets: Vec<Vec<usize>> = part_sizes.iter().map(|&s| vec![0; s + 1]).collect();
        for e in members.chunks_exact(k) {
            for (part, &v) in e.iter().enumerate() {
                offsets[part][v as usize + 1] += 1;
            }
        }
        for off in offsets.iter_mut() {
            for i in 1..off.len() {
                off[i] += off[i - 1];
            }
        }
        let mut incidence: Vec<Vec<u32>> = vec![vec![0; m]; k];
        let mut cursor: Vec<Vec<usize>> = offsets.clone();
        for (id, e) in members.chunks_exact(k).enumerate() {
            for (part, &v) in e.iter().enumerate() {
                let slot = &mut cursor[part][v as usize];
                incidence[part][*slot] = id as u32;
                *slot += 1;
            }
        }
        Self {
            k,
            part_sizes,
            members,
            offsets,
            incidence,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn part_sizes(&self) -> &[usize] {
        &self.part_sizes
    }

    pub fn part_size(&self, part: usize) -> usize {
        self.part_sizes[part]
    }

    /// Common part size when n-balanced.
    pub fn n(&self) -> Option<usize> {
        let n = self.part_sizes[0];
        self.part_sizes.iter().all(|&s| s == n).then_some(n)
    }

    pub fn require_balanced(&self) -> Result<usize> {
        self.n()
            .ok_or_else(|| Error::NotBalanced(self.part_sizes.clone()))
    }

    pub fn num_vertices(&self) -> usize {
        self.part_sizes.iter().sum()
    }

    pub fn num_edges(&self) -> usize {
        self.members.len() / self.k
    }

    pub fn is_edgeless(&self) -> bool {
        self.members.is_empty()
    }

    pub fn edge(&self, id: usize) -> &[u32] {
        &self.members[id * self.k..(id + 1) * self.k]
    }

    /// Edges in lexicographic order.
    pub fn edges(&self) -> impl ExactSizeIterator<Item = &[u32]> + '_ {
        self.members.chunks_exact(self.k)
    }

    pub fn contains_vertex(&self, v: Vertex) -> bool {
        v.part < self.k && (v.index as usize) < self.part_sizes[v.part]
    }

    /// Edge ids incident to `v`, increasing.
    pub fn incident(&self, part: usize, index: u32) -> &[u32] {
        let off = &self.offsets[part];
        &self.incidence[part][off[index as usize]..off[index as usize + 1]]
    }

    pub fn degree(&self, part: usize, index: u32) -> usize {
        let off = &self.offsets[part];
        off[index as usize + 1] - off[index as usize]
    }

    pub fn degrees(&self, part: usize) -> Vec<usize> {
        self.offsets[part].windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.k)
            .flat_map(|p| self.offsets[p].windows(2).map(|w| w[1] - w[0]))
            .max()
            .unwrap_or(0)
    }

    /// `|E| / n`; `None` unless n-balanced.
    pub fn average_degree(&self) -> Option<f64> {
        self.n().map(|n| self.num_edges() as f64 / n as f64)
    }

    pub fn degree_profile(&self) -> DegreeProfile {
        DegreeProfile {
            degrees: (0..self.k).map(|p| self.degrees(p)).collect(),
            max_degree: self.max_degree(),
            num_edges: self.num_edges(),
            n: self.n(),
        }
    }

    pub fn contains_edge(&self, tuple: &[u32]) -> bool {
        if tuple.len() != self.k {
            return false;
        }
        let m = self.num_edges();
        let (mut lo, mut hi) = (0usize, m);
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.edge(mid).cmp(tuple) {
                Ordering::Less => lo = mid + 1,
                Ordering::Greater => hi = mid,
                Ordering::Equal => return true,
            }
        }
        false
    }

    pub fn to_raw(&self) -> RawHypergraph {
        RawHypergraph {
            part_sizes: self.part_sizes.clone(),
            edges: self.edges().map(<[u32]>::to_vec).collect(),
        }
    }

    /// Re-checks the type invariants. A value built through the public
    /// constructors always comes back clean.
    pub fn validate(&self) -> Vec<Violation> {
        self.to_raw().validate()
    }

    /// `deg_H(S)`: the number of edges containing every vertex of `selection`.
    pub fn codegree(&self, selection: &[Vertex]) -> Result<usize> {
        let mut slots: Vec<Option<u32>> = vec![None; self.k];
        for &v in selection {
            if !self.contains_vertex(v) {
                return Err(Error::VertexOutOfRange {
                    part: v.part,
                    index: v.index,
                });
            }
            if slots[v.part].replace(v.index).is_some() {
                return Err(Error::RepeatedPart(v.part));
            }
        }
        let Some(pivot) = selection
            .iter()
            .min_by_key(|v| self.degree(v.part, v.index))
        else {
            return Ok(self.num_edges());
        };
        Ok(self
            .incident(pivot.part, pivot.index)
            .iter()
            .filter(|&&id| {
                let e = self.edge(id as usize);
                slots
                    .iter()
                    .zip(e)
                    .all(|(slot, &x)| slot.is_none_or(|want| want == x))
            })
            .count())
    }

    /// `δ_j(H)`: minimum codegree over all cross-part selections of size `j`.
    ///
    /// Exact: for every choice of `j` parts the edges are projected onto
    /// those parts and tallied; any selection missing from the tally has
    /// codegree 0.
    pub fn min_codegree(&self, j: usize) -> Result<usize> {
        if j == 0 || j > self.k {
            return Err(Error::Argument(format!(
                "codegree size {j} outside 1..={}",
                self.k
            )));
        }
        let mut best = usize::MAX;
        for parts in crate::combinatorics::Combinations::new(self.k, j) {
            let total: u128 = parts.iter().map(|&p| self.part_sizes[p] as u128).product();
            let mut tally: HashMap<Vec<u32>, usize> = HashMap::new();
            for e in self.edges() {
                let key: Vec<u32> = parts.iter().map(|&p| e[p]).collect();
                *tally.entry(key).or_default() += 1;
            }
            let here = if (tally.len() as u128) < total {
                0
            } else {
                tally.values().copied().min().unwrap_or(0)
            };
            best = best.min(here);
            if best == 0 {
                break;
            }
        }
        Ok(best)
    }

    /// Streams the valid transversals that are not edges, lexicographically.
    pub fn complement_edges(&self) -> ComplementEdges<'_> {
        ComplementEdges {
            host: self,
            next: Some(vec![0; self.k]),
            cursor: 0,
        }
    }

    /// Subhypergraph induced by `keep` (one sorted index list per part).
    ///
    /// New indices are positions within each list, so the remap is monotone
    /// and edge order is preserved.
    pub fn induced(&self, keep: &[Vec<u32>]) -> Result<(KPartiteHypergraph, Remap)> {
        if keep.len() != self.k {
            return Err(Error::PartCount {
                expected: self.k,
                got: keep.len(),
            });
        }
        let mut new_index: Vec<Vec<u32>> =
            self.part_sizes.iter().map(|&s| vec![u32::MAX; s]).collect();
        let mut old_of_new = Vec::with_capacity(self.k);
        for (part, list) in keep.iter().enumerate() {
            let mut sorted = list.clone();
            sorted.sort_unstable();
            sorted.dedup();
            for (new, &old) in sorted.iter().enumerate() {
                if old as usize >= self.part_sizes[part] {
                    return Err(Error::VertexOutOfRange { part, index: old });
                }
                new_index[part][old as usize] = new as u32;
            }
            old_of_new.push(sorted);
        }
        let mut members = Vec::new();
        'edges: for e in self.edges() {
            let start = members.len();
            for (part, &x) in e.iter().enumerate() {
                let y = new_index[part][x as usize];
                if y == u32::MAX {
                    members.truncate(start);
                    continue 'edges;
                }
                members.push(y);
            }
        }
        let sizes = old_of_new.iter().map(Vec::len).collect();
        Ok((
            Self::from_sorted_members(sizes, members),
            Remap { old_of_new },
        ))
    }
}

impl TryFrom<RawHypergraph> for KPartiteHypergraph {
    type Error = Error;

    fn try_from(raw: RawHypergraph) -> Result<Self> {
        let violations = raw.validate();
        if !violations.is_empty() {
            return Err(Error::Invalid(violations));
        }
        let mut edges = raw.edges;
        edges.sort_unstable();
        let members = edges.concat();
        Ok(Self::from_sorted_members(raw.part_sizes, members))
    }
}

/// Per-vertex degrees and the derived maxima.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeProfile {
    pub degrees: Vec<Vec<usize>>,
    pub max_degree: usize,
    pub num_edges: usize,
    pub n: Option<usize>,
}

impl DegreeProfile {
    /// `D = |E| / n` for n-balanced hosts.
    pub fn average_degree(&self) -> Option<f64> {
        self.n.map(|n| self.num_edges as f64 / n as f64)
    }
}

/// Maps indices of an induced subhypergraph back to the host.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Remap {
    pub old_of_new: Vec<Vec<u32>>,
}

impl Remap {
    pub fn identity(part_sizes: &[usize]) -> Self {
        Self {
            old_of_new: part_sizes
                .iter()
                .map(|&s| (0..s as u32).collect())
                .collect(),
        }
    }

    pub fn old(&self, part: usize, new: u32) -> u32 {
        self.old_of_new[part][new as usize]
    }

    pub fn compose(&self, inner: &Remap) -> Remap {
        Remap {
            old_of_new: inner
                .old_of_new
                .iter()
                .enumerate()
                .map(|(p, xs)| xs.iter().map(|&x| self.old(p, x)).collect())
                .collect(),
        }
    }
}

/// Lexicographic odometer over all transversals, skipping edges of the host
/// by walking its sorted edge list in step.
pub struct ComplementEdges<'a> {
    host: &'a KPartiteHypergraph,
    next: Option<Vec<u32>>,
    cursor: usize,
}

impl Iterator for ComplementEdges<'_> {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        loop {
            let current = self.next.take()?;
            self.next = advance(&current, self.host.part_sizes());
            let m = self.host.num_edges();
            while self.cursor < m && self.host.edge(self.cursor) < current.as_slice() {
                self.cursor += 1;
            }
            if self.cursor < m && self.host.edge(self.cursor) == current.as_slice() {
                self.cursor += 1;
                continue;
            }
            return Some(current);
        }
    }
}

fn advance(t: &[u32], sizes: &[usize]) -> Option<Vec<u32>> {
    let mut out = t.to_vec();
    for slot in (0..out.len()).rev() {
        out[slot] += 1;
        if (out[slot] as usize) < sizes[slot] {
            return Some(out);
        }
        out[slot] = 0;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(k: usize, n: usize, edges: &[&[u32]]) -> KPartiteHypergraph {
        KPartiteHypergraph::balanced(k, n, edges.iter().map(|e| e.to_vec()).collect()).unwrap()
    }

    #[test]
    fn validate_minimal_instance() {
        assert!(RawHypergraph::new(vec![2, 2], vec![vec![0, 0]])
            .validate()
            .is_empty());
    }

    #[test]
    fn validate_out_of_range() {
        let v = RawHypergraph::new(vec![2, 2], vec![vec![0, 5]]).validate();
        assert_eq!(v.len(), 1);
        assert!(v[0].to_string().contains("index out of range"));
        assert!(matches!(
            v[0],
            Violation::IndexOutOfRange {
                edge: 0,
                part: 1,
                index: 5,
                size: 2
            }
        ));
    }

    #[test]
    fn validate_duplicate() {
        let v = RawHypergraph::new(vec![2, 2], vec![vec![1, 0], vec![0, 0], vec![1, 0]]).validate();
        assert_eq!(v, vec![Violation::DuplicateEdge { edge: 2, first: 0 }]);
        assert!(v[0].to_string().contains("duplicate edge"));
    }

    #[test]
    fn validate_arity_and_k() {
        let v = RawHypergraph::new(vec![3], vec![vec![0, 1]]).validate();
        assert!(v.contains(&Violation::UniformityTooSmall { k: 1 }));
        assert!(v.contains(&Violation::WrongArity {
            edge: 0,
            len: 2,
            k: 1
        }));
        assert!(KPartiteHypergraph::new(vec![2, 2], vec![vec![0, 5]]).is_err());
    }

    #[test]
    fn constructed_graph_is_clean_and_sorted() {
        let g = h(2, 3, &[&[2, 1], &[0, 2], &[0, 1]]);
        assert!(g.validate().is_empty());
        let e: Vec<_> = g.edges().collect();
        assert_eq!(e, vec![&[0, 1][..], &[0, 2], &[2, 1]]);
        assert!(g.contains_edge(&[2, 1]));
        assert!(!g.contains_edge(&[1, 1]));
    }

    #[test]
    fn codegree_examples() {
        let c = KPartiteHypergraph::complete(2, 3).unwrap();
        assert_eq!(c.codegree(&[Vertex::new(0, 1)]).unwrap(), 3);
        let c3 = KPartiteHypergraph::complete(3, 2).unwrap();
        assert_eq!(
            c3.codegree(&[Vertex::new(0, 1), Vertex::new(2, 0)])
                .unwrap(),
            2
        );
        let one = h(2, 2, &[&[0, 0]]);
        assert_eq!(one.codegree(&[Vertex::new(1, 1)]).unwrap(), 0);
        assert_eq!(one.codegree(&[]).unwrap(), 1);
    }

    #[test]
    fn codegree_rejects_repeated_part() {
        let g = h(3, 2, &[]);
        let err = g
            .codegree(&[Vertex::new(1, 0), Vertex::new(1, 1)])
            .unwrap_err();
        assert_eq!(err, Error::RepeatedPart(1));
        assert!(g.codegree(&[Vertex::new(3, 0)]).is_err());
    }

    #[test]
    fn min_codegree_examples() {
        assert_eq!(
            KPartiteHypergraph::complete(2, 4)
                .unwrap()
                .min_codegree(1)
                .unwrap(),
            4
        );
        assert_eq!(h(3, 2, &[]).min_codegree(2).unwrap(), 0);
        assert_eq!(h(2, 2, &[&[0, 0]]).min_codegree(1).unwrap(), 0);
        assert!(h(2, 2, &[]).min_codegree(0).is_err());
        assert!(h(2, 2, &[]).min_codegree(3).is_err());
    }

    #[test]
    fn min_codegree_matches_enumeration() {
        // k=2, n=2, one edge: enumerate the four singletons directly.
        let g = h(2, 2, &[&[0, 0]]);
        let mut all = Vec::new();
        for part in 0..2 {
            for i in 0..2 {
                all.push(g.codegree(&[Vertex::new(part, i)]).unwrap());
            }
        }
        assert_eq!(all, vec![1, 0, 1, 0]);
        assert_eq!(*all.iter().min().unwrap(), g.min_codegree(1).unwrap());
    }

    #[test]
    fn complement_examples() {
        assert_eq!(h(2, 2, &[&[0, 0]]).complement_edges().count(), 3);
        assert_eq!(
            KPartiteHypergraph::complete(3, 2)
                .unwrap()
                .complement_edges()
                .count(),
            0
        );
        let all: Vec<_> = h(3, 2, &[]).complement_edges().collect();
        assert_eq!(all.len(), 8);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        let c: Vec<_> = h(2, 2, &[&[0, 1]]).complement_edges().collect();
        assert_eq!(c, vec![vec![0, 0], vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn induced_examples() {
        let g = h(2, 3, &[&[0, 0], &[1, 1], &[2, 2]]);
        let (same, remap) = g.induced(&[vec![0, 1, 2], vec![0, 1, 2]]).unwrap();
        assert_eq!(same, g);
        assert_eq!(remap, Remap::identity(&[3, 3]));
        let (none, _) = g.induced(&[vec![0, 1, 2], vec![]]).unwrap();
        assert_eq!(none.num_edges(), 0);
        let (two, remap) = g.induced(&[vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(two.num_edges(), 2);
        assert_eq!(two.part_sizes(), &[2, 2]);
        assert_eq!(remap.old(1, 1), 1);
    }

    #[test]
    fn degree_profile() {
        let g = h(2, 3, &[&[0, 0], &[0, 1], &[2, 1]]);
        let d = g.degree_profile();
        assert_eq!(d.degrees, vec![vec![2, 0, 1], vec![1, 2, 0]]);
        assert_eq!(d.max_degree, 2);
        assert_eq!(d.average_degree(), Some(1.0));
        assert_eq!(g.incident(1, 1), &[1, 2]);
    }

    #[test]
    fn unbalanced_is_representable() {
        let g = KPartiteHypergraph::new(vec![2, 3], vec![vec![1, 2]]).unwrap();
        assert_eq!(g.n(), None);
        assert!(matches!(g.require_balanced(), Err(Error::NotBalanced(_))));
        assert_eq!(g.average_degree(), None);
    }
}
