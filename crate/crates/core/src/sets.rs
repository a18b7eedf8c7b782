//! Balanced vertex sets, partial colorings, and their validators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::KPartiteHypergraph;

/// Per-part index sets of equal size. Indices are sorted and unique.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalancedSet {
    parts: Vec<Vec<u32>>,
}

impl BalancedSet {
    pub fn new(mut parts: Vec<Vec<u32>>) -> Result<Self> {
        for p in parts.iter_mut() {
            p.sort_unstable();
            let before = p.len();
            p.dedup();
            if p.len() != before {
                return Err(Error::Argument("balanced set repeats a vertex".into()));
            }
        }
        let sizes: Vec<usize> = parts.iter().map(Vec::len).collect();
        if sizes.windows(2).any(|w| w[0] != w[1]) {
            return Err(Error::Unbalanced(sizes));
        }
        Ok(Self { parts })
    }

    pub fn empty(k: usize) -> Self {
        Self {
            parts: vec![Vec::new(); k],
        }
    }

    /// The whole vertex set of an n-balanced host.
    pub fn full(k: usize, n: usize) -> Self {
        Self {
            parts: vec![(0..n as u32).collect(); k],
        }
    }

    pub fn k(&self) -> usize {
        self.parts.len()
    }

    /// Common per-part size.
    pub fn side(&self) -> usize {
        self.parts.first().map_or(0, Vec::len)
    }

    pub fn len(&self) -> usize {
        self.side() * self.k()
    }

    pub fn is_empty(&self) -> bool {
        self.side() == 0
    }

    pub fn parts(&self) -> &[Vec<u32>] {
        &self.parts
    }

    pub fn into_parts(self) -> Vec<Vec<u32>> {
        self.parts
    }

    fn check_against(&self, host: &KPartiteHypergraph) -> Result<()> {
        if self.k() != host.k() {
            return Err(Error::PartCount {
                expected: host.k(),
                got: self.k(),
            });
        }
        for (part, p) in self.parts.iter().enumerate() {
            if let Some(&last) = p.last() {
                if last as usize >= host.part_size(part) {
                    return Err(Error::VertexOutOfRange { part, index: last });
                }
            }
        }
        Ok(())
    }
}

/// Membership bitmap per part.
pub(crate) fn membership(host: &KPartiteHypergraph, parts: &[Vec<u32>]) -> Vec<Vec<bool>> {
    parts
        .iter()
        .enumerate()
        .map(|(part, xs)| {
            let mut m = vec![false; host.part_size(part)];
            for &x in xs {
                m[x as usize] = true;
            }
            m
        })
        .collect()
}

/// True iff no edge of `host` lies entirely inside `set`.
pub fn is_balanced_independent(host: &KPartiteHypergraph, set: &BalancedSet) -> Result<bool> {
    set.check_against(host)?;
    if set.is_empty() {
        return Ok(true);
    }
    let inside = membership(host, set.parts());
    let independent = set.parts()[0].iter().all(|&u| {
        host.incident(0, u).iter().all(|&id| {
            let e = host.edge(id as usize);
            !e.iter().enumerate().all(|(p, &x)| inside[p][x as usize])
        })
    });
    Ok(independent)
}

/// A map from vertices to optional colors in `1..=palette`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialColoring {
    palette: u32,
    colors: Vec<Vec<Option<u32>>>,
}

impl PartialColoring {
    pub fn uncolored(part_sizes: &[usize], palette: u32) -> Self {
        Self {
            palette,
            colors: part_sizes.iter().map(|&s| vec![None; s]).collect(),
        }
    }

    pub fn from_colors(palette: u32, colors: Vec<Vec<Option<u32>>>) -> Result<Self> {
        for (part, row) in colors.iter().enumerate() {
            for (i, c) in row.iter().enumerate() {
                if let Some(c) = c {
                    if *c == 0 || *c > palette {
                        return Err(Error::Argument(format!(
                            "vertex ({part}, {i}) has color {c} outside palette 1..={palette}"
                        )));
                    }
                }
            }
        }
        Ok(Self { palette, colors })
    }

    pub fn palette(&self) -> u32 {
        self.palette
    }

    pub fn get(&self, part: usize, index: u32) -> Option<u32> {
        self.colors[part][index as usize]
    }

    pub fn set(&mut self, part: usize, index: u32, color: Option<u32>) {
        if let Some(c) = color {
            assert!(c >= 1 && c <= self.palette, "color {c} outside palette");
        }
        self.colors[part][index as usize] = color;
    }

    pub fn grow_palette(&mut self, palette: u32) {
        self.palette = self.palette.max(palette);
    }

    pub fn rows(&self) -> &[Vec<Option<u32>>] {
        &self.colors
    }

    pub fn is_total(&self) -> bool {
        self.colors.iter().flatten().all(Option::is_some)
    }

    pub fn uncolored_in(&self, part: usize) -> Vec<u32> {
        self.colors[part]
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_none())
            .map(|(i, _)| i as u32)
            .collect()
    }

    /// Distinct colors actually used.
    pub fn colors_used(&self) -> usize {
        let mut seen = vec![false; self.palette as usize + 1];
        for c in self.colors.iter().flatten().flatten() {
            seen[*c as usize] = true;
        }
        seen.iter().filter(|&&b| b).count()
    }

    /// `sizes[part][c - 1] = |V_part(c)|`.
    pub fn class_sizes(&self) -> Vec<Vec<usize>> {
        self.colors
            .iter()
            .map(|row| {
                let mut s = vec![0; self.palette as usize];
                for c in row.iter().flatten() {
                    s[*c as usize - 1] += 1;
                }
                s
            })
            .collect()
    }

    /// Vertices of color `c` in `part`, increasing.
    pub fn class(&self, part: usize, c: u32) -> Vec<u32> {
        self.colors[part]
            .iter()
            .enumerate()
            .filter(|(_, x)| **x == Some(c))
            .map(|(i, _)| i as u32)
            .collect()
    }

    fn shape_matches(&self, host: &KPartiteHypergraph) -> bool {
        self.colors.len() == host.k()
            && self
                .colors
                .iter()
                .zip(host.part_sizes())
                .all(|(r, &s)| r.len() == s)
    }
}

/// No edge has all of its members colored with one color.
pub fn is_proper(host: &KPartiteHypergraph, coloring: &PartialColoring) -> bool {
    coloring.shape_matches(host) && host.edges().all(|e| !is_monochromatic(coloring, e))
}

pub(crate) fn is_monochromatic(coloring: &PartialColoring, e: &[u32]) -> bool {
    let Some(first) = coloring.get(0, e[0]) else {
        return false;
    };
    e.iter()
        .enumerate()
        .skip(1)
        .all(|(p, &x)| coloring.get(p, x) == Some(first))
}

/// Outcome of the full coloring check, one flag per condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColoringVerdict {
    pub total: bool,
    pub proper: bool,
    pub balanced: bool,
}

impl ColoringVerdict {
    pub fn passes(&self, require_total: bool) -> bool {
        self.proper && self.balanced && (self.total || !require_total)
    }
}

pub fn check_coloring(host: &KPartiteHypergraph, coloring: &PartialColoring) -> ColoringVerdict {
    if !coloring.shape_matches(host) {
        return ColoringVerdict {
            total: false,
            proper: false,
            balanced: false,
        };
    }
    let sizes = coloring.class_sizes();
    let balanced =
        (0..coloring.palette() as usize).all(|c| sizes.iter().all(|s| s[c] == sizes[0][c]));
    ColoringVerdict {
        total: coloring.is_total(),
        proper: is_proper(host, coloring),
        balanced,
    }
}

/// Every color class is a balanced independent set; with `require_total`,
/// every vertex must also be colored.
pub fn is_proper_balanced_coloring(
    host: &KPartiteHypergraph,
    coloring: &PartialColoring,
    require_total: bool,
) -> bool {
    check_coloring(host, coloring).passes(require_total)
}
