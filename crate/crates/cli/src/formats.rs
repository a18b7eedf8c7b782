//! JSON artifacts for sets and colorings.
//!
//! A coloring file is any JSON object with `palette` and `colors` (one array
//! per part, `0` = uncolored); a set file is any JSON object with `set` (one
//! sorted index array per part). Reports written by `bis`, `color`,
//! `fallback-color` and `exact` carry these fields, so each can be fed back
//! to `verify`.

use anyhow::{Context, Result};
use balhyp_core::sets::{check_coloring, ColoringVerdict};
use balhyp_core::{BalancedSet, KPartiteHypergraph, PartialColoring};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColoringFile {
    pub palette: u32,
    pub colors: Vec<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validator: Option<ColoringVerdict>,
}

impl ColoringFile {
    pub fn new(host: &KPartiteHypergraph, c: &PartialColoring) -> Self {
        Self {
            palette: c.palette(),
            colors: flat_colors(c),
            validator: Some(check_coloring(host, c)),
        }
    }

    pub fn to_coloring(&self) -> Result<PartialColoring> {
        let colors = self
            .colors
            .iter()
            .map(|row| row.iter().map(|&x| (x > 0).then_some(x)).collect())
            .collect();
        Ok(PartialColoring::from_colors(self.palette, colors)?)
    }
}

pub fn flat_colors(c: &PartialColoring) -> Vec<Vec<u32>> {
    c.rows()
        .iter()
        .map(|row| row.iter().map(|x| x.unwrap_or(0)).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetFile {
    pub side: usize,
    pub set: Vec<Vec<u32>>,
}

impl SetFile {
    pub fn new(set: &BalancedSet) -> Self {
        Self {
            side: set.side(),
            set: set.parts().to_vec(),
        }
    }
}

#[derive(Deserialize)]
struct SetOnly {
    set: Vec<Vec<u32>>,
}

pub fn parse_set(text: &str) -> Result<BalancedSet> {
    let s: SetOnly = serde_json::from_str(text).context("expected a JSON object with \"set\"")?;
    Ok(BalancedSet::new(s.set)?)
}

pub fn parse_coloring(text: &str) -> Result<PartialColoring> {
    let c: ColoringFile = serde_json::from_str(text)
        .context("expected a JSON object with \"palette\" and \"colors\"")?;
    c.to_coloring()
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_round_trip() {
        let s = BalancedSet::new(vec![vec![0, 2], vec![1, 3]]).unwrap();
        let text = to_json(&SetFile::new(&s)).unwrap();
        assert_eq!(parse_set(&text).unwrap(), s);
        let empty = BalancedSet::empty(3);
        assert_eq!(
            parse_set(&to_json(&SetFile::new(&empty)).unwrap()).unwrap(),
            empty
        );
        assert!(parse_set("{\"set\": [[0, 1], [2]]}").is_err());
    }

    #[test]
    fn coloring_round_trip() {
        let h = KPartiteHypergraph::balanced(2, 2, vec![vec![0, 0]]).unwrap();
        let c = PartialColoring::from_colors(2, vec![vec![Some(1), None], vec![Some(2), Some(1)]])
            .unwrap();
        let file = ColoringFile::new(&h, &c);
        assert_eq!(file.colors, vec![vec![1, 0], vec![2, 1]]);
        assert!(!file.validator.unwrap().total);
        assert_eq!(parse_coloring(&to_json(&file).unwrap()).unwrap(), c);
        assert!(parse_coloring("{\"palette\": 1, \"colors\": [[2]]}").is_err());
    }
}
