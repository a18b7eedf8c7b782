//! The `khg 1` text format.
//!
//! ```text
//! khg 1
//! <k> <n_1> ... <n_k>
//! <m>
//! <m lines of k space-separated 0-based indices>
//! ```
//!
//! Every line ends with a single LF; fields are separated by exactly one
//! space. The writer emits edges in lexicographic order, so parsing and
//! re-emitting a canonical file reproduces it byte for byte.

use std::fmt::Write as _;

use thiserror::Error;

use crate::hypergraph::{KPartiteHypergraph, RawHypergraph};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

fn fields(line_no: usize, line: &str) -> Result<Vec<u64>, ParseError> {
    if line.is_empty() {
        return Err(err(line_no, "empty line"));
    }
    line.split(' ')
        .map(|tok| {
            if tok.is_empty() {
                return Err(err(
                    line_no,
                    "fields must be separated by exactly one space",
                ));
            }
            if tok.len() > 1 && tok.starts_with('0') {
                return Err(err(line_no, format!("leading zero in {tok:?}")));
            }
            tok.parse::<u64>().map_err(|_| {
                err(
                    line_no,
                    format!("expected a non-negative integer, got {tok:?}"),
                )
            })
        })
        .collect()
}

/// Parses the grammar only; semantic checks live in [`RawHypergraph::validate`].
pub fn parse_khg(text: &str) -> Result<RawHypergraph, ParseError> {
    if text.contains('\r') {
        let line = text[..text.find('\r').unwrap()].matches('\n').count() + 1;
        return Err(err(line, "carriage return not allowed"));
    }
    if !text.ends_with('\n') {
        let line = text.matches('\n').count() + 1;
        return Err(err(line, "missing final newline"));
    }
    let mut lines = text[..text.len() - 1]
        .split('\n')
        .enumerate()
        .map(|(i, l)| (i + 1, l));

    let (no, header) = lines.next().ok_or_else(|| err(1, "empty input"))?;
    if header != "khg 1" {
        return Err(err(
            no,
            format!("expected header \"khg 1\", got {header:?}"),
        ));
    }

    let (no, dims) = lines
        .next()
        .ok_or_else(|| err(2, "missing dimension line"))?;
    let dims = fields(no, dims)?;
    let k = dims[0] as usize;
    if dims.len() != k + 1 {
        return Err(err(
            no,
            format!(
                "expected {} part sizes after k={k}, got {}",
                k,
                dims.len() - 1
            ),
        ));
    }
    let part_sizes: Vec<usize> = dims[1..].iter().map(|&x| x as usize).collect();

    let (no, count) = lines
        .next()
        .ok_or_else(|| err(3, "missing edge count line"))?;
    let count = fields(no, count)?;
    if count.len() != 1 {
        return Err(err(no, "edge count line must hold one integer"));
    }
    let m = count[0] as usize;

    let mut edges = Vec::with_capacity(m.min(1 << 20));
    for _ in 0..m {
        let Some((no, line)) = lines.next() else {
            return Err(err(
                4 + edges.len(),
                format!("expected {m} edge lines, found {}", edges.len()),
            ));
        };
        let e = fields(no, line)?;
        if e.len() != k {
            return Err(err(
                no,
                format!("edge has {} indices, expected {k}", e.len()),
            ));
        }
        let e: Vec<u32> = e
            .into_iter()
            .map(|x| u32::try_from(x).map_err(|_| err(no, format!("index {x} too large"))))
            .collect::<Result<_, _>>()?;
        edges.push(e);
    }
    if let Some((no, _)) = lines.next() {
        return Err(err(no, "trailing content after the last edge"));
    }
    Ok(RawHypergraph { part_sizes, edges })
}

pub fn write_khg(h: &KPartiteHypergraph) -> String {
    let mut out = String::with_capacity(16 + h.num_edges() * h.k() * 6);
    out.push_str("khg 1\n");
    let _ = write!(out, "{}", h.k());
    for s in h.part_sizes() {
        let _ = write!(out, " {s}");
    }
    let _ = writeln!(out, "\n{}", h.num_edges());
    for e in h.edges() {
        let mut first = true;
        for x in e {
            if !first {
                out.push(' ');
            }
            first = false;
            let _ = write!(out, "{x}");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const CANON: &str = "khg 1\n2 2 3\n3\n0 0\n0 2\n1 1\n";

    #[test]
    fn round_trip_is_byte_identical() {
        let raw = parse_khg(CANON).unwrap();
        let h = KPartiteHypergraph::try_from(raw).unwrap();
        assert_eq!(write_khg(&h), CANON);
    }

    #[test]
    fn unsorted_input_is_canonicalized() {
        let raw = parse_khg("khg 1\n2 2 3\n3\n1 1\n0 2\n0 0\n").unwrap();
        let h = KPartiteHypergraph::try_from(raw).unwrap();
        assert_eq!(write_khg(&h), CANON);
    }

    #[test]
    fn empty_edge_set() {
        let text = "khg 1\n3 2 2 2\n0\n";
        let h = KPartiteHypergraph::try_from(parse_khg(text).unwrap()).unwrap();
        assert_eq!(h.num_edges(), 0);
        assert_eq!(write_khg(&h), text);
    }

    #[test]
    fn grammar_errors_carry_line_numbers() {
        let cases = [
            ("khg 2\n2 1 1\n0\n", 1),
            ("khg 1\n2 1\n0\n", 2),
            ("khg 1\n2 1 1\n2\n0 0\n", 5),
            ("khg 1\n2 1 1\n1\n0  0\n", 4),
            ("khg 1\n2 1 1\n1\n0 0 \n", 4),
            ("khg 1\n2 1 1\n1\n0 x\n", 4),
            ("khg 1\n2 1 1\n1\n0 0\n0 0\n", 5),
            ("khg 1\n2 1 1\n1\n0 0", 4),
            ("khg 1\r\n2 1 1\n0\n", 1),
            ("khg 1\n2 1 1\n1\n0\n", 4),
        ];
        for (text, line) in cases {
            let e = parse_khg(text).unwrap_err();
            assert_eq!(e.line, line, "{text:?}: {e}");
        }
    }

    #[test]
    fn semantic_errors_left_to_validate() {
        let raw = parse_khg("khg 1\n2 2 2\n1\n0 5\n").unwrap();
        assert_eq!(raw.validate().len(), 1);
    }
}
