//! Plain-text query replay format: one query per line, `P a b` or `T a b c`.
//! Blank lines and lines starting with `#` are skipped. Steps are assigned
//! in line order starting at 0.

use std::fmt::Write;

use super::{ElementId, PairQuery, TripleQuery};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Query {
    Pair(PairQuery),
    Triple(TripleQuery),
}

impl Query {
    pub fn step(&self) -> u64 {
        match self {
            Query::Pair(p) => p.step,
            Query::Triple(t) => t.step,
        }
    }

    pub fn contains(&self, e: ElementId) -> bool {
        match self {
            Query::Pair(p) => p.contains(e),
            Query::Triple(t) => t.contains(e),
        }
    }
}

pub fn parse_replay(text: &str) -> Result<Vec<Query>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Parse { line: lineno + 1, message };
        let mut fields = line.split_whitespace();
        let kind = fields.next().unwrap();
        let ids = fields
            .map(|f| f.parse::<u64>().map(ElementId).map_err(|e| err(format!("bad id `{f}`: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        let step = out.len() as u64;
        let q = match (kind, ids.as_slice()) {
            ("P", &[a, b]) => Query::Pair(PairQuery { a, b, step }),
            ("T", &[a, b, c]) => Query::Triple(TripleQuery { a, b, c, step }),
            _ => return Err(err(format!("expected `P a b` or `T a b c`, got `{line}`"))),
        };
        out.push(q);
    }
    Ok(out)
}

pub fn format_replay(queries: &[Query]) -> String {
    let mut s = String::new();
    for q in queries {
        match q {
            Query::Pair(p) => writeln!(s, "P {} {}", p.a, p.b),
            Query::Triple(t) => writeln!(s, "T {} {} {}", t.a, t.b, t.c),
        }
        .unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_mixed_input() {
        let qs = parse_replay("# demo\nP 1 2\n\nT 1 2 3\n").unwrap();
        assert_eq!(qs.len(), 2);
        assert_eq!(qs[1], Query::Triple(TripleQuery::new(1, 2, 3, 1)));
        assert_eq!(parse_replay(&format_replay(&qs)).unwrap(), qs);
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_replay("P 1 2\nP 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(matches!(parse_replay("X 1 2").unwrap_err(), Error::Parse { line: 1, .. }));
        assert!(matches!(parse_replay("P a 2").unwrap_err(), Error::Parse { line: 1, .. }));
    }
}
