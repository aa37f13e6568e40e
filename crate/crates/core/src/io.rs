//! Text formats: edge lists and deletion sequences.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Vertex};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// "n m" header then m lines "u v".
pub fn parse_edge_list(text: &str) -> Result<(usize, Vec<(Vertex, Vertex)>)> {
    let mut lines = content_lines(text);
    let (hl, header) = lines.next().ok_or_else(|| parse_err(1, "missing header line \"n m\""))?;
    let nums: Vec<&str> = header.split_whitespace().collect();
    if nums.len() != 2 {
        return Err(parse_err(hl, "header must be \"n m\""));
    }
    let n: usize = nums[0].parse().map_err(|_| parse_err(hl, "bad vertex count"))?;
    let m: usize = nums[1].parse().map_err(|_| parse_err(hl, "bad edge count"))?;
    let mut edges = Vec::with_capacity(m);
    for (ln, line) in lines {
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 2 {
            return Err(parse_err(ln, "edge line must be \"u v\""));
        }
        let u: Vertex = parts[0].parse().map_err(|_| parse_err(ln, "bad endpoint"))?;
        let v: Vertex = parts[1].parse().map_err(|_| parse_err(ln, "bad endpoint"))?;
        edges.push((u, v));
    }
    if edges.len() != m {
        return Err(parse_err(hl, format!("header declares {m} edges, found {}", edges.len())));
    }
    Ok((n, edges))
}

pub fn write_edge_list(n: usize, edges: &[(Vertex, Vertex)]) -> String {
    let mut out = format!("{} {}\n", n, edges.len());
    for (u, v) in edges {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DeletionSpec {
    Explicit(Vec<EdgeId>),
    Shuffle(u64),
}

pub fn parse_deletions(text: &str) -> Result<DeletionSpec> {
    let mut ids = Vec::new();
    for (ln, line) in content_lines(text) {
        if let Some(rest) = line.strip_prefix("shuffle") {
            if !ids.is_empty() {
                return Err(parse_err(ln, "shuffle cannot be mixed with explicit ids"));
            }
            let seed = rest.trim().parse().map_err(|_| parse_err(ln, "bad shuffle seed"))?;
            return Ok(DeletionSpec::Shuffle(seed));
        }
        let id: u32 = line.parse().map_err(|_| parse_err(ln, "expected an edge id"))?;
        ids.push(EdgeId(id));
    }
    Ok(DeletionSpec::Explicit(ids))
}

/// All m ids in a seeded uniform order.
pub fn shuffled_ids(m: usize, seed: u64) -> Vec<EdgeId> {
    let mut ids: Vec<EdgeId> = (0..m as u32).map(EdgeId).collect();
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    ids
}

impl DeletionSpec {
    pub fn resolve(&self, m: usize) -> Result<Vec<EdgeId>> {
        match self {
            DeletionSpec::Shuffle(seed) => Ok(shuffled_ids(m, *seed)),
            DeletionSpec::Explicit(ids) => {
                let mut seen = vec![false; m];
                for &e in ids {
                    if e.index() >= m {
                        return Err(Error::UnknownEdge(e));
                    }
                    if std::mem::replace(&mut seen[e.index()], true) {
                        return Err(Error::DeadEdge(e));
                    }
                }
                Ok(ids.clone())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_list_round_trip() {
        let edges = vec![(0, 1), (1, 2), (0, 1)];
        let text = write_edge_list(3, &edges);
        assert_eq!(parse_edge_list(&text).unwrap(), (3, edges));
        assert_eq!(parse_edge_list("0 0\n").unwrap(), (0, vec![]));
    }

    #[test]
    fn edge_list_errors() {
        assert!(parse_edge_list("").is_err());
        assert!(parse_edge_list("3 2\n0 1\n").is_err());
        assert!(matches!(parse_edge_list("3 1\n0 x\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn deletions() {
        assert_eq!(parse_deletions("2\n0\n1\n").unwrap(), DeletionSpec::Explicit(vec![EdgeId(2), EdgeId(0), EdgeId(1)]));
        assert_eq!(parse_deletions("shuffle 42\n").unwrap(), DeletionSpec::Shuffle(42));
        let ids = DeletionSpec::Shuffle(42).resolve(10).unwrap();
        let mut sorted = ids.clone();
        sorted.sort();
        assert_eq!(sorted, (0..10).map(EdgeId).collect::<Vec<_>>());
        assert_eq!(ids, shuffled_ids(10, 42));
        assert!(DeletionSpec::Explicit(vec![EdgeId(1), EdgeId(1)]).resolve(3).is_err());
        assert!(DeletionSpec::Explicit(vec![EdgeId(5)]).resolve(3).is_err());
    }
}
