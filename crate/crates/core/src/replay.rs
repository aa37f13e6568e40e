//! Replays a frontend event log against recomputation from scratch.
//!
//! Log lines: `HEADER c n m`, `COMP id k v…` for the initial components,
//! initial `BRIDGE e`, then per update `DEL e` followed by its
//! `SPLIT old new k v…` and `BRIDGE e` lines.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::graph::{DynamicGraph, EdgeId, Vertex};
use crate::oracle::{oracle_bridges, oracle_components, oracle_two_edge_components, OracleGraph, Partition};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplayMismatch {
    /// 0 for the initial state, otherwise the update index.
    pub step: usize,
    pub kind: &'static str,
    pub detail: String,
}

impl fmt::Display for ReplayMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step={} kind={} {}", self.step, self.kind, self.detail)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReplayVerdict {
    pub steps: usize,
    pub mismatches: Vec<ReplayMismatch>,
}

impl ReplayVerdict {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty()
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn nums(ln: usize, fields: &[&str]) -> Result<Vec<u64>> {
    fields.iter().map(|f| f.parse::<u64>().map_err(|_| parse_err(ln, format!("bad number {f:?}")))).collect()
}

#[derive(Debug)]
enum Line {
    Header { c: u32, n: usize, m: usize },
    Comp { id: u32, verts: Vec<Vertex> },
    Bridge(EdgeId),
    Del(EdgeId),
    Split { old: u32, new: u32, verts: Vec<Vertex> },
}

fn parse_line(ln: usize, text: &str) -> Result<Line> {
    let mut it = text.split_whitespace();
    let tag = it.next().ok_or_else(|| parse_err(ln, "empty line"))?;
    let rest: Vec<&str> = it.collect();
    let v = nums(ln, &rest)?;
    let counted = |skip: usize| -> Result<Vec<Vertex>> {
        let k = v[skip - 1] as usize;
        if v.len() != skip + k {
            return Err(parse_err(ln, format!("{tag} declares {k} vertices, found {}", v.len() - skip)));
        }
        Ok(v[skip..].iter().map(|&x| x as Vertex).collect())
    };
    let want = |k: usize| -> Result<()> {
        if v.len() < k {
            Err(parse_err(ln, format!("{tag} needs at least {k} fields")))
        } else {
            Ok(())
        }
    };
    match tag {
        "HEADER" if v.len() == 3 => Ok(Line::Header { c: v[0] as u32, n: v[1] as usize, m: v[2] as usize }),
        "COMP" => {
            want(2)?;
            Ok(Line::Comp { id: v[0] as u32, verts: counted(2)? })
        }
        "BRIDGE" if v.len() == 1 => Ok(Line::Bridge(EdgeId(v[0] as u32))),
        "DEL" if v.len() == 1 => Ok(Line::Del(EdgeId(v[0] as u32))),
        "SPLIT" => {
            want(3)?;
            Ok(Line::Split { old: v[0] as u32, new: v[1] as u32, verts: counted(3)? })
        }
        _ => Err(parse_err(ln, format!("unrecognised line {text:?}"))),
    }
}

struct State {
    c: u32,
    labels: Vec<u32>,
    used: HashSet<u32>,
    bridges: BTreeSet<EdgeId>,
    g: DynamicGraph,
}

impl State {
    fn compare(&self, step: usize, out: &mut Vec<ReplayMismatch>) {
        let og = OracleGraph::alive(&self.g);
        let expect = if self.c == 1 { oracle_components(&og) } else { oracle_two_edge_components(&og) };
        let got = Partition::from_labels(&self.labels);
        if got != expect {
            let v = (0..got.0.len()).find(|&v| got.0[v] != expect.0[v]).unwrap_or(0);
            out.push(ReplayMismatch {
                step,
                kind: "partition",
                detail: format!("vertex={v} expected_rep={} logged_rep={}", expect.0[v], got.0[v]),
            });
        }
        let expect: BTreeSet<EdgeId> = if self.c == 1 { BTreeSet::new() } else { oracle_bridges(&og).into_iter().collect() };
        if self.bridges != expect {
            let missing: Vec<u32> = expect.difference(&self.bridges).map(|e| e.0).collect();
            let extra: Vec<u32> = self.bridges.difference(&expect).map(|e| e.0).collect();
            out.push(ReplayMismatch {
                step,
                kind: "bridges",
                detail: format!("missing={missing:?} extra={extra:?}"),
            });
        }
    }
}

/// Checks the log state after construction and after every update.
pub fn verify_replay(log: &str, n: usize, pairs: &[(Vertex, Vertex)], deletions: &[EdgeId]) -> Result<ReplayVerdict> {
    let lines: Vec<(usize, Line)> = log
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_line(i + 1, l.trim()).map(|p| (i + 1, p)))
        .collect::<Result<_>>()?;
    let mut verdict = ReplayVerdict::default();
    if lines.is_empty() {
        if !deletions.is_empty() {
            return Err(parse_err(1, "empty log for a nonempty deletion sequence"));
        }
        return Ok(verdict);
    }
    let mut it = lines.into_iter().peekable();
    let (hl, c) = match it.next() {
        Some((ln, Line::Header { c, n: hn, m })) => {
            if hn != n || m != pairs.len() {
                return Err(parse_err(ln, format!("log is for n={hn} m={m}, graph has n={n} m={}", pairs.len())));
            }
            if !(1..=2).contains(&c) {
                return Err(parse_err(ln, format!("unsupported order c={c}")));
            }
            (ln, c)
        }
        Some((ln, _)) => return Err(parse_err(ln, "log must start with HEADER")),
        None => unreachable!(),
    };
    let mut st = State { c, labels: vec![u32::MAX; n], used: HashSet::new(), bridges: BTreeSet::new(), g: DynamicGraph::load(n, pairs)? };
    while let Some((ln, Line::Comp { .. })) = it.peek() {
        let ln = *ln;
        let Some((_, Line::Comp { id, verts })) = it.next() else { unreachable!() };
        if !st.used.insert(id) {
            return Err(parse_err(ln, format!("component id {id} listed twice")));
        }
        for v in verts {
            if v as usize >= n || st.labels[v as usize] != u32::MAX {
                return Err(parse_err(ln, format!("vertex {v} out of range or listed twice")));
            }
            st.labels[v as usize] = id;
        }
    }
    if st.labels.contains(&u32::MAX) {
        return Err(parse_err(hl, "initial COMP lines do not cover every vertex"));
    }
    let mut step = 0;
    let mut out = Vec::new();
    loop {
        while let Some((_, Line::Split { .. } | Line::Bridge(_))) = it.peek() {
            match it.next() {
                Some((ln, Line::Bridge(e))) => {
                    if e.index() >= pairs.len() {
                        return Err(parse_err(ln, format!("unknown edge {e}")));
                    }
                    st.bridges.insert(e);
                }
                Some((ln, Line::Split { old, new, verts })) => {
                    if step == 0 {
                        return Err(parse_err(ln, "SPLIT before the first DEL"));
                    }
                    if !st.used.insert(new) {
                        out.push(ReplayMismatch { step, kind: "split-id", detail: format!("id={new} already in use") });
                    }
                    for v in verts {
                        if v as usize >= n {
                            return Err(parse_err(ln, format!("vertex {v} out of range")));
                        }
                        if st.labels[v as usize] != old {
                            out.push(ReplayMismatch {
                                step,
                                kind: "split-source",
                                detail: format!("vertex={v} in={} claimed={old}", st.labels[v as usize]),
                            });
                        }
                        st.labels[v as usize] = new;
                    }
                }
                _ => unreachable!(),
            }
        }
        st.compare(step, &mut out);
        match it.next() {
            None => break,
            Some((ln, Line::Del(e))) => {
                if step >= deletions.len() {
                    return Err(parse_err(ln, "log has more updates than the deletion sequence"));
                }
                if deletions[step] != e {
                    out.push(ReplayMismatch {
                        step: step + 1,
                        kind: "sequence",
                        detail: format!("expected={} logged={}", deletions[step].0, e.0),
                    });
                }
                st.g.delete(e).map_err(|err| parse_err(ln, err.to_string()))?;
                st.bridges.remove(&e);
                step += 1;
            }
            Some((ln, other)) => return Err(parse_err(ln, format!("unexpected {other:?}"))),
        }
    }
    if step != deletions.len() {
        out.push(ReplayMismatch {
            step,
            kind: "length",
            detail: format!("expected={} logged={step}", deletions.len()),
        });
    }
    verdict.steps = step;
    verdict.mismatches = out;
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificate::CertificateParams;
    use crate::frontend::DecrementalConnectivity;

    fn logged(n: usize, pairs: &[(u32, u32)], c: u32, dels: &[EdgeId]) -> String {
        let g = DynamicGraph::load(n, pairs).unwrap();
        let mut d = DecrementalConnectivity::with_log(g, c, CertificateParams::desk(c), 2).unwrap();
        for &e in dels {
            d.delete(e).unwrap();
        }
        assert!(d.finalize().passed());
        d.log_lines().unwrap().join("\n")
    }

    const DUMBBELL: [(u32, u32); 7] = [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (2, 3)];

    #[test]
    fn passing_run_replays_clean() {
        let dels: Vec<EdgeId> = [6, 0, 3, 1, 2, 4, 5].map(EdgeId).to_vec();
        for c in [1, 2] {
            let log = logged(6, &DUMBBELL, c, &dels);
            let v = verify_replay(&log, 6, &DUMBBELL, &dels).unwrap();
            assert!(v.ok(), "{:?}", v.mismatches);
            assert_eq!(v.steps, 7);
        }
    }

    #[test]
    fn tampered_split_is_located() {
        let dels = vec![EdgeId(6)];
        let log = logged(6, &DUMBBELL, 1, &dels);
        assert!(log.contains("SPLIT 0 1 3 3 4 5"));
        let bad = log.replace("SPLIT 0 1 3 3 4 5", "SPLIT 0 1 3 2 4 5");
        let v = verify_replay(&bad, 6, &DUMBBELL, &dels).unwrap();
        assert_eq!(v.mismatches.len(), 1);
        assert_eq!(v.mismatches[0].step, 1);
        assert_eq!(v.mismatches[0].kind, "partition");
        assert!(v.mismatches[0].to_string().starts_with("step=1 kind=partition vertex=2"));
    }

    #[test]
    fn empty_log_and_malformed() {
        assert!(verify_replay("", 3, &[(0, 1)], &[]).unwrap().ok());
        assert!(verify_replay("", 3, &[(0, 1)], &[EdgeId(0)]).is_err());
        assert!(verify_replay("HEADER 1 3 1\nCOMP 0 2 0 1\nCOMP x", 3, &[(0, 1)], &[]).is_err());
        assert!(verify_replay("HEADER 1 3 1\nCOMP 0 2 0 1\nCOMP 1 1 2\nDEL 0\nWHAT", 3, &[(0, 1)], &[EdgeId(0)]).is_err());
        assert!(verify_replay("COMP 0 1 0", 1, &[], &[]).is_err());
    }
}
