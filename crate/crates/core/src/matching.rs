//! Unique perfect matching by repeated bridge removal over decremental
//! 2-edge-connectivity.
//!
//! A graph with a unique perfect matching has a bridge that belongs to it.
//! Deleting a bridge between two even sides loses no perfect matching;
//! between two odd sides it is forced into every one. When no bridge is
//! left, a perfect matching of the rest is never unique.

use petgraph::algo::maximum_matching;
use petgraph::graph::{NodeIndex, UnGraph};

use crate::certificate::CertificateParams;
use crate::error::{Error, Result};
use crate::frontend::DecrementalConnectivity;
use crate::graph::{DynamicGraph, EdgeId, Vertex};
use crate::random::{MasterSeed, Stream};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MatchingVerdict {
    /// The matching, edge ids ascending.
    Unique(Vec<EdgeId>),
    NotUnique,
    NoPerfectMatching,
}

#[derive(Clone, Debug)]
pub struct MatchingConfig {
    /// `None` picks `CertificateParams::calibrated(n, 2)`.
    pub params: Option<CertificateParams>,
    pub seed: u64,
    pub max_attempts: u32,
}

impl Default for MatchingConfig {
    fn default() -> Self {
        MatchingConfig { params: None, seed: 0, max_attempts: 16 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchingOutcome {
    pub verdict: MatchingVerdict,
    /// Runs started, including the accepted one.
    pub attempts: u32,
    /// Deletions issued by the accepted run.
    pub deletions: u64,
}

/// Retries with fresh randomness until a run passes its self-check, so a
/// returned verdict is always correct.
pub fn unique_perfect_matching(n: usize, pairs: &[(Vertex, Vertex)], cfg: &MatchingConfig) -> Result<MatchingOutcome> {
    let g = DynamicGraph::load(n, pairs)?;
    if n == 0 {
        return Ok(MatchingOutcome { verdict: MatchingVerdict::Unique(Vec::new()), attempts: 0, deletions: 0 });
    }
    if n % 2 == 1 {
        return Ok(MatchingOutcome { verdict: MatchingVerdict::NoPerfectMatching, attempts: 0, deletions: 0 });
    }
    let params = cfg.params.clone().unwrap_or_else(|| CertificateParams::calibrated(n, 2));
    let master = MasterSeed(cfg.seed);
    for k in 0..cfg.max_attempts {
        let (verdict, deletions, passed) = attempt(g.clone(), params.clone(), master.derive(Stream::Retry(k)))?;
        if passed {
            return Ok(MatchingOutcome { verdict, attempts: k + 1, deletions });
        }
    }
    Err(Error::RetriesExhausted(cfg.max_attempts))
}

/// One run; the verdict is trustworthy only when the flag is set.
pub fn attempt(g: DynamicGraph, params: CertificateParams, seed: u64) -> Result<(MatchingVerdict, u64, bool)> {
    let n = g.n();
    let mut dc = DecrementalConnectivity::new(g, 2, params, seed)?;
    let mut matched = vec![false; n];
    let mut matching = Vec::new();
    let mut verdict = None;
    if (0..n as Vertex).any(|v| odd_side(&dc, &matched, v)) {
        verdict = Some(MatchingVerdict::NoPerfectMatching);
    }
    while verdict.is_none() {
        let Some(b) = dc.next_bridge() else { break };
        let (u, v) = dc.graph().endpoints(b);
        dc.delete(b)?;
        let odd = odd_component(&dc, u);
        if odd != odd_component(&dc, v) {
            // impossible for correct components; only a failed run gets here
            let deletions = dc.updates();
            return Ok((MatchingVerdict::NoPerfectMatching, deletions, false));
        }
        if !odd {
            continue;
        }
        matching.push(b);
        matched[u as usize] = true;
        matched[v as usize] = true;
        let mut drop: Vec<EdgeId> = dc.graph().incident(u).to_vec();
        drop.extend_from_slice(dc.graph().incident(v));
        drop.sort_unstable();
        drop.dedup();
        let mut seen = Vec::with_capacity(2 * drop.len());
        for f in drop {
            let (a, c) = dc.graph().endpoints(f);
            dc.delete(f)?;
            seen.push(a);
            seen.push(c);
        }
        if seen.into_iter().any(|w| odd_side(&dc, &matched, w)) {
            verdict = Some(MatchingVerdict::NoPerfectMatching);
        }
    }
    let verdict = match verdict {
        Some(v) => v,
        None if matched.iter().all(|&m| m) => {
            matching.sort_unstable();
            MatchingVerdict::Unique(matching)
        }
        None if has_perfect_matching(dc.graph(), &matched) => MatchingVerdict::NotUnique,
        None => MatchingVerdict::NoPerfectMatching,
    };
    let deletions = dc.updates();
    Ok((verdict, deletions, dc.finalize().passed()))
}

fn odd_component(dc: &DecrementalConnectivity, v: Vertex) -> bool {
    dc.connected_size_of(dc.connected_component_of(v)).is_ok_and(|s| s % 2 == 1)
}

// matched vertices sit alone once their edges are gone
fn odd_side(dc: &DecrementalConnectivity, matched: &[bool], v: Vertex) -> bool {
    !matched[v as usize] && odd_component(dc, v)
}

fn has_perfect_matching(g: &DynamicGraph, matched: &[bool]) -> bool {
    let mut idx = vec![NodeIndex::end(); g.n()];
    let mut pg = UnGraph::<(), ()>::default();
    for v in 0..g.n() {
        if !matched[v] {
            idx[v] = pg.add_node(());
        }
    }
    for e in g.alive_edges() {
        let (u, v) = g.endpoints(e);
        if !matched[u as usize] && !matched[v as usize] {
            pg.add_edge(idx[u as usize], idx[v as usize], ());
        }
    }
    maximum_matching(&pg).is_perfect()
}
