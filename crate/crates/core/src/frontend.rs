//! Decremental connectivity (c = 1) and 2-edge-connectivity (c = 2) with
//! constant-time queries, answered from components of the certificate.

use std::cell::Cell;
use std::collections::BTreeSet;

use crate::certificate::{CertDelta, CertificateEngine, CertificateParams, EngineStats, SelfCheckReport};
use crate::cut::{naive_cut_oracle, CutOracle};
use crate::error::{Error, Result};
use crate::graph::{DynamicGraph, EdgeId, Vertex};
use crate::random::{MasterSeed, Stream};
use crate::tracker::{prune_to_c_components, CompId, ComponentTracker, SplitEvent};

/// Component `old` lost `moved`, which now carries id `new`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitNotification {
    pub old: CompId,
    pub new: CompId,
    pub moved: Vec<Vertex>,
}

impl From<SplitEvent> for SplitNotification {
    fn from(ev: SplitEvent) -> Self {
        SplitNotification { old: ev.j, new: ev.k, moved: ev.a }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinalReport {
    pub check: SelfCheckReport,
    /// Certificate insertions that would have merged components. Only a
    /// wrong certificate produces these.
    pub anomalies: u64,
}

impl FinalReport {
    pub fn passed(&self) -> bool {
        self.check.passed() && self.anomalies == 0
    }
}

pub struct DecrementalConnectivity {
    engine: CertificateEngine,
    c: u32,
    comps: ComponentTracker,
    oracle: Box<dyn CutOracle + Send>,
    // connectivity of the certificate, kept separately when c = 2
    conn: Option<ComponentTracker>,
    crossing: BTreeSet<EdgeId>,
    bridges: Vec<(u64, EdgeId)>,
    anomalies: u64,
    updates: u64,
    comparisons: Cell<u64>,
    log: Option<Vec<String>>,
}

impl DecrementalConnectivity {
    pub fn new(g: DynamicGraph, c: u32, params: CertificateParams, seed: u64) -> Result<Self> {
        Self::build(g, c, params, seed, false)
    }

    /// Like `new`, also recording the event log.
    pub fn with_log(g: DynamicGraph, c: u32, params: CertificateParams, seed: u64) -> Result<Self> {
        Self::build(g, c, params, seed, true)
    }

    fn build(g: DynamicGraph, c: u32, mut params: CertificateParams, seed: u64, log: bool) -> Result<Self> {
        if !(1..=2).contains(&c) {
            return Err(Error::UnsupportedOrder(c));
        }
        params.c = c;
        let (n, m) = (g.n(), g.m());
        let table = g.edge_table();
        let engine = CertificateEngine::new(g, params, seed)?;
        let master = MasterSeed(seed);
        let cert = engine.certificate_edges();
        let mut comps = ComponentTracker::new(n, table.clone(), cert.iter().copied(), master.derive(Stream::Forest(1 << 20)))?;
        let mut oracle = naive_cut_oracle(c, n);
        let mut crossing = BTreeSet::new();
        let mut conn = None;
        if c == 2 {
            conn = Some(ComponentTracker::new(n, table, cert.iter().copied(), master.derive(Stream::Forest(1 << 21)))?);
            let all: Vec<Vertex> = (0..n as Vertex).collect();
            prune_to_c_components(&mut comps, oracle.as_mut(), &all, |e, _| {
                crossing.insert(e);
                Ok(())
            })?;
        }
        let bridges: Vec<(u64, EdgeId)> = crossing.iter().map(|&e| (0, e)).collect();
        let mut dc = DecrementalConnectivity {
            engine,
            c,
            comps,
            oracle,
            conn,
            crossing,
            bridges,
            anomalies: 0,
            updates: 0,
            comparisons: Cell::new(0),
            log: None,
        };
        if log {
            let mut lines = vec![format!("HEADER {c} {n} {m}")];
            for id in 0..dc.comps.num_components() as CompId {
                let vs = dc.comps.component_vertices(id)?;
                lines.push(format!("COMP {id} {} {}", vs.len(), join(&vs)));
            }
            lines.extend(dc.bridges.iter().map(|(_, e)| format!("BRIDGE {}", e.0)));
            dc.log = Some(lines);
        }
        Ok(dc)
    }

    pub fn order(&self) -> u32 {
        self.c
    }

    pub fn n(&self) -> usize {
        self.comps.n()
    }

    pub fn graph(&self) -> &DynamicGraph {
        self.engine.graph()
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn delete(&mut self, e: EdgeId) -> Result<Vec<SplitNotification>> {
        let delta = self.engine.delete(e)?;
        self.updates += 1;
        if let Some(log) = self.log.as_mut() {
            log.push(format!("DEL {}", e.0));
        }
        self.apply(delta)
    }

    fn apply(&mut self, delta: CertDelta) -> Result<Vec<SplitNotification>> {
        // insertions first: against the pre-update components every correct
        // insertion lands inside one component
        for &f in &delta.inserted {
            let (u, v) = self.engine.graph().endpoints(f);
            if let Some(conn) = self.conn.as_mut() {
                if conn.same_component(u, v) {
                    conn.insert(f)?;
                } else {
                    self.anomalies += 1;
                }
            }
            if self.comps.same_component(u, v) {
                self.comps.insert(f)?;
            } else {
                self.anomalies += 1;
                if self.c == 2 {
                    self.crossing.insert(f);
                }
            }
        }
        let mut notes = Vec::new();
        let mut scope = Vec::new();
        for &f in &delta.deleted {
            if let Some(conn) = self.conn.as_mut() {
                if conn.contains(f) {
                    conn.delete(f)?;
                }
            }
            if self.comps.contains(f) {
                let (u, v) = self.engine.graph().endpoints(f);
                scope.push(u);
                scope.push(v);
                if let Some(ev) = self.comps.delete(f)? {
                    notes.push(SplitNotification::from(ev));
                }
            } else {
                self.crossing.remove(&f);
            }
        }
        let mut fresh = Vec::new();
        if self.c == 2 && !scope.is_empty() {
            prune_to_c_components(&mut self.comps, self.oracle.as_mut(), &scope, |f, ev| {
                fresh.push(f);
                if let Some(ev) = ev {
                    notes.push(SplitNotification::from(ev.clone()));
                }
                Ok(())
            })?;
        }
        fresh.sort_unstable();
        for &f in &fresh {
            self.crossing.insert(f);
            self.bridges.push((self.updates, f));
        }
        if let Some(log) = self.log.as_mut() {
            for note in &notes {
                log.push(format!("SPLIT {} {} {} {}", note.old, note.new, note.moved.len(), join(&note.moved)));
            }
            log.extend(fresh.iter().map(|f| format!("BRIDGE {}", f.0)));
        }
        Ok(notes)
    }

    /// Same c-edge-connected component; one id comparison.
    #[inline]
    pub fn same_component(&self, u: Vertex, v: Vertex) -> bool {
        self.comparisons.set(self.comparisons.get() + 1);
        self.comps.component_id(u) == self.comps.component_id(v)
    }

    /// Plain connectivity, also available when c = 2.
    #[inline]
    pub fn connected(&self, u: Vertex, v: Vertex) -> bool {
        self.comparisons.set(self.comparisons.get() + 1);
        let t = self.conn.as_ref().unwrap_or(&self.comps);
        t.component_id(u) == t.component_id(v)
    }

    pub fn component_of(&self, v: Vertex) -> CompId {
        self.comps.component_id(v)
    }

    pub fn size_of(&self, id: CompId) -> Result<usize> {
        self.comps.component_size(id)
    }

    pub fn vertices_of(&self, id: CompId) -> Result<Vec<Vertex>> {
        self.comps.component_vertices(id)
    }

    pub fn num_components(&self) -> usize {
        self.comps.num_components()
    }

    /// Connected-component id; equals `component_of` when c = 1.
    pub fn connected_component_of(&self, v: Vertex) -> CompId {
        self.conn.as_ref().unwrap_or(&self.comps).component_id(v)
    }

    pub fn connected_size_of(&self, id: CompId) -> Result<usize> {
        self.conn.as_ref().unwrap_or(&self.comps).component_size(id)
    }

    /// Alive edges whose endpoints carry distinct component ids, ascending.
    pub fn non_component_edges(&self) -> Vec<EdgeId> {
        self.crossing.iter().copied().collect()
    }

    /// Lowest-id edge between distinct components.
    pub fn next_bridge(&self) -> Option<EdgeId> {
        self.crossing.first().copied()
    }

    /// (update index, edge) for every edge at the moment it became a
    /// bridge; update 0 is construction.
    pub fn bridge_log(&self) -> &[(u64, EdgeId)] {
        &self.bridges
    }

    pub fn query_comparisons(&self) -> u64 {
        self.comparisons.get()
    }

    pub fn labels(&self) -> &[CompId] {
        self.comps.labels()
    }

    pub fn connectivity_labels(&self) -> &[CompId] {
        self.conn.as_ref().unwrap_or(&self.comps).labels()
    }

    pub fn split_mass(&self) -> u64 {
        self.comps.split_mass().max(self.conn.as_ref().map_or(0, |t| t.split_mass()))
    }

    pub fn certificate_len(&self) -> usize {
        self.engine.certificate_len()
    }

    pub fn stats(&self) -> EngineStats {
        self.engine.stats()
    }

    pub fn churn_bound(&self) -> u64 {
        self.engine.churn_bound()
    }

    pub fn log_lines(&self) -> Option<&[String]> {
        self.log.as_deref()
    }

    /// Removes one necessary certificate edge on purpose. Returns the edge,
    /// or `None` when no certificate edge is currently necessary.
    pub fn inject_fault(&mut self) -> Result<Option<EdgeId>> {
        let Some(e) = self.engine.fault_candidate() else { return Ok(None) };
        let delta = self.engine.inject_omission(e)?;
        self.apply(delta)?;
        Ok(Some(e))
    }

    pub fn self_check(&self) -> &SelfCheckReport {
        self.engine.self_check()
    }

    pub fn finalize(&mut self) -> FinalReport {
        FinalReport { check: self.engine.finalize(), anomalies: self.anomalies }
    }
}

fn join(vs: &[Vertex]) -> String {
    vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}
