//! Connected components under deletions and connectivity-preserving
//! insertions, reporting each split as (j, A) with A the smaller side.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::cut::CutOracle;
use crate::error::{Error, Result};
use crate::graph::{EdgeId, IndexedSubgraph, Vertex};
use crate::hdt::DynamicConnectivity;

pub type CompId = u32;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitEvent {
    /// Component that lost `a`; keeps its id.
    pub j: CompId,
    /// Id assigned to `a`.
    pub k: CompId,
    /// Vertices moved out, ascending.
    pub a: Vec<Vertex>,
    pub time: u64,
}

#[derive(Clone, Debug)]
pub struct ComponentTracker {
    dc: DynamicConnectivity,
    sub: IndexedSubgraph,
    q: Vec<CompId>,
    comps: Vec<BTreeSet<Vertex>>,
    split_log: Vec<SplitEvent>,
    split_mass: u64,
    time: u64,
}

impl ComponentTracker {
    /// Tracks the given edges; components are numbered by their lowest vertex.
    pub fn new(
        n: usize,
        endpoints: Arc<[(Vertex, Vertex)]>,
        edges: impl IntoIterator<Item = EdgeId>,
        seed: u64,
    ) -> Result<Self> {
        let mut dc = DynamicConnectivity::new(n, endpoints.clone(), seed);
        let mut sub = IndexedSubgraph::new(n, endpoints);
        for e in edges {
            sub.insert(e)?;
            dc.insert(e)?;
        }
        let mut q = vec![CompId::MAX; n];
        let mut comps = Vec::new();
        for v in 0..n as Vertex {
            if q[v as usize] != CompId::MAX {
                continue;
            }
            let id = comps.len() as CompId;
            let verts = dc.tree_vertices(v);
            for &x in &verts {
                q[x as usize] = id;
            }
            comps.push(verts.into_iter().collect());
        }
        Ok(ComponentTracker { dc, sub, q, comps, split_log: Vec::new(), split_mass: 0, time: 0 })
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn subgraph(&self) -> &IndexedSubgraph {
        &self.sub
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.sub.contains(e)
    }

    pub fn num_edges(&self) -> usize {
        self.sub.len()
    }

    pub fn incident(&self, v: Vertex) -> &[EdgeId] {
        self.sub.incident(v)
    }

    /// Adds an edge whose endpoints are already connected.
    pub fn insert(&mut self, e: EdgeId) -> Result<()> {
        if e.index() >= self.sub.edge_space() {
            return Err(Error::UnknownEdge(e));
        }
        let (u, v) = self.sub.endpoints(e);
        if self.q[u as usize] != self.q[v as usize] {
            return Err(Error::MergingInsert(e));
        }
        self.sub.insert(e)?;
        self.dc.insert(e)?;
        self.time += 1;
        Ok(())
    }

    pub fn delete(&mut self, e: EdgeId) -> Result<Option<SplitEvent>> {
        if !self.sub.contains(e) {
            return Err(Error::UnknownEdge(e));
        }
        self.sub.remove(e)?;
        self.time += 1;
        if !self.dc.delete(e)? {
            return Ok(None);
        }
        let (u, v) = self.sub.endpoints(e);
        let j = self.q[u as usize];
        let (su, sv) = (self.dc.tree_size(u), self.dc.tree_size(v));
        let side = if su != sv {
            if su < sv {
                u
            } else {
                v
            }
        } else {
            let lowest = *self.comps[j as usize].first().expect("component is nonempty");
            if self.dc.connected(lowest, u) {
                v
            } else {
                u
            }
        };
        let a = self.dc.tree_vertices(side);
        let k = self.comps.len() as CompId;
        let comp = &mut self.comps[j as usize];
        for &x in &a {
            comp.remove(&x);
            self.q[x as usize] = k;
        }
        self.comps.push(a.iter().copied().collect());
        self.split_mass += a.len() as u64;
        let ev = SplitEvent { j, k, a, time: self.time };
        self.split_log.push(ev.clone());
        Ok(Some(ev))
    }

    #[inline]
    pub fn component_id(&self, v: Vertex) -> CompId {
        self.q[v as usize]
    }

    #[inline]
    pub fn same_component(&self, u: Vertex, v: Vertex) -> bool {
        self.q[u as usize] == self.q[v as usize]
    }

    pub fn component_size(&self, id: CompId) -> Result<usize> {
        self.comps.get(id as usize).map(|c| c.len()).ok_or(Error::StaleComponent(id))
    }

    pub fn component_vertices(&self, id: CompId) -> Result<Vec<Vertex>> {
        self.comps.get(id as usize).map(|c| c.iter().copied().collect()).ok_or(Error::StaleComponent(id))
    }

    pub fn component_set(&self, id: CompId) -> &BTreeSet<Vertex> {
        &self.comps[id as usize]
    }

    pub fn num_components(&self) -> usize {
        self.comps.len()
    }

    pub fn split_log(&self) -> &[SplitEvent] {
        &self.split_log
    }

    pub fn split_mass(&self) -> u64 {
        self.split_mass
    }

    /// Deterministic ceiling on the total split mass for n vertices.
    pub fn split_mass_bound(n: usize) -> u64 {
        n as u64 * (1 + crate::random::ceil_log2(n) as u64)
    }

    pub fn labels(&self) -> &[CompId] {
        &self.q
    }
}

/// Deletes edges on < c cuts until every component touched by `scope` is
/// c-edge-connected. Each removal is reported with its split event, if any.
pub fn prune_to_c_components(
    tracker: &mut ComponentTracker,
    oracle: &mut dyn CutOracle,
    scope: &[Vertex],
    mut on_removed: impl FnMut(EdgeId, Option<&SplitEvent>) -> Result<()>,
) -> Result<usize> {
    let mut removed = 0;
    let mut scope: Vec<Vertex> = scope.to_vec();
    scope.sort_unstable();
    scope.dedup();
    loop {
        let cut = oracle.cut_edges(tracker.subgraph(), &scope);
        if cut.is_empty() {
            return Ok(removed);
        }
        scope.clear();
        for e in cut {
            let (u, v) = tracker.subgraph().endpoints(e);
            scope.push(u);
            scope.push(v);
            let ev = tracker.delete(e)?;
            removed += 1;
            on_removed(e, ev.as_ref())?;
        }
        scope.sort_unstable();
        scope.dedup();
    }
}
