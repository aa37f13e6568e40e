//! Component boundaries: exact per-component lists, and the small-boundary
//! family that stores a boundary only while a sampled subgraph says it is
//! small.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, IndexedSubgraph, Vertex};
use crate::sketch::XorBoundarySketch;
use crate::tracker::{CompId, SplitEvent};

const NONE: u32 = u32::MAX;

/// L(C) for every component C of a partition, over one edge set.
///
/// Each list entry remembers which endpoint of the edge lies in C, so list
/// surgery never has to consult the partition.
#[derive(Clone, Debug, Default)]
pub struct ExactBoundary {
    lists: Vec<Vec<(EdgeId, u8)>>,
    slots: Vec<[u32; 2]>,
    work: u64,
}

impl ExactBoundary {
    pub fn new(m: usize, components: usize) -> Self {
        ExactBoundary { lists: vec![Vec::new(); components], slots: vec![[NONE; 2]; m], work: 0 }
    }

    fn ensure(&mut self, c: CompId) {
        if self.lists.len() <= c as usize {
            self.lists.resize(c as usize + 1, Vec::new());
        }
    }

    fn push(&mut self, c: CompId, e: EdgeId, side: u8) {
        self.ensure(c);
        let list = &mut self.lists[c as usize];
        self.slots[e.index()][side as usize] = list.len() as u32;
        list.push((e, side));
        self.work += 1;
    }

    fn take(&mut self, c: CompId, e: EdgeId, side: u8) -> Result<()> {
        let pos = self.slots[e.index()][side as usize];
        let list = self.lists.get_mut(c as usize).ok_or(Error::StaleComponent(c))?;
        if pos == NONE || list.get(pos as usize) != Some(&(e, side)) {
            return Err(Error::Corruption(format!("stale boundary slot for {e} in component {c}")));
        }
        list.swap_remove(pos as usize);
        if let Some(&(moved, ms)) = list.get(pos as usize) {
            self.slots[moved.index()][ms as usize] = pos;
        }
        self.slots[e.index()][side as usize] = NONE;
        self.work += 1;
        Ok(())
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.slots[e.index()][0] != NONE
    }

    /// Records a new edge. Returns the two components whose lists grew.
    pub fn on_edge_inserted(&mut self, e: EdgeId, ends: (Vertex, Vertex), q: &[CompId]) -> Option<(CompId, CompId)> {
        let (cu, cv) = (q[ends.0 as usize], q[ends.1 as usize]);
        if cu == cv {
            return None;
        }
        self.push(cu, e, 0);
        self.push(cv, e, 1);
        Some((cu, cv))
    }

    /// Forgets an edge. Returns the two components whose lists shrank.
    pub fn on_edge_deleted(
        &mut self,
        e: EdgeId,
        ends: (Vertex, Vertex),
        q: &[CompId],
    ) -> Result<Option<(CompId, CompId)>> {
        if !self.contains(e) {
            return Ok(None);
        }
        let (cu, cv) = (q[ends.0 as usize], q[ends.1 as usize]);
        self.take(cu, e, 0)?;
        self.take(cv, e, 1)?;
        Ok(Some((cu, cv)))
    }

    /// Updates the lists after `ev`; `q` already reflects the split. Only
    /// edges of `adj` accepted by `keep` are considered.
    pub fn on_split(
        &mut self,
        ev: &SplitEvent,
        q: &[CompId],
        adj: &IndexedSubgraph,
        keep: impl Fn(EdgeId) -> bool,
    ) -> Result<()> {
        self.ensure(ev.k);
        for &x in &ev.a {
            for &e in adj.incident(x) {
                self.work += 1;
                if !keep(e) {
                    continue;
                }
                let (a, b) = adj.endpoints(e);
                let (side, y) = if a == x { (0u8, b) } else { (1u8, a) };
                let qy = q[y as usize];
                if qy == ev.k {
                    continue;
                }
                if qy == ev.j {
                    self.push(ev.j, e, 1 - side);
                    self.push(ev.k, e, side);
                } else {
                    self.take(ev.j, e, side)?;
                    self.push(ev.k, e, side);
                }
            }
        }
        Ok(())
    }

    pub fn len(&self, c: CompId) -> usize {
        self.lists.get(c as usize).map_or(0, |l| l.len())
    }

    pub fn edges(&self, c: CompId) -> Vec<EdgeId> {
        let mut out: Vec<EdgeId> = self.lists.get(c as usize).map_or(Vec::new(), |l| l.iter().map(|p| p.0).collect());
        out.sort_unstable();
        out
    }

    pub fn nonempty_components(&self) -> Vec<CompId> {
        (0..self.lists.len() as CompId).filter(|&c| !self.lists[c as usize].is_empty()).collect()
    }

    pub fn work(&self) -> u64 {
        self.work
    }
}

pub type SetId = u32;

#[derive(Clone, Debug)]
pub struct SetRecord {
    /// Position interval in the level's vertex layout.
    pub lo: u32,
    pub hi: u32,
    pub boundary: BTreeSet<EdgeId>,
}

/// Outcome of computing a newly small component's boundary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BecameSmall {
    pub comp: CompId,
    pub set: SetId,
    pub boundary: Vec<EdgeId>,
    /// True when the symmetric-difference route was taken.
    pub via_parent: bool,
    pub scanned: u64,
}

/// Small-boundary bookkeeping for one level.
///
/// Vertices are laid out so that every component, past or present, occupies
/// a contiguous position interval; a split moves the smaller side to the end
/// of its parent's interval. That makes s(C) \ C two intervals.
#[derive(Clone, Debug)]
pub struct SmallBoundaryLevel {
    pub r_bnd: ExactBoundary,
    order: Vec<Vertex>,
    pos: Vec<u32>,
    comp_range: Vec<(u32, u32)>,
    sets: Vec<SetRecord>,
    comp_member: Vec<Option<SetId>>,
    comp_parent: Vec<SetId>,
    set_comp: Vec<Option<CompId>>,
    threshold: f64,
    queries: u64,
    parent_route: u64,
}

impl SmallBoundaryLevel {
    /// `comps` lists the current components by id. The whole vertex set is
    /// registered as set 0 with an empty boundary.
    pub fn new(n: usize, m: usize, comps: &[Vec<Vertex>], threshold: f64) -> Self {
        let mut order = Vec::with_capacity(n);
        let mut comp_range = Vec::with_capacity(comps.len());
        for c in comps {
            let lo = order.len() as u32;
            order.extend_from_slice(c);
            comp_range.push((lo, order.len() as u32));
        }
        let mut pos = vec![0u32; n];
        for (i, &v) in order.iter().enumerate() {
            pos[v as usize] = i as u32;
        }
        let root = SetRecord { lo: 0, hi: n as u32, boundary: BTreeSet::new() };
        let mut comp_member = vec![None; comps.len()];
        let mut set_comp = vec![None];
        if comps.len() == 1 && n > 0 {
            comp_member[0] = Some(0);
            set_comp[0] = Some(0);
        }
        SmallBoundaryLevel {
            r_bnd: ExactBoundary::new(m, comps.len()),
            order,
            pos,
            comp_range,
            sets: vec![root],
            comp_member,
            comp_parent: vec![0; comps.len()],
            set_comp,
            threshold,
            queries: 0,
            parent_route: 0,
        }
    }

    pub fn is_small(&self, c: CompId) -> bool {
        (self.r_bnd.len(c) as f64) <= self.threshold
    }

    pub fn member(&self, c: CompId) -> Option<SetId> {
        self.comp_member.get(c as usize).copied().flatten()
    }

    pub fn parent(&self, c: CompId) -> SetId {
        self.comp_parent[c as usize]
    }

    pub fn set(&self, s: SetId) -> &SetRecord {
        &self.sets[s as usize]
    }

    pub fn set_mut(&mut self, s: SetId) -> &mut SetRecord {
        &mut self.sets[s as usize]
    }

    pub fn num_sets(&self) -> usize {
        self.sets.len()
    }

    pub fn set_vertices(&self, s: SetId) -> Vec<Vertex> {
        let r = &self.sets[s as usize];
        let mut v = self.order[r.lo as usize..r.hi as usize].to_vec();
        v.sort_unstable();
        v
    }

    pub fn current_component_of_set(&self, s: SetId) -> Option<CompId> {
        self.set_comp[s as usize]
    }

    pub fn stored_boundary(&self, c: CompId) -> Option<&BTreeSet<EdgeId>> {
        self.member(c).map(|s| &self.sets[s as usize].boundary)
    }

    pub fn queries(&self) -> u64 {
        self.queries
    }

    pub fn parent_route_count(&self) -> u64 {
        self.parent_route
    }

    /// Moves the split-off vertices to the tail of their old interval and
    /// assigns parents per the family rule.
    pub fn on_split(&mut self, ev: &SplitEvent) {
        let (lo, hi) = self.comp_range[ev.j as usize];
        let cut = hi - ev.a.len() as u32;
        let mut tail = cut;
        let in_a = |v: Vertex, a: &[Vertex]| a.binary_search(&v).is_ok();
        for &v in &ev.a {
            let p = self.pos[v as usize];
            if p >= cut {
                continue;
            }
            while in_a(self.order[tail as usize], &ev.a) {
                tail += 1;
            }
            let w = self.order[tail as usize];
            self.order.swap(p as usize, tail as usize);
            self.pos[v as usize] = tail;
            self.pos[w as usize] = p;
            tail += 1;
        }
        let k = ev.k as usize;
        if self.comp_range.len() <= k {
            self.comp_range.resize(k + 1, (0, 0));
            self.comp_member.resize(k + 1, None);
            self.comp_parent.resize(k + 1, 0);
        }
        self.comp_range[ev.j as usize] = (lo, cut);
        self.comp_range[k] = (cut, hi);
        let parent = match self.comp_member[ev.j as usize].take() {
            Some(s) => {
                self.set_comp[s as usize] = None;
                s
            }
            None => self.comp_parent[ev.j as usize],
        };
        self.comp_parent[ev.j as usize] = parent;
        self.comp_parent[k] = parent;
    }

    /// Computes and stores the boundary of a component that just became
    /// small. The answer is stored as returned even if it looks wrong.
    pub fn become_small(&mut self, c: CompId, sketch: &mut XorBoundarySketch) -> BecameSmall {
        let (lo, hi) = self.comp_range[c as usize];
        let par = self.comp_parent[c as usize];
        let SetRecord { lo: plo, hi: phi, .. } = self.sets[par as usize];
        let size = hi - lo;
        self.queries += 1;
        let (boundary, via_parent, scanned) = if 2 * size <= phi - plo {
            let ans = sketch.find_boundary(&self.order[lo as usize..hi as usize]);
            (ans.edges.into_iter().collect::<BTreeSet<_>>(), false, ans.scanned)
        } else {
            self.parent_route += 1;
            let mut rest: Vec<Vertex> = self.order[plo as usize..lo as usize].to_vec();
            rest.extend_from_slice(&self.order[hi as usize..phi as usize]);
            let ans = sketch.find_boundary(&rest);
            let other: BTreeSet<EdgeId> = ans.edges.into_iter().collect();
            let b = self.sets[par as usize].boundary.symmetric_difference(&other).copied().collect();
            (b, true, ans.scanned)
        };
        let sid = self.sets.len() as SetId;
        let list: Vec<EdgeId> = boundary.iter().copied().collect();
        self.sets.push(SetRecord { lo, hi, boundary });
        self.set_comp.push(Some(c));
        self.comp_member[c as usize] = Some(sid);
        BecameSmall { comp: c, set: sid, boundary: list, via_parent, scanned }
    }

    /// Laminarity and interval sanity; test support.
    pub fn check_layout(&self, comp_vertices: impl Fn(CompId) -> Vec<Vertex>) -> Result<()> {
        for (c, &(lo, hi)) in self.comp_range.iter().enumerate() {
            let mut got = self.order[lo as usize..hi as usize].to_vec();
            got.sort_unstable();
            if got != comp_vertices(c as CompId) {
                return Err(Error::Corruption(format!("component {c} is not its layout interval")));
            }
            let p = &self.sets[self.comp_parent[c] as usize];
            if !(p.lo <= lo && hi <= p.hi) {
                return Err(Error::Corruption(format!("component {c} escapes its parent set")));
            }
        }
        for a in &self.sets {
            for b in &self.sets {
                let disjoint = a.hi <= b.lo || b.hi <= a.lo;
                let nested = (a.lo <= b.lo && b.hi <= a.hi) || (b.lo <= a.lo && a.hi <= b.hi);
                if !(disjoint || nested) {
                    return Err(Error::Corruption("stored sets are not laminar".into()));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::DynamicGraph;
    use crate::oracle::{boundary_by_edges, OracleGraph};
    use crate::tracker::ComponentTracker;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn two_triangles() -> DynamicGraph {
        DynamicGraph::load(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (2, 3)]).unwrap()
    }

    #[test]
    fn split_isolating_triangle() {
        let g = two_triangles();
        let mut t = ComponentTracker::new(6, g.edge_table(), (0..7).map(EdgeId), 1).unwrap();
        let mut adj = IndexedSubgraph::new(6, g.edge_table());
        for e in 0..7 {
            adj.insert(EdgeId(e)).unwrap();
        }
        let mut b = ExactBoundary::new(7, 1);
        for e in 0..7 {
            b.on_edge_inserted(EdgeId(e), g.endpoints(EdgeId(e)), t.labels());
        }
        assert_eq!(b.len(0), 0);
        // tracker holds only the triangles; the bar is boundary once they split
        let ev = t.delete(EdgeId(6)).unwrap().unwrap();
        b.on_split(&ev, t.labels(), &adj, |_| true).unwrap();
        assert_eq!(b.edges(ev.j), vec![EdgeId(6)]);
        assert_eq!(b.edges(ev.k), vec![EdgeId(6)]);
        assert_eq!(b.on_edge_deleted(EdgeId(6), g.endpoints(EdgeId(6)), t.labels()).unwrap(), Some((ev.j, ev.k)));
        assert_eq!(b.len(ev.j) + b.len(ev.k), 0);
        assert_eq!(b.on_edge_deleted(EdgeId(0), g.endpoints(EdgeId(0)), t.labels()).unwrap(), None);
    }

    #[test]
    fn isolated_split_side_has_empty_list() {
        let g = DynamicGraph::load(3, &[(0, 1), (1, 2)]).unwrap();
        let mut t = ComponentTracker::new(3, g.edge_table(), [EdgeId(0), EdgeId(1)], 1).unwrap();
        let adj = IndexedSubgraph::new(3, g.edge_table());
        let mut b = ExactBoundary::new(2, 1);
        let ev = t.delete(EdgeId(1)).unwrap().unwrap();
        b.on_split(&ev, t.labels(), &adj, |_| true).unwrap();
        assert_eq!(b.len(ev.k), 0);
    }

    // Random interleavings of edge changes and splits, every list compared
    // with a direct recount after each step.
    #[test]
    fn lists_match_direct_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..40 {
            let n = rng.random_range(2..50usize);
            let m = rng.random_range(1..4 * n);
            let pairs: Vec<(u32, u32)> = (0..m)
                .map(|_| loop {
                    let u = rng.random_range(0..n as u32);
                    let v = rng.random_range(0..n as u32);
                    if u != v {
                        break (u, v);
                    }
                })
                .collect();
            let g = DynamicGraph::load(n, &pairs).unwrap();
            // partition edges: tracked ones shape components, boundary ones are measured
            let mut tracked = Vec::new();
            let mut measured = Vec::new();
            for e in 0..m as u32 {
                if rng.random_bool(0.5) {
                    tracked.push(EdgeId(e));
                } else {
                    measured.push(EdgeId(e));
                }
            }
            let mut t = ComponentTracker::new(n, g.edge_table(), tracked.iter().copied(), 3).unwrap();
            let mut adj = IndexedSubgraph::new(n, g.edge_table());
            let mut b = ExactBoundary::new(m, t.num_components());
            let mut live: Vec<EdgeId> = Vec::new();
            measured.shuffle(&mut rng);
            let mut ops: Vec<(bool, EdgeId)> = tracked.iter().map(|&e| (true, e)).collect();
            ops.extend(measured.iter().map(|&e| (false, e)));
            ops.shuffle(&mut rng);
            for (is_tracked, e) in ops {
                if is_tracked {
                    if let Some(ev) = t.delete(e).unwrap() {
                        b.on_split(&ev, t.labels(), &adj, |_| true).unwrap();
                    }
                } else if live.contains(&e) || rng.random_bool(0.3) {
                    if let Some(i) = live.iter().position(|&f| f == e) {
                        live.swap_remove(i);
                        adj.remove(e).unwrap();
                        b.on_edge_deleted(e, g.endpoints(e), t.labels()).unwrap();
                    }
                } else {
                    live.push(e);
                    adj.insert(e).unwrap();
                    b.on_edge_inserted(e, g.endpoints(e), t.labels());
                }
                let og = OracleGraph { n, edges: live.iter().map(|&f| (f, g.endpoints(f).0, g.endpoints(f).1)).collect() };
                for c in 0..t.num_components() as CompId {
                    let verts = t.component_vertices(c).unwrap();
                    assert_eq!(b.edges(c), boundary_by_edges(&og, &verts));
                }
            }
        }
    }

    #[test]
    fn layout_stays_laminar() {
        let n = 16;
        let pairs: Vec<(u32, u32)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        let g = DynamicGraph::load(n as usize, &pairs).unwrap();
        let mut t = ComponentTracker::new(n as usize, g.edge_table(), (0..n - 1).map(EdgeId), 1).unwrap();
        let comps: Vec<Vec<u32>> = (0..t.num_components() as u32).map(|c| t.component_vertices(c).unwrap()).collect();
        let mut lvl = SmallBoundaryLevel::new(n as usize, pairs.len(), &comps, 1.0);
        assert_eq!(lvl.member(0), Some(0));
        let mut order: Vec<u32> = (0..n - 1).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(2));
        for e in order {
            let ev = t.delete(EdgeId(e)).unwrap().unwrap();
            lvl.on_split(&ev);
            lvl.check_layout(|c| t.component_vertices(c).unwrap()).unwrap();
        }
    }
}
