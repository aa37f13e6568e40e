//! Fully dynamic connectivity with edge levels over Euler-tour forests.
//!
//! Forest i holds the tree edges of level >= i. A tree edge of level exactly
//! i carries `TREE_HERE` on one of its forest-i arcs, and a vertex with
//! level-i non-tree edges carries `NONTREE_HERE` in forest i.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ett::EulerForest;
use crate::graph::{EdgeId, Vertex};
use crate::random::splitmix64;

const NONTREE_HERE: u8 = 1;
const TREE_HERE: u8 = 2;
const ABSENT: u8 = u8::MAX;

#[derive(Clone, Copy, Debug)]
struct EdgeState {
    level: u8,
    tree: bool,
    // positions in nontree[level][u], nontree[level][v]
    slot: [u32; 2],
}

const NO_EDGE: EdgeState = EdgeState { level: ABSENT, tree: false, slot: [0; 2] };

#[derive(Clone, Debug)]
pub struct DynamicConnectivity {
    endpoints: Arc<[(Vertex, Vertex)]>,
    forests: Vec<EulerForest>,
    state: Vec<EdgeState>,
    nontree: Vec<Vec<Vec<EdgeId>>>,
    arcs: HashMap<(u32, u8), (u32, u32)>,
    len: usize,
    // replacement-search work counter
    scans: u64,
}

impl DynamicConnectivity {
    pub fn new(n: usize, endpoints: Arc<[(Vertex, Vertex)]>, seed: u64) -> Self {
        let levels = (usize::BITS - n.max(1).leading_zeros()) as usize + 1;
        let forests = (0..levels).map(|i| EulerForest::new(n, splitmix64(seed ^ i as u64))).collect();
        DynamicConnectivity {
            state: vec![NO_EDGE; endpoints.len()],
            endpoints,
            forests,
            nontree: vec![vec![Vec::new(); n]; levels],
            arcs: HashMap::new(),
            len: 0,
            scans: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.state.get(e.index()).is_some_and(|s| s.level != ABSENT)
    }

    pub fn scans(&self) -> u64 {
        self.scans
    }

    pub fn connected(&self, u: Vertex, v: Vertex) -> bool {
        self.forests[0].connected(u, v)
    }

    pub fn tree_size(&self, v: Vertex) -> usize {
        self.forests[0].tree_size(v)
    }

    pub fn tree_vertices(&self, v: Vertex) -> Vec<Vertex> {
        self.forests[0].tree_vertices(v)
    }

    pub fn is_tree_edge(&self, e: EdgeId) -> bool {
        self.contains(e) && self.state[e.index()].tree
    }

    pub fn insert(&mut self, e: EdgeId) -> Result<()> {
        if e.index() >= self.state.len() {
            return Err(Error::UnknownEdge(e));
        }
        if self.contains(e) {
            return Err(Error::DuplicateEdge(e));
        }
        let (u, v) = self.endpoints[e.index()];
        if self.connected(u, v) {
            self.add_nontree(e, 0);
        } else {
            self.state[e.index()] = EdgeState { level: 0, tree: true, slot: [0; 2] };
            self.link_level(e, 0, true);
        }
        self.len += 1;
        Ok(())
    }

    /// Removes `e`. Returns true if the deletion disconnected its endpoints.
    pub fn delete(&mut self, e: EdgeId) -> Result<bool> {
        if !self.contains(e) {
            return Err(Error::UnknownEdge(e));
        }
        self.len -= 1;
        let st = self.state[e.index()];
        if !st.tree {
            self.remove_nontree(e);
            self.state[e.index()] = NO_EDGE;
            return Ok(false);
        }
        let level = st.level as usize;
        for i in 0..=level {
            let (a, b) = self.arcs.remove(&(e.0, i as u8)).expect("tree edge arcs");
            self.forests[i].cut(a, b);
        }
        self.state[e.index()] = NO_EDGE;
        let (u, v) = self.endpoints[e.index()];
        for i in (0..=level).rev() {
            if self.replace(u, v, i) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn link_level(&mut self, e: EdgeId, i: usize, mark: bool) {
        let (u, v) = self.endpoints[e.index()];
        let (a, b) = self.forests[i].link(u, v, e.0);
        if mark {
            self.forests[i].set_flag(a, TREE_HERE, true);
        }
        self.arcs.insert((e.0, i as u8), (a, b));
    }

    fn add_nontree(&mut self, e: EdgeId, level: usize) {
        let (u, v) = self.endpoints[e.index()];
        let su = self.nontree[level][u as usize].len() as u32;
        self.nontree[level][u as usize].push(e);
        let sv = self.nontree[level][v as usize].len() as u32;
        self.nontree[level][v as usize].push(e);
        self.state[e.index()] = EdgeState { level: level as u8, tree: false, slot: [su, sv] };
        self.forests[level].set_flag(u, NONTREE_HERE, true);
        self.forests[level].set_flag(v, NONTREE_HERE, true);
    }

    fn remove_nontree(&mut self, e: EdgeId) {
        let st = self.state[e.index()];
        let level = st.level as usize;
        let (u, v) = self.endpoints[e.index()];
        for (side, x) in [(0, u), (1, v)] {
            let list = &mut self.nontree[level][x as usize];
            let slot = st.slot[side] as usize;
            list.swap_remove(slot);
            if let Some(&moved) = list.get(slot) {
                let (a, _) = self.endpoints[moved.index()];
                let k = if a == x { 0 } else { 1 };
                self.state[moved.index()].slot[k] = slot as u32;
            }
            if list.is_empty() {
                self.forests[level].set_flag(x, NONTREE_HERE, false);
            }
        }
    }

    /// Searches level i for a replacement edge between the trees of u and v.
    fn replace(&mut self, u: Vertex, v: Vertex, i: usize) -> bool {
        let (small, _) = if self.forests[i].tree_size(u) <= self.forests[i].tree_size(v) { (u, v) } else { (v, u) };

        // push the smaller tree's level-i tree edges up one level
        let mut hits = Vec::new();
        self.forests[i].flagged_in_tree(small, TREE_HERE, &mut hits);
        let mut promote: Vec<EdgeId> = hits.iter().map(|&x| EdgeId(self.forests[i].tag(x))).collect();
        promote.sort_unstable();
        for &x in &hits {
            self.forests[i].set_flag(x, TREE_HERE, false);
        }
        for f in promote {
            self.state[f.index()].level = (i + 1) as u8;
            self.link_level(f, i + 1, true);
        }

        hits.clear();
        self.forests[i].flagged_in_tree(small, NONTREE_HERE, &mut hits);
        hits.sort_unstable();
        for x in hits {
            while let Some(&f) = self.nontree[i][x as usize].last() {
                self.scans += 1;
                let (a, b) = self.endpoints[f.index()];
                let other = if a == x { b } else { a };
                self.remove_nontree(f);
                if self.forests[i].connected(other, small) {
                    self.add_nontree(f, i + 1);
                } else {
                    self.state[f.index()] = EdgeState { level: i as u8, tree: true, slot: [0; 2] };
                    for k in 0..=i {
                        self.link_level(f, k, k == i);
                    }
                    return true;
                }
            }
        }
        false
    }

    /// Debug audit: forest-0 components agree with a DFS over stored edges.
    #[cfg(test)]
    pub(crate) fn audit_levels(&self) {
        for (idx, st) in self.state.iter().enumerate() {
            if st.level == ABSENT {
                continue;
            }
            let (u, v) = self.endpoints[idx];
            for i in 0..=st.level as usize {
                assert!(self.forests[i].connected(u, v), "edge {idx} level {} not connected in forest {i}", st.level);
            }
            if st.tree {
                assert!(self.arcs.contains_key(&(idx as u32, st.level)));
            }
        }
        for (i, f) in self.forests.iter().enumerate() {
            for v in 0..self.nontree[i].len() {
                assert!(f.tree_size(v as u32) <= (self.nontree[i].len() >> i).max(1));
            }
        }
    }
}
