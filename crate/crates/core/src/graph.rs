//! Undirected multigraph with stable edge ids and cheap subgraph views.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub type Vertex = u32;

/// Index of an edge in the original input list.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub u32);

impl EdgeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

const NO_SLOT: u32 = u32::MAX;

/// Fixed-universe bitset over edge ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubgraphMask {
    words: Vec<u64>,
    universe: usize,
    count: usize,
}

impl SubgraphMask {
    pub fn empty(universe: usize) -> Self {
        SubgraphMask { words: vec![0; universe.div_ceil(64)], universe, count: 0 }
    }

    pub fn full(universe: usize) -> Self {
        let mut mask = Self::empty(universe);
        for i in 0..universe {
            mask.insert(EdgeId(i as u32));
        }
        mask
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    #[inline]
    pub fn contains(&self, e: EdgeId) -> bool {
        let i = e.index();
        i < self.universe && self.words[i >> 6] >> (i & 63) & 1 == 1
    }

    /// Returns true if the edge was newly added.
    pub fn insert(&mut self, e: EdgeId) -> bool {
        let i = e.index();
        assert!(i < self.universe, "{e} outside mask universe {}", self.universe);
        let bit = 1u64 << (i & 63);
        if self.words[i >> 6] & bit != 0 {
            return false;
        }
        self.words[i >> 6] |= bit;
        self.count += 1;
        true
    }

    /// Returns true if the edge was present.
    pub fn remove(&mut self, e: EdgeId) -> bool {
        let i = e.index();
        if i >= self.universe {
            return false;
        }
        let bit = 1u64 << (i & 63);
        if self.words[i >> 6] & bit == 0 {
            return false;
        }
        self.words[i >> 6] &= !bit;
        self.count -= 1;
        true
    }

    pub fn iter(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let t = bits.trailing_zeros();
                bits &= bits - 1;
                Some(EdgeId((w as u32) * 64 + t))
            })
        })
    }

    pub fn is_subset_of(&self, other: &SubgraphMask) -> bool {
        self.words.iter().zip(other.words.iter()).all(|(a, b)| a & !b == 0)
    }
}

/// Edge subset with per-vertex incidence lists and O(1) insert/remove.
#[derive(Clone, Debug)]
pub struct IndexedSubgraph {
    endpoints: Arc<[(Vertex, Vertex)]>,
    adj: Vec<Vec<EdgeId>>,
    // position of the edge inside adj[u] and adj[v]
    slots: Vec<[u32; 2]>,
    len: usize,
}

impl IndexedSubgraph {
    pub fn new(n: usize, endpoints: Arc<[(Vertex, Vertex)]>) -> Self {
        let m = endpoints.len();
        IndexedSubgraph { endpoints, adj: vec![Vec::new(); n], slots: vec![[NO_SLOT; 2]; m], len: 0 }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn edge_space(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn endpoints(&self, e: EdgeId) -> (Vertex, Vertex) {
        self.endpoints[e.index()]
    }

    #[inline]
    pub fn contains(&self, e: EdgeId) -> bool {
        self.slots.get(e.index()).is_some_and(|s| s[0] != NO_SLOT)
    }

    pub fn insert(&mut self, e: EdgeId) -> Result<()> {
        if e.index() >= self.slots.len() {
            return Err(Error::UnknownEdge(e));
        }
        if self.contains(e) {
            return Err(Error::DuplicateEdge(e));
        }
        let (u, v) = self.endpoints(e);
        let su = self.adj[u as usize].len() as u32;
        self.adj[u as usize].push(e);
        let sv = self.adj[v as usize].len() as u32;
        self.adj[v as usize].push(e);
        self.slots[e.index()] = [su, sv];
        self.len += 1;
        Ok(())
    }

    pub fn remove(&mut self, e: EdgeId) -> Result<()> {
        if !self.contains(e) {
            return Err(Error::UnknownEdge(e));
        }
        let (u, v) = self.endpoints(e);
        let [su, sv] = self.slots[e.index()];
        self.detach(u, su);
        self.detach(v, sv);
        self.slots[e.index()] = [NO_SLOT; 2];
        self.len -= 1;
        Ok(())
    }

    fn detach(&mut self, x: Vertex, slot: u32) {
        let list = &mut self.adj[x as usize];
        list.swap_remove(slot as usize);
        if let Some(&moved) = list.get(slot as usize) {
            let (a, _) = self.endpoints[moved.index()];
            let s = &mut self.slots[moved.index()];
            // the side index is fixed by which endpoint x is
            if a == x {
                s[0] = slot;
            } else {
                s[1] = slot;
            }
        }
    }

    #[inline]
    pub fn incident(&self, v: Vertex) -> &[EdgeId] {
        &self.adj[v as usize]
    }

    #[inline]
    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v as usize].len()
    }

    /// Edges in ascending id order.
    pub fn edges(&self) -> Vec<EdgeId> {
        let mut out: Vec<EdgeId> =
            (0..self.slots.len()).filter(|&i| self.slots[i][0] != NO_SLOT).map(|i| EdgeId(i as u32)).collect();
        out.sort_unstable();
        out
    }
}

/// The host graph G. Strictly decremental after loading.
#[derive(Clone, Debug)]
pub struct DynamicGraph {
    n: usize,
    endpoints: Arc<[(Vertex, Vertex)]>,
    alive: SubgraphMask,
    adj: IndexedSubgraph,
}

impl DynamicGraph {
    pub fn load(n: usize, edge_list: &[(Vertex, Vertex)]) -> Result<Self> {
        for (index, &(u, v)) in edge_list.iter().enumerate() {
            for x in [u, v] {
                if x as usize >= n {
                    return Err(Error::VertexOutOfRange { index, vertex: x, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop { index, vertex: u });
            }
        }
        let endpoints: Arc<[(Vertex, Vertex)]> = edge_list.into();
        let m = endpoints.len();
        let mut adj = IndexedSubgraph::new(n, endpoints.clone());
        for i in 0..m {
            adj.insert(EdgeId(i as u32))?;
        }
        Ok(DynamicGraph { n, endpoints, alive: SubgraphMask::full(m), adj })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Size of the edge id space, including dead edges.
    pub fn m(&self) -> usize {
        self.endpoints.len()
    }

    pub fn m_alive(&self) -> usize {
        self.alive.len()
    }

    pub fn edge_table(&self) -> Arc<[(Vertex, Vertex)]> {
        self.endpoints.clone()
    }

    #[inline]
    pub fn endpoints(&self, e: EdgeId) -> (Vertex, Vertex) {
        self.endpoints[e.index()]
    }

    #[inline]
    pub fn is_alive(&self, e: EdgeId) -> bool {
        self.alive.contains(e)
    }

    pub fn alive_mask(&self) -> &SubgraphMask {
        &self.alive
    }

    pub fn delete(&mut self, e: EdgeId) -> Result<()> {
        if e.index() >= self.m() {
            return Err(Error::UnknownEdge(e));
        }
        if !self.alive.remove(e) {
            return Err(Error::DeadEdge(e));
        }
        self.adj.remove(e)
    }

    pub fn incident(&self, v: Vertex) -> &[EdgeId] {
        self.adj.incident(v)
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adj.degree(v)
    }

    /// Alive edges of `mask` incident to `v`, parallel edges counted separately.
    pub fn degree_in(&self, mask: &SubgraphMask, v: Vertex) -> usize {
        self.incident(v).iter().filter(|&&e| mask.contains(e)).count()
    }

    /// Alive edges of `mask` with exactly one endpoint in `s`, ascending.
    pub fn boundary_scan(&self, mask: &SubgraphMask, s: &[Vertex]) -> Vec<EdgeId> {
        let mut inside = vec![false; self.n];
        for &v in s {
            inside[v as usize] = true;
        }
        let mut out = Vec::new();
        for &v in s {
            for &e in self.incident(v) {
                if !mask.contains(e) {
                    continue;
                }
                let (a, b) = self.endpoints(e);
                let w = if a == v { b } else { a };
                if !inside[w as usize] {
                    out.push(e);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn alive_edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.alive.iter()
    }
}
