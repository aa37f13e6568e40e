//! Recompute-per-query oracle exposing edges on small cuts.

use crate::graph::{EdgeId, IndexedSubgraph, Vertex};

pub trait CutOracle {
    fn threshold(&self) -> u32;

    /// Edges of `sub` that lie on a cut of size < c of their own connected
    /// component, looking only at components containing a vertex of
    /// `scope`. Returns an empty list iff all those components are
    /// c-edge-connected. Ascending ids.
    fn cut_edges(&mut self, sub: &IndexedSubgraph, scope: &[Vertex]) -> Vec<EdgeId>;

    /// Number of edge visits performed so far.
    fn work(&self) -> u64;
}

pub fn naive_cut_oracle(c: u32, n: usize) -> Box<dyn CutOracle + Send> {
    Box::new(NaiveCutOracle::new(c, n))
}

#[derive(Clone, Debug)]
pub struct NaiveCutOracle {
    c: u32,
    seen: Vec<u32>,
    epoch: u32,
    low: Vec<u32>,
    disc: Vec<u32>,
    work: u64,
}

impl NaiveCutOracle {
    pub fn new(c: u32, n: usize) -> Self {
        NaiveCutOracle { c, seen: vec![0; n], epoch: 0, low: vec![0; n], disc: vec![0; n], work: 0 }
    }

    fn next_epoch(&mut self) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.seen.fill(0);
            self.epoch = 1;
        }
    }

    fn bridges(&mut self, sub: &IndexedSubgraph, scope: &[Vertex]) -> Vec<EdgeId> {
        self.next_epoch();
        let mut out = Vec::new();
        let mut timer = 0u32;
        // (vertex, edge used to enter, next incidence index)
        let mut stack: Vec<(Vertex, Option<EdgeId>, usize)> = Vec::new();
        for &root in scope {
            if self.seen[root as usize] == self.epoch {
                continue;
            }
            self.seen[root as usize] = self.epoch;
            self.disc[root as usize] = timer;
            self.low[root as usize] = timer;
            timer += 1;
            stack.push((root, None, 0));
            while let Some(top) = stack.last_mut() {
                let (x, via, idx) = *top;
                let inc = sub.incident(x);
                if idx < inc.len() {
                    top.2 += 1;
                    let e = inc[idx];
                    self.work += 1;
                    if Some(e) == via {
                        continue;
                    }
                    let (a, b) = sub.endpoints(e);
                    let y = if a == x { b } else { a };
                    if self.seen[y as usize] == self.epoch {
                        self.low[x as usize] = self.low[x as usize].min(self.disc[y as usize]);
                    } else {
                        self.seen[y as usize] = self.epoch;
                        self.disc[y as usize] = timer;
                        self.low[y as usize] = timer;
                        timer += 1;
                        stack.push((y, Some(e), 0));
                    }
                } else {
                    stack.pop();
                    if let (Some(e), Some(parent)) = (via, stack.last()) {
                        let p = parent.0;
                        self.low[p as usize] = self.low[p as usize].min(self.low[x as usize]);
                        if self.low[x as usize] > self.disc[p as usize] {
                            out.push(e);
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    fn component(&mut self, sub: &IndexedSubgraph, root: Vertex) -> Vec<Vertex> {
        let mut comp = vec![root];
        self.seen[root as usize] = self.epoch;
        let mut i = 0;
        while i < comp.len() {
            let x = comp[i];
            i += 1;
            for &e in sub.incident(x) {
                self.work += 1;
                let (a, b) = sub.endpoints(e);
                let y = if a == x { b } else { a };
                if self.seen[y as usize] != self.epoch {
                    self.seen[y as usize] = self.epoch;
                    comp.push(y);
                }
            }
        }
        comp
    }

    fn small_cuts(&mut self, sub: &IndexedSubgraph, scope: &[Vertex]) -> Vec<EdgeId> {
        self.next_epoch();
        let mut out = Vec::new();
        for &root in scope {
            if self.seen[root as usize] == self.epoch {
                continue;
            }
            let mut comp = self.component(sub, root);
            if comp.len() < 2 {
                continue;
            }
            comp.sort_unstable();
            let (value, side) = stoer_wagner(sub, &comp);
            self.work += (comp.len() * comp.len() * comp.len()) as u64;
            if value < self.c as u64 {
                let mut inside = vec![false; comp.len()];
                for &s in &side {
                    inside[comp.binary_search(&s).unwrap()] = true;
                }
                for &x in &side {
                    for &e in sub.incident(x) {
                        let (a, b) = sub.endpoints(e);
                        let y = if a == x { b } else { a };
                        if !inside[comp.binary_search(&y).unwrap()] {
                            out.push(e);
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

impl CutOracle for NaiveCutOracle {
    fn threshold(&self) -> u32 {
        self.c
    }

    fn cut_edges(&mut self, sub: &IndexedSubgraph, scope: &[Vertex]) -> Vec<EdgeId> {
        match self.c {
            0 | 1 => Vec::new(),
            2 => self.bridges(sub, scope),
            _ => self.small_cuts(sub, scope),
        }
    }

    fn work(&self) -> u64 {
        self.work
    }
}

/// Global minimum cut of the subgraph induced on `verts` (sorted, connected,
/// at least two vertices). Returns the value and one side.
pub fn stoer_wagner(sub: &IndexedSubgraph, verts: &[Vertex]) -> (u64, Vec<Vertex>) {
    let k = verts.len();
    let mut w = vec![0u64; k * k];
    for (i, &x) in verts.iter().enumerate() {
        for &e in sub.incident(x) {
            let (a, b) = sub.endpoints(e);
            let y = if a == x { b } else { a };
            if let Ok(j) = verts.binary_search(&y) {
                w[i * k + j] += 1;
            }
        }
    }
    min_cut_matrix(&mut w, k, verts)
}

/// Stoer–Wagner on a dense symmetric weight matrix (consumed).
pub fn min_cut_matrix(w: &mut [u64], k: usize, labels: &[Vertex]) -> (u64, Vec<Vertex>) {
    let mut groups: Vec<Vec<Vertex>> = labels.iter().map(|&v| vec![v]).collect();
    let mut active: Vec<usize> = (0..k).collect();
    let mut best = (u64::MAX, Vec::new());
    while active.len() > 1 {
        let mut weight = vec![0u64; k];
        let mut added = vec![false; k];
        let mut prev = active[0];
        let mut last = active[0];
        for step in 0..active.len() {
            let mut sel = usize::MAX;
            for &v in &active {
                if !added[v] && (sel == usize::MAX || weight[v] > weight[sel]) {
                    sel = v;
                }
            }
            added[sel] = true;
            if step == active.len() - 1 {
                if weight[sel] < best.0 {
                    best = (weight[sel], groups[sel].clone());
                }
                prev = last;
                last = sel;
                break;
            }
            prev = last;
            last = sel;
            for &v in &active {
                if !added[v] {
                    weight[v] += w[sel * k + v];
                }
            }
        }
        // merge last into prev
        let (s, t) = (prev, last);
        let moved = std::mem::take(&mut groups[t]);
        groups[s].extend(moved);
        for &v in &active {
            w[s * k + v] += w[t * k + v];
            w[v * k + s] = w[s * k + v];
        }
        w[s * k + s] = 0;
        active.retain(|&v| v != t);
    }
    best.1.sort_unstable();
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn sub(n: usize, edges: &[(u32, u32)]) -> IndexedSubgraph {
        let table: Arc<[(u32, u32)]> = edges.into();
        let mut s = IndexedSubgraph::new(n, table);
        for i in 0..edges.len() {
            s.insert(EdgeId(i as u32)).unwrap();
        }
        s
    }

    fn all(n: usize) -> Vec<u32> {
        (0..n as u32).collect()
    }

    #[test]
    fn bridges_on_cycle_and_path() {
        let cyc = sub(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        assert!(NaiveCutOracle::new(2, 4).cut_edges(&cyc, &all(4)).is_empty());
        let path = sub(4, &[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(NaiveCutOracle::new(2, 4).cut_edges(&path, &all(4)).len(), 3);
        assert!(NaiveCutOracle::new(1, 4).cut_edges(&path, &all(4)).is_empty());
    }

    #[test]
    fn parallel_edges_are_not_bridges() {
        let g = sub(3, &[(0, 1), (0, 1), (1, 2)]);
        assert_eq!(NaiveCutOracle::new(2, 3).cut_edges(&g, &all(3)), vec![EdgeId(2)]);
    }

    #[test]
    fn k4_is_three_connected() {
        let k4 = sub(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        assert!(NaiveCutOracle::new(3, 4).cut_edges(&k4, &all(4)).is_empty());
        assert!(!NaiveCutOracle::new(4, 4).cut_edges(&k4, &all(4)).is_empty());
        // K_4 min cut is 3 over all 2^4 bipartitions
        let edges = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        let brute = (1..15u32)
            .map(|s| edges.iter().filter(|&&(a, b)| (s >> a & 1) != (s >> b & 1)).count())
            .min()
            .unwrap();
        assert_eq!(brute, 3);
        assert_eq!(stoer_wagner(&k4, &[0, 1, 2, 3]).0, 3);
    }

    #[test]
    fn two_triangles_with_bridge() {
        let g = sub(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (2, 3)]);
        assert_eq!(NaiveCutOracle::new(2, 6).cut_edges(&g, &[0]), vec![EdgeId(6)]);
        assert_eq!(NaiveCutOracle::new(3, 6).cut_edges(&g, &[5]), vec![EdgeId(6)]);
    }
}
