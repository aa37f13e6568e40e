//! Bucketed XOR fingerprints answering "which edges leave S" in time that
//! depends on |S| and the boundary rather than on the whole graph.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Vertex};
use crate::random::{splitmix64, FingerprintGen};

const NONE: u32 = u32::MAX;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BoundaryAnswer {
    pub edges: Vec<EdgeId>,
    /// Buckets whose XOR over S was nonzero.
    pub hit: Vec<u32>,
    /// Half-edges inspected while scanning the hit buckets.
    pub scanned: u64,
}

#[derive(Clone, Debug)]
pub struct XorBoundarySketch {
    n: usize,
    s: usize,
    words: usize,
    fp: FingerprintGen,
    bucket_seed: u64,
    endpoints: Arc<[(Vertex, Vertex)]>,
    x: Vec<u64>,
    bucket: Vec<u32>,
    // one list per (vertex, bucket) of half-edges 2e / 2e+1
    head: Vec<u32>,
    prev: Vec<u32>,
    next: Vec<u32>,
    len: usize,
    mark: Vec<u32>,
    epoch: u32,
}

impl XorBoundarySketch {
    pub fn new(
        n: usize,
        s: usize,
        gamma: u32,
        endpoints: Arc<[(Vertex, Vertex)]>,
        fp_seed: u64,
        bucket_seed: u64,
    ) -> Result<Self> {
        if s == 0 {
            return Err(Error::InvalidParameter("sketch needs at least one bucket".into()));
        }
        if n > 0 && s > n {
            return Err(Error::InvalidParameter(format!("bucket count {s} exceeds n = {n}")));
        }
        let fp = FingerprintGen::new(fp_seed, gamma, n)?;
        let words = fp.words();
        let m = endpoints.len();
        Ok(XorBoundarySketch {
            n,
            s,
            words,
            fp,
            bucket_seed,
            endpoints,
            x: vec![0; n * s * words],
            bucket: vec![NONE; m],
            head: vec![NONE; n * s],
            prev: vec![NONE; 2 * m],
            next: vec![NONE; 2 * m],
            len: 0,
            mark: vec![0; n],
            epoch: 0,
        })
    }

    pub fn buckets(&self) -> usize {
        self.s
    }

    pub fn fingerprint_bits(&self) -> u32 {
        self.fp.bits()
    }

    /// Number of stored fingerprints (n·s).
    pub fn footprint(&self) -> usize {
        self.x.len() / self.words
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.bucket.get(e.index()).is_some_and(|&b| b != NONE)
    }

    #[inline]
    pub fn bucket_of(&self, e: EdgeId) -> u32 {
        let h = splitmix64(self.bucket_seed ^ splitmix64(e.0 as u64));
        ((h as u128 * self.s as u128) >> 64) as u32
    }

    pub fn fingerprint(&self, e: EdgeId) -> Vec<u64> {
        self.fp.fingerprint(e)
    }

    fn toggle(&mut self, e: EdgeId, b: u32) {
        let (u, v) = self.endpoints[e.index()];
        let mut f = [0u64; 4];
        let fw = &mut f[..self.words];
        self.fp.write(e, fw);
        for x in [u, v] {
            let base = (x as usize * self.s + b as usize) * self.words;
            for k in 0..self.words {
                self.x[base + k] ^= fw[k];
            }
        }
    }

    fn link(&mut self, half: u32, x: Vertex, b: u32) {
        let slot = x as usize * self.s + b as usize;
        let h = self.head[slot];
        self.next[half as usize] = h;
        self.prev[half as usize] = NONE;
        if h != NONE {
            self.prev[h as usize] = half;
        }
        self.head[slot] = half;
    }

    fn unlink(&mut self, half: u32, x: Vertex, b: u32) {
        let (p, nx) = (self.prev[half as usize], self.next[half as usize]);
        if p == NONE {
            self.head[x as usize * self.s + b as usize] = nx;
        } else {
            self.next[p as usize] = nx;
        }
        if nx != NONE {
            self.prev[nx as usize] = p;
        }
    }

    pub fn insert(&mut self, e: EdgeId) -> Result<()> {
        if e.index() >= self.bucket.len() {
            return Err(Error::UnknownEdge(e));
        }
        if self.contains(e) {
            return Err(Error::DuplicateEdge(e));
        }
        let b = self.bucket_of(e);
        self.bucket[e.index()] = b;
        self.toggle(e, b);
        let (u, v) = self.endpoints[e.index()];
        self.link(2 * e.0, u, b);
        self.link(2 * e.0 + 1, v, b);
        self.len += 1;
        Ok(())
    }

    pub fn delete(&mut self, e: EdgeId) -> Result<()> {
        if !self.contains(e) {
            return Err(Error::UnknownEdge(e));
        }
        let b = self.bucket[e.index()];
        self.toggle(e, b);
        let (u, v) = self.endpoints[e.index()];
        self.unlink(2 * e.0, u, b);
        self.unlink(2 * e.0 + 1, v, b);
        self.bucket[e.index()] = NONE;
        self.len -= 1;
        Ok(())
    }

    /// Buckets i with XOR_{v in S} x_v(i) != 0.
    pub fn buckets_hit(&self, set: &[Vertex]) -> Vec<u32> {
        let mut y = vec![0u64; self.s * self.words];
        for &v in set {
            let base = v as usize * self.s * self.words;
            for (acc, &w) in y.iter_mut().zip(&self.x[base..base + self.s * self.words]) {
                *acc ^= w;
            }
        }
        (0..self.s as u32)
            .filter(|&i| y[i as usize * self.words..(i as usize + 1) * self.words].iter().any(|&w| w != 0))
            .collect()
    }

    /// Edges with exactly one endpoint in `set`, found by scanning only the
    /// hit buckets. Misses a bucket only if its boundary fingerprints cancel.
    pub fn find_boundary(&mut self, set: &[Vertex]) -> BoundaryAnswer {
        let hit = self.buckets_hit(set);
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.mark.fill(0);
            self.epoch = 1;
        }
        for &v in set {
            self.mark[v as usize] = self.epoch;
        }
        let mut edges = Vec::new();
        let mut scanned = 0u64;
        for &v in set {
            for &b in &hit {
                let mut h = self.head[v as usize * self.s + b as usize];
                while h != NONE {
                    scanned += 1;
                    let e = h >> 1;
                    let (a, c) = self.endpoints[e as usize];
                    let other = if h & 1 == 0 { c } else { a };
                    if self.mark[other as usize] != self.epoch {
                        edges.push(EdgeId(e));
                    }
                    h = self.next[h as usize];
                }
            }
        }
        edges.sort_unstable();
        BoundaryAnswer { edges, hit, scanned }
    }

    /// Incident stored edges of `v` in bucket `b`.
    pub fn bucket_edges(&self, v: Vertex, b: u32) -> Vec<EdgeId> {
        let mut out = Vec::new();
        let mut h = self.head[v as usize * self.s + b as usize];
        while h != NONE {
            out.push(EdgeId(h >> 1));
            h = self.next[h as usize];
        }
        out
    }

    /// Recomputes every x_v(i) from the stored edge set and compares.
    pub fn consistent_with_rebuild(&self) -> bool {
        let mut fresh = vec![0u64; self.x.len()];
        let mut f = vec![0u64; self.words];
        for (i, &b) in self.bucket.iter().enumerate() {
            if b == NONE {
                continue;
            }
            let e = EdgeId(i as u32);
            self.fp.write(e, &mut f);
            let (u, v) = self.endpoints[i];
            for x in [u, v] {
                let base = (x as usize * self.s + b as usize) * self.words;
                for k in 0..self.words {
                    fresh[base + k] ^= f[k];
                }
            }
        }
        fresh == self.x
    }

    pub fn is_zero(&self) -> bool {
        self.x.iter().all(|&w| w == 0)
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sketch(n: usize, s: usize, edges: &[(u32, u32)]) -> XorBoundarySketch {
        XorBoundarySketch::new(n, s, 2, edges.into(), 1, 2).unwrap()
    }

    #[test]
    fn fresh_sketch_is_zero_and_sized() {
        let sk = sketch(8, 4, &[(0, 1)]);
        assert!(sk.is_zero());
        assert_eq!(sk.footprint(), 32);
        assert!(XorBoundarySketch::new(8, 0, 2, vec![].into(), 1, 2).is_err());
        assert!(XorBoundarySketch::new(8, 9, 2, vec![].into(), 1, 2).is_err());
    }

    #[test]
    fn insert_delete_involution() {
        let mut sk = sketch(4, 2, &[(0, 1), (1, 2)]);
        sk.insert(EdgeId(0)).unwrap();
        let b = sk.bucket_of(EdgeId(0)) as usize;
        let fp = sk.fingerprint(EdgeId(0))[0];
        assert_eq!(sk.x[b], fp);
        assert_eq!(sk.x[2 + b], fp);
        assert_eq!(sk.insert(EdgeId(0)), Err(Error::DuplicateEdge(EdgeId(0))));
        sk.delete(EdgeId(0)).unwrap();
        assert!(sk.is_zero());
        assert_eq!(sk.delete(EdgeId(0)), Err(Error::UnknownEdge(EdgeId(0))));
    }

    #[test]
    fn parallel_edges_in_one_bucket() {
        let mut sk = sketch(2, 1, &[(0, 1), (0, 1)]);
        sk.insert(EdgeId(0)).unwrap();
        sk.insert(EdgeId(1)).unwrap();
        let expect = sk.fingerprint(EdgeId(0))[0] ^ sk.fingerprint(EdgeId(1))[0];
        assert_eq!(sk.x[0], expect);
        assert_eq!(sk.find_boundary(&[0]).edges, vec![EdgeId(0), EdgeId(1)]);
    }

    #[test]
    fn single_edge_and_whole_component() {
        let mut sk = sketch(3, 3, &[(0, 1), (1, 2), (2, 0)]);
        sk.insert(EdgeId(0)).unwrap();
        let ans = sk.find_boundary(&[0]);
        assert_eq!(ans.edges, vec![EdgeId(0)]);
        assert_eq!(ans.hit, vec![sk.bucket_of(EdgeId(0))]);
        sk.insert(EdgeId(1)).unwrap();
        sk.insert(EdgeId(2)).unwrap();
        let ans = sk.find_boundary(&[0, 1, 2]);
        assert!(ans.edges.is_empty() && ans.hit.is_empty());
        assert!(sk.consistent_with_rebuild());
    }
}
