//! Euler-tour forest stored as treaps with parent pointers.
//!
//! Node `v` for `v < n` is the single occurrence node of vertex `v`; arc nodes
//! for tree edges are allocated after them. Each node carries a small flag
//! byte whose subtree OR lets callers find flagged nodes in O(k log n).

pub(crate) const NIL: u32 = u32::MAX;

#[derive(Clone, Debug)]
struct Node {
    left: u32,
    right: u32,
    parent: u32,
    prio: u32,
    cnt: u32,
    vcnt: u32,
    own: u8,
    agg: u8,
    tag: u32,
}

#[derive(Clone, Debug)]
pub struct EulerForest {
    n: usize,
    nodes: Vec<Node>,
    free: Vec<u32>,
    rng: u64,
}

impl EulerForest {
    pub fn new(n: usize, seed: u64) -> Self {
        let mut f = EulerForest { n, nodes: Vec::with_capacity(n), free: Vec::new(), rng: seed | 1 };
        for v in 0..n {
            let prio = f.next_prio();
            f.nodes.push(Node {
                left: NIL,
                right: NIL,
                parent: NIL,
                prio,
                cnt: 1,
                vcnt: 1,
                own: 0,
                agg: 0,
                tag: v as u32,
            });
        }
        f
    }

    fn next_prio(&mut self) -> u32 {
        // xorshift64*
        self.rng ^= self.rng >> 12;
        self.rng ^= self.rng << 25;
        self.rng ^= self.rng >> 27;
        (self.rng.wrapping_mul(0x2545_f491_4f6c_dd1d) >> 32) as u32
    }

    fn alloc_arc(&mut self, tag: u32) -> u32 {
        let prio = self.next_prio();
        let node = Node { left: NIL, right: NIL, parent: NIL, prio, cnt: 1, vcnt: 0, own: 0, agg: 0, tag };
        if let Some(id) = self.free.pop() {
            self.nodes[id as usize] = node;
            id
        } else {
            self.nodes.push(node);
            (self.nodes.len() - 1) as u32
        }
    }

    #[inline]
    fn update(&mut self, x: u32) {
        let (l, r) = (self.nodes[x as usize].left, self.nodes[x as usize].right);
        let node = &self.nodes[x as usize];
        let mut cnt = 1;
        let mut vcnt = if (x as usize) < self.n { 1 } else { 0 };
        let mut agg = node.own;
        for c in [l, r] {
            if c != NIL {
                let cn = &self.nodes[c as usize];
                cnt += cn.cnt;
                vcnt += cn.vcnt;
                agg |= cn.agg;
            }
        }
        let node = &mut self.nodes[x as usize];
        node.cnt = cnt;
        node.vcnt = vcnt;
        node.agg = agg;
    }

    #[inline]
    fn set_left(&mut self, x: u32, c: u32) {
        self.nodes[x as usize].left = c;
        if c != NIL {
            self.nodes[c as usize].parent = x;
        }
    }

    #[inline]
    fn set_right(&mut self, x: u32, c: u32) {
        self.nodes[x as usize].right = c;
        if c != NIL {
            self.nodes[c as usize].parent = x;
        }
    }

    pub fn root(&self, mut x: u32) -> u32 {
        while self.nodes[x as usize].parent != NIL {
            x = self.nodes[x as usize].parent;
        }
        x
    }

    pub fn connected(&self, u: u32, v: u32) -> bool {
        u == v || self.root(u) == self.root(v)
    }

    /// Number of vertices in the tree containing vertex `v`.
    pub fn tree_size(&self, v: u32) -> usize {
        self.nodes[self.root(v) as usize].vcnt as usize
    }

    pub fn tag(&self, x: u32) -> u32 {
        self.nodes[x as usize].tag
    }

    fn merge(&mut self, a: u32, b: u32) -> u32 {
        if a == NIL {
            return b;
        }
        if b == NIL {
            return a;
        }
        if self.nodes[a as usize].prio > self.nodes[b as usize].prio {
            let r = self.nodes[a as usize].right;
            let m = self.merge(r, b);
            self.set_right(a, m);
            self.update(a);
            a
        } else {
            let l = self.nodes[b as usize].left;
            let m = self.merge(a, l);
            self.set_left(b, m);
            self.update(b);
            b
        }
    }

    fn merge_roots(&mut self, a: u32, b: u32) -> u32 {
        let r = self.merge(a, b);
        if r != NIL {
            self.nodes[r as usize].parent = NIL;
        }
        r
    }

    /// Splits the sequence containing `x`. With `before`, `x` starts the
    /// right part; otherwise it ends the left part.
    fn split(&mut self, x: u32, before: bool) -> (u32, u32) {
        let (mut left, mut right);
        if before {
            left = self.nodes[x as usize].left;
            if left != NIL {
                self.nodes[left as usize].parent = NIL;
            }
            self.nodes[x as usize].left = NIL;
            right = x;
        } else {
            right = self.nodes[x as usize].right;
            if right != NIL {
                self.nodes[right as usize].parent = NIL;
            }
            self.nodes[x as usize].right = NIL;
            left = x;
        }
        self.update(x);
        let mut cur = x;
        let mut p = self.nodes[x as usize].parent;
        self.nodes[x as usize].parent = NIL;
        while p != NIL {
            let pp = self.nodes[p as usize].parent;
            if self.nodes[p as usize].right == cur {
                self.set_right(p, left);
                self.update(p);
                left = p;
            } else {
                self.set_left(p, right);
                self.update(p);
                right = p;
            }
            self.nodes[p as usize].parent = NIL;
            cur = p;
            p = pp;
        }
        if left != NIL {
            self.nodes[left as usize].parent = NIL;
        }
        if right != NIL {
            self.nodes[right as usize].parent = NIL;
        }
        (left, right)
    }

    fn rank(&self, mut x: u32) -> u32 {
        let mut r = self.left_cnt(x);
        while self.nodes[x as usize].parent != NIL {
            let p = self.nodes[x as usize].parent;
            if self.nodes[p as usize].right == x {
                r += self.left_cnt(p) + 1;
            }
            x = p;
        }
        r
    }

    #[inline]
    fn left_cnt(&self, x: u32) -> u32 {
        let l = self.nodes[x as usize].left;
        if l == NIL {
            0
        } else {
            self.nodes[l as usize].cnt
        }
    }

    /// Rotates the tour of `v`'s tree so it starts at `v`.
    fn reroot(&mut self, v: u32) -> u32 {
        let (a, b) = self.split(v, true);
        self.merge_roots(b, a)
    }

    /// Joins the trees of `u` and `v` (which must be disjoint) with a tree
    /// edge tagged `tag`. Returns the arc nodes (u→v, v→u).
    pub fn link(&mut self, u: u32, v: u32, tag: u32) -> (u32, u32) {
        debug_assert!(!self.connected(u, v));
        let tu = self.reroot(u);
        let tv = self.reroot(v);
        let a = self.alloc_arc(tag);
        let b = self.alloc_arc(tag);
        let t = self.merge_roots(tu, a);
        let t = self.merge_roots(t, tv);
        self.merge_roots(t, b);
        (a, b)
    }

    /// Removes the tree edge whose arc nodes are `a` and `b`.
    pub fn cut(&mut self, a: u32, b: u32) {
        let (first, second) = if self.rank(a) < self.rank(b) { (a, b) } else { (b, a) };
        let (p, _) = self.split(first, true);
        let (_, s) = self.split(second, false);
        self.split(first, false);
        self.split(second, true);
        self.merge_roots(p, s);
        for x in [first, second] {
            self.nodes[x as usize].parent = NIL;
            self.nodes[x as usize].left = NIL;
            self.nodes[x as usize].right = NIL;
            self.free.push(x);
        }
    }

    pub fn set_flag(&mut self, x: u32, bit: u8, on: bool) {
        let node = &mut self.nodes[x as usize];
        let new = if on { node.own | bit } else { node.own & !bit };
        if new == node.own {
            return;
        }
        node.own = new;
        let mut y = x;
        while y != NIL {
            let before = self.nodes[y as usize].agg;
            self.update(y);
            if y != x && self.nodes[y as usize].agg == before {
                break;
            }
            y = self.nodes[y as usize].parent;
        }
    }

    pub fn has_flag(&self, x: u32, bit: u8) -> bool {
        self.nodes[x as usize].own & bit != 0
    }

    /// Appends every node of `v`'s tree whose own flags contain `bit`.
    pub fn flagged_in_tree(&self, v: u32, bit: u8, out: &mut Vec<u32>) {
        let root = self.root(v);
        let mut stack = vec![root];
        while let Some(x) = stack.pop() {
            let node = &self.nodes[x as usize];
            if node.agg & bit == 0 {
                continue;
            }
            if node.own & bit != 0 {
                out.push(x);
            }
            for c in [node.left, node.right] {
                if c != NIL {
                    stack.push(c);
                }
            }
        }
    }

    /// Vertices of `v`'s tree, ascending.
    pub fn tree_vertices(&self, v: u32) -> Vec<u32> {
        let root = self.root(v);
        let mut out = Vec::with_capacity(self.nodes[root as usize].vcnt as usize);
        let mut stack = vec![root];
        while let Some(x) = stack.pop() {
            if (x as usize) < self.n {
                out.push(x);
            }
            let node = &self.nodes[x as usize];
            for c in [node.left, node.right] {
                if c != NIL {
                    stack.push(c);
                }
            }
        }
        out.sort_unstable();
        out
    }

    #[cfg(test)]
    fn tour(&self, v: u32) -> Vec<u32> {
        fn walk(f: &EulerForest, x: u32, out: &mut Vec<u32>) {
            if x == NIL {
                return;
            }
            walk(f, f.nodes[x as usize].left, out);
            out.push(x);
            walk(f, f.nodes[x as usize].right, out);
        }
        let mut out = Vec::new();
        walk(self, self.root(v), &mut out);
        out
    }
}
