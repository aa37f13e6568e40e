//! Brute-force reference answers. Nothing here touches library randomness
//! or the dynamic structures; every function recomputes from scratch.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{DynamicGraph, EdgeId, SubgraphMask, Vertex};

/// Static snapshot of a multigraph with edge ids.
#[derive(Clone, Debug, Default)]
pub struct OracleGraph {
    pub n: usize,
    pub edges: Vec<(EdgeId, Vertex, Vertex)>,
}

impl OracleGraph {
    pub fn from_pairs(n: usize, pairs: &[(Vertex, Vertex)]) -> Self {
        let edges = pairs.iter().enumerate().map(|(i, &(u, v))| (EdgeId(i as u32), u, v)).collect();
        OracleGraph { n, edges }
    }

    pub fn alive(g: &DynamicGraph) -> Self {
        let edges = g
            .alive_edges()
            .map(|e| {
                let (u, v) = g.endpoints(e);
                (e, u, v)
            })
            .collect();
        OracleGraph { n: g.n(), edges }
    }

    pub fn masked(g: &DynamicGraph, mask: &SubgraphMask) -> Self {
        let edges = mask
            .iter()
            .map(|e| {
                let (u, v) = g.endpoints(e);
                (e, u, v)
            })
            .collect();
        OracleGraph { n: g.n(), edges }
    }

    pub fn without(&self, e: EdgeId) -> Self {
        OracleGraph { n: self.n, edges: self.edges.iter().copied().filter(|&(f, _, _)| f != e).collect() }
    }

    fn adjacency(&self) -> Vec<Vec<(EdgeId, Vertex)>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(e, u, v) in &self.edges {
            adj[u as usize].push((e, v));
            adj[v as usize].push((e, u));
        }
        adj
    }
}

/// Vertex partition labelled canonically by the smallest vertex of each part.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition(pub Vec<Vertex>);

impl Partition {
    pub fn from_labels(labels: &[u32]) -> Self {
        let mut first = std::collections::HashMap::new();
        let canon = labels.iter().enumerate().map(|(v, &l)| *first.entry(l).or_insert(v as Vertex)).collect();
        Partition(canon)
    }

    pub fn same(&self, u: Vertex, v: Vertex) -> bool {
        self.0[u as usize] == self.0[v as usize]
    }

    pub fn num_parts(&self) -> usize {
        self.0.iter().enumerate().filter(|&(v, &l)| v as Vertex == l).count()
    }

    pub fn parts(&self) -> Vec<Vec<Vertex>> {
        let mut by: std::collections::BTreeMap<Vertex, Vec<Vertex>> = Default::default();
        for (v, &l) in self.0.iter().enumerate() {
            by.entry(l).or_default().push(v as Vertex);
        }
        by.into_values().collect()
    }

    /// Every part of `self` lies inside one part of `other`.
    pub fn refines(&self, other: &Partition) -> bool {
        let mut image = std::collections::HashMap::new();
        self.0.iter().enumerate().all(|(v, &l)| *image.entry(l).or_insert(other.0[v]) == other.0[v])
    }
}

pub fn oracle_components(g: &OracleGraph) -> Partition {
    let adj = g.adjacency();
    let mut label = vec![Vertex::MAX; g.n];
    for s in 0..g.n {
        if label[s] != Vertex::MAX {
            continue;
        }
        label[s] = s as Vertex;
        let mut stack = vec![s as Vertex];
        while let Some(x) = stack.pop() {
            for &(_, y) in &adj[x as usize] {
                if label[y as usize] == Vertex::MAX {
                    label[y as usize] = s as Vertex;
                    stack.push(y);
                }
            }
        }
    }
    Partition(label)
}

/// Second, structurally different connectivity oracle.
pub fn union_find_components(g: &OracleGraph) -> Partition {
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut parent: Vec<usize> = (0..g.n).collect();
    for &(_, u, v) in &g.edges {
        let (a, b) = (find(&mut parent, u as usize), find(&mut parent, v as usize));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let labels: Vec<u32> = (0..g.n).map(|v| find(&mut parent, v) as u32).collect();
    Partition::from_labels(&labels)
}

/// Tarjan low-link, recursive.
pub fn oracle_bridges(g: &OracleGraph) -> Vec<EdgeId> {
    struct St<'a> {
        adj: &'a [Vec<(EdgeId, Vertex)>],
        disc: Vec<usize>,
        low: Vec<usize>,
        timer: usize,
        out: Vec<EdgeId>,
    }
    fn dfs(st: &mut St<'_>, x: usize, via: Option<EdgeId>) {
        st.disc[x] = st.timer;
        st.low[x] = st.timer;
        st.timer += 1;
        for i in 0..st.adj[x].len() {
            let (e, y) = st.adj[x][i];
            if Some(e) == via {
                continue;
            }
            let y = y as usize;
            if st.disc[y] == usize::MAX {
                dfs(st, y, Some(e));
                st.low[x] = st.low[x].min(st.low[y]);
                if st.low[y] > st.disc[x] {
                    st.out.push(e);
                }
            } else {
                st.low[x] = st.low[x].min(st.disc[y]);
            }
        }
    }
    let adj = g.adjacency();
    let mut st = St { adj: &adj, disc: vec![usize::MAX; g.n], low: vec![0; g.n], timer: 0, out: Vec::new() };
    for s in 0..g.n {
        if st.disc[s] == usize::MAX {
            dfs(&mut st, s, None);
        }
    }
    st.out.sort_unstable();
    st.out
}

/// An edge is a bridge iff deleting it disconnects its endpoints.
pub fn definitional_bridges(g: &OracleGraph) -> Vec<EdgeId> {
    let mut out: Vec<EdgeId> = g
        .edges
        .iter()
        .filter(|&&(e, u, v)| !oracle_components(&g.without(e)).same(u, v))
        .map(|&(e, _, _)| e)
        .collect();
    out.sort_unstable();
    out
}

/// Repeatedly strip all bridges until none remain; components of the rest.
pub fn oracle_two_edge_components(g: &OracleGraph) -> Partition {
    let mut cur = g.clone();
    loop {
        let br = oracle_bridges(&cur);
        if br.is_empty() {
            return oracle_components(&cur);
        }
        cur.edges.retain(|(e, _, _)| br.binary_search(e).is_err());
    }
}

/// Unit-capacity max flow between s and t, stopping once `limit` is reached.
/// Returns the flow value and the source side of a minimum cut.
pub fn max_flow(n: usize, edges: &[(Vertex, Vertex)], s: Vertex, t: Vertex, limit: usize) -> (usize, Vec<bool>) {
    // arc 2i: u->v, arc 2i+1: v->u; each has capacity 1 and is the other's reverse
    let mut head = vec![usize::MAX; n];
    let mut next = vec![0usize; 2 * edges.len()];
    let mut to = vec![0 as Vertex; 2 * edges.len()];
    for (i, &(u, v)) in edges.iter().enumerate() {
        for (k, (a, b)) in [(u, v), (v, u)].into_iter().enumerate() {
            let arc = 2 * i + k;
            to[arc] = b;
            next[arc] = head[a as usize];
            head[a as usize] = arc;
        }
    }
    let mut flow = vec![0i8; 2 * edges.len()];
    let mut value = 0;
    loop {
        let mut pred = vec![usize::MAX; n];
        let mut seen = vec![false; n];
        seen[s as usize] = true;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            let mut arc = head[x as usize];
            while arc != usize::MAX {
                let y = to[arc];
                if !seen[y as usize] && flow[arc] < 1 {
                    seen[y as usize] = true;
                    pred[y as usize] = arc;
                    queue.push_back(y);
                }
                arc = next[arc];
            }
        }
        if !seen[t as usize] || value >= limit {
            return (value, seen);
        }
        let mut y = t;
        while y != s {
            let arc = pred[y as usize];
            flow[arc] += 1;
            flow[arc ^ 1] -= 1;
            y = to[arc ^ 1];
        }
        value += 1;
    }
}

fn induced(g: &OracleGraph, part: &[Vertex]) -> (Vec<(Vertex, Vertex)>, Vec<usize>) {
    let mut local = vec![usize::MAX; g.n];
    for (i, &v) in part.iter().enumerate() {
        local[v as usize] = i;
    }
    let edges = g
        .edges
        .iter()
        .filter(|&&(_, u, v)| local[u as usize] != usize::MAX && local[v as usize] != usize::MAX)
        .map(|&(_, u, v)| (local[u as usize] as Vertex, local[v as usize] as Vertex))
        .collect();
    (edges, local)
}

fn split_connected(edges: &[(Vertex, Vertex)], part: &[Vertex]) -> Vec<Vec<Vertex>> {
    let local_g = OracleGraph::from_pairs(part.len(), edges);
    oracle_components(&local_g).parts().into_iter().map(|p| p.iter().map(|&i| part[i as usize]).collect()).collect()
}

/// Refines connected components by cutting any < c cut inside a part until
/// none is left. `order` permutes the sinks tried within a part.
fn refine_c_components(g: &OracleGraph, c: usize, mut order: impl FnMut(&mut Vec<usize>)) -> Partition {
    let mut work: Vec<Vec<Vertex>> = oracle_components(g).parts();
    let mut done: Vec<Vec<Vertex>> = Vec::new();
    while let Some(part) = work.pop() {
        if part.len() < 2 || c <= 1 {
            done.push(part);
            continue;
        }
        let (edges, _) = induced(g, &part);
        let mut sinks: Vec<usize> = (1..part.len()).collect();
        order(&mut sinks);
        let mut cut = None;
        for t in sinks {
            let (value, side) = max_flow(part.len(), &edges, 0, t as Vertex, c);
            if value < c {
                cut = Some(side);
                break;
            }
        }
        match cut {
            None => done.push(part),
            Some(side) => {
                let a: Vec<Vertex> = part.iter().enumerate().filter(|&(i, _)| side[i]).map(|(_, &v)| v).collect();
                let b: Vec<Vertex> = part.iter().enumerate().filter(|&(i, _)| !side[i]).map(|(_, &v)| v).collect();
                for half in [a, b] {
                    let (he, _) = induced(g, &half);
                    work.extend(split_connected(&he, &half));
                }
            }
        }
    }
    let mut labels = vec![0u32; g.n];
    for part in &done {
        let lo = *part.iter().min().unwrap();
        for &v in part {
            labels[v as usize] = lo;
        }
    }
    Partition(labels)
}

/// Maximal vertex sets inducing c-edge-connected subgraphs.
pub fn oracle_c_components(g: &OracleGraph, c: usize) -> Partition {
    refine_c_components(g, c, |_| {})
}

/// Same fixpoint with the order of cut discovery randomized.
pub fn oracle_c_components_shuffled<R: Rng>(g: &OracleGraph, c: usize, rng: &mut R) -> Partition {
    refine_c_components(g, c, |sinks| sinks.shuffle(rng))
}

/// Classes of the relation "joined by c edge-disjoint paths in g".
pub fn oracle_c_classes(g: &OracleGraph, c: usize) -> Partition {
    let pairs: Vec<(Vertex, Vertex)> = g.edges.iter().map(|&(_, u, v)| (u, v)).collect();
    let mut label: Vec<Vertex> = (0..g.n as Vertex).collect();
    for v in 0..g.n {
        if label[v] != v as Vertex {
            continue;
        }
        for w in v + 1..g.n {
            if label[w] == w as Vertex && max_flow(g.n, &pairs, v as Vertex, w as Vertex, c).0 >= c {
                label[w] = v as Vertex;
            }
        }
    }
    Partition(label)
}

/// Global min cut of the whole graph (0 if disconnected, usize::MAX if n < 2).
pub fn oracle_min_cut(g: &OracleGraph) -> usize {
    if g.n < 2 {
        return usize::MAX;
    }
    let pairs: Vec<(Vertex, Vertex)> = g.edges.iter().map(|&(_, u, v)| (u, v)).collect();
    (1..g.n).map(|t| max_flow(g.n, &pairs, 0, t as Vertex, usize::MAX).0).min().unwrap()
}

/// Edges whose endpoints lie in different parts.
pub fn crossing_edges(g: &OracleGraph, p: &Partition) -> Vec<EdgeId> {
    let mut out: Vec<EdgeId> = g.edges.iter().filter(|&&(_, u, v)| !p.same(u, v)).map(|&(e, _, _)| e).collect();
    out.sort_unstable();
    out
}

/// Boundary of S by testing every edge's endpoints.
pub fn boundary_by_edges(g: &OracleGraph, s: &[Vertex]) -> Vec<EdgeId> {
    let mut inside = vec![false; g.n];
    for &v in s {
        inside[v as usize] = true;
    }
    let mut out: Vec<EdgeId> =
        g.edges.iter().filter(|&&(_, u, v)| inside[u as usize] != inside[v as usize]).map(|&(e, _, _)| e).collect();
    out.sort_unstable();
    out
}

/// Vertices 0 and 1 each joined to every one of vertices 2..c+2.
pub fn gadget(c: usize) -> OracleGraph {
    let mut pairs = Vec::new();
    for i in 0..c as Vertex {
        pairs.push((0, 2 + i));
        pairs.push((1, 2 + i));
    }
    OracleGraph::from_pairs(c + 2, &pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_graph<R: Rng>(rng: &mut R, n: usize, m: usize) -> OracleGraph {
        let mut pairs = Vec::new();
        while pairs.len() < m && n >= 2 {
            let u = rng.random_range(0..n as Vertex);
            let v = rng.random_range(0..n as Vertex);
            if u != v {
                pairs.push((u, v));
            }
        }
        OracleGraph::from_pairs(n, &pairs)
    }

    fn complete(n: usize) -> OracleGraph {
        let mut pairs = Vec::new();
        for u in 0..n as Vertex {
            for v in u + 1..n as Vertex {
                pairs.push((u, v));
            }
        }
        OracleGraph::from_pairs(n, &pairs)
    }

    #[test]
    fn components_basic() {
        assert_eq!(oracle_components(&complete(5)).num_parts(), 1);
        assert_eq!(oracle_components(&OracleGraph::from_pairs(4, &[])).num_parts(), 4);
    }

    #[test]
    fn components_two_oracles_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let n = rng.random_range(1..30);
            let m = rng.random_range(0..40);
            let g = random_graph(&mut rng, n, m);
            assert_eq!(oracle_components(&g), union_find_components(&g));
        }
    }

    #[test]
    fn bridges_tree_cycle_and_definition() {
        let tree = OracleGraph::from_pairs(4, &[(0, 1), (1, 2), (1, 3)]);
        assert_eq!(oracle_bridges(&tree).len(), 3);
        let cyc = OracleGraph::from_pairs(3, &[(0, 1), (1, 2), (2, 0)]);
        assert!(oracle_bridges(&cyc).is_empty());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..300 {
            let n = rng.random_range(1..40);
            let m = rng.random_range(0..2 * n);
            let g = random_graph(&mut rng, n, m);
            assert_eq!(oracle_bridges(&g), definitional_bridges(&g));
        }
    }

    #[test]
    fn c_components_k4_and_gadget() {
        assert_eq!(oracle_c_components(&complete(4), 3).num_parts(), 1);
        assert_eq!(oracle_c_components(&complete(4), 4).num_parts(), 4);
        for c in 3..6 {
            let g = gadget(c);
            assert_eq!(oracle_c_components(&g, c).num_parts(), c + 2, "c={c}");
            let classes = oracle_c_classes(&g, c);
            assert!(classes.same(0, 1));
            assert_eq!(classes.num_parts(), c + 1);
        }
    }

    #[test]
    fn c_one_is_connectivity_and_c_two_matches_bridge_fixpoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let n = rng.random_range(1..16);
            let m = rng.random_range(0..3 * n);
            let g = random_graph(&mut rng, n, m);
            assert_eq!(oracle_c_components(&g, 1), oracle_components(&g));
            let two = oracle_two_edge_components(&g);
            assert_eq!(oracle_c_components(&g, 2), two);
            assert_eq!(oracle_c_classes(&g, 2), two);
        }
    }

    #[test]
    fn refinement_order_does_not_matter() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let n = rng.random_range(2..14);
            let m = rng.random_range(0..4 * n);
            let g = random_graph(&mut rng, n, m);
            for c in 2..5 {
                let base = oracle_c_components(&g, c);
                for _ in 0..3 {
                    assert_eq!(oracle_c_components_shuffled(&g, c, &mut rng), base);
                }
                assert!(base.refines(&oracle_c_classes(&g, c)));
            }
        }
    }

    #[test]
    fn min_cut_of_small_graphs() {
        assert_eq!(oracle_min_cut(&complete(5)), 4);
        assert_eq!(oracle_min_cut(&OracleGraph::from_pairs(3, &[(0, 1)])), 0);
    }
}
