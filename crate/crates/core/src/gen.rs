//! Seeded graph generators for tests and benchmarks.

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Vertex;
use crate::random::{MasterSeed, Stream};

#[derive(Clone, Debug, PartialEq)]
pub enum GraphSpec {
    /// m distinct pairs chosen uniformly.
    Gnm { n: usize, m: usize },
    /// Each pair independently with probability p.
    Gnp { n: usize, p: f64 },
    /// Two cliques on k vertices joined by one edge.
    Dumbbell { k: usize },
    Grid { rows: usize, cols: usize },
    /// G(n, 2/n). Sampling half its edges lands at the critical window,
    /// where the two largest pieces share many edges.
    Critical { n: usize },
}

impl GraphSpec {
    /// Generator by name, sized from n, m and p where they apply.
    pub fn from_name(name: &str, n: usize, m: Option<usize>, p: Option<f64>) -> Result<Self> {
        match name {
            "gnm" => Ok(GraphSpec::Gnm { n, m: m.unwrap_or(4 * n) }),
            "gnp" => {
                let p = p.ok_or_else(|| Error::InvalidParameter("gnp needs an edge probability".into()))?;
                Ok(GraphSpec::Gnp { n, p })
            }
            "dumbbell" => Ok(GraphSpec::Dumbbell { k: n / 2 }),
            "grid" => {
                let rows = (n as f64).sqrt().floor().max(1.0) as usize;
                Ok(GraphSpec::Grid { rows, cols: n / rows })
            }
            "critical" => Ok(GraphSpec::Critical { n }),
            other => Err(Error::InvalidParameter(format!("unknown generator {other:?}"))),
        }
    }

    pub fn generate(&self, seed: u64) -> Result<(usize, Vec<(Vertex, Vertex)>)> {
        let mut rng = MasterSeed(seed).rng(Stream::Generator);
        match *self {
            GraphSpec::Gnm { n, m } => Ok((n, gnm(n, m, &mut rng)?)),
            GraphSpec::Gnp { n, p } => Ok((n, gnp(n, p, &mut rng)?)),
            GraphSpec::Dumbbell { k } => Ok((2 * k, dumbbell(k))),
            GraphSpec::Grid { rows, cols } => Ok((rows * cols, grid(rows, cols))),
            GraphSpec::Critical { n } => {
                let p = if n <= 2 { 1.0 } else { 2.0 / n as f64 };
                Ok((n, gnp(n, p, &mut rng)?))
            }
        }
    }
}

fn unrank(n: usize, mut k: usize) -> (Vertex, Vertex) {
    let mut u = 0;
    while k >= n - 1 - u {
        k -= n - 1 - u;
        u += 1;
    }
    (u as Vertex, (u + 1 + k) as Vertex)
}

/// Edges in lexicographic order.
pub fn gnm<R: Rng>(n: usize, m: usize, rng: &mut R) -> Result<Vec<(Vertex, Vertex)>> {
    let total = n * n.saturating_sub(1) / 2;
    if m > total {
        return Err(Error::InvalidParameter(format!("m = {m} exceeds the {total} pairs on n = {n}")));
    }
    let mut ks = index::sample(rng, total, m).into_vec();
    ks.sort_unstable();
    Ok(ks.into_iter().map(|k| unrank(n, k)).collect())
}

pub fn gnp<R: Rng>(n: usize, p: f64, rng: &mut R) -> Result<Vec<(Vertex, Vertex)>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("edge probability {p} outside [0, 1]")));
    }
    let mut out = Vec::new();
    for u in 0..n as Vertex {
        for v in u + 1..n as Vertex {
            if rng.random_bool(p) {
                out.push((u, v));
            }
        }
    }
    Ok(out)
}

pub fn clique(offset: Vertex, k: usize) -> Vec<(Vertex, Vertex)> {
    let mut out = Vec::new();
    for u in 0..k as Vertex {
        for v in u + 1..k as Vertex {
            out.push((offset + u, offset + v));
        }
    }
    out
}

/// The bar is the last edge, between k−1 and k.
pub fn dumbbell(k: usize) -> Vec<(Vertex, Vertex)> {
    let mut out = clique(0, k);
    out.extend(clique(k as Vertex, k));
    if k > 0 {
        out.push((k as Vertex - 1, k as Vertex));
    }
    out
}

pub fn grid(rows: usize, cols: usize) -> Vec<(Vertex, Vertex)> {
    let id = |r: usize, c: usize| (r * cols + c) as Vertex;
    let mut out = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                out.push((id(r, c), id(r, c + 1)));
            }
            if r + 1 < rows {
                out.push((id(r, c), id(r + 1, c)));
            }
        }
    }
    out
}
