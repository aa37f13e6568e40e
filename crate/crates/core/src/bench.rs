//! Seeded benchmark cells with optional oracle verification, and their CSV
//! rows.

use std::io::Write;
use std::time::Instant;

use crate::certificate::{BoundaryBackend, CertificateEngine, CertificateParams, SelfCheckReport};
use crate::error::{Error, Result};
use crate::frontend::DecrementalConnectivity;
use crate::graph::{DynamicGraph, EdgeId, SubgraphMask, Vertex};
use crate::io::shuffled_ids;
use crate::oracle::{oracle_bridges, oracle_c_components, oracle_components, oracle_two_edge_components, OracleGraph, Partition};
use crate::random::{MasterSeed, Stream};
use crate::tracker::ComponentTracker;

/// First column of every row.
pub const CSV_SCHEMA: &str = "v1";

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum VerifyLevel {
    None,
    /// About ten evenly spaced steps plus the last.
    Checkpoints,
    EveryStep,
}

impl std::str::FromStr for VerifyLevel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(VerifyLevel::None),
            "checkpoints" => Ok(VerifyLevel::Checkpoints),
            "every-step" => Ok(VerifyLevel::EveryStep),
            other => Err(Error::InvalidParameter(format!("unknown verify level {other:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub c: u32,
    pub params: CertificateParams,
    pub verify: VerifyLevel,
    /// Wall-clock columns make rows non-reproducible, so they are opt-in.
    pub timing: bool,
    /// Explicit order; `None` shuffles all edges with the cell seed.
    pub deletions: Option<Vec<EdgeId>>,
    /// Deletions to stop after.
    pub limit: Option<usize>,
    /// Drop a necessary certificate edge before the first deletion at or
    /// after this step where one exists.
    pub inject_at: Option<usize>,
    pub log: bool,
}

impl BenchConfig {
    pub fn new(c: u32, params: CertificateParams) -> Self {
        BenchConfig {
            c,
            params,
            verify: VerifyLevel::None,
            timing: false,
            deletions: None,
            limit: None,
            inject_at: None,
            log: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BenchRecord {
    pub n: usize,
    pub m: usize,
    pub c: u32,
    pub params: CertificateParams,
    pub seed: u64,
    pub deletions: usize,
    pub cert_initial: usize,
    pub cert_final: usize,
    pub cert_max: usize,
    pub cert_insertions: u64,
    /// Edges moved into D by boundary pruning, summed over levels.
    pub d_insertions: u64,
    /// Largest per-level Σ|S| over boundary prunings.
    pub churn_max: u64,
    pub churn_bound: u64,
    /// Largest Σ|A| over every tracker in the run.
    pub split_mass: u64,
    pub split_mass_bound: u64,
    pub fallback_edges: u64,
    pub sketch_queries: u64,
    pub injected: Option<EdgeId>,
    pub check: SelfCheckReport,
    pub passed: bool,
    pub verified_steps: usize,
    pub mismatches: usize,
    pub first_mismatch: Option<usize>,
    pub init_ms: Option<f64>,
    pub delete_ms: Option<f64>,
    /// Certificate size after construction and after each deletion.
    pub trace: Vec<usize>,
    pub log: Option<Vec<String>>,
}

impl BenchRecord {
    pub fn churn_ok(&self) -> bool {
        self.churn_max <= self.churn_bound
    }

    pub fn split_mass_ok(&self) -> bool {
        self.split_mass <= self.split_mass_bound
    }

    /// The combination that must never occur.
    pub fn verified_wrong(&self) -> bool {
        self.passed && self.mismatches > 0
    }
}

fn should_verify(level: VerifyLevel, step: usize, total: usize) -> bool {
    match level {
        VerifyLevel::None => false,
        VerifyLevel::EveryStep => true,
        VerifyLevel::Checkpoints => {
            let every = total.div_ceil(10).max(1);
            step % every == 0 || step == total
        }
    }
}

enum Runner {
    Front(DecrementalConnectivity),
    Engine(CertificateEngine),
}

impl Runner {
    fn engine_stats(&self) -> crate::certificate::EngineStats {
        match self {
            Runner::Front(d) => d.stats(),
            Runner::Engine(e) => e.stats(),
        }
    }

    fn graph(&self) -> &DynamicGraph {
        match self {
            Runner::Front(d) => d.graph(),
            Runner::Engine(e) => e.graph(),
        }
    }

    fn cert_len(&self) -> usize {
        match self {
            Runner::Front(d) => d.certificate_len(),
            Runner::Engine(e) => e.certificate_len(),
        }
    }

    fn delete(&mut self, e: EdgeId) -> Result<()> {
        match self {
            Runner::Front(d) => d.delete(e).map(drop),
            Runner::Engine(en) => en.delete(e).map(drop),
        }
    }

    fn inject(&mut self) -> Result<Option<EdgeId>> {
        match self {
            Runner::Front(d) => d.inject_fault(),
            Runner::Engine(en) => match en.fault_candidate() {
                Some(e) => en.inject_omission(e).map(|_| Some(e)),
                None => Ok(None),
            },
        }
    }

    // true when the structure's answers agree with recomputation
    fn agrees(&self, c: u32) -> bool {
        let g = self.graph();
        let og = OracleGraph::alive(g);
        match self {
            Runner::Front(d) if c == 1 => Partition::from_labels(d.labels()) == oracle_components(&og),
            Runner::Front(d) => {
                Partition::from_labels(d.labels()) == oracle_two_edge_components(&og)
                    && Partition::from_labels(d.connectivity_labels()) == oracle_components(&og)
                    && d.non_component_edges() == oracle_bridges(&og)
            }
            Runner::Engine(en) => {
                let mut mask = SubgraphMask::empty(g.m());
                for e in en.certificate_edges() {
                    mask.insert(e);
                }
                oracle_c_components(&OracleGraph::masked(g, &mask), c as usize) == oracle_c_components(&og, c as usize)
            }
        }
    }
}

/// One (graph, seed, config) cell. c = 1, 2 run the query frontend; larger
/// c runs the bare certificate.
pub fn run_cell(n: usize, pairs: &[(Vertex, Vertex)], cfg: &BenchConfig, seed: u64) -> Result<BenchRecord> {
    let g = DynamicGraph::load(n, pairs)?;
    let m = g.m();
    let order = match &cfg.deletions {
        Some(ids) => ids.clone(),
        None => shuffled_ids(m, MasterSeed(seed).derive(Stream::Shuffle)),
    };
    let total = cfg.limit.map_or(order.len(), |l| l.min(order.len()));
    let mut params = cfg.params.clone();
    params.c = cfg.c;
    let t0 = Instant::now();
    let mut run = if cfg.c <= 2 {
        let dc = if cfg.log {
            DecrementalConnectivity::with_log(g, cfg.c, params.clone(), seed)?
        } else {
            DecrementalConnectivity::new(g, cfg.c, params.clone(), seed)?
        };
        Runner::Front(dc)
    } else {
        Runner::Engine(CertificateEngine::new(g, params.clone(), seed)?)
    };
    let init = t0.elapsed();
    let mut rec = BenchRecord { n, m, c: cfg.c, params, seed, deletions: total, ..Default::default() };
    rec.trace.push(run.cert_len());
    let check_step = |run: &Runner, step: usize, rec: &mut BenchRecord| {
        if should_verify(cfg.verify, step, total) {
            rec.verified_steps += 1;
            if !run.agrees(cfg.c) {
                rec.mismatches += 1;
                rec.first_mismatch.get_or_insert(step);
            }
        }
    };
    check_step(&run, 0, &mut rec);
    let t1 = Instant::now();
    for (step, &e) in order[..total].iter().enumerate() {
        if rec.injected.is_none() && cfg.inject_at.is_some_and(|k| step >= k) {
            rec.injected = run.inject()?;
        }
        run.delete(e)?;
        rec.trace.push(run.cert_len());
        check_step(&run, step + 1, &mut rec);
    }
    let del = t1.elapsed();
    let stats = run.engine_stats();
    let front_mass = match &run {
        Runner::Front(d) => d.split_mass(),
        Runner::Engine(_) => 0,
    };
    let (check, passed, log) = match &mut run {
        Runner::Front(d) => {
            let r = d.finalize();
            let passed = r.passed();
            (r.check, passed, d.log_lines().map(|l| l.to_vec()))
        }
        Runner::Engine(en) => {
            let r = en.finalize();
            let passed = r.passed();
            (r, passed, None)
        }
    };
    rec.cert_initial = stats.initial_cert_len;
    rec.cert_final = *rec.trace.last().unwrap_or(&0);
    rec.cert_max = stats.max_cert_len;
    rec.cert_insertions = stats.cert_insertions;
    rec.d_insertions = stats.levels.iter().map(|l| l.d_insertions).sum();
    rec.churn_max = stats.levels.iter().map(|l| l.boundary_pruned).max().unwrap_or(0);
    rec.churn_bound = (2 * n as u64).saturating_sub(1) * rec.params.delta as u64;
    rec.split_mass = stats.levels.iter().map(|l| l.split_mass).max().unwrap_or(0).max(front_mass);
    rec.split_mass_bound = ComponentTracker::split_mass_bound(n);
    rec.fallback_edges = stats.fallback_edges;
    rec.sketch_queries = stats.sketch_queries;
    rec.check = check;
    rec.passed = passed;
    rec.log = log;
    if cfg.timing {
        rec.init_ms = Some(init.as_secs_f64() * 1e3);
        rec.delete_ms = Some(del.as_secs_f64() * 1e3);
    }
    Ok(rec)
}

pub fn csv_header(timing: bool) -> Vec<&'static str> {
    let mut h = vec![
        "schema",
        "n",
        "m",
        "c",
        "ell",
        "p",
        "delta",
        "q",
        "gamma",
        "backend",
        "seed",
        "deletions",
        "cert_initial",
        "cert_final",
        "cert_max",
        "cert_insertions",
        "d_insertions",
        "churn_max",
        "churn_bound",
        "split_mass",
        "split_mass_bound",
        "fallback_edges",
        "sketch_queries",
        "injected",
        "self_check",
        "failure_update",
        "verified_steps",
        "mismatches",
    ];
    if timing {
        h.extend(["init_ms", "delete_ms"]);
    }
    h
}

fn row(r: &BenchRecord, timing: bool) -> Vec<String> {
    let p = &r.params;
    let backend = match p.backend {
        BoundaryBackend::Sketch => "sketch",
        BoundaryBackend::Exact => "exact",
    };
    let mut v = vec![
        CSV_SCHEMA.to_string(),
        r.n.to_string(),
        r.m.to_string(),
        r.c.to_string(),
        p.ell.to_string(),
        p.p.to_string(),
        p.delta.to_string(),
        p.q.to_string(),
        p.gamma.to_string(),
        backend.to_string(),
        r.seed.to_string(),
        r.deletions.to_string(),
        r.cert_initial.to_string(),
        r.cert_final.to_string(),
        r.cert_max.to_string(),
        r.cert_insertions.to_string(),
        r.d_insertions.to_string(),
        r.churn_max.to_string(),
        r.churn_bound.to_string(),
        r.split_mass.to_string(),
        r.split_mass_bound.to_string(),
        r.fallback_edges.to_string(),
        r.sketch_queries.to_string(),
        r.injected.map_or(String::new(), |e| e.0.to_string()),
        if r.passed { "pass" } else { "fail" }.to_string(),
        r.check.failure.as_ref().map_or(String::new(), |f| f.update.to_string()),
        r.verified_steps.to_string(),
        r.mismatches.to_string(),
    ];
    if timing {
        v.push(r.init_ms.map_or(String::new(), |t| format!("{t:.3}")));
        v.push(r.delete_ms.map_or(String::new(), |t| format!("{t:.3}")));
    }
    v
}

/// Header plus one row per record.
pub fn write_csv<W: Write>(out: W, records: &[BenchRecord], timing: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(csv_header(timing)).map_err(io)?;
    for r in records {
        w.write_record(row(r, timing)).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// "step,cert_len" rows per seed.
pub fn write_trace<W: Write>(out: W, records: &[BenchRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["seed", "step", "cert_len"]).map_err(io)?;
    for r in records {
        for (i, len) in r.trace.iter().enumerate() {
            w.write_record([r.seed.to_string(), i.to_string(), len.to_string()]).map_err(io)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::GraphSpec;

    #[test]
    fn every_step_cell_matches() {
        let (n, pairs) = GraphSpec::Gnm { n: 24, m: 60 }.generate(3).unwrap();
        for c in [1, 2, 3] {
            let mut cfg = BenchConfig::new(c, CertificateParams::desk(c));
            cfg.verify = VerifyLevel::EveryStep;
            let r = run_cell(n, &pairs, &cfg, 11).unwrap();
            assert_eq!(r.verified_steps, 61);
            assert!(!r.verified_wrong(), "c={c}");
            assert!(r.churn_ok() && r.split_mass_ok());
            assert_eq!(r.trace.len(), 61);
            assert_eq!(r.cert_final, 0);
        }
    }

    #[test]
    fn csv_is_reproducible() {
        let (n, pairs) = GraphSpec::Gnm { n: 16, m: 40 }.generate(1).unwrap();
        let mut cfg = BenchConfig::new(2, CertificateParams::desk(2));
        cfg.verify = VerifyLevel::Checkpoints;
        let write = || {
            let recs: Vec<_> = (0..3).map(|s| run_cell(n, &pairs, &cfg, s).unwrap()).collect();
            let mut buf = Vec::new();
            write_csv(&mut buf, &recs, false).unwrap();
            buf
        };
        let a = write();
        assert_eq!(a, write());
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("schema,n,m,c,"));
        assert_eq!(text.lines().count(), 4);
        assert!(text.lines().nth(1).unwrap().starts_with("v1,16,40,2,"));
    }

    #[test]
    fn checkpoint_spacing() {
        let steps: Vec<usize> = (0..=25).filter(|&s| should_verify(VerifyLevel::Checkpoints, s, 25)).collect();
        assert_eq!(steps, vec![0, 3, 6, 9, 12, 15, 18, 21, 24, 25]);
    }
}
