use std::collections::BTreeSet;

use proptest::prelude::*;

use deccon::certificate::{BoundaryBackend, CertificateEngine, CertificateParams};
use deccon::io::shuffled_ids;
use deccon::oracle::{
    oracle_bridges, oracle_c_classes, oracle_c_components, oracle_components, oracle_two_edge_components, OracleGraph,
    Partition,
};
use deccon::random::{bernoulli_keep, MasterSeed, Stream};
use deccon::tracker::{CompId, ComponentTracker};
use deccon::{DecrementalConnectivity, DynamicGraph, EdgeId, SubgraphMask, Vertex};

fn graph_strategy(max_n: usize, max_m: usize) -> impl Strategy<Value = (usize, Vec<(Vertex, Vertex)>)> {
    (2..=max_n).prop_flat_map(move |n| {
        let edge = (0..n as Vertex, 1..n as Vertex).prop_map(move |(u, d)| (u, (u + d) % n as Vertex));
        (Just(n), proptest::collection::vec(edge, 0..=max_m))
    })
}

fn mask_of(g: &DynamicGraph, edges: &[EdgeId]) -> SubgraphMask {
    let mut mask = SubgraphMask::empty(g.m());
    for &e in edges {
        mask.insert(e);
    }
    mask
}

fn c_partition(og: &OracleGraph, c: u32) -> Partition {
    match c {
        1 => oracle_components(og),
        2 => oracle_two_edge_components(og),
        _ => oracle_c_components(og, c as usize),
    }
}

/// Level invariants that must hold after every update whatever the coins.
fn check_levels(en: &CertificateEngine, c: u32) -> Result<(), TestCaseError> {
    let g = en.graph();
    en.audit().map_err(|e| TestCaseError::fail(e.to_string()))?;
    en.audit_family().map_err(|e| TestCaseError::fail(e.to_string()))?;
    let ell = en.top_level();
    for i in 0..=ell {
        let h: BTreeSet<EdgeId> = en.h_edges(i).into_iter().collect();
        for &e in &h {
            prop_assert!(en.in_g(i, e), "H_{} ⊄ G_{}", i, i);
        }
        if i < ell {
            let next: BTreeSet<EdgeId> = en.h_edges(i + 1).into_iter().collect();
            prop_assert!(h.is_subset(&next), "H_{} ⊄ H_{}", i, i + 1);
            for e in g.alive_edges() {
                prop_assert!(!en.in_g(i + 1, e) || en.in_g(i, e));
            }
        }
        // every component of H_i is c-edge-connected
        let hg = OracleGraph::masked(g, &mask_of(g, &en.h_edges(i)));
        prop_assert_eq!(Partition::from_labels(en.h_labels(i)), c_partition(&hg, c), "level {}", i);
    }
    for e in g.alive_edges() {
        prop_assert_eq!(en.in_d(e), !en.in_g(ell, e));
    }
    Ok(())
}

fn cert_matches(en: &CertificateEngine, c: u32) -> bool {
    let g = en.graph();
    let cert = OracleGraph::masked(g, &mask_of(g, &en.certificate_edges()));
    let full = OracleGraph::alive(g);
    c_partition(&cert, c) == c_partition(&full, c)
}

fn exact_params(c: u32) -> CertificateParams {
    CertificateParams { backend: BoundaryBackend::Exact, ..CertificateParams::desk(c) }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn exact_backend_keeps_every_invariant((n, pairs) in graph_strategy(14, 40), c in 1u32..=2, seed in any::<u64>()) {
        let g = DynamicGraph::load(n, &pairs).unwrap();
        let params = exact_params(c);
        let delta = params.delta;
        let mut en = CertificateEngine::new(g, params, seed).unwrap();
        check_levels(&en, c)?;
        prop_assert!(cert_matches(&en, c));
        for e in shuffled_ids(pairs.len(), seed ^ 1) {
            en.delete(e).unwrap();
            check_levels(&en, c)?;
            for i in 0..=en.top_level() {
                prop_assert!(en.small_boundary_violations(i).is_empty(), "level {} has a boundary below δ", i);
            }
            prop_assert!(cert_matches(&en, c));
        }
        prop_assert!(en.finalize().passed());
        let stats = en.stats();
        let bound = (2 * n as u64 - 1) * delta as u64;
        for l in &stats.levels {
            prop_assert!(l.boundary_pruned <= bound);
            prop_assert!(l.d_insertions <= l.boundary_pruned);
            prop_assert!(l.split_mass <= ComponentTracker::split_mass_bound(n));
        }
        prop_assert_eq!(en.certificate_len(), 0);
    }

    #[test]
    fn sketch_backend_is_never_silently_wrong((n, pairs) in graph_strategy(16, 48), c in 1u32..=2, seed in any::<u64>()) {
        let g = DynamicGraph::load(n, &pairs).unwrap();
        let mut en = CertificateEngine::new(g, CertificateParams::desk(c), seed).unwrap();
        check_levels(&en, c)?;
        let mut wrong = !cert_matches(&en, c);
        for e in shuffled_ids(pairs.len(), seed ^ 2) {
            en.delete(e).unwrap();
            check_levels(&en, c)?;
            wrong |= !cert_matches(&en, c);
        }
        prop_assert!(!(en.finalize().passed() && wrong));
    }

    // With 256-bit fingerprints a cancelling bucket is out of reach, so the
    // stored small boundaries, including those built by symmetric
    // difference with the parent set, must equal direct scans.
    #[test]
    fn wide_fingerprints_keep_stored_boundaries_exact((n, pairs) in graph_strategy(16, 48), seed in any::<u64>()) {
        let g = DynamicGraph::load(n, &pairs).unwrap();
        let params = CertificateParams { gamma: 64, ..CertificateParams::desk(1) };
        let mut en = CertificateEngine::new(g, params, seed).unwrap();
        prop_assert!(en.stale_small_boundaries().is_empty());
        for e in shuffled_ids(pairs.len(), seed ^ 3) {
            en.delete(e).unwrap();
            prop_assert!(en.stale_small_boundaries().is_empty());
            prop_assert!(cert_matches(&en, 1));
        }
        prop_assert!(en.finalize().passed());
    }

    #[test]
    fn frontend_matches_oracles_step_by_step((n, pairs) in graph_strategy(16, 48), c in 1u32..=2, seed in any::<u64>()) {
        let g = DynamicGraph::load(n, &pairs).unwrap();
        let mut dc = DecrementalConnectivity::new(g, c, CertificateParams::desk(c), seed).unwrap();
        let mut wrong = false;
        let mut labels: Vec<CompId> = dc.labels().to_vec();
        let og = OracleGraph::alive(dc.graph());
        let mut prev_bridges: BTreeSet<EdgeId> = oracle_bridges(&og).into_iter().collect();
        let mut expected_stream: Vec<(u64, EdgeId)> = if c == 2 { prev_bridges.iter().map(|&e| (0, e)).collect() } else { Vec::new() };
        let check = |dc: &DecrementalConnectivity| {
            let og = OracleGraph::alive(dc.graph());
            let want = if c == 1 { oracle_components(&og) } else { oracle_two_edge_components(&og) };
            let mut ok = Partition::from_labels(dc.labels()) == want;
            ok &= Partition::from_labels(dc.connectivity_labels()) == oracle_components(&og);
            if c == 2 {
                ok &= dc.non_component_edges() == oracle_bridges(&og);
            } else {
                ok &= dc.non_component_edges().is_empty();
            }
            ok
        };
        wrong |= !check(&dc);
        for (step, e) in shuffled_ids(pairs.len(), seed ^ 4).into_iter().enumerate() {
            let notes = dc.delete(e).unwrap();
            for note in &notes {
                prop_assert!(note.moved.windows(2).all(|w| w[0] < w[1]));
                for &v in &note.moved {
                    prop_assert_eq!(labels[v as usize], note.old);
                    labels[v as usize] = note.new;
                }
            }
            prop_assert_eq!(&labels[..], dc.labels(), "notifications do not replay to the ids");
            wrong |= !check(&dc);
            let og = OracleGraph::alive(dc.graph());
            let now: BTreeSet<EdgeId> = oracle_bridges(&og).into_iter().collect();
            if c == 2 {
                expected_stream.extend(now.difference(&prev_bridges).map(|&b| (step as u64 + 1, b)));
            }
            prev_bridges = now;
            let before = dc.query_comparisons();
            let (u, v) = (seed as u32 % n as u32, (seed >> 32) as u32 % n as u32);
            let _ = dc.same_component(u, v);
            prop_assert_eq!(dc.query_comparisons(), before + 1);
        }
        let passed = dc.finalize().passed();
        if passed {
            prop_assert!(!wrong);
            prop_assert_eq!(dc.bridge_log(), &expected_stream[..]);
        }
    }

    #[test]
    fn three_edge_certificate_preserves_components_and_classes((n, pairs) in graph_strategy(9, 26), seed in any::<u64>()) {
        let g = DynamicGraph::load(n, &pairs).unwrap();
        let mut en = CertificateEngine::new(g, exact_params(3), seed).unwrap();
        let ok = |en: &CertificateEngine| {
            let g = en.graph();
            let cert = OracleGraph::masked(g, &mask_of(g, &en.certificate_edges()));
            let full = OracleGraph::alive(g);
            oracle_c_components(&cert, 3) == oracle_c_components(&full, 3) && oracle_c_classes(&cert, 3) == oracle_c_classes(&full, 3)
        };
        prop_assert!(ok(&en));
        check_levels(&en, 3)?;
        for e in shuffled_ids(pairs.len(), seed ^ 5) {
            en.delete(e).unwrap();
            prop_assert!(ok(&en));
        }
        prop_assert!(en.finalize().passed());
    }

    #[test]
    fn deletion_of_dead_edge_is_rejected((n, pairs) in graph_strategy(8, 12), seed in any::<u64>()) {
        prop_assume!(!pairs.is_empty());
        let g = DynamicGraph::load(n, &pairs).unwrap();
        let mut dc = DecrementalConnectivity::new(g, 1, CertificateParams::desk(1), seed).unwrap();
        dc.delete(EdgeId(0)).unwrap();
        prop_assert!(dc.delete(EdgeId(0)).is_err());
        prop_assert!(dc.delete(EdgeId(pairs.len() as u32)).is_err());
    }
}

#[test]
fn forced_fallback_still_yields_correct_certificates() {
    let params = CertificateParams { ell: 1, p: 0.05, delta: 2, q: 1.0, ..CertificateParams::desk(1) };
    let mut fallback_seen = 0;
    for seed in 0..40u64 {
        let mut rng = MasterSeed(seed).rng(Stream::Generator);
        let pairs = deccon::gen::gnm(20, 60, &mut rng).unwrap();
        let g = DynamicGraph::load(20, &pairs).unwrap();
        let mut en = CertificateEngine::new(g, params.clone(), seed).unwrap();
        assert!(cert_matches(&en, 1));
        for e in shuffled_ids(pairs.len(), seed) {
            en.delete(e).unwrap();
            assert!(cert_matches(&en, 1), "seed {seed}");
        }
        fallback_seen += u32::from(en.stats().fallback_edges > 0);
    }
    assert!(fallback_seen > 0, "parameters too generous to reach the fallback");
}

#[test]
fn parent_route_is_exercised_and_exact() {
    let params = CertificateParams { gamma: 42, ..CertificateParams::desk(1) };
    let mut routed = 0;
    for seed in 0..20u64 {
        let mut rng = MasterSeed(seed).rng(Stream::Generator);
        let pairs = deccon::gen::gnm(40, 160, &mut rng).unwrap();
        let g = DynamicGraph::load(40, &pairs).unwrap();
        let mut en = CertificateEngine::new(g, params.clone(), seed).unwrap();
        for e in shuffled_ids(pairs.len(), seed) {
            en.delete(e).unwrap();
            assert!(en.stale_small_boundaries().is_empty());
        }
        routed += en.stats().parent_route;
    }
    assert!(routed > 0);
}

#[test]
fn small_classification_at_quarter_sampling() {
    // |∂| ≤ δ = 20 edges, R keeps each with q = 1/4, small iff |∂_R| ≤ 2qδ = 10
    let (q, delta) = (0.25, 20usize);
    let mut wrong = 0;
    for trial in 0..1000u64 {
        let kept = (0..delta as u32).filter(|&e| bernoulli_keep(trial * 7919 + 13, EdgeId(e), q)).count();
        wrong += usize::from(kept as f64 > 2.0 * q * delta as f64);
    }
    assert!(wrong < 50, "{wrong} of 1000 misclassified");
}

#[test]
fn dense_multigraph_sample_is_two_edge_connected() {
    // pδ ≥ 32c and pℓ < 1; c′ ≥ δ via edge multiplicity
    let c = 2u32;
    let (p, ell) = (1.0 / 16.0, 8u32);
    let delta = (32.0 * c as f64 / p) as usize;
    let n = 10usize;
    let mult = delta / 2 + 8;
    let mut pairs = Vec::new();
    for v in 0..n as Vertex {
        for _ in 0..mult {
            pairs.push((v, (v + 1) % n as Vertex));
        }
    }
    let params = CertificateParams { c, ell, p, delta, q: 1.0, gamma: 2, buckets: None, fallback: true, backend: BoundaryBackend::Exact };
    let mut ok = 0;
    for seed in 0..200u64 {
        let g = DynamicGraph::load(n, &pairs).unwrap();
        let en = CertificateEngine::new(g, params.clone(), seed).unwrap();
        let g = en.graph();
        let sample = OracleGraph::masked(g, &mask_of(g, &en.sampled_edges(ell as usize)));
        ok += usize::from(oracle_two_edge_components(&sample).num_parts() == 1);
    }
    assert!(ok >= 190, "{ok} of 200");
}
