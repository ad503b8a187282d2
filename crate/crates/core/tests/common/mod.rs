//! Shared fixtures and brute-force oracles for the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use keg_core::rational::int;
use keg_core::{CompatibilityGraph, EdgeId, Matching, PlayerId, StrategyProfile, Weight, WeightSystem};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random graph with `n` vertices, `k` players (each owning at least one
/// vertex when possible) and edge probability `density`.
pub fn random_graph(seed: u64, n: usize, k: usize, density: f64) -> CompatibilityGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let owners: Vec<usize> = (0..n).map(|v| if v < k { v } else { rng.gen_range(0..k) }).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(density) {
                edges.push((u, v));
            }
        }
    }
    let labels: Vec<String> = (0..k).map(|p| format!("P{}", p + 1)).collect();
    CompatibilityGraph::new(labels, owners, &edges).unwrap()
}

/// Integer-valued weighted system on `graph`.
pub fn random_weights(seed: u64, graph: &CompatibilityGraph, max: i64) -> WeightSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let w = graph
        .edges()
        .map(|(_, e)| {
            let low = int(rng.gen_range(0..=max));
            let high = if e.is_international() { int(rng.gen_range(0..=max)) } else { int(0) };
            (low, high)
        })
        .collect();
    WeightSystem::weighted(graph, w).unwrap()
}

/// Every matching of the given edge subset.
pub fn all_matchings(graph: &CompatibilityGraph, edges: &[EdgeId]) -> Vec<Matching> {
    fn rec(
        graph: &CompatibilityGraph,
        edges: &[EdgeId],
        i: usize,
        cur: &mut Matching,
        out: &mut Vec<Matching>,
    ) {
        if i == edges.len() {
            out.push(cur.clone());
            return;
        }
        rec(graph, edges, i + 1, cur, out);
        if cur.insert(graph, edges[i]).is_ok() {
            rec(graph, edges, i + 1, cur, out);
            cur.remove(graph, edges[i]);
        }
    }
    let mut out = Vec::new();
    rec(graph, edges, 0, &mut Matching::empty(), &mut out);
    out
}

pub fn total(weights: &[Weight]) -> Weight {
    weights.iter().fold(Weight::zero(), |a, b| a + b)
}

/// IA objective of a matching: `1` per edge in cardinality mode, `w^I` otherwise.
pub fn ia_value(weights: &WeightSystem, m: &Matching) -> Weight {
    m.edges().map(|e| weights.ia_weight(e)).fold(Weight::zero(), |a, b| a + b)
}

/// All IA-optimal international matchings for `profile`.
pub fn optimal_ia_matchings(
    graph: &CompatibilityGraph,
    weights: &WeightSystem,
    profile: &StrategyProfile,
) -> Vec<Matching> {
    let residual = keg_core::residual_international(graph, profile);
    let all = all_matchings(graph, &residual);
    let best = all.iter().map(|m| ia_value(weights, m)).max().unwrap();
    all.into_iter().filter(|m| ia_value(weights, m) == best).collect()
}

pub fn utility_of(
    graph: &CompatibilityGraph,
    weights: &WeightSystem,
    p: PlayerId,
    profile: &StrategyProfile,
    ia: &Matching,
) -> Weight {
    let mut u = Weight::zero();
    for e in profile.get(p).edges() {
        u += weights.value_to(graph, p, e);
    }
    for e in ia.edges() {
        if graph.edge(e).touches(p) {
            u += weights.value_to(graph, p, e);
        }
    }
    u
}

/// Brute-force deviation check: does `p` have an internal matching that is
/// strictly better under every IA-optimal response?
pub fn brute_force_deviates(
    graph: &CompatibilityGraph,
    weights: &WeightSystem,
    profile: &StrategyProfile,
    current: Weight,
    p: PlayerId,
) -> bool {
    let internal: Vec<EdgeId> = graph.internal_edges(p).collect();
    for x in all_matchings(graph, &internal) {
        if &x == profile.get(p) {
            continue;
        }
        let Ok(dev) = profile.with(graph, p, x) else { continue };
        let worst = optimal_ia_matchings(graph, weights, &dev)
            .iter()
            .map(|ia| utility_of(graph, weights, p, &dev, ia))
            .min()
            .unwrap();
        if worst > current {
            return true;
        }
    }
    false
}

/// Brute-force "exists-friendly" NE test of a full matching.
pub fn brute_force_is_ne(graph: &CompatibilityGraph, weights: &WeightSystem, m: &Matching) -> bool {
    let profile = StrategyProfile::from_matching(graph, m);
    let ia: Matching = m.filter(graph, |e| graph.edge(e).is_international());
    let opt = optimal_ia_matchings(graph, weights, &profile);
    if !opt.iter().any(|o| ia_value(weights, o) == ia_value(weights, &ia)) {
        return false;
    }
    let residual: BTreeSet<EdgeId> = keg_core::residual_international(graph, &profile).into_iter().collect();
    if ia.edges().any(|e| !residual.contains(&e)) {
        return false;
    }
    graph.players().all(|p| {
        let u = utility_of(graph, weights, p, &profile, &ia);
        !brute_force_deviates(graph, weights, &profile, u, p)
    })
}

/// Size of a maximum matching by exhaustive search.
pub fn brute_matching_number(graph: &CompatibilityGraph) -> usize {
    let ids: Vec<EdgeId> = graph.edges().map(|(id, _)| id).collect();
    all_matchings(graph, &ids).iter().map(Matching::len).max().unwrap()
}
