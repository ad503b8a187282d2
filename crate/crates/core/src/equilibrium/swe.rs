//! Welfare-maximising equilibria from a maximum matching.

use std::collections::{BTreeMap, BTreeSet};

use crate::engine::{matching_number, symmetric_difference, GraphView};
use crate::error::{KegError, Result};
use crate::graph::{CompatibilityGraph, EdgeId, PlayerId, VertexId};
use crate::ia::InternationalAgent;
use crate::matching::{Matching, StrategyProfile};
use crate::weights::WeightSystem;

use super::deviation::{deviation_paths, ia_agrees};
use super::{verify_ne, PolicyFamily, SearchLimits};

const PATH_LIMIT: usize = 256;
const STATE_LIMIT: usize = 4096;

/// The graph extended by one pendant dummy vertex per endpoint of every
/// international edge of the seed matching.
///
/// Dummy vertices are numbered after the real ones.
#[derive(Debug, Clone)]
pub struct DummyGraph {
    pub base: CompatibilityGraph,
    /// dummy vertex -> (the vertex it hangs on, that vertex's seed partner)
    pub dummies: BTreeMap<usize, (VertexId, VertexId)>,
    pub dummy_edges: BTreeSet<(usize, VertexId)>,
}

impl DummyGraph {
    pub fn new(graph: &CompatibilityGraph, seed: &Matching) -> Self {
        let mut dummies = BTreeMap::new();
        let mut dummy_edges = BTreeSet::new();
        let mut next = graph.n_vertices();
        for e in seed.edges() {
            let ed = graph.edge(e);
            if !ed.is_international() {
                continue;
            }
            for (u, v) in [(ed.u, ed.v), (ed.v, ed.u)] {
                dummies.insert(next, (u, v));
                dummy_edges.insert((next, u));
                next += 1;
            }
        }
        DummyGraph { base: graph.clone(), dummies, dummy_edges }
    }

    pub fn n_vertices(&self) -> usize {
        self.base.n_vertices() + self.dummies.len()
    }

    /// Dummy vertices hanging on `v`.
    fn dummies_at(&self, v: VertexId) -> Vec<usize> {
        self.dummy_edges.iter().filter(|&&(_, u)| u == v).map(|&(d, _)| d).collect()
    }
}

/// Runs the dummy-path procedure from a maximum matching and returns the
/// resulting maximum matching of the real graph.
pub fn compute_swe(graph: &CompatibilityGraph, seed: &Matching) -> Result<Matching> {
    if !seed.is_consistent(graph) {
        return Err(KegError::InvalidGraph("seed is not a matching".into()));
    }
    if matching_number(&GraphView::of_graph(graph)) != seed.len() {
        return Err(KegError::NotMaximum);
    }
    let dg = DummyGraph::new(graph, seed);
    let n = graph.n_vertices();
    // mate[x] over real and dummy vertices
    let mut mate: Vec<Option<usize>> = vec![None; dg.n_vertices()];
    for e in seed.edges() {
        let ed = graph.edge(e);
        mate[ed.u.0] = Some(ed.v.0);
        mate[ed.v.0] = Some(ed.u.0);
    }
    let hang: Vec<Vec<usize>> = (0..n).map(|v| dg.dummies_at(VertexId(v))).collect();
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            let mut a: Vec<usize> =
                graph.incident(VertexId(v)).iter().map(|&e| graph.edge(e).other(VertexId(v)).0).collect();
            a.sort_unstable();
            a
        })
        .collect();

    loop {
        let mut found = None;
        for s in 0..n {
            if mate[s].is_some() {
                continue;
            }
            let mut on_path = vec![false; dg.n_vertices()];
            on_path[s] = true;
            let mut path = vec![s];
            if maximal_path(&adj, &hang, &mate, &mut path, &mut on_path) {
                found = Some(path);
                break;
            }
        }
        let Some(path) = found else { break };
        for pair in path.chunks(2) {
            mate[pair[0]] = Some(pair[1]);
            mate[pair[1]] = Some(pair[0]);
        }
    }

    let mut edges = Vec::new();
    for v in 0..n {
        if let Some(w) = mate[v] {
            if w < n && v < w {
                edges.push(graph.edge_between(v, w)?);
            }
        }
    }
    Matching::from_edges(graph, edges)
}

/// Extends `path` (ending at a vertex whose next edge is unmatched) to a
/// dummy-terminated alternating path, preferring real extensions.
fn maximal_path(
    adj: &[Vec<usize>],
    hang: &[Vec<usize>],
    mate: &[Option<usize>],
    path: &mut Vec<usize>,
    on_path: &mut [bool],
) -> bool {
    let x = *path.last().expect("non-empty");
    for &y in &adj[x] {
        if on_path[y] || mate[x] == Some(y) {
            continue;
        }
        let Some(z) = mate[y] else { continue };
        if on_path[z] || z >= adj.len() {
            continue;
        }
        path.push(y);
        path.push(z);
        on_path[y] = true;
        on_path[z] = true;
        if maximal_path(adj, hang, mate, path, on_path) {
            return true;
        }
        on_path[y] = false;
        on_path[z] = false;
        path.truncate(path.len() - 2);
    }
    if let Some(&d) = hang[x].iter().find(|&&d| mate[d].is_none()) {
        path.push(d);
        return true;
    }
    false
}

/// Moves a maximum matching towards an equilibrium under `agent` by
/// applying pieces of the difference with [`compute_swe`]'s output while
/// the agent keeps agreeing with the international part.
pub fn swe_relaxation(
    graph: &CompatibilityGraph,
    tilde: &Matching,
    agent: &dyn InternationalAgent,
) -> Result<Matching> {
    let weights = WeightSystem::cardinality(graph);
    if !tilde.is_consistent(graph) {
        return Err(KegError::InvalidGraph("not a matching".into()));
    }
    let profile = StrategyProfile::from_matching(graph, tilde);
    let ia = agent.decide(graph, &weights, &profile)?;
    let mut m = profile.combined(graph).union(graph, &ia)?;
    let target = compute_swe(graph, &m)?;

    for component in components(graph, &m, &target) {
        for segment in segments(graph, &m, &component) {
            let next = apply(graph, &m, &segment);
            match next {
                Some(next) if ia_agrees(graph, &weights, &next, agent)? => m = next,
                _ => break,
            }
        }
    }
    settle(graph, &weights, m, agent)
}

/// Follows improving moves that keep the matching maximum until no player
/// wants to move: deviation paths the agent accepts, then the certified
/// deviation of the verifier. Revisited matchings are skipped, so a cycle
/// of moves falls back to the next alternative.
fn settle(
    graph: &CompatibilityGraph,
    weights: &WeightSystem,
    start: Matching,
    agent: &dyn InternationalAgent,
) -> Result<Matching> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![start.clone()];
    while let Some(m) = stack.pop() {
        if !seen.insert(m.clone()) {
            continue;
        }
        if seen.len() > STATE_LIMIT {
            break;
        }
        let Some(moves) = improving_moves(graph, weights, &m, agent)? else { return Ok(m) };
        stack.extend(moves.into_iter().rev().filter(|n| !seen.contains(n)));
    }
    Ok(start)
}

/// Improving moves from `m` in preference order, or `None` if `m` is an
/// equilibrium under `agent`.
fn improving_moves(
    graph: &CompatibilityGraph,
    weights: &WeightSystem,
    m: &Matching,
    agent: &dyn InternationalAgent,
) -> Result<Option<Vec<Matching>>> {
    let report = verify_ne(graph, weights, m, PolicyFamily::Fixed(agent), SearchLimits::default())?;
    if report.is_ne {
        return Ok(None);
    }
    let mut out = Vec::new();
    for p in graph.players() {
        for path in deviation_paths(graph, m, p, PATH_LIMIT)? {
            let next = symmetric_difference(graph, m, &path)?;
            if ia_agrees(graph, weights, &next, agent)? {
                out.push(next);
            }
        }
    }
    if let Some(cert) = report.certificate {
        let profile =
            StrategyProfile::from_matching(graph, m).with(graph, cert.player, cert.new_internal)?;
        let next = profile.combined(graph).union(graph, &cert.ia_response)?;
        if next.len() == m.len() {
            out.push(next);
        }
    }
    Ok(Some(out))
}

/// `m` with `edges` flipped, if the result is still a matching.
fn apply(graph: &CompatibilityGraph, m: &Matching, edges: &[EdgeId]) -> Option<Matching> {
    let mut set: BTreeSet<EdgeId> = m.edges().collect();
    for e in edges {
        if !set.remove(e) {
            set.insert(*e);
        }
    }
    Matching::from_edges(graph, set).ok()
}

struct Component {
    edges: Vec<EdgeId>,
    cycle: bool,
}

/// Paths and cycles of `a ⊕ b`, each as an ordered edge list. Paths start
/// at an end covered by `b` when they have one.
fn components(graph: &CompatibilityGraph, a: &Matching, b: &Matching) -> Vec<Component> {
    let diff = a.symmetric_edges(b);
    let mut by_vertex: BTreeMap<VertexId, Vec<EdgeId>> = BTreeMap::new();
    for &e in &diff {
        let ed = graph.edge(e);
        by_vertex.entry(ed.u).or_default().push(e);
        by_vertex.entry(ed.v).or_default().push(e);
    }
    let mut seen: BTreeSet<EdgeId> = BTreeSet::new();
    let mut out = Vec::new();

    let walk = |start: VertexId, first: EdgeId, seen: &mut BTreeSet<EdgeId>| {
        let mut edges = vec![first];
        seen.insert(first);
        let mut at = graph.edge(first).other(start);
        loop {
            let next = by_vertex[&at].iter().copied().find(|e| !seen.contains(e));
            match next {
                Some(e) => {
                    seen.insert(e);
                    edges.push(e);
                    at = graph.edge(e).other(at);
                }
                None => return edges,
            }
        }
    };

    // paths first, from their ends
    let ends: Vec<VertexId> =
        by_vertex.iter().filter(|(_, es)| es.len() == 1).map(|(&v, _)| v).collect();
    for &v in &ends {
        let e = by_vertex[&v][0];
        if seen.contains(&e) {
            continue;
        }
        let mut edges = walk(v, e, &mut seen);
        if !b.contains(edges[0]) && b.contains(*edges.last().expect("non-empty")) {
            edges.reverse();
        }
        out.push(Component { edges, cycle: false });
    }
    for (&v, es) in &by_vertex {
        if let Some(&e) = es.iter().find(|e| !seen.contains(e)) {
            let edges = walk(v, e, &mut seen);
            out.push(Component { edges, cycle: true });
        }
    }
    out
}

/// Splits a component into consecutive pieces, each of which keeps `m` a
/// matching when flipped after its predecessors, and merges neighbouring
/// pieces while they touch the internal edges of at most one player.
fn segments(graph: &CompatibilityGraph, m: &Matching, c: &Component) -> Vec<Vec<EdgeId>> {
    if c.cycle {
        return vec![c.edges.clone()];
    }
    let mut blocks: Vec<Vec<EdgeId>> = Vec::new();
    let mut cur = m.clone();
    let mut pending = Vec::new();
    for &e in &c.edges {
        pending.push(e);
        if let Some(next) = apply(graph, &cur, &pending) {
            cur = next;
            blocks.push(std::mem::take(&mut pending));
        }
    }
    if !pending.is_empty() {
        blocks.push(pending);
    }

    let owner = |e: EdgeId| -> Option<PlayerId> {
        match graph.edge(e).kind {
            crate::graph::EdgeKind::Internal(p) => Some(p),
            _ => None,
        }
    };
    let mut out: Vec<Vec<EdgeId>> = Vec::new();
    let mut out_owner: Option<PlayerId> = None;
    for block in blocks {
        let owners: BTreeSet<PlayerId> = block.iter().filter_map(|&e| owner(e)).collect();
        let merged = match (out.last_mut(), owners.len()) {
            (Some(last), 0) => {
                last.extend(block.iter().copied());
                true
            }
            (Some(last), 1) if out_owner.is_none() || out_owner == owners.first().copied() => {
                last.extend(block.iter().copied());
                out_owner = owners.first().copied();
                true
            }
            _ => false,
        };
        if !merged {
            out_owner = if owners.len() == 1 { owners.first().copied() } else { None };
            out.push(block);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::max_cardinality_matching;
    use crate::equilibrium::{verify_ne, PolicyFamily, SearchLimits};
    use crate::ia::IaPolicy;

    fn seven_path() -> CompatibilityGraph {
        CompatibilityGraph::new(
            ["P1", "P2"],
            vec![0, 1, 1, 0, 0, 0, 1],
            &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6)],
        )
        .unwrap()
    }

    #[test]
    fn no_international_edges_keeps_seed() {
        let g = CompatibilityGraph::new(["A", "B"], vec![0, 0, 1, 1], &[(0, 1), (2, 3)]).unwrap();
        let seed = Matching::from_pairs(&g, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(compute_swe(&g, &seed).unwrap(), seed);
        assert!(DummyGraph::new(&g, &seed).dummies.is_empty());
    }

    #[test]
    fn dummies_per_international_edge() {
        let g = seven_path();
        let seed = Matching::from_pairs(&g, &[(0, 1), (2, 3), (4, 5)]).unwrap();
        let dg = DummyGraph::new(&g, &seed);
        assert_eq!(dg.dummies.len(), 4);
        assert_eq!(dg.n_vertices(), 11);
    }

    #[test]
    fn swe_on_seven_path_is_equilibrium() {
        let g = seven_path();
        let w = WeightSystem::cardinality(&g);
        for seed in [vec![(0, 1), (2, 3), (4, 5)], vec![(1, 2), (3, 4), (5, 6)]] {
            let seed = Matching::from_pairs(&g, &seed).unwrap();
            let out = compute_swe(&g, &seed).unwrap();
            assert_eq!(out.len(), 3);
            let relaxed = swe_relaxation(&g, &out, &IaPolicy::CardinalityCanonical).unwrap();
            assert_eq!(relaxed.len(), 3);
            let r = verify_ne(
                &g,
                &w,
                &relaxed,
                PolicyFamily::Fixed(&IaPolicy::CardinalityCanonical),
                SearchLimits::default(),
            )
            .unwrap();
            assert!(r.is_ne, "{:?}", relaxed.pairs(&g));
        }
    }

    #[test]
    fn relaxation_of_seven_path_t() {
        let g = seven_path();
        let w = WeightSystem::cardinality(&g);
        let t = Matching::from_pairs(&g, &[(1, 2), (3, 4), (5, 6)]).unwrap();
        let out = swe_relaxation(&g, &t, &IaPolicy::CardinalityCanonical).unwrap();
        let view = GraphView::of_graph(&g);
        assert_eq!(out.len(), max_cardinality_matching(&g, &view, &Matching::empty()).unwrap().len());
        let r = verify_ne(&g, &w, &out, PolicyFamily::ExistsFriendly, SearchLimits::default()).unwrap();
        assert!(r.is_ne);
    }

    #[test]
    fn single_edge_unchanged() {
        let g = CompatibilityGraph::new(["A", "B"], vec![0, 1], &[(0, 1)]).unwrap();
        let m = Matching::from_pairs(&g, &[(0, 1)]).unwrap();
        assert_eq!(swe_relaxation(&g, &m, &IaPolicy::CardinalityCanonical).unwrap(), m);
        assert_eq!(compute_swe(&g, &m).unwrap(), m);
    }

    #[test]
    fn non_maximum_seed_rejected() {
        let g = seven_path();
        let seed = Matching::from_pairs(&g, &[(0, 1)]).unwrap();
        assert!(matches!(compute_swe(&g, &seed), Err(KegError::NotMaximum)));
    }
}
