//! Alternating-path test for unilateral deviations from a maximum matching.

use crate::engine::{matching_number, AlternatingPath, GraphView};
use crate::error::{KegError, Result};
use crate::graph::{CompatibilityGraph, EdgeId, PlayerId, VertexId};
use crate::ia::InternationalAgent;
use crate::matching::{restrict, Matching, Scope, StrategyProfile};
use crate::weights::WeightSystem;

/// True if the agent, given the internal parts of `m`, answers with exactly
/// the international part of `m`.
pub fn ia_agrees(
    graph: &CompatibilityGraph,
    weights: &WeightSystem,
    m: &Matching,
    agent: &dyn InternationalAgent,
) -> Result<bool> {
    let profile = StrategyProfile::from_matching(graph, m);
    Ok(agent.decide(graph, weights, &profile)? == restrict(graph, m, Scope::International)?)
}

/// Finds a path in `p`'s deviation graph that starts at an unmatched vertex
/// of `p` and ends at an opponent vertex matched to `p` by an international
/// edge of `m`, alternating with respect to `p`'s and the international
/// edges of `m`.
///
/// Only the structural condition is checked; whether the IA accepts the
/// flipped matching is left to [`ia_agrees`].
pub fn detect_deviation_path(
    graph: &CompatibilityGraph,
    m: &Matching,
    p: PlayerId,
) -> Result<Option<AlternatingPath>> {
    Ok(deviation_paths(graph, m, p, 1)?.pop())
}

/// Up to `limit` deviation paths of `p` in discovery order (origins and
/// neighbours ascending).
pub fn deviation_paths(
    graph: &CompatibilityGraph,
    m: &Matching,
    p: PlayerId,
    limit: usize,
) -> Result<Vec<AlternatingPath>> {
    graph.check_player(p)?;
    if !m.is_consistent(graph) {
        return Err(KegError::InvalidGraph("not a matching".into()));
    }
    if matching_number(&GraphView::of_graph(graph)) != m.len() {
        return Err(KegError::NotMaximum);
    }
    let blocked = |v: VertexId| {
        m.mate_edge(v).is_some_and(|e| {
            let ed = graph.edge(e);
            !ed.is_international() && !ed.is_internal_to(p)
        })
    };
    let usable = |e: EdgeId| {
        let ed = graph.edge(e);
        ed.is_internal_to(p) || (ed.is_international() && !blocked(ed.u) && !blocked(ed.v))
    };
    let in_n = |e: EdgeId| m.contains(e) && usable(e);
    let search = Search { graph, p, usable: &usable, in_n: &in_n, m, limit };

    let mut found = Vec::new();
    let mut on_path = vec![false; graph.n_vertices()];
    for &origin in graph.vertices_of(p) {
        if m.is_matched(origin) || found.len() >= limit {
            continue;
        }
        let mut path = vec![origin];
        on_path[origin.0] = true;
        search.dfs(&mut path, &mut on_path, &mut found)?;
        on_path[origin.0] = false;
    }
    Ok(found)
}

struct Search<'a> {
    graph: &'a CompatibilityGraph,
    p: PlayerId,
    usable: &'a dyn Fn(EdgeId) -> bool,
    in_n: &'a dyn Fn(EdgeId) -> bool,
    m: &'a Matching,
    limit: usize,
}

impl Search<'_> {
    fn dfs(
        &self,
        path: &mut Vec<VertexId>,
        on_path: &mut [bool],
        found: &mut Vec<AlternatingPath>,
    ) -> Result<()> {
        let graph = self.graph;
        let x = *path.last().expect("non-empty path");
        let mut nbrs: Vec<(VertexId, EdgeId)> = graph
            .incident(x)
            .iter()
            .map(|&e| (graph.edge(e).other(x), e))
            .filter(|&(y, e)| (self.usable)(e) && !(self.in_n)(e) && !on_path[y.0])
            .collect();
        nbrs.sort();
        for (y, _) in nbrs {
            if found.len() >= self.limit {
                return Ok(());
            }
            let Some(f) = self.m.mate_edge(y).filter(|&f| (self.in_n)(f)) else { continue };
            let z = graph.edge(f).other(y);
            if on_path[z.0] {
                continue;
            }
            path.push(y);
            path.push(z);
            on_path[y.0] = true;
            on_path[z.0] = true;
            let ed = graph.edge(f);
            if ed.is_international() && ed.touches(self.p) && graph.owner(z) != self.p {
                let vs: Vec<usize> = path.iter().map(|v| v.0).collect();
                found.push(AlternatingPath::from_vertices(graph, &vs)?);
            }
            self.dfs(path, on_path, found)?;
            on_path[y.0] = false;
            on_path[z.0] = false;
            path.truncate(path.len() - 2);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::symmetric_difference;
    use crate::ia::IaPolicy;

    // players A=0, B=1, C=2
    fn deviation_example() -> CompatibilityGraph {
        CompatibilityGraph::new(
            ["A", "B", "C"],
            vec![0, 2, 1, 0, 0, 0, 1],
            &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6)],
        )
        .unwrap()
    }

    fn rejected_example() -> CompatibilityGraph {
        CompatibilityGraph::new(
            ["A", "B", "C"],
            vec![0, 2, 1, 0, 0, 2, 1, 0, 1],
            &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 8)],
        )
        .unwrap()
    }

    #[test]
    fn deviation_path_found() {
        let g = deviation_example();
        let m = Matching::from_pairs(&g, &[(1, 2), (3, 4), (5, 6)]).unwrap();
        let path = detect_deviation_path(&g, &m, PlayerId(0)).unwrap().unwrap();
        let vs: Vec<usize> = path.vertices.iter().map(|v| v.0).collect();
        assert_eq!(vs, vec![0, 1, 2, 3, 4, 5, 6]);
        let flipped = symmetric_difference(&g, &m, &path).unwrap();
        let w = WeightSystem::cardinality(&g);
        assert!(ia_agrees(&g, &w, &flipped, &IaPolicy::CardinalityCanonical).unwrap());
    }

    #[test]
    fn deviation_path_rejected_by_agent() {
        let g = rejected_example();
        let m = Matching::from_pairs(&g, &[(1, 2), (3, 4), (5, 6), (7, 8)]).unwrap();
        let path = detect_deviation_path(&g, &m, PlayerId(0)).unwrap().unwrap();
        assert_eq!(path.vertices.len(), 9);
        let flipped = symmetric_difference(&g, &m, &path).unwrap();
        let w = WeightSystem::cardinality(&g);
        let agent = IaPolicy::Pessimistic(PlayerId(0));
        assert!(!ia_agrees(&g, &w, &flipped, &agent).unwrap());
    }

    #[test]
    fn fully_internal_player_has_no_path() {
        let g = CompatibilityGraph::new(["A", "B"], vec![0, 0, 1, 1], &[(0, 1), (1, 2), (2, 3)])
            .unwrap();
        let m = Matching::from_pairs(&g, &[(0, 1), (2, 3)]).unwrap();
        assert!(detect_deviation_path(&g, &m, PlayerId(0)).unwrap().is_none());
        let small = Matching::from_pairs(&g, &[(1, 2)]).unwrap();
        assert!(matches!(detect_deviation_path(&g, &small, PlayerId(0)), Err(KegError::NotMaximum)));
    }
}
