//! Matchings, strategy profiles and the residual international graph.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{KegError, Result};
use crate::graph::{CompatibilityGraph, EdgeId, PlayerId, VertexId};

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matching {
    edges: BTreeSet<EdgeId>,
    matched: BTreeMap<VertexId, EdgeId>,
}

impl Matching {
    pub fn empty() -> Self {
        Matching::default()
    }

    /// Fails if two edges share a vertex.
    pub fn from_edges<I>(graph: &CompatibilityGraph, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = EdgeId>,
    {
        let mut m = Matching::empty();
        for e in edges {
            m.insert(graph, e)?;
        }
        Ok(m)
    }

    /// Builds a matching from vertex pairs, e.g. `[(1, 2), (3, 4)]`.
    pub fn from_pairs(graph: &CompatibilityGraph, pairs: &[(usize, usize)]) -> Result<Self> {
        let ids = pairs
            .iter()
            .map(|&(a, b)| graph.edge_between(a, b))
            .collect::<Result<Vec<_>>>()?;
        Matching::from_edges(graph, ids)
    }

    pub fn insert(&mut self, graph: &CompatibilityGraph, e: EdgeId) -> Result<()> {
        if e.0 >= graph.n_edges() {
            return Err(KegError::UnknownEdge(e.0, e.0));
        }
        if self.edges.contains(&e) {
            return Ok(());
        }
        let edge = graph.edge(e);
        for w in [edge.u, edge.v] {
            if self.matched.contains_key(&w) {
                return Err(KegError::NotAMatching(w));
            }
        }
        self.matched.insert(edge.u, e);
        self.matched.insert(edge.v, e);
        self.edges.insert(e);
        Ok(())
    }

    pub fn remove(&mut self, graph: &CompatibilityGraph, e: EdgeId) -> bool {
        if !self.edges.remove(&e) {
            return false;
        }
        let edge = graph.edge(e);
        self.matched.remove(&edge.u);
        self.matched.remove(&edge.v);
        true
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.edges.contains(&e)
    }

    /// Edges in ascending index order.
    pub fn edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_ids(&self) -> Vec<EdgeId> {
        self.edges.iter().copied().collect()
    }

    pub fn mate_edge(&self, v: VertexId) -> Option<EdgeId> {
        self.matched.get(&v).copied()
    }

    pub fn mate(&self, graph: &CompatibilityGraph, v: VertexId) -> Option<VertexId> {
        self.mate_edge(v).map(|e| graph.edge(e).other(v))
    }

    pub fn is_matched(&self, v: VertexId) -> bool {
        self.matched.contains_key(&v)
    }

    /// Sorted vertex pairs, the canonical textual form.
    pub fn pairs(&self, graph: &CompatibilityGraph) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .map(|&e| {
                let ed = graph.edge(e);
                (ed.u.0, ed.v.0)
            })
            .collect()
    }

    /// Union of two vertex-disjoint matchings.
    pub fn union(&self, graph: &CompatibilityGraph, other: &Matching) -> Result<Matching> {
        let mut m = self.clone();
        for e in other.edges() {
            m.insert(graph, e)?;
        }
        Ok(m)
    }

    /// Edge set symmetric difference; the result need not be a matching.
    pub fn symmetric_edges(&self, other: &Matching) -> BTreeSet<EdgeId> {
        self.edges.symmetric_difference(&other.edges).copied().collect()
    }

    pub fn filter<F>(&self, graph: &CompatibilityGraph, mut keep: F) -> Matching
    where
        F: FnMut(EdgeId) -> bool,
    {
        let kept: Vec<EdgeId> = self.edges().filter(|&e| keep(e)).collect();
        Matching::from_edges(graph, kept).expect("subset of a matching is a matching")
    }

    /// Checks that the incidence map agrees with the edge set.
    pub fn is_consistent(&self, graph: &CompatibilityGraph) -> bool {
        let mut seen = BTreeMap::new();
        for &e in &self.edges {
            if e.0 >= graph.n_edges() {
                return false;
            }
            let ed = graph.edge(e);
            for w in [ed.u, ed.v] {
                if seen.insert(w, e).is_some() {
                    return false;
                }
            }
        }
        seen == self.matched
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    Internal(PlayerId),
    International,
    /// Edges incident with a vertex of the player.
    Player(PlayerId),
}

pub fn restrict(graph: &CompatibilityGraph, m: &Matching, scope: Scope) -> Result<Matching> {
    match scope {
        Scope::Internal(p) | Scope::Player(p) => graph.check_player(p)?,
        Scope::International => {}
    }
    Ok(m.filter(graph, |e| {
        let ed = graph.edge(e);
        match scope {
            Scope::Internal(p) => ed.is_internal_to(p),
            Scope::International => ed.is_international(),
            Scope::Player(p) => ed.touches(p),
        }
    }))
}

/// One internal matching per player.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StrategyProfile {
    internal: Vec<Matching>,
}

impl StrategyProfile {
    pub fn empty(graph: &CompatibilityGraph) -> Self {
        StrategyProfile { internal: vec![Matching::empty(); graph.n_players()] }
    }

    pub fn new(graph: &CompatibilityGraph, internal: Vec<Matching>) -> Result<Self> {
        if internal.len() != graph.n_players() {
            return Err(KegError::UnknownPlayer(format!(
                "profile has {} strategies for {} players",
                internal.len(),
                graph.n_players()
            )));
        }
        for (p, m) in internal.iter().enumerate() {
            check_strategy(graph, PlayerId(p), m)?;
        }
        Ok(StrategyProfile { internal })
    }

    /// The internal parts of an overall matching; international edges are ignored.
    pub fn from_matching(graph: &CompatibilityGraph, m: &Matching) -> Self {
        let internal = graph
            .players()
            .map(|p| m.filter(graph, |e| graph.edge(e).is_internal_to(p)))
            .collect();
        StrategyProfile { internal }
    }

    pub fn get(&self, p: PlayerId) -> &Matching {
        &self.internal[p.0]
    }

    pub fn strategies(&self) -> &[Matching] {
        &self.internal
    }

    /// Same profile with player `p` switched to `m`.
    pub fn with(&self, graph: &CompatibilityGraph, p: PlayerId, m: Matching) -> Result<Self> {
        graph.check_player(p)?;
        check_strategy(graph, p, &m)?;
        let mut internal = self.internal.clone();
        internal[p.0] = m;
        Ok(StrategyProfile { internal })
    }

    pub fn is_internally_matched(&self, graph: &CompatibilityGraph, v: VertexId) -> bool {
        self.internal[graph.owner(v).0].is_matched(v)
    }

    /// Union of all internal matchings.
    pub fn combined(&self, graph: &CompatibilityGraph) -> Matching {
        let mut m = Matching::empty();
        for s in &self.internal {
            for e in s.edges() {
                m.insert(graph, e).expect("internal matchings are vertex-disjoint");
            }
        }
        m
    }
}

fn check_strategy(graph: &CompatibilityGraph, p: PlayerId, m: &Matching) -> Result<()> {
    for e in m.edges() {
        if e.0 >= graph.n_edges() || !graph.edge(e).is_internal_to(p) {
            return Err(KegError::InvalidStrategy { player: p, edge: e.0 });
        }
    }
    if !m.is_consistent(graph) {
        return Err(KegError::InvalidStrategy { player: p, edge: usize::MAX });
    }
    Ok(())
}

/// International edges with neither endpoint internally matched.
pub fn residual_international(graph: &CompatibilityGraph, profile: &StrategyProfile) -> Vec<EdgeId> {
    graph
        .international_edges()
        .filter(|&e| {
            let ed = graph.edge(e);
            !profile.is_internally_matched(graph, ed.u) && !profile.is_internally_matched(graph, ed.v)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seven_path() -> CompatibilityGraph {
        CompatibilityGraph::new(
            ["P1", "P2"],
            vec![0, 1, 1, 0, 0, 0, 1],
            &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6)],
        )
        .unwrap()
    }

    #[test]
    fn rejects_shared_vertices() {
        let g = seven_path();
        assert!(matches!(
            Matching::from_pairs(&g, &[(0, 1), (1, 2)]),
            Err(KegError::NotAMatching(VertexId(1)))
        ));
    }

    #[test]
    fn restrict_by_scope() {
        let g = seven_path();
        let m = Matching::from_pairs(&g, &[(1, 2), (3, 4), (5, 6)]).unwrap();
        let p1 = PlayerId(0);
        assert_eq!(restrict(&g, &m, Scope::Internal(p1)).unwrap().pairs(&g), vec![(3, 4)]);
        assert_eq!(restrict(&g, &m, Scope::Player(p1)).unwrap().pairs(&g), vec![(3, 4), (5, 6)]);
        assert_eq!(restrict(&g, &m, Scope::International).unwrap().pairs(&g), vec![(5, 6)]);
        assert!(restrict(&g, &m, Scope::Player(PlayerId(9))).is_err());
    }

    #[test]
    fn residual_after_internal_matches() {
        let g = seven_path();
        let profile = StrategyProfile::new(
            &g,
            vec![
                Matching::from_pairs(&g, &[(3, 4)]).unwrap(),
                Matching::from_pairs(&g, &[(1, 2)]).unwrap(),
            ],
        )
        .unwrap();
        let r = residual_international(&g, &profile);
        assert_eq!(r, vec![g.edge_between(5, 6).unwrap()]);
        assert_eq!(residual_international(&g, &StrategyProfile::empty(&g)).len(), 3);
    }

    #[test]
    fn strategy_must_be_internal_to_owner() {
        let g = seven_path();
        let bad = Matching::from_pairs(&g, &[(1, 2)]).unwrap();
        assert!(StrategyProfile::empty(&g).with(&g, PlayerId(0), bad).is_err());
    }
}
