//! Utilities, the play pipeline and welfare accounting.

use num_traits::Zero;

use crate::engine::{max_weight_matching, GraphView};
use crate::error::{KegError, Result};
use crate::graph::{CompatibilityGraph, PlayerId};
use crate::ia::{ia_objective, InternationalAgent};
use crate::matching::{residual_international, Matching, StrategyProfile};
use crate::rational::{int, Weight};
use crate::weights::WeightSystem;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameOutcome {
    pub profile: StrategyProfile,
    pub ia_matching: Matching,
    pub overall: Matching,
    pub utilities: Vec<Weight>,
    pub social_welfare: Weight,
}

/// Utility of `p`: its internal edges plus the international edges that
/// touch it.
pub fn utility(
    graph: &CompatibilityGraph,
    weights: &WeightSystem,
    p: PlayerId,
    profile: &StrategyProfile,
    ia_matching: &Matching,
) -> Weight {
    profile
        .get(p)
        .edges()
        .chain(ia_matching.edges().filter(|&e| graph.edge(e).touches(p)))
        .map(|e| weights.value_to(graph, p, e))
        .fold(Weight::zero(), |a, b| a + b)
}

/// Assembles an outcome from a profile and an international matching.
pub fn outcome(
    graph: &CompatibilityGraph,
    weights: &WeightSystem,
    profile: &StrategyProfile,
    ia_matching: Matching,
) -> Result<GameOutcome> {
    let residual = residual_international(graph, profile);
    if let Some(e) = ia_matching.edges().find(|e| !residual.contains(e)) {
        let ed = graph.edge(e);
        return Err(KegError::UnknownEdge(ed.u.0, ed.v.0));
    }
    let overall = profile.combined(graph).union(graph, &ia_matching)?;
    let utilities = graph
        .players()
        .map(|p| utility(graph, weights, p, profile, &ia_matching))
        .collect();
    let social_welfare = welfare(graph, weights, &overall);
    Ok(GameOutcome { profile: profile.clone(), ia_matching, overall, utilities, social_welfare })
}

/// Internal edges count the owner's valuation, international ones the IA's.
pub fn welfare(graph: &CompatibilityGraph, weights: &WeightSystem, m: &Matching) -> Weight {
    m.edges().map(|e| weights.welfare_value(graph, e)).fold(Weight::zero(), |a, b| a + b)
}

pub fn play(
    graph: &CompatibilityGraph,
    weights: &WeightSystem,
    profile: &StrategyProfile,
    agent: &dyn InternationalAgent,
) -> Result<GameOutcome> {
    let ia = agent.decide(graph, weights, profile)?;
    outcome(graph, weights, profile, ia)
}

/// Best utility `p` reaches alone on its internal graph.
pub fn solo_baseline(graph: &CompatibilityGraph, weights: &WeightSystem, p: PlayerId) -> Result<Weight> {
    graph.check_player(p)?;
    let view = GraphView::of_edges(graph, graph.internal_edges(p));
    let w: Vec<Weight> = view.ids().iter().map(|&e| weights.value_to(graph, p, e)).collect();
    let m = max_weight_matching(graph, &view, &w)?;
    Ok(m.edges().map(|e| weights.value_to(graph, p, e)).fold(Weight::zero(), |a, b| a + b))
}

/// `sum_p 2|M^p| + |M^I|`, a diagnostic that is not a potential in general.
pub fn potential_phi(
    graph: &CompatibilityGraph,
    profile: &StrategyProfile,
    agent: &dyn InternationalAgent,
) -> Result<Weight> {
    let card = WeightSystem::cardinality(graph);
    let ia = agent.decide(graph, &card, profile)?;
    let internal: usize = profile.strategies().iter().map(Matching::len).sum();
    Ok(int(2 * internal as i64) + ia_objective(&card, &ia))
}

#[cfg(test)]
mod tests {
    use super::*;
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
    fn utility_formula() {
        let g = CompatibilityGraph::new(
            ["A", "B"],
            vec![0, 0, 0, 0, 0, 1],
            &[(0, 1), (2, 3), (4, 5)],
        )
        .unwrap();
        let w = WeightSystem::cardinality(&g);
        let profile = StrategyProfile::new(
            &g,
            vec![Matching::from_pairs(&g, &[(0, 1), (2, 3)]).unwrap(), Matching::empty()],
        )
        .unwrap();
        let ia = Matching::from_pairs(&g, &[(4, 5)]).unwrap();
        assert_eq!(utility(&g, &w, PlayerId(0), &profile, &ia), int(5));
    }

    #[test]
    fn play_on_seven_path() {
        let g = seven_path();
        let w = WeightSystem::cardinality(&g);
        let profile = StrategyProfile::new(
            &g,
            vec![
                Matching::from_pairs(&g, &[(3, 4)]).unwrap(),
                Matching::from_pairs(&g, &[(1, 2)]).unwrap(),
            ],
        )
        .unwrap();
        let out = play(&g, &w, &profile, &IaPolicy::CardinalityCanonical).unwrap();
        assert_eq!(out.ia_matching.pairs(&g), vec![(5, 6)]);
        assert_eq!(out.social_welfare, int(6));
        let sum = out.utilities.iter().fold(Weight::zero(), |a, b| a + b);
        assert_eq!(sum, out.social_welfare);
    }

    #[test]
    fn baselines() {
        let g = seven_path();
        let w = WeightSystem::cardinality(&g);
        assert_eq!(solo_baseline(&g, &w, PlayerId(0)).unwrap(), int(2));
        let lonely = CompatibilityGraph::new(["A", "B"], vec![0, 1], &[(0, 1)]).unwrap();
        let lw = WeightSystem::cardinality(&lonely);
        assert_eq!(solo_baseline(&lonely, &lw, PlayerId(0)).unwrap(), int(0));
    }

    #[test]
    fn empty_profile_without_international_edges() {
        let g = CompatibilityGraph::new(["A", "B"], vec![0, 0, 1], &[(0, 1)]).unwrap();
        let w = WeightSystem::cardinality(&g);
        let profile = StrategyProfile::empty(&g);
        let out = play(&g, &w, &profile, &IaPolicy::CardinalityCanonical).unwrap();
        assert!(out.utilities.iter().all(|u| u.is_zero()));
        assert_eq!(potential_phi(&g, &profile, &IaPolicy::CardinalityCanonical).unwrap(), int(0));
    }
}
