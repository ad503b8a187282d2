//! Equilibrium construction and verification.

mod best_response;
mod deviation;
mod mechanism;
mod swe;

pub use best_response::{best_response_exists, best_response_trace, pessimistic_ia_response};
pub use deviation::{detect_deviation_path, deviation_paths, ia_agrees};
pub use mechanism::mechanism_deviation;
pub use swe::{compute_swe, swe_relaxation, DummyGraph};

use serde::{Deserialize, Serialize};

use crate::engine::{max_weight_matching, GraphView};
use crate::error::Result;
use crate::game::{solo_baseline, utility};
use crate::graph::{CompatibilityGraph, PlayerId};
use crate::ia::{ia_objective, InternationalAgent};
use crate::matching::{residual_international, restrict, Matching, Scope, StrategyProfile};
use crate::rational::{format_weight, Weight};
use crate::weights::WeightSystem;

/// Which IA the verifier assumes.
#[derive(Clone, Copy)]
pub enum PolicyFamily<'a> {
    /// Some deterministic IA produced the candidate; deviations are answered
    /// by the IA-optimal response that is worst for the deviating player.
    ExistsFriendly,
    /// The given IA answers both the candidate and every deviation.
    Fixed(&'a dyn InternationalAgent),
}

impl std::fmt::Debug for PolicyFamily<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PolicyFamily::ExistsFriendly => write!(f, "ExistsFriendly"),
            PolicyFamily::Fixed(_) => write!(f, "Fixed"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchLimits {
    pub max_iterations: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits { max_iterations: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviationCertificate {
    pub player: PlayerId,
    pub new_internal: Matching,
    pub old_utility: Weight,
    pub new_utility: Weight,
    pub ia_response: Matching,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BestResponse {
    NoDeviation,
    Deviation(DeviationCertificate),
    /// The iteration cap was hit before the search settled.
    Unresolved { iterations: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlayerReport {
    pub utility: Weight,
    pub solo_baseline: Weight,
    pub improvement: Weight,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquilibriumReport {
    pub is_ne: bool,
    /// False when the candidate's international part is not a possible IA
    /// answer to its own internal matchings.
    pub ia_consistent: bool,
    pub per_player: Vec<PlayerReport>,
    pub international_edges: usize,
    pub certificate: Option<DeviationCertificate>,
    pub unresolved: bool,
}

/// Checks whether `candidate`, split into internal parts and an IA part,
/// is a Nash equilibrium.
pub fn verify_ne(
    graph: &CompatibilityGraph,
    weights: &WeightSystem,
    candidate: &Matching,
    family: PolicyFamily<'_>,
    limits: SearchLimits,
) -> Result<EquilibriumReport> {
    weights.check_graph(graph)?;
    if !candidate.is_consistent(graph) {
        return Err(crate::error::KegError::InvalidGraph("candidate is not a matching".into()));
    }
    let profile = StrategyProfile::from_matching(graph, candidate);
    let ia = restrict(graph, candidate, Scope::International)?;
    let ia_consistent = match family {
        PolicyFamily::ExistsFriendly => ia_is_optimal(graph, weights, &profile, &ia)?,
        PolicyFamily::Fixed(agent) => agent.decide(graph, weights, &profile)? == ia,
    };

    let mut per_player = Vec::with_capacity(graph.n_players());
    for p in graph.players() {
        let u = utility(graph, weights, p, &profile, &ia);
        let solo = solo_baseline(graph, weights, p)?;
        per_player.push(PlayerReport { improvement: &u - &solo, utility: u, solo_baseline: solo });
    }

    let mut certificate = None;
    let mut unresolved = false;
    if ia_consistent {
        for p in graph.players() {
            match best_response_exists(graph, weights, &profile, &ia, p, family, limits)? {
                BestResponse::NoDeviation => {}
                BestResponse::Deviation(c) => {
                    certificate = Some(c);
                    break;
                }
                BestResponse::Unresolved { .. } => unresolved = true,
            }
        }
    }
    let is_ne = ia_consistent && certificate.is_none() && !unresolved;
    let unresolved = unresolved && certificate.is_none();
    Ok(EquilibriumReport {
        is_ne,
        ia_consistent,
        per_player,
        international_edges: ia.len(),
        certificate,
        unresolved,
    })
}

/// True if `ia` reaches the IA optimum on the residual graph of `profile`.
pub fn ia_is_optimal(
    graph: &CompatibilityGraph,
    weights: &WeightSystem,
    profile: &StrategyProfile,
    ia: &Matching,
) -> Result<bool> {
    let residual = residual_international(graph, profile);
    if ia.edges().any(|e| !residual.contains(&e)) {
        return Ok(false);
    }
    let view = GraphView::of_edges(graph, residual);
    let w: Vec<Weight> = view.ids().iter().map(|&e| weights.ia_weight(e)).collect();
    let best = max_weight_matching(graph, &view, &w)?;
    Ok(ia_objective(weights, &best) == ia_objective(weights, ia))
}

#[derive(Debug, Serialize, Deserialize)]
struct PlayerJson {
    utility: String,
    solo_baseline: String,
    improvement: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct CertificateJson {
    player: String,
    new_internal: Vec<(usize, usize)>,
    old_utility: String,
    new_utility: String,
    ia_response: Vec<(usize, usize)>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ReportJson {
    is_ne: bool,
    ia_consistent: bool,
    unresolved: bool,
    per_player: Vec<PlayerJson>,
    international_edges: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate: Option<CertificateJson>,
}

impl EquilibriumReport {
    pub fn to_json(&self, graph: &CompatibilityGraph) -> serde_json::Value {
        let doc = ReportJson {
            is_ne: self.is_ne,
            ia_consistent: self.ia_consistent,
            unresolved: self.unresolved,
            per_player: self
                .per_player
                .iter()
                .map(|r| PlayerJson {
                    utility: format_weight(&r.utility),
                    solo_baseline: format_weight(&r.solo_baseline),
                    improvement: format_weight(&r.improvement),
                })
                .collect(),
            international_edges: self.international_edges,
            certificate: self.certificate.as_ref().map(|c| CertificateJson {
                player: graph.label(c.player).to_string(),
                new_internal: c.new_internal.pairs(graph),
                old_utility: format_weight(&c.old_utility),
                new_utility: format_weight(&c.new_utility),
                ia_response: c.ia_response.pairs(graph),
            }),
        };
        serde_json::to_value(doc).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ia::IaPolicy;
    use crate::rational::int;

    fn seven_path() -> CompatibilityGraph {
        CompatibilityGraph::new(
            ["P1", "P2"],
            vec![0, 1, 1, 0, 0, 0, 1],
            &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6)],
        )
        .unwrap()
    }

    #[test]
    fn deviations_on_seven_path() {
        let g = seven_path();
        let w = WeightSystem::cardinality(&g);
        let lim = SearchLimits::default();
        // S = {(1,2),(4,5),(6,7)}: player 2 hides and matches (2,3)
        let s = Matching::from_pairs(&g, &[(0, 1), (3, 4), (5, 6)]).unwrap();
        let r = verify_ne(&g, &w, &s, PolicyFamily::ExistsFriendly, lim).unwrap();
        assert!(!r.is_ne);
        let c = r.certificate.unwrap();
        assert_eq!(c.player, PlayerId(1));
        assert_eq!(c.new_internal.pairs(&g), vec![(1, 2)]);
        // T = {(1,2),(3,4),(6,7)}: player 1 hides and matches (5,6)
        let t = Matching::from_pairs(&g, &[(0, 1), (2, 3), (5, 6)]).unwrap();
        let r = verify_ne(&g, &w, &t, PolicyFamily::ExistsFriendly, lim).unwrap();
        let c = r.certificate.unwrap();
        assert_eq!(c.player, PlayerId(0));
        assert_eq!(c.new_internal.pairs(&g), vec![(4, 5)]);
        assert_eq!((c.old_utility, c.new_utility), (int(3), int(4)));
    }

    #[test]
    fn single_international_edge_is_equilibrium() {
        let g = CompatibilityGraph::new(["A", "B"], vec![0, 1], &[(0, 1)]).unwrap();
        let w = WeightSystem::cardinality(&g);
        let m = Matching::from_pairs(&g, &[(0, 1)]).unwrap();
        let r = verify_ne(&g, &w, &m, PolicyFamily::ExistsFriendly, SearchLimits::default()).unwrap();
        assert!(r.is_ne);
        assert_eq!(r.international_edges, 1);
        let strict = IaPolicy::CardinalityCanonical;
        let r = verify_ne(&g, &w, &m, PolicyFamily::Fixed(&strict), SearchLimits::default()).unwrap();
        assert!(r.is_ne);
        let json = r.to_json(&g);
        assert_eq!(json["per_player"][0]["utility"], "1");
        assert!(json.get("certificate").is_none());
    }

    #[test]
    fn player_without_internal_edges_never_deviates() {
        let g = CompatibilityGraph::new(["P1", "P2"], vec![0, 1, 0, 1], &[(0, 1), (1, 2), (2, 3)])
            .unwrap();
        let w = WeightSystem::weighted(
            &g,
            vec![(int(1), int(5)), (int(1), int(10)), (int(1), int(5))],
        )
        .unwrap();
        let m = Matching::from_pairs(&g, &[(0, 1), (2, 3)]).unwrap();
        let profile = StrategyProfile::from_matching(&g, &m);
        for p in g.players() {
            let r = best_response_exists(
                &g,
                &w,
                &profile,
                &m,
                p,
                PolicyFamily::ExistsFriendly,
                SearchLimits::default(),
            )
            .unwrap();
            assert_eq!(r, BestResponse::NoDeviation);
        }
    }

    #[test]
    fn own_internal_vertices_stay_available_to_the_bound() {
        // A holds a worthless internal edge that blocks its own exchange with B
        let g = CompatibilityGraph::new(["A", "B"], vec![0, 0, 1], &[(0, 1), (1, 2)]).unwrap();
        let w = WeightSystem::weighted(&g, vec![(int(0), int(0)), (int(3), int(3))]).unwrap();
        let m = Matching::from_pairs(&g, &[(0, 1)]).unwrap();
        let r = verify_ne(&g, &w, &m, PolicyFamily::ExistsFriendly, SearchLimits::default()).unwrap();
        let c = r.certificate.unwrap();
        assert_eq!(c.player, PlayerId(0));
        assert!(c.new_internal.is_empty());
        assert_eq!(c.new_utility, int(3));
    }

    #[test]
    fn suboptimal_ia_part_is_not_an_outcome() {
        let g = CompatibilityGraph::new(["A", "B"], vec![0, 1], &[(0, 1)]).unwrap();
        let w = WeightSystem::cardinality(&g);
        let r = verify_ne(&g, &w, &Matching::empty(), PolicyFamily::ExistsFriendly, SearchLimits::default())
            .unwrap();
        assert!(!r.ia_consistent);
        assert!(!r.is_ne);
    }
}
