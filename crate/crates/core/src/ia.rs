//! The independent agent that picks the international matching.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;

use crate::engine::{lexicographic_locals, max_weight_matching, EdgeConstraints, GraphView, Sense};
use crate::error::{KegError, Result};
use crate::graph::{CompatibilityGraph, EdgeId, PlayerId};
use crate::matching::{residual_international, Matching, StrategyProfile};
use crate::rational::{int, Weight};
use crate::weights::{Mode, WeightSystem};

/// Anything that maps a strategy profile to an international matching.
pub trait InternationalAgent: Sync {
    fn decide(
        &self,
        graph: &CompatibilityGraph,
        weights: &WeightSystem,
        profile: &StrategyProfile,
    ) -> Result<Matching>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IaPolicy {
    CardinalityCanonical,
    LexicographicPriority,
    WeightedCanonical,
    Optimistic(PlayerId),
    Pessimistic(PlayerId),
}

impl IaPolicy {
    /// Canonical policy for a weight mode.
    pub fn canonical(mode: Mode) -> Self {
        match mode {
            Mode::Cardinality => IaPolicy::CardinalityCanonical,
            Mode::Weighted => IaPolicy::WeightedCanonical,
        }
    }
}

impl fmt::Display for IaPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IaPolicy::CardinalityCanonical => write!(f, "card"),
            IaPolicy::LexicographicPriority => write!(f, "lex"),
            IaPolicy::WeightedCanonical => write!(f, "weighted"),
            IaPolicy::Optimistic(p) => write!(f, "opt:{p}"),
            IaPolicy::Pessimistic(p) => write!(f, "pess:{p}"),
        }
    }
}

impl FromStr for IaPolicy {
    type Err = KegError;

    /// Parses `card`, `lex`, `weighted`, `opt:<index>` or `pess:<index>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || KegError::Config(format!("unknown IA policy {s:?}"));
        let player = |t: &str| t.parse::<usize>().map(PlayerId).map_err(|_| bad());
        match s {
            "card" => Ok(IaPolicy::CardinalityCanonical),
            "lex" => Ok(IaPolicy::LexicographicPriority),
            "weighted" => Ok(IaPolicy::WeightedCanonical),
            _ => match s.split_once(':') {
                Some(("opt", p)) => Ok(IaPolicy::Optimistic(player(p)?)),
                Some(("pess", p)) => Ok(IaPolicy::Pessimistic(player(p)?)),
                _ => Err(bad()),
            },
        }
    }
}

impl InternationalAgent for IaPolicy {
    fn decide(
        &self,
        graph: &CompatibilityGraph,
        weights: &WeightSystem,
        profile: &StrategyProfile,
    ) -> Result<Matching> {
        ia_decide(graph, weights, profile, *self)
    }
}

pub fn ia_decide(
    graph: &CompatibilityGraph,
    weights: &WeightSystem,
    profile: &StrategyProfile,
    policy: IaPolicy,
) -> Result<Matching> {
    weights.check_graph(graph)?;
    let view = GraphView::of_edges(graph, residual_international(graph, profile));
    let ids = view.ids().to_vec();
    match policy {
        IaPolicy::CardinalityCanonical | IaPolicy::LexicographicPriority
            if weights.mode() == Mode::Weighted =>
        {
            Err(KegError::PolicyMismatch(format!(
                "policy {policy} needs a cardinality weight system"
            )))
        }
        IaPolicy::CardinalityCanonical => {
            max_weight_matching(graph, &view, &vec![int(1); ids.len()])
        }
        IaPolicy::WeightedCanonical => {
            let w: Vec<Weight> = ids.iter().map(|&e| weights.ia_weight(e)).collect();
            max_weight_matching(graph, &view, &w)
        }
        IaPolicy::LexicographicPriority => {
            let table = lexicographic_priority_weights(graph)?;
            let w: Vec<Weight> = ids.iter().map(|e| table[e].clone()).collect();
            max_weight_matching(graph, &view, &w)
        }
        IaPolicy::Optimistic(p) | IaPolicy::Pessimistic(p) => {
            graph.check_player(p)?;
            let sense = match policy {
                IaPolicy::Optimistic(_) => Sense::Maximize,
                _ => Sense::Minimize,
            };
            let locals = extreme_for_player(graph, weights, &view, p, sense)?;
            Ok(view.to_matching(graph, &locals))
        }
    }
}

/// Among IA-optimal matchings of `view`, one with extreme value for `p`.
pub(crate) fn extreme_for_player(
    graph: &CompatibilityGraph,
    weights: &WeightSystem,
    view: &GraphView,
    p: PlayerId,
    sense: Sense,
) -> Result<Vec<usize>> {
    let primary: Vec<Weight> = view.ids().iter().map(|&e| weights.ia_weight(e)).collect();
    let secondary: Vec<Weight> =
        view.ids().iter().map(|&e| weights.value_to(graph, p, e)).collect();
    Ok(lexicographic_locals(view, &primary, &secondary, sense, &EdgeConstraints::default())?
        .expect("no constraints"))
}

/// Priority weights favouring players with more revealed pairs.
///
/// Players are ranked by size (descending, ties by index). With `s1`, `s2`
/// the two largest sizes and `n` the number of vertices, an edge between
/// players `i` and `j` weighs `(s1 + s2) * n + |V^i| + |V^j|`.
pub fn lexicographic_priority_weights(graph: &CompatibilityGraph) -> Result<BTreeMap<EdgeId, Weight>> {
    if graph.n_players() < 2 {
        return Err(KegError::TooFewPlayers);
    }
    let size = |p: PlayerId| graph.vertices_of(p).len() as i64;
    let mut order: Vec<PlayerId> = graph.players().collect();
    order.sort_by_key(|&p| (std::cmp::Reverse(size(p)), p));
    let base = (size(order[0]) + size(order[1])) * graph.n_vertices() as i64;
    let mut out = BTreeMap::new();
    for e in graph.international_edges() {
        let ed = graph.edge(e);
        let w = base + size(graph.owner(ed.u)) + size(graph.owner(ed.v));
        out.insert(e, int(w));
    }
    Ok(out)
}

/// Player ranking used by the priority weights: larger players first.
pub fn priority_order(graph: &CompatibilityGraph) -> Vec<PlayerId> {
    let mut order: Vec<PlayerId> = graph.players().collect();
    order.sort_by_key(|&p| (std::cmp::Reverse(graph.vertices_of(p).len()), p));
    order
}

/// Total weight of `m` for `p`, counting only international edges.
pub fn international_value(
    graph: &CompatibilityGraph,
    weights: &WeightSystem,
    p: PlayerId,
    m: &Matching,
) -> Weight {
    m.edges()
        .filter(|&e| graph.edge(e).is_international())
        .map(|e| weights.value_to(graph, p, e))
        .fold(Weight::zero(), |a, b| a + b)
}

/// IA objective value of a matching.
pub fn ia_objective(weights: &WeightSystem, m: &Matching) -> Weight {
    m.edges().map(|e| weights.ia_weight(e)).fold(Weight::zero(), |a, b| a + b)
}
