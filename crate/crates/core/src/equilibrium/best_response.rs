//! Best-response search for one player against fixed opponents.
//!
//! The player's internal matchings are visited in non-increasing order of
//! an optimistic bound: the value of the internal matching plus the best
//! international edges the player could hope for if it controlled the IA.
//! The order is produced by inclusion/exclusion partitioning over the
//! player's internal edges, so every internal matching is reached at most
//! once and the bound never increases between iterations.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_bigint::BigInt;

use crate::engine::{int_value, lawler_children, solve_int, EdgeConstraints, GraphView, IntWeights, Sense};
use crate::error::Result;
use crate::game::utility;
use crate::graph::{CompatibilityGraph, EdgeId, PlayerId};
use crate::ia::extreme_for_player;
use crate::matching::{residual_international, Matching, StrategyProfile};
use crate::rational::Weight;
use crate::weights::WeightSystem;

use super::{BestResponse, DeviationCertificate, PolicyFamily, SearchLimits};

struct Node {
    bound: BigInt,
    seq: usize,
    solution: Vec<usize>,
    cons: EdgeConstraints,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound.cmp(&other.bound).then_with(|| other.seq.cmp(&self.seq))
    }
}

/// IA response minimising `p`'s international value among IA-optimal
/// matchings of the residual graph.
pub fn pessimistic_ia_response(
    graph: &CompatibilityGraph,
    weights: &WeightSystem,
    profile: &StrategyProfile,
    p: PlayerId,
) -> Result<Matching> {
    graph.check_player(p)?;
    let view = GraphView::of_edges(graph, residual_international(graph, profile));
    let locals = extreme_for_player(graph, weights, &view, p, Sense::Minimize)?;
    Ok(view.to_matching(graph, &locals))
}

/// Searches for a profitable deviation of `p` from `profile`, whose outcome
/// gave `p` the international matching `ia_matching`.
pub fn best_response_exists(
    graph: &CompatibilityGraph,
    weights: &WeightSystem,
    profile: &StrategyProfile,
    ia_matching: &Matching,
    p: PlayerId,
    family: PolicyFamily<'_>,
    limits: SearchLimits,
) -> Result<BestResponse> {
    search(graph, weights, profile, ia_matching, p, family, limits, &mut Vec::new())
}

/// Like [`best_response_exists`], also returning the bound of every
/// iteration in visiting order (scaled to integers).
pub fn best_response_trace(
    graph: &CompatibilityGraph,
    weights: &WeightSystem,
    profile: &StrategyProfile,
    ia_matching: &Matching,
    p: PlayerId,
    family: PolicyFamily<'_>,
    limits: SearchLimits,
) -> Result<(BestResponse, Vec<BigInt>)> {
    let mut bounds = Vec::new();
    let r = search(graph, weights, profile, ia_matching, p, family, limits, &mut bounds)?;
    Ok((r, bounds))
}

#[allow(clippy::too_many_arguments)]
fn search(
    graph: &CompatibilityGraph,
    weights: &WeightSystem,
    profile: &StrategyProfile,
    ia_matching: &Matching,
    p: PlayerId,
    family: PolicyFamily<'_>,
    limits: SearchLimits,
    bounds: &mut Vec<BigInt>,
) -> Result<BestResponse> {
    graph.check_player(p)?;
    weights.check_graph(graph)?;
    let lower = match family {
        PolicyFamily::ExistsFriendly => utility(graph, weights, p, profile, ia_matching),
        PolicyFamily::Fixed(agent) => {
            let ia = agent.decide(graph, weights, profile)?;
            utility(graph, weights, p, profile, &ia)
        }
    };

    // Edges p can use: its internal edges and international edges whose
    // opposite endpoint is not taken by an opponent's internal matching.
    let usable: Vec<EdgeId> = graph
        .edges()
        .filter(|(_, e)| {
            e.is_internal_to(p)
                || (e.is_international()
                    && e.touches(p)
                    && [e.u, e.v].iter().all(|&x| graph.owner(x) == p || !profile.is_internally_matched(graph, x)))
        })
        .map(|(id, _)| id)
        .collect();
    let view = GraphView::of_edges(graph, usable);
    let values: Vec<Weight> = view.ids().iter().map(|&e| weights.value_to(graph, p, e)).collect();
    let mut all = values.clone();
    all.push(lower.clone());
    let scaled = IntWeights::from_rationals(&all)?.0;
    let (w, lb) = scaled.split_at(view.n_edges());
    let lb = lb[0].clone();
    let internal: Vec<usize> =
        (0..view.n_edges()).filter(|&l| graph.edge(view.id(l)).is_internal_to(p)).collect();
    let own: Vec<EdgeId> = profile.get(p).edge_ids();

    let x_part = |sol: &[usize]| -> Vec<usize> {
        sol.iter().copied().filter(|l| internal.binary_search(l).is_ok()).collect()
    };

    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    let root = EdgeConstraints::default();
    if let Some(sol) = solve_int(&view, w, &root) {
        let bound = int_value(w, &sol);
        heap.push(Node { bound, seq, solution: sol, cons: root });
        seq += 1;
    }

    let mut iterations = 0usize;
    while let Some(node) = heap.pop() {
        bounds.push(node.bound.clone());
        if node.bound <= lb {
            return Ok(BestResponse::NoDeviation);
        }
        iterations += 1;
        if iterations > limits.max_iterations {
            return Ok(BestResponse::Unresolved { iterations: limits.max_iterations });
        }
        let x = x_part(&node.solution);
        let x_ids: Vec<EdgeId> = x.iter().map(|&l| view.id(l)).collect();

        if x_ids != own {
            let strategy = Matching::from_edges(graph, x_ids.iter().copied())?;
            let deviated = profile.with(graph, p, strategy.clone())?;
            let response = match family {
                PolicyFamily::ExistsFriendly => pessimistic_ia_response(graph, weights, &deviated, p)?,
                PolicyFamily::Fixed(agent) => agent.decide(graph, weights, &deviated)?,
            };
            let gained = utility(graph, weights, p, &deviated, &response);
            if gained > lower {
                return Ok(BestResponse::Deviation(DeviationCertificate {
                    player: p,
                    new_internal: strategy,
                    old_utility: lower,
                    new_utility: gained,
                    ia_response: response,
                }));
            }
        }

        for child in lawler_children(&view, &node.solution, &node.cons, &internal) {
            if let Some(sol) = solve_int(&view, w, &child) {
                let bound = int_value(w, &sol);
                heap.push(Node { bound, seq, solution: sol, cons: child });
                seq += 1;
            }
        }
    }
    Ok(BestResponse::NoDeviation)
}
