//! Centralized setting: a single authority picks a maximum-cardinality
//! matching on whatever the players reveal, and a player may hide some of
//! its vertices and match them internally instead.

use num_traits::Zero;

use crate::engine::{lexicographic_locals, EdgeConstraints, GraphView, Sense};
use crate::enumeration::enumerate_all_matchings;
use crate::error::Result;
use crate::graph::{CompatibilityGraph, PlayerId};
use crate::matching::Matching;
use crate::rational::{int, Weight};
use crate::weights::WeightSystem;

use super::DeviationCertificate;

/// Most profitable hide-and-match deviation of `p` against the outcome `m`
/// of the authority, or `None` if hiding never pays.
///
/// `p` hides the vertices of an internal matching `X` and keeps `X`. The
/// authority answers with a maximum-cardinality matching of the remaining
/// graph, the worst one for `p` among those. The certificate's
/// `new_internal` is `X` and `ia_response` is the authority's answer.
pub fn mechanism_deviation(
    graph: &CompatibilityGraph,
    weights: &WeightSystem,
    m: &Matching,
    p: PlayerId,
) -> Result<Option<DeviationCertificate>> {
    graph.check_player(p)?;
    weights.check_graph(graph)?;
    let value = |e| weights.value_to(graph, p, e);
    let old: Weight = m.edges().map(value).fold(Weight::zero(), |a, b| a + b);

    let own = GraphView::of_edges(graph, graph.internal_edges(p));
    let mut best: Option<DeviationCertificate> = None;
    for x in enumerate_all_matchings(graph, &own)? {
        if x.is_empty() {
            continue;
        }
        let view = GraphView::of_edges(
            graph,
            graph.edges().filter(|&(_, e)| !x.is_matched(e.u) && !x.is_matched(e.v)).map(|(id, _)| id),
        );
        let ones = vec![int(1); view.n_edges()];
        let mine: Vec<Weight> = view.ids().iter().map(|&e| value(e)).collect();
        let locals = lexicographic_locals(&view, &ones, &mine, Sense::Minimize, &EdgeConstraints::default())?
            .expect("no constraints");
        let answer = view.to_matching(graph, &locals);
        let new: Weight = x.edges().chain(answer.edges()).map(value).fold(Weight::zero(), |a, b| a + b);
        if new > old && best.as_ref().is_none_or(|b| new > b.new_utility) {
            best = Some(DeviationCertificate {
                player: p,
                new_internal: x,
                old_utility: old.clone(),
                new_utility: new,
                ia_response: answer,
            });
        }
    }
    Ok(best)
}
