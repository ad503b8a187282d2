//! Per-player edge valuations and the IA valuation.

use num_traits::{One, Signed, Zero};

use crate::error::{KegError, Result};
use crate::graph::{CompatibilityGraph, EdgeId, EdgeKind, PlayerId};
use crate::rational::{int, Weight};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Cardinality,
    Weighted,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Cardinality => "cardinality",
            Mode::Weighted => "weighted",
        }
    }
}

/// Valuations of one edge: `low` belongs to the owner of the lower endpoint,
/// `high` to the owner of the higher one. Internal edges only use `low`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeValuation {
    pub low: Weight,
    pub high: Weight,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightSystem {
    mode: Mode,
    per_edge: Vec<EdgeValuation>,
}

impl WeightSystem {
    pub fn cardinality(graph: &CompatibilityGraph) -> Self {
        let per_edge = graph
            .edges()
            .map(|(_, e)| EdgeValuation {
                low: Weight::one(),
                high: if e.is_international() { Weight::one() } else { Weight::zero() },
            })
            .collect();
        WeightSystem { mode: Mode::Cardinality, per_edge }
    }

    /// `values[e]` is `(w_low, w_high)`; the second entry must be zero for
    /// internal edges.
    pub fn weighted(graph: &CompatibilityGraph, values: Vec<(Weight, Weight)>) -> Result<Self> {
        if values.len() != graph.n_edges() {
            return Err(KegError::InvalidWeights(format!(
                "{} valuations for {} edges",
                values.len(),
                graph.n_edges()
            )));
        }
        let mut per_edge = Vec::with_capacity(values.len());
        for ((id, e), (low, high)) in graph.edges().zip(values) {
            if low.is_negative() || high.is_negative() {
                return Err(KegError::InvalidWeights(format!("negative weight on edge {id}")));
            }
            if !e.is_international() && !high.is_zero() {
                return Err(KegError::InvalidWeights(format!(
                    "internal edge {id} carries a second valuation"
                )));
            }
            per_edge.push(EdgeValuation { low, high });
        }
        Ok(WeightSystem { mode: Mode::Weighted, per_edge })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn valuation(&self, e: EdgeId) -> &EdgeValuation {
        &self.per_edge[e.0]
    }

    pub fn check_graph(&self, graph: &CompatibilityGraph) -> Result<()> {
        if self.per_edge.len() == graph.n_edges() {
            Ok(())
        } else {
            Err(KegError::InvalidWeights(format!(
                "weight system covers {} edges, graph has {}",
                self.per_edge.len(),
                graph.n_edges()
            )))
        }
    }

    /// Stored weight of player `p` on `e`, if `p` owns an endpoint.
    pub fn player_weight(&self, graph: &CompatibilityGraph, p: PlayerId, e: EdgeId) -> Option<Weight> {
        let v = &self.per_edge[e.0];
        match graph.edge(e).kind {
            EdgeKind::Internal(q) if q == p => Some(v.low.clone()),
            EdgeKind::International(a, _) if a == p => Some(v.low.clone()),
            EdgeKind::International(_, b) if b == p => Some(v.high.clone()),
            _ => None,
        }
    }

    /// Contribution of `e` to the utility of `p` when `e` is matched.
    pub fn value_to(&self, graph: &CompatibilityGraph, p: PlayerId, e: EdgeId) -> Weight {
        let ed = graph.edge(e);
        if !ed.touches(p) {
            return Weight::zero();
        }
        match self.mode {
            Mode::Cardinality if ed.is_international() => int(1),
            Mode::Cardinality => int(2),
            Mode::Weighted => self.player_weight(graph, p, e).unwrap_or_else(Weight::zero),
        }
    }

    /// Value the IA assigns to an international edge.
    pub fn ia_weight(&self, e: EdgeId) -> Weight {
        match self.mode {
            Mode::Cardinality => int(1),
            Mode::Weighted => {
                let v = &self.per_edge[e.0];
                &v.low + &v.high
            }
        }
    }

    /// Contribution of `e` to social welfare.
    pub fn welfare_value(&self, graph: &CompatibilityGraph, e: EdgeId) -> Weight {
        match self.mode {
            Mode::Cardinality => int(2),
            Mode::Weighted if graph.edge(e).is_international() => self.ia_weight(e),
            Mode::Weighted => self.per_edge[e.0].low.clone(),
        }
    }
}
