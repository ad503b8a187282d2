//! Instance files.
//!
//! ```json
//! {
//!   "players": [{"label": "ON"}, {"label": "QC"}],
//!   "vertices": [{"owner": "ON", "patient_blood": "A", "donor_blood": "O", "cpra": "0.5"}],
//!   "edges": [{"u": 0, "v": 1, "weights": {"ON": "0.5", "QC": "0.25"}, "ia_weight": "0.75"}],
//!   "mode": "weighted",
//!   "meta": {"year": 2009, "ins": 1}
//! }
//! ```
//!
//! Vertices are written by index and edges sorted by `(min, max)` endpoint,
//! so equal instances serialize to equal bytes.

use std::collections::BTreeMap;
use std::path::Path;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{KegError, Result};
use crate::graph::{BloodType, CompatibilityGraph, PairAttributes, UncheckedEdge, UncheckedGraph};
use crate::rational::{format_weight, parse_weight, ratio, Weight};
use crate::weights::{Mode, WeightSystem};

/// Bookkeeping carried along with generated instances.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<u16>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ins: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl InstanceMeta {
    fn is_empty(&self) -> bool {
        self.year.is_none() && self.ins.is_none() && self.seed.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub graph: CompatibilityGraph,
    pub weights: WeightSystem,
    pub meta: InstanceMeta,
}

#[derive(Serialize, Deserialize)]
struct PlayerRec {
    label: String,
}

#[derive(Serialize, Deserialize)]
struct VertexRec {
    owner: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    patient_blood: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    donor_blood: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cpra: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct EdgeRec {
    u: usize,
    v: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ia_weight: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct InstanceRec {
    players: Vec<PlayerRec>,
    vertices: Vec<VertexRec>,
    edges: Vec<EdgeRec>,
    mode: String,
    #[serde(default, skip_serializing_if = "InstanceMeta::is_empty")]
    meta: InstanceMeta,
}

impl Instance {
    pub fn new(graph: CompatibilityGraph, weights: WeightSystem) -> Result<Self> {
        weights.check_graph(&graph)?;
        Ok(Instance { graph, weights, meta: InstanceMeta::default() })
    }

    pub fn cardinality(graph: CompatibilityGraph) -> Self {
        let weights = WeightSystem::cardinality(&graph);
        Instance { graph, weights, meta: InstanceMeta::default() }
    }

    pub fn to_json_string(&self) -> String {
        let g = &self.graph;
        let rec = InstanceRec {
            players: g.labels().iter().map(|l| PlayerRec { label: l.clone() }).collect(),
            vertices: (0..g.n_vertices())
                .map(|v| {
                    let v = crate::graph::VertexId(v);
                    let a = g.attributes(v);
                    VertexRec {
                        owner: g.label(g.owner(v)).to_string(),
                        patient_blood: a.patient_blood.map(|b| b.as_str().to_string()),
                        donor_blood: a.donor_blood.map(|b| b.as_str().to_string()),
                        cpra: a.cpra_percent.map(|c| format_weight(&ratio(c as i64, 100))),
                    }
                })
                .collect(),
            edges: g
                .edges()
                .map(|(id, e)| {
                    let (weights, ia_weight) = match self.weights.mode() {
                        Mode::Cardinality => (None, None),
                        Mode::Weighted => {
                            let mut map = BTreeMap::new();
                            for p in g.players().filter(|&p| e.touches(p)) {
                                let w = self.weights.player_weight(g, p, id).unwrap_or_else(Weight::zero);
                                map.insert(g.label(p).to_string(), format_weight(&w));
                            }
                            let ia = e.is_international().then(|| format_weight(&self.weights.ia_weight(id)));
                            (Some(map), ia)
                        }
                    };
                    EdgeRec { u: e.u.0, v: e.v.0, weights, ia_weight }
                })
                .collect(),
            mode: self.weights.mode().as_str().to_string(),
            meta: self.meta.clone(),
        };
        let mut s = serde_json::to_string_pretty(&rec).expect("instance serializes");
        s.push('\n');
        s
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let rec: InstanceRec = serde_json::from_str(s)?;
        let mode = match rec.mode.as_str() {
            "cardinality" => Mode::Cardinality,
            "weighted" => Mode::Weighted,
            other => return Err(KegError::InvalidWeights(format!("unknown mode {other:?}"))),
        };
        let players: Vec<String> = rec.players.into_iter().map(|p| p.label).collect();
        let index: BTreeMap<&str, usize> =
            players.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();

        let mut owners = Vec::with_capacity(rec.vertices.len());
        let mut attributes = Vec::with_capacity(rec.vertices.len());
        for v in &rec.vertices {
            let o = *index.get(v.owner.as_str()).ok_or_else(|| KegError::UnknownPlayer(v.owner.clone()))?;
            owners.push(o);
            attributes.push(PairAttributes {
                patient_blood: v.patient_blood.as_deref().map(parse_blood).transpose()?,
                donor_blood: v.donor_blood.as_deref().map(parse_blood).transpose()?,
                cpra_percent: v.cpra.as_deref().map(parse_cpra).transpose()?,
            });
        }
        let raw = UncheckedGraph {
            players: players.clone(),
            owners: owners.clone(),
            edges: rec.edges.iter().map(|e| UncheckedEdge::new(e.u, e.v)).collect(),
            attributes,
        };
        let graph = CompatibilityGraph::try_from(raw)?;

        let weights = match mode {
            Mode::Cardinality => WeightSystem::cardinality(&graph),
            Mode::Weighted => {
                let mut values = vec![(Weight::zero(), Weight::zero()); graph.n_edges()];
                for e in &rec.edges {
                    let id = graph.edge_between(e.u, e.v)?;
                    let ed = graph.edge(id);
                    let map = e.weights.as_ref().ok_or_else(|| {
                        KegError::InvalidWeights(format!("edge ({}, {}) has no weights", e.u, e.v))
                    })?;
                    let get = |p: crate::graph::PlayerId| -> Result<Weight> {
                        let label = graph.label(p);
                        let s = map.get(label).ok_or_else(|| {
                            KegError::InvalidWeights(format!("edge ({}, {}) lacks a weight for {label}", e.u, e.v))
                        })?;
                        parse_weight(s)
                    };
                    if let Some(extra) = map.keys().find(|k| {
                        index.get(k.as_str()).is_none_or(|&p| !ed.touches(crate::graph::PlayerId(p)))
                    }) {
                        return Err(KegError::InvalidWeights(format!(
                            "edge ({}, {}) carries a weight for non-owner {extra}",
                            e.u, e.v
                        )));
                    }
                    values[id.0] = match ed.kind {
                        crate::graph::EdgeKind::Internal(p) => (get(p)?, Weight::zero()),
                        crate::graph::EdgeKind::International(a, b) => (get(a)?, get(b)?),
                    };
                }
                let ws = WeightSystem::weighted(&graph, values)?;
                for e in &rec.edges {
                    if let Some(s) = &e.ia_weight {
                        let id = graph.edge_between(e.u, e.v)?;
                        if !graph.edge(id).is_international() || parse_weight(s)? != ws.ia_weight(id) {
                            return Err(KegError::InvalidWeights(format!(
                                "ia_weight of edge ({}, {}) is not the sum of its owner weights",
                                e.u, e.v
                            )));
                        }
                    }
                }
                ws
            }
        };
        Ok(Instance { graph, weights, meta: rec.meta })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }
}

fn parse_blood(s: &str) -> Result<BloodType> {
    BloodType::parse(s).ok_or_else(|| KegError::InvalidGraph(format!("unknown blood type {s:?}")))
}

fn parse_cpra(s: &str) -> Result<u8> {
    let w = parse_weight(s)? * ratio(100, 1);
    if !w.is_integer() || w < Weight::zero() || w > ratio(100, 1) {
        return Err(KegError::InvalidGraph(format!("cpra {s:?} is not a whole percentage in [0, 1]")));
    }
    Ok(w.to_integer().try_into().expect("in range"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    #[test]
    fn cardinality_round_trip() {
        let g = CompatibilityGraph::new(["A", "B"], vec![0, 1, 1], &[(1, 2), (0, 1)]).unwrap();
        let inst = Instance::cardinality(g);
        let s = inst.to_json_string();
        let back = Instance::from_json_str(&s).unwrap();
        assert_eq!(back, inst);
        assert_eq!(back.to_json_string(), s);
        assert!(!s.contains("weights"));
    }

    #[test]
    fn weighted_round_trip_with_attributes() {
        let g = CompatibilityGraph::new(["A", "B"], vec![0, 0, 1], &[(0, 1), (1, 2)])
            .unwrap()
            .with_attributes(vec![
                PairAttributes {
                    patient_blood: Some(BloodType::A),
                    donor_blood: Some(BloodType::O),
                    cpra_percent: Some(97),
                },
                PairAttributes::default(),
                PairAttributes { cpra_percent: Some(0), ..Default::default() },
            ])
            .unwrap();
        let w = WeightSystem::weighted(&g, vec![(ratio(3, 2), int(0)), (ratio(1, 3), ratio(1, 4))]).unwrap();
        let mut inst = Instance::new(g, w).unwrap();
        inst.meta.year = Some(2013);
        let s = inst.to_json_string();
        assert!(s.contains("\"cpra\": \"0.97\""));
        assert!(s.contains("\"ia_weight\": \"7/12\""));
        let back = Instance::from_json_str(&s).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn rejects_bad_files() {
        let base = r#"{"players":[{"label":"A"},{"label":"B"}],
            "vertices":[{"owner":"A"},{"owner":"B"}],
            "edges":[{"u":0,"v":1,"weights":{"A":"1","B":"2"},"ia_weight":"4"}],
            "mode":"weighted"}"#;
        assert!(matches!(Instance::from_json_str(base), Err(KegError::InvalidWeights(_))));
        let unknown = base.replace(r#"{"owner":"B"}"#, r#"{"owner":"C"}"#);
        assert!(matches!(Instance::from_json_str(&unknown), Err(KegError::UnknownPlayer(_))));
        let ok = base.replace("\"4\"", "\"3\"");
        assert!(Instance::from_json_str(&ok).is_ok());
        let parallel = ok.replace(r#""3"}"#, r#""3"},{"u":1,"v":0,"weights":{"A":"1","B":"2"}}"#);
        assert!(matches!(Instance::from_json_str(&parallel), Err(KegError::InvalidGraph(_))));
    }
}
