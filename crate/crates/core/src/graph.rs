//! Partitioned compatibility graphs.
//!
//! Every vertex is an incompatible patient-donor pair owned by exactly one
//! player. Edges are 2-way exchanges; an edge is internal to a player when
//! both pairs belong to it and international otherwise. Vertices and edges
//! are addressed by dense indices, and edges are stored sorted by
//! `(min endpoint, max endpoint)` so that edge indices are canonical.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{KegError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PlayerId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeId(pub usize);

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    Internal(PlayerId),
    /// Owners of the lower and the higher endpoint.
    International(PlayerId, PlayerId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    /// Lower endpoint.
    pub u: VertexId,
    /// Higher endpoint.
    pub v: VertexId,
    pub kind: EdgeKind,
}

impl Edge {
    pub fn endpoints(&self) -> (VertexId, VertexId) {
        (self.u, self.v)
    }

    pub fn other(&self, w: VertexId) -> VertexId {
        if w == self.u {
            self.v
        } else {
            self.u
        }
    }

    pub fn is_international(&self) -> bool {
        matches!(self.kind, EdgeKind::International(..))
    }

    pub fn is_internal_to(&self, p: PlayerId) -> bool {
        self.kind == EdgeKind::Internal(p)
    }

    /// True if some endpoint is owned by `p`.
    pub fn touches(&self, p: PlayerId) -> bool {
        match self.kind {
            EdgeKind::Internal(q) => q == p,
            EdgeKind::International(a, b) => a == p || b == p,
        }
    }
}

/// Blood group of a patient or donor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
pub enum BloodType {
    O,
    A,
    B,
    AB,
}

impl BloodType {
    pub const ALL: [BloodType; 4] = [BloodType::O, BloodType::A, BloodType::B, BloodType::AB];

    /// ABO rule: can a donor of `self` give to a patient of `patient`?
    pub fn can_donate_to(self, patient: BloodType) -> bool {
        match self {
            BloodType::O => true,
            BloodType::A => matches!(patient, BloodType::A | BloodType::AB),
            BloodType::B => matches!(patient, BloodType::B | BloodType::AB),
            BloodType::AB => patient == BloodType::AB,
        }
    }

    pub fn parse(s: &str) -> Option<BloodType> {
        match s.trim() {
            "O" => Some(BloodType::O),
            "A" => Some(BloodType::A),
            "B" => Some(BloodType::B),
            "AB" => Some(BloodType::AB),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BloodType::O => "O",
            BloodType::A => "A",
            BloodType::B => "B",
            BloodType::AB => "AB",
        }
    }
}

/// Optional biological data carried through from the generator.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PairAttributes {
    pub patient_blood: Option<BloodType>,
    pub donor_blood: Option<BloodType>,
    /// cPRA as an integer percentage.
    pub cpra_percent: Option<u8>,
}

/// A graph as read from disk, before any invariant is checked.
#[derive(Debug, Clone, Default)]
pub struct UncheckedGraph {
    pub players: Vec<String>,
    pub owners: Vec<usize>,
    pub edges: Vec<UncheckedEdge>,
    pub attributes: Vec<PairAttributes>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UncheckedEdge {
    pub u: usize,
    pub v: usize,
    /// Declared kind, if the source carried one.
    pub kind: Option<EdgeKind>,
}

impl UncheckedEdge {
    pub fn new(u: usize, v: usize) -> Self {
        UncheckedEdge { u, v, kind: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DuplicatePlayerLabel(String),
    UnknownOwner { vertex: usize, owner: usize },
    EndpointOutOfRange { edge: usize, vertex: usize },
    SelfLoop { edge: usize, vertex: usize },
    ParallelEdge { edge: usize, u: usize, v: usize },
    KindOwnerMismatch { edge: usize },
    AttributeCount { expected: usize, found: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicatePlayerLabel(l) => write!(f, "duplicate player label {l:?}"),
            Violation::UnknownOwner { vertex, owner } => {
                write!(f, "vertex {vertex}: unknown owner {owner}")
            }
            Violation::EndpointOutOfRange { edge, vertex } => {
                write!(f, "edge {edge}: endpoint {vertex} out of range")
            }
            Violation::SelfLoop { edge, vertex } => write!(f, "edge {edge}: self-loop on {vertex}"),
            Violation::ParallelEdge { edge, u, v } => {
                write!(f, "edge {edge}: parallel edge ({u}, {v})")
            }
            Violation::KindOwnerMismatch { edge } => write!(f, "edge {edge}: kind/owner mismatch"),
            Violation::AttributeCount { expected, found } => {
                write!(f, "expected {expected} attribute records, found {found}")
            }
        }
    }
}

impl UncheckedGraph {
    /// Every invariant violation, in input order.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut seen_labels = HashMap::new();
        for l in &self.players {
            if seen_labels.insert(l.as_str(), ()).is_some() {
                out.push(Violation::DuplicatePlayerLabel(l.clone()));
            }
        }
        for (vertex, &owner) in self.owners.iter().enumerate() {
            if owner >= self.players.len() {
                out.push(Violation::UnknownOwner { vertex, owner });
            }
        }
        if !self.attributes.is_empty() && self.attributes.len() != self.owners.len() {
            out.push(Violation::AttributeCount {
                expected: self.owners.len(),
                found: self.attributes.len(),
            });
        }
        let n = self.owners.len();
        let mut seen = HashMap::new();
        for (i, e) in self.edges.iter().enumerate() {
            let mut ok = true;
            for w in [e.u, e.v] {
                if w >= n {
                    out.push(Violation::EndpointOutOfRange { edge: i, vertex: w });
                    ok = false;
                }
            }
            if !ok {
                continue;
            }
            if e.u == e.v {
                out.push(Violation::SelfLoop { edge: i, vertex: e.u });
                continue;
            }
            let key = (e.u.min(e.v), e.u.max(e.v));
            if seen.insert(key, i).is_some() {
                out.push(Violation::ParallelEdge { edge: i, u: key.0, v: key.1 });
            }
            if let Some(kind) = e.kind {
                let (a, b) = (self.owners[key.0], self.owners[key.1]);
                let consistent = match kind {
                    EdgeKind::Internal(p) => a == b && p.0 == a,
                    EdgeKind::International(x, y) => a != b && x.0 == a && y.0 == b,
                };
                if !consistent {
                    out.push(Violation::KindOwnerMismatch { edge: i });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompatibilityGraph {
    players: Vec<String>,
    owner: Vec<PlayerId>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<EdgeId>>,
    members: Vec<Vec<VertexId>>,
    attributes: Vec<PairAttributes>,
    index: HashMap<(VertexId, VertexId), EdgeId>,
}

impl TryFrom<UncheckedGraph> for CompatibilityGraph {
    type Error = KegError;

    fn try_from(raw: UncheckedGraph) -> Result<Self> {
        let violations = raw.validate();
        if !violations.is_empty() {
            let msg: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            return Err(KegError::InvalidGraph(msg.join("; ")));
        }
        let owner: Vec<PlayerId> = raw.owners.iter().map(|&o| PlayerId(o)).collect();
        let mut pairs: Vec<(usize, usize)> = raw
            .edges
            .iter()
            .map(|e| (e.u.min(e.v), e.u.max(e.v)))
            .collect();
        pairs.sort_unstable();
        let n = owner.len();
        let mut adjacency = vec![Vec::new(); n];
        let mut index = HashMap::with_capacity(pairs.len());
        let mut edges = Vec::with_capacity(pairs.len());
        for (i, &(a, b)) in pairs.iter().enumerate() {
            let (oa, ob) = (owner[a], owner[b]);
            let kind = if oa == ob {
                EdgeKind::Internal(oa)
            } else {
                EdgeKind::International(oa, ob)
            };
            let id = EdgeId(i);
            edges.push(Edge { u: VertexId(a), v: VertexId(b), kind });
            adjacency[a].push(id);
            adjacency[b].push(id);
            index.insert((VertexId(a), VertexId(b)), id);
        }
        let mut members = vec![Vec::new(); raw.players.len()];
        for (v, o) in owner.iter().enumerate() {
            members[o.0].push(VertexId(v));
        }
        let attributes = if raw.attributes.is_empty() {
            vec![PairAttributes::default(); n]
        } else {
            raw.attributes
        };
        Ok(CompatibilityGraph {
            players: raw.players,
            owner,
            edges,
            adjacency,
            members,
            attributes,
            index,
        })
    }
}

impl CompatibilityGraph {
    /// Builds a graph from player labels, the owner of every vertex and an
    /// undirected edge list.
    pub fn new<S: Into<String>>(
        players: impl IntoIterator<Item = S>,
        owners: Vec<usize>,
        edges: &[(usize, usize)],
    ) -> Result<Self> {
        let raw = UncheckedGraph {
            players: players.into_iter().map(Into::into).collect(),
            owners,
            edges: edges.iter().map(|&(u, v)| UncheckedEdge::new(u, v)).collect(),
            attributes: Vec::new(),
        };
        CompatibilityGraph::try_from(raw)
    }

    pub fn with_attributes(mut self, attributes: Vec<PairAttributes>) -> Result<Self> {
        if attributes.len() != self.owner.len() {
            return Err(KegError::InvalidGraph(format!(
                "expected {} attribute records, found {}",
                self.owner.len(),
                attributes.len()
            )));
        }
        self.attributes = attributes;
        Ok(self)
    }

    /// Re-checks the invariants of an already built graph.
    pub fn validate(&self) -> Vec<Violation> {
        self.to_unchecked_with_kinds().validate()
    }

    pub(crate) fn to_unchecked_with_kinds(&self) -> UncheckedGraph {
        UncheckedGraph {
            players: self.players.clone(),
            owners: self.owner.iter().map(|p| p.0).collect(),
            edges: self
                .edges
                .iter()
                .map(|e| UncheckedEdge { u: e.u.0, v: e.v.0, kind: Some(e.kind) })
                .collect(),
            attributes: self.attributes.clone(),
        }
    }

    pub fn n_players(&self) -> usize {
        self.players.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.owner.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn players(&self) -> impl Iterator<Item = PlayerId> + '_ {
        (0..self.players.len()).map(PlayerId)
    }

    pub fn label(&self, p: PlayerId) -> &str {
        &self.players[p.0]
    }

    pub fn labels(&self) -> &[String] {
        &self.players
    }

    pub fn player_by_label(&self, label: &str) -> Result<PlayerId> {
        self.players
            .iter()
            .position(|l| l == label)
            .map(PlayerId)
            .ok_or_else(|| KegError::UnknownPlayer(label.to_string()))
    }

    pub fn check_player(&self, p: PlayerId) -> Result<()> {
        if p.0 < self.players.len() {
            Ok(())
        } else {
            Err(KegError::UnknownPlayer(p.0.to_string()))
        }
    }

    pub fn owner(&self, v: VertexId) -> PlayerId {
        self.owner[v.0]
    }

    pub fn vertices_of(&self, p: PlayerId) -> &[VertexId] {
        &self.members[p.0]
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.0]
    }

    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, &Edge)> + '_ {
        self.edges.iter().enumerate().map(|(i, e)| (EdgeId(i), e))
    }

    pub fn incident(&self, v: VertexId) -> &[EdgeId] {
        &self.adjacency[v.0]
    }

    pub fn attributes(&self, v: VertexId) -> &PairAttributes {
        &self.attributes[v.0]
    }

    pub fn find_edge(&self, a: VertexId, b: VertexId) -> Option<EdgeId> {
        self.index.get(&(a.min(b), a.max(b))).copied()
    }

    /// Edge id for a pair given as plain indices.
    pub fn edge_between(&self, a: usize, b: usize) -> Result<EdgeId> {
        self.find_edge(VertexId(a), VertexId(b))
            .ok_or(KegError::UnknownEdge(a.min(b), a.max(b)))
    }

    pub fn internal_edges(&self, p: PlayerId) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges().filter(move |(_, e)| e.is_internal_to(p)).map(|(i, _)| i)
    }

    pub fn international_edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges().filter(|(_, e)| e.is_international()).map(|(i, _)| i)
    }

    /// International edges incident with a vertex of `p`.
    pub fn international_edges_of(&self, p: PlayerId) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges()
            .filter(move |(_, e)| e.is_international() && e.touches(p))
            .map(|(i, _)| i)
    }

    /// Copy of the graph with the given vertices removed; remaining vertices
    /// keep their relative order.
    pub fn without_vertices(&self, removed: &[VertexId]) -> Result<(Self, Vec<Option<VertexId>>)> {
        let mut map = vec![None; self.n_vertices()];
        let mut owners = Vec::new();
        let mut attrs = Vec::new();
        for v in 0..self.n_vertices() {
            if removed.contains(&VertexId(v)) {
                continue;
            }
            map[v] = Some(VertexId(owners.len()));
            owners.push(self.owner[v].0);
            attrs.push(self.attributes[v].clone());
        }
        let edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .filter_map(|e| Some((map[e.u.0]?.0, map[e.v.0]?.0)))
            .collect();
        let g = CompatibilityGraph::new(self.players.clone(), owners, &edges)?
            .with_attributes(attrs)?;
        Ok((g, map))
    }
}
