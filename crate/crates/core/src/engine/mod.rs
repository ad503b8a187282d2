//! Exact matching algorithms on general graphs.
//!
//! Every optimization here resolves ties the same way. Two matchings of
//! equal value are compared at the smallest edge index where they differ:
//! if that edge has positive weight the matching containing it wins,
//! otherwise the one without it wins. For unconstrained problems this picks
//! the matching whose sorted edge list is lexicographically smallest.
//! The rule is enforced by perturbing integer weights: with `q` usable edges
//! of rank `0..q`, edge `e` gets `w_e * 2^q + 2^(q - 1 - rank_e)`.

pub mod cardinality;
pub mod weighted;

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{KegError, Result};
use crate::graph::{CompatibilityGraph, EdgeId, VertexId};
use crate::matching::Matching;
use crate::rational::Weight;

/// A subgraph handed to the matching algorithms. Vertices keep their global
/// indices; edges are local indices into `edges`, in ascending order of the
/// graph edge they stand for.
#[derive(Debug, Clone)]
pub struct GraphView {
    n: usize,
    edges: Vec<(usize, usize)>,
    ids: Vec<EdgeId>,
    adj: Vec<Vec<usize>>,
}

impl GraphView {
    /// A free-standing view; local edge `i` stands for `EdgeId(i)`.
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Self {
        let ids = (0..edges.len()).map(EdgeId).collect();
        GraphView::build(n, edges, ids)
    }

    pub fn of_graph(graph: &CompatibilityGraph) -> Self {
        GraphView::of_edges(graph, graph.edges().map(|(id, _)| id))
    }

    pub fn of_edges<I: IntoIterator<Item = EdgeId>>(graph: &CompatibilityGraph, ids: I) -> Self {
        let mut ids: Vec<EdgeId> = ids.into_iter().collect();
        ids.sort_unstable();
        ids.dedup();
        let edges = ids
            .iter()
            .map(|&e| {
                let ed = graph.edge(e);
                (ed.u.0, ed.v.0)
            })
            .collect();
        GraphView::build(graph.n_vertices(), edges, ids)
    }

    fn build(n: usize, edges: Vec<(usize, usize)>, ids: Vec<EdgeId>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for l in &mut adj {
            l.sort_unstable();
        }
        GraphView { n, edges, ids, adj }
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn endpoints(&self, local: usize) -> (usize, usize) {
        self.edges[local]
    }

    pub fn edge_list(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn id(&self, local: usize) -> EdgeId {
        self.ids[local]
    }

    pub fn ids(&self) -> &[EdgeId] {
        &self.ids
    }

    pub fn local(&self, e: EdgeId) -> Option<usize> {
        self.ids.binary_search(&e).ok()
    }

    pub fn local_between(&self, a: usize, b: usize) -> Option<usize> {
        let key = (a.min(b), a.max(b));
        self.edges.iter().position(|&(u, v)| (u.min(v), u.max(v)) == key)
    }

    /// Vertices with at least one edge in the view.
    pub fn active_vertices(&self) -> Vec<usize> {
        (0..self.n).filter(|&v| !self.adj[v].is_empty()).collect()
    }

    pub fn to_matching(&self, graph: &CompatibilityGraph, locals: &[usize]) -> Matching {
        Matching::from_edges(graph, locals.iter().map(|&l| self.ids[l]))
            .expect("algorithms return matchings")
    }

    fn mates_of(&self, locals: &[usize]) -> Vec<Option<usize>> {
        let mut mate = vec![None; self.n];
        for &l in locals {
            let (u, v) = self.edges[l];
            mate[u] = Some(v);
            mate[v] = Some(u);
        }
        mate
    }

    fn locals_of_mates(&self, mate: &[Option<usize>]) -> Vec<usize> {
        let mut out: Vec<usize> = (0..self.edges.len())
            .filter(|&l| {
                let (u, v) = self.edges[l];
                mate[u] == Some(v)
            })
            .collect();
        out.sort_unstable();
        out
    }

    fn locals_from_matching(&self, m: &Matching) -> Result<Vec<usize>> {
        m.edges()
            .map(|e| self.local(e).ok_or(KegError::UnknownEdge(e.0, e.0)))
            .collect()
    }
}

/// A simple path given by its vertices and the graph edges between them.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AlternatingPath {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<EdgeId>,
}

impl AlternatingPath {
    pub fn from_vertices(graph: &CompatibilityGraph, vertices: &[usize]) -> Result<Self> {
        let edges = vertices
            .windows(2)
            .map(|w| graph.edge_between(w[0], w[1]))
            .collect::<Result<Vec<_>>>()?;
        Ok(AlternatingPath { vertices: vertices.iter().map(|&v| VertexId(v)).collect(), edges })
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn is_simple(&self) -> bool {
        let set: BTreeSet<_> = self.vertices.iter().collect();
        set.len() == self.vertices.len()
    }

    /// True if consecutive edges alternate membership in `m`.
    pub fn alternates_in(&self, m: &Matching) -> bool {
        self.edges.windows(2).all(|w| m.contains(w[0]) != m.contains(w[1]))
    }

    pub fn is_augmenting(&self, m: &Matching) -> bool {
        match (self.vertices.first(), self.vertices.last()) {
            (Some(&a), Some(&b)) if !self.edges.is_empty() => {
                self.is_simple()
                    && self.alternates_in(m)
                    && !m.is_matched(a)
                    && !m.is_matched(b)
                    && !m.contains(self.edges[0])
            }
            _ => false,
        }
    }
}

/// Augmenting path from an unmatched `start`, searched within `view`.
pub fn find_augmenting_path(
    graph: &CompatibilityGraph,
    view: &GraphView,
    m: &Matching,
    start: VertexId,
) -> Result<Option<AlternatingPath>> {
    if start.0 >= view.n {
        return Err(KegError::VertexOutOfRange(start.0));
    }
    if m.is_matched(start) {
        return Err(KegError::AlreadyMatched(start));
    }
    let locals = view.locals_from_matching(m)?;
    let mate = view.mates_of(&locals);
    Ok(cardinality::augmenting_path(&view.adj, &mate, start.0)
        .map(|vs| AlternatingPath::from_vertices(graph, &vs).expect("path edges exist")))
}

/// `m` with the path's edges flipped.
pub fn symmetric_difference(
    graph: &CompatibilityGraph,
    m: &Matching,
    path: &AlternatingPath,
) -> Result<Matching> {
    if !path.alternates_in(m) || !path.is_simple() {
        return Err(KegError::NotAlternating);
    }
    let mut edges: BTreeSet<EdgeId> = m.edges().collect();
    for &e in &path.edges {
        if !edges.remove(&e) {
            edges.insert(e);
        }
    }
    Matching::from_edges(graph, edges).map_err(|_| KegError::NotAlternating)
}

/// Maximum cardinality matching grown from `seed` by the augmenting-path loop.
pub fn max_cardinality_matching(
    graph: &CompatibilityGraph,
    view: &GraphView,
    seed: &Matching,
) -> Result<Matching> {
    let locals = view.locals_from_matching(seed)?;
    Ok(view.to_matching(graph, &max_cardinality_locals(view, &locals)))
}

pub fn max_cardinality_locals(view: &GraphView, seed: &[usize]) -> Vec<usize> {
    let mut mate = view.mates_of(seed);
    cardinality::maximum(&view.adj, &mut mate);
    view.locals_of_mates(&mate)
}

/// Largest matching size of the view.
pub fn matching_number(view: &GraphView) -> usize {
    max_cardinality_locals(view, &[]).len()
}

/// Forced and forbidden local edges for a constrained solve.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EdgeConstraints {
    pub include: Vec<usize>,
    pub exclude: Vec<usize>,
}

/// Integer weights of a view, already scaled to a common denominator.
#[derive(Debug, Clone)]
pub struct IntWeights(pub Vec<BigInt>);

impl IntWeights {
    pub fn from_rationals(ws: &[Weight]) -> Result<Self> {
        let mut lcm = BigInt::from(1);
        for w in ws {
            lcm = num_integer::Integer::lcm(&lcm, w.denom());
        }
        Ok(IntWeights(ws.iter().map(|w| w.numer() * (&lcm / w.denom())).collect()))
    }
}

/// Tie-broken maximum weight matching over local edges with integer
/// weights, honouring `cons`. Returns sorted local edge indices, or `None`
/// if the forced edges conflict.
pub fn solve_int(view: &GraphView, w: &[BigInt], cons: &EdgeConstraints) -> Option<Vec<usize>> {
    let mut blocked = vec![false; view.n];
    let mut forced = Vec::new();
    for &l in &cons.include {
        let (u, v) = view.edges[l];
        if blocked[u] || blocked[v] {
            return None;
        }
        blocked[u] = true;
        blocked[v] = true;
        forced.push(l);
    }
    let mut usable = Vec::new();
    for l in 0..view.edges.len() {
        let (u, v) = view.edges[l];
        if blocked[u] || blocked[v] || cons.exclude.contains(&l) || !w[l].is_positive() {
            continue;
        }
        usable.push(l);
    }
    let q = usable.len();
    let perturbed: Vec<BigInt> = usable
        .iter()
        .enumerate()
        .map(|(rank, &l)| (&w[l] << q) + (BigInt::from(1) << (q - 1 - rank)))
        .collect();
    let limit = BigInt::from(i128::MAX >> 4);
    let max = perturbed.iter().max().cloned().unwrap_or_else(BigInt::zero);
    let total: BigInt = perturbed.iter().sum();
    let picked = if max.clone() * BigInt::from(4) < limit && total < limit {
        let edges: Vec<(usize, usize, i128)> = usable
            .iter()
            .zip(&perturbed)
            .map(|(&l, p)| (view.edges[l].0, view.edges[l].1, p.to_i128().expect("checked bound")))
            .collect();
        weighted::solve(view.n, &edges)
    } else {
        let edges: Vec<(usize, usize, BigInt)> = usable
            .iter()
            .zip(perturbed)
            .map(|(&l, p)| (view.edges[l].0, view.edges[l].1, p))
            .collect();
        weighted::solve(view.n, &edges)
    };
    let mut out: Vec<usize> = picked.into_iter().map(|i| usable[i]).collect();
    out.extend(forced);
    out.sort_unstable();
    Some(out)
}

/// Splits the part of a constrained subspace other than `solution` into
/// disjoint child subspaces, branching only on the local edges in `branch`
/// (sorted).
///
/// Two subspaces are told apart by their `branch` edges alone, so every
/// matching whose `branch` part differs from the solution's lands in
/// exactly one child.
pub fn lawler_children(
    view: &GraphView,
    solution: &[usize],
    cons: &EdgeConstraints,
    branch: &[usize],
) -> Vec<EdgeConstraints> {
    let mut out = Vec::new();
    let mut fixed = cons.clone();
    for &l in solution {
        if branch.binary_search(&l).is_err() || fixed.include.contains(&l) {
            continue;
        }
        let mut child = fixed.clone();
        child.exclude.push(l);
        out.push(child);
        fixed.include.push(l);
    }
    let mut covered = vec![false; view.n];
    for &l in &fixed.include {
        let (u, v) = view.edges[l];
        covered[u] = true;
        covered[v] = true;
    }
    for &l in branch {
        let (u, v) = view.edges[l];
        if covered[u] || covered[v] || fixed.exclude.contains(&l) {
            continue;
        }
        let mut child = fixed.clone();
        child.include.push(l);
        out.push(child);
        fixed.exclude.push(l);
    }
    out
}

/// Total integer weight of a set of local edges.
pub fn int_value(w: &[BigInt], locals: &[usize]) -> BigInt {
    locals.iter().map(|&l| &w[l]).sum()
}

/// Maximum weight matching with the global tie rule.
pub fn max_weight_matching(
    graph: &CompatibilityGraph,
    view: &GraphView,
    weights: &[Weight],
) -> Result<Matching> {
    check_len(view, weights)?;
    let w = IntWeights::from_rationals(weights)?;
    let locals = solve_int(view, &w.0, &EdgeConstraints::default()).expect("no constraints");
    Ok(view.to_matching(graph, &locals))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// Combines a primary and a secondary objective into one weight vector so
/// that any gain in the primary outweighs every secondary difference.
///
/// With integer primary `a_e` and nonnegative integer secondary `b_e`, let
/// `F = 1 + sum(b)`. Every matching has secondary total below `F`, so
/// `a_e * F + b_e` (or `- b_e`) orders matchings by primary value first.
/// Edges whose combined weight is not positive can never help and are
/// dropped by the solver, which the tie rule also prefers.
pub fn dominance_weights(primary: &[BigInt], secondary: &[BigInt], sense: Sense) -> Vec<BigInt> {
    let f: BigInt = BigInt::from(1) + secondary.iter().sum::<BigInt>();
    primary
        .iter()
        .zip(secondary)
        .map(|(a, b)| match sense {
            Sense::Maximize => a * &f + b,
            Sense::Minimize => a * &f - b,
        })
        .collect()
}

/// Among primary-optimal matchings, one with extreme secondary value.
pub fn lexicographic_locals(
    view: &GraphView,
    primary: &[Weight],
    secondary: &[Weight],
    sense: Sense,
    cons: &EdgeConstraints,
) -> Result<Option<Vec<usize>>> {
    check_len(view, primary)?;
    check_len(view, secondary)?;
    if secondary.iter().any(|w| w.is_negative()) {
        return Err(KegError::InvalidWeights("negative secondary weight".into()));
    }
    let a = IntWeights::from_rationals(primary)?;
    let b = IntWeights::from_rationals(secondary)?;
    let combined = dominance_weights(&a.0, &b.0, sense);
    Ok(solve_int(view, &combined, cons))
}

/// Among maximum-cardinality matchings, one of minimum or maximum weight.
pub fn max_cardinality_then_extreme_weight(
    graph: &CompatibilityGraph,
    view: &GraphView,
    weights: &[Weight],
    sense: Sense,
) -> Result<Matching> {
    let ones = vec![crate::rational::int(1); view.n_edges()];
    let locals = lexicographic_locals(view, &ones, weights, sense, &EdgeConstraints::default())?
        .expect("no constraints");
    Ok(view.to_matching(graph, &locals))
}

fn check_len(view: &GraphView, ws: &[Weight]) -> Result<()> {
    if ws.len() != view.n_edges() {
        return Err(KegError::InvalidWeights(format!(
            "{} weights for {} view edges",
            ws.len(),
            view.n_edges()
        )));
    }
    if ws.iter().any(|w| w.is_negative()) {
        return Err(KegError::InvalidWeights("negative weight".into()));
    }
    Ok(())
}

/// Rational value of a matching under view weights.
pub fn value_of(view: &GraphView, weights: &[Weight], m: &Matching) -> Weight {
    m.edges()
        .filter_map(|e| view.local(e))
        .map(|l| weights[l].clone())
        .fold(Weight::zero(), |acc, w| acc + w)
}

#[cfg(test)]
mod tests {
    use super::*;
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
    fn augmenting_path_on_single_edge() {
        let g = CompatibilityGraph::new(["A"], vec![0, 0], &[(0, 1)]).unwrap();
        let v = GraphView::of_graph(&g);
        let p = find_augmenting_path(&g, &v, &Matching::empty(), VertexId(1)).unwrap().unwrap();
        assert_eq!(p.edges, vec![EdgeId(0)]);
        let m = Matching::from_pairs(&g, &[(0, 1)]).unwrap();
        assert!(matches!(
            find_augmenting_path(&g, &v, &m, VertexId(0)),
            Err(KegError::AlreadyMatched(_))
        ));
    }

    #[test]
    fn augmenting_path_on_seven_path() {
        let g = seven_path();
        let v = GraphView::of_graph(&g);
        let m = Matching::from_pairs(&g, &[(1, 2), (3, 4)]).unwrap();
        let p = find_augmenting_path(&g, &v, &m, VertexId(6)).unwrap().unwrap();
        assert!(p.is_augmenting(&m));
        assert_eq!(symmetric_difference(&g, &m, &p).unwrap().len(), 3);
    }

    #[test]
    fn symmetric_difference_cases() {
        let g = seven_path();
        let m = Matching::from_pairs(&g, &[(1, 2)]).unwrap();
        let p = AlternatingPath::from_vertices(&g, &[0, 1, 2, 3]).unwrap();
        let r = symmetric_difference(&g, &m, &p).unwrap();
        assert_eq!(r.pairs(&g), vec![(0, 1), (2, 3)]);
        assert_eq!(symmetric_difference(&g, &m, &AlternatingPath::default()).unwrap(), m);
        let bad = AlternatingPath::from_vertices(&g, &[2, 3, 4]).unwrap();
        assert!(symmetric_difference(&g, &m, &bad).is_err());
    }

    #[test]
    fn cardinality_on_seven_path() {
        let g = seven_path();
        let v = GraphView::of_graph(&g);
        assert_eq!(max_cardinality_matching(&g, &v, &Matching::empty()).unwrap().len(), 3);
        let empty = CompatibilityGraph::new(Vec::<String>::new(), vec![], &[]).unwrap();
        let ev = GraphView::of_graph(&empty);
        assert!(max_cardinality_matching(&empty, &ev, &Matching::empty()).unwrap().is_empty());
    }

    #[test]
    fn weighted_tie_rule() {
        let g = CompatibilityGraph::new(["A", "B"], vec![0, 1, 0, 1], &[(0, 1), (1, 2), (2, 3)])
            .unwrap();
        let v = GraphView::of_graph(&g);
        let m = max_weight_matching(&g, &v, &[int(6), int(11), int(6)]).unwrap();
        assert_eq!(m.pairs(&g), vec![(0, 1), (2, 3)]);
        let m = max_weight_matching(&g, &v, &[int(0), int(0), int(0)]).unwrap();
        assert!(m.is_empty());
        // equal values: the matching holding the smallest edge wins
        let m = max_weight_matching(&g, &v, &[int(3), int(6), int(3)]).unwrap();
        assert_eq!(m.pairs(&g), vec![(0, 1), (2, 3)]);
        let m = max_weight_matching(&g, &v, &[int(1), int(1), int(0)]).unwrap();
        assert_eq!(m.pairs(&g), vec![(0, 1)]);
    }

    #[test]
    fn cardinality_dominates_weight() {
        let g = CompatibilityGraph::new(["A"], vec![0, 0, 0, 0], &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let v = GraphView::of_graph(&g);
        let w = [int(1), int(9), int(1)];
        let m = max_cardinality_then_extreme_weight(&g, &v, &w, Sense::Maximize).unwrap();
        assert_eq!(m.pairs(&g), vec![(0, 1), (2, 3)]);
        let w = [int(1), int(10), int(1)];
        let m = max_cardinality_then_extreme_weight(&g, &v, &w, Sense::Minimize).unwrap();
        assert_eq!(m.pairs(&g), vec![(0, 1), (2, 3)]);
    }

    #[test]
    fn bigint_route_matches_machine_route() {
        let view = GraphView::new(4, vec![(0, 1), (1, 2), (2, 3), (0, 3)]);
        let small = [BigInt::from(3), BigInt::from(3), BigInt::from(3), BigInt::from(3)];
        let huge: Vec<BigInt> = small.iter().map(|w| w << 200).collect();
        let a = solve_int(&view, &small, &EdgeConstraints::default()).unwrap();
        let b = solve_int(&view, &huge, &EdgeConstraints::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, vec![0, 2]);
    }

    #[test]
    fn constraints_are_respected() {
        let view = GraphView::new(4, vec![(0, 1), (1, 2), (2, 3)]);
        let w = [BigInt::from(1), BigInt::from(5), BigInt::from(1)];
        let cons = EdgeConstraints { include: vec![0], exclude: vec![] };
        assert_eq!(solve_int(&view, &w, &cons).unwrap(), vec![0, 2]);
        let cons = EdgeConstraints { include: vec![], exclude: vec![1] };
        assert_eq!(solve_int(&view, &w, &cons).unwrap(), vec![0, 2]);
        let cons = EdgeConstraints { include: vec![0, 1], exclude: vec![] };
        assert!(solve_int(&view, &w, &cons).is_none());
    }

    fn brute_best(view: &GraphView, w: &[i64]) -> (i64, Vec<usize>) {
        let m = view.n_edges();
        let mut best = (-1, Vec::new());
        for mask in 0u32..(1 << m) {
            let mut used = vec![false; view.n_vertices()];
            let mut ok = true;
            let mut val = 0;
            let mut set = Vec::new();
            for l in 0..m {
                if mask & (1 << l) != 0 {
                    let (u, v) = view.endpoints(l);
                    if used[u] || used[v] {
                        ok = false;
                        break;
                    }
                    used[u] = true;
                    used[v] = true;
                    val += w[l];
                    set.push(l);
                }
            }
            if !ok {
                continue;
            }
            // higher value, then lexicographically smaller edge list without zero edges
            set.retain(|&l| w[l] > 0);
            if val > best.0 || (val == best.0 && set < best.1) {
                best = (val, set);
            }
        }
        best
    }

    #[test]
    fn random_graphs_match_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..400 {
            let n = rng.gen_range(2..9);
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen_bool(0.45) && edges.len() < 14 {
                        edges.push((u, v));
                    }
                }
            }
            let view = GraphView::new(n, edges);
            let w: Vec<i64> = (0..view.n_edges()).map(|_| rng.gen_range(0..4)).collect();
            let big: Vec<BigInt> = w.iter().map(|&x| BigInt::from(x)).collect();
            let got = solve_int(&view, &big, &EdgeConstraints::default()).unwrap();
            let (val, set) = brute_best(&view, &w);
            assert_eq!(int_value(&big, &got), BigInt::from(val));
            assert_eq!(got, set);
        }
    }
}
