//! Counting, uniform sampling and ranked enumeration of matchings.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand::Rng;

use crate::engine::{
    int_value, lawler_children, matching_number, solve_int, EdgeConstraints, GraphView, IntWeights,
};
use crate::error::{KegError, Result};
use crate::graph::CompatibilityGraph;
use crate::matching::Matching;
use crate::rational::Weight;

pub const DEFAULT_VERTEX_CAP: usize = 32;
pub const MAX_VERTEX_CAP: usize = 64;
pub const ENUMERATION_EDGE_GUARD: usize = 16;

/// Memoised counts `F(K, r, s)`: matchings of size `K` using only the first
/// `r` edges of the view and only the vertices set in mask `s`.
///
/// Vertices are the view's active vertices, one bit each.
#[derive(Debug, Clone)]
pub struct CountTable {
    memo: HashMap<(usize, usize, u64), BigUint>,
    /// endpoint masks of the view edges, in local order
    edge_masks: Vec<u64>,
    full: u64,
    opt: usize,
}

impl CountTable {
    pub fn new(view: &GraphView) -> Result<Self> {
        CountTable::with_cap(view, DEFAULT_VERTEX_CAP)
    }

    /// Fails if the view has more active vertices than `cap` (at most 64).
    pub fn with_cap(view: &GraphView, cap: usize) -> Result<Self> {
        let cap = cap.min(MAX_VERTEX_CAP);
        let active = view.active_vertices();
        if active.len() > cap {
            return Err(KegError::VertexCap { vertices: active.len(), cap });
        }
        let bit = |v: usize| 1u64 << active.binary_search(&v).expect("active vertex");
        let edge_masks = view.edge_list().iter().map(|&(u, v)| bit(u) | bit(v)).collect();
        let full = if active.len() == 64 { u64::MAX } else { (1u64 << active.len()) - 1 };
        Ok(CountTable { memo: HashMap::new(), edge_masks, full, opt: matching_number(view) })
    }

    /// Size of a maximum matching of the view.
    pub fn opt(&self) -> usize {
        self.opt
    }

    pub fn n_edges(&self) -> usize {
        self.edge_masks.len()
    }

    /// Number of matchings with `k` edges.
    pub fn count(&mut self, k: usize) -> BigUint {
        self.f(k, self.edge_masks.len(), self.full)
    }

    /// Number of maximum matchings.
    pub fn count_maximum(&mut self) -> BigUint {
        self.count(self.opt)
    }

    fn trivial(&self, k: usize, r: usize, s: u64) -> Option<BigUint> {
        if k > r || 2 * k > s.count_ones() as usize {
            Some(BigUint::zero())
        } else if k == 0 {
            Some(BigUint::one())
        } else if r == 0 {
            Some(BigUint::zero())
        } else {
            None
        }
    }

    fn f(&mut self, k: usize, r: usize, s: u64) -> BigUint {
        if let Some(v) = self.trivial(k, r, s) {
            return v;
        }
        if let Some(v) = self.memo.get(&(k, r, s)) {
            return v.clone();
        }
        let mask = self.edge_masks[r - 1];
        let mut v = self.f(k, r - 1, s);
        if s & mask == mask {
            v += self.f(k - 1, r - 1, s & !mask);
        }
        self.memo.insert((k, r, s), v.clone());
        v
    }

    /// Value of a state already reached by [`CountTable::count`].
    fn get(&self, k: usize, r: usize, s: u64) -> BigUint {
        self.trivial(k, r, s)
            .or_else(|| self.memo.get(&(k, r, s)).cloned())
            .expect("state evaluated before trace-back")
    }

    /// Local edges of the matching of size `k` with rank `index` in the
    /// trace-back order (`index < count(k)`).
    fn unrank(&self, k: usize, mut index: BigUint) -> Vec<usize> {
        let (mut k, mut s) = (k, self.full);
        let mut out = Vec::new();
        for r in (1..=self.edge_masks.len()).rev() {
            if k == 0 {
                break;
            }
            let skip = self.get(k, r - 1, s);
            if index < skip {
                continue;
            }
            index -= skip;
            out.push(r - 1);
            s &= !self.edge_masks[r - 1];
            k -= 1;
        }
        out.sort_unstable();
        out
    }
}

pub fn count_matchings(view: &GraphView, k: usize) -> Result<BigUint> {
    Ok(CountTable::new(view)?.count(k))
}

/// Uniform sampler over the maximum matchings of a view.
#[derive(Debug, Clone)]
pub struct MaximumMatchingSampler {
    table: CountTable,
    total: BigUint,
}

impl MaximumMatchingSampler {
    pub fn new(view: &GraphView) -> Result<Self> {
        MaximumMatchingSampler::with_cap(view, DEFAULT_VERTEX_CAP)
    }

    pub fn with_cap(view: &GraphView, cap: usize) -> Result<Self> {
        let mut table = CountTable::with_cap(view, cap)?;
        let total = table.count_maximum();
        Ok(MaximumMatchingSampler { table, total })
    }

    pub fn opt(&self) -> usize {
        self.table.opt
    }

    /// Number of maximum matchings.
    pub fn total(&self) -> &BigUint {
        &self.total
    }

    /// Local edges of one maximum matching, each drawn with probability
    /// `1 / total`.
    pub fn sample_locals<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        let index = rng.gen_biguint_below(&self.total);
        self.table.unrank(self.table.opt, index)
    }

    pub fn sample<R: Rng + ?Sized>(
        &self,
        graph: &CompatibilityGraph,
        view: &GraphView,
        rng: &mut R,
    ) -> Matching {
        view.to_matching(graph, &self.sample_locals(rng))
    }
}

/// One maximum matching of the view drawn uniformly at random.
pub fn uniform_sample<R: Rng + ?Sized>(
    graph: &CompatibilityGraph,
    view: &GraphView,
    rng: &mut R,
) -> Result<Matching> {
    Ok(MaximumMatchingSampler::new(view)?.sample(graph, view, rng))
}

struct Ranked {
    value: BigInt,
    solution: Vec<usize>,
    cons: EdgeConstraints,
    /// positive-weight flags, shared by every entry
    positive: std::rc::Rc<Vec<bool>>,
}

impl Ranked {
    /// Tie order between equal values: at the first differing edge, the
    /// side holding it wins when its weight is positive.
    fn tie(&self, other: &Self) -> Ordering {
        let (a, b) = (&self.solution, &other.solution);
        let (mut i, mut j) = (0, 0);
        loop {
            match (a.get(i), b.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(&x), Some(&y)) if x == y => {
                    i += 1;
                    j += 1;
                }
                (x, y) => {
                    let (d, in_self) = match (x, y) {
                        (Some(&x), Some(&y)) => (x.min(y), x < y),
                        (Some(&x), None) => (x, true),
                        (None, Some(&y)) => (y, false),
                        (None, None) => unreachable!(),
                    };
                    let holder_wins = self.positive[d];
                    return if in_self == holder_wins { Ordering::Greater } else { Ordering::Less };
                }
            }
        }
    }
}

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Ranked {}

impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value.cmp(&other.value).then_with(|| self.tie(other))
    }
}

/// Matchings of a view in non-increasing weight order, ties broken by the
/// engine's edge-order rule. Each step costs one matching solve per child.
pub struct KBest<'a> {
    graph: &'a CompatibilityGraph,
    view: &'a GraphView,
    weights: &'a [Weight],
    scaled: Vec<BigInt>,
    all: Vec<usize>,
    positive: std::rc::Rc<Vec<bool>>,
    heap: BinaryHeap<Ranked>,
}

impl<'a> KBest<'a> {
    pub fn new(graph: &'a CompatibilityGraph, view: &'a GraphView, weights: &'a [Weight]) -> Result<Self> {
        if weights.len() != view.n_edges() {
            return Err(KegError::InvalidWeights(format!(
                "{} weights for {} view edges",
                weights.len(),
                view.n_edges()
            )));
        }
        let scaled = IntWeights::from_rationals(weights)?.0;
        let positive = std::rc::Rc::new(scaled.iter().map(|w| w > &BigInt::zero()).collect::<Vec<_>>());
        let mut it = KBest {
            graph,
            view,
            weights,
            all: (0..view.n_edges()).collect(),
            positive,
            heap: BinaryHeap::new(),
            scaled,
        };
        it.push(EdgeConstraints::default());
        Ok(it)
    }

    fn push(&mut self, cons: EdgeConstraints) {
        if let Some(sol) = solve_int(self.view, &self.scaled, &cons) {
            let value = int_value(&self.scaled, &sol);
            self.heap.push(Ranked { value, solution: sol, cons, positive: self.positive.clone() });
        }
    }
}

impl Iterator for KBest<'_> {
    type Item = (Matching, Weight);

    fn next(&mut self) -> Option<Self::Item> {
        let node = self.heap.pop()?;
        for child in lawler_children(self.view, &node.solution, &node.cons, &self.all) {
            self.push(child);
        }
        let value = node.solution.iter().map(|&l| self.weights[l].clone()).fold(Weight::zero(), |a, b| a + b);
        Some((self.view.to_matching(self.graph, &node.solution), value))
    }
}

/// The `k` heaviest matchings of the view, best first.
pub fn k_best_weighted(
    graph: &CompatibilityGraph,
    view: &GraphView,
    weights: &[Weight],
    k: usize,
) -> Result<Vec<(Matching, Weight)>> {
    Ok(KBest::new(graph, view, weights)?.take(k).collect())
}

/// Every matching of the view, in order of the edge-subset bitmask.
pub fn enumerate_all_matchings(graph: &CompatibilityGraph, view: &GraphView) -> Result<Vec<Matching>> {
    let m = view.n_edges();
    if m > ENUMERATION_EDGE_GUARD {
        return Err(KegError::EdgeGuard { edges: m, guard: ENUMERATION_EDGE_GUARD });
    }
    let mut out = Vec::new();
    'subsets: for mask in 0u32..(1u32 << m) {
        let mut used = vec![false; view.n_vertices()];
        let mut locals = Vec::new();
        for l in 0..m {
            if mask >> l & 1 == 1 {
                let (u, v) = view.endpoints(l);
                if used[u] || used[v] {
                    continue 'subsets;
                }
                used[u] = true;
                used[v] = true;
                locals.push(l);
            }
        }
        out.push(view.to_matching(graph, &locals));
    }
    Ok(out)
}
