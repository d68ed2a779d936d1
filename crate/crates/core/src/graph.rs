//! Weighted review networks and the primitive quantities defined on them:
//! scores, rankings, worthy sets, and out-weight overwrites.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::score_view::ScoreView;

/// Index of an agent in `0..n`. The integer order is the tie-break order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub usize);

impl AgentId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<usize> for AgentId {
    fn from(v: usize) -> Self {
        AgentId(v)
    }
}

/// A review weight in `[-1, 1]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Weight(Rational);

impl Weight {
    pub fn new(value: Rational) -> Result<Self> {
        if value < Rational::from_integer(-1) || value > Rational::one() {
            return Err(Error::ValueOutOfRange(value));
        }
        Ok(Weight(value))
    }

    pub fn minus_one() -> Self {
        Weight(Rational::from_integer(-1))
    }

    pub fn zero() -> Self {
        Weight(Rational::zero())
    }

    pub fn one() -> Self {
        Weight(Rational::one())
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    pub fn into_inner(self) -> Rational {
        self.0
    }
}

/// Exact average of incoming weights, or zero for an agent nobody reviewed.
pub type Score = Rational;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub src: AgentId,
    pub dst: AgentId,
    pub w: Weight,
}

/// A directed review network on agents `0..n`.
///
/// No self-loops and at most one edge per ordered pair. Edges are kept sorted
/// by `(src, dst)` so two graphs with the same edges compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeightedDigraph {
    n: usize,
    edges: Vec<Edge>,
    offsets: Vec<usize>,
}

impl WeightedDigraph {
    pub fn empty(n: usize) -> Self {
        WeightedDigraph { n, edges: Vec::new(), offsets: vec![0; n + 1] }
    }

    /// Builds a graph from `(src, dst, weight)` triples, validating every edge.
    pub fn new<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, Rational)>,
    {
        let mut list = Vec::new();
        for (src, dst, w) in edges {
            for agent in [src, dst] {
                if agent >= n {
                    return Err(Error::AgentOutOfRange { agent, n });
                }
            }
            if src == dst {
                return Err(Error::SelfLoop { src, dst });
            }
            let w = Weight::new(w).map_err(|e| match e {
                Error::ValueOutOfRange(weight) => Error::WeightOutOfRange { src, dst, weight },
                other => other,
            })?;
            list.push(Edge { src: AgentId(src), dst: AgentId(dst), w });
        }
        Self::from_edges(n, list)
    }

    fn from_edges(n: usize, mut edges: Vec<Edge>) -> Result<Self> {
        edges.sort_by_key(|e| (e.src, e.dst));
        if let Some(pair) = edges.windows(2).find(|p| p[0].src == p[1].src && p[0].dst == p[1].dst) {
            return Err(Error::DuplicateEdge { src: pair[0].src.0, dst: pair[0].dst.0 });
        }
        let mut offsets = vec![0; n + 1];
        for e in &edges {
            offsets[e.src.0 + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        Ok(WeightedDigraph { n, edges, offsets })
    }

    /// Like [`WeightedDigraph::new`], additionally enforcing an out-degree cap.
    pub fn with_degree_cap<I>(n: usize, delta: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, Rational)>,
    {
        let g = Self::new(n, edges)?;
        g.check_degree_cap(delta)?;
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn agents(&self) -> impl Iterator<Item = AgentId> {
        (0..self.n).map(AgentId)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Out-edges of `x`, sorted by target. Panics if `x` is out of range.
    pub fn out_edges(&self, x: AgentId) -> &[Edge] {
        &self.edges[self.offsets[x.0]..self.offsets[x.0 + 1]]
    }

    pub fn out_degree(&self, x: AgentId) -> usize {
        self.offsets[x.0 + 1] - self.offsets[x.0]
    }

    pub fn max_out_degree(&self) -> usize {
        self.agents().map(|x| self.out_degree(x)).max().unwrap_or(0)
    }

    pub fn check_degree_cap(&self, delta: usize) -> Result<()> {
        match self.agents().find(|&x| self.out_degree(x) > delta) {
            Some(x) => Err(Error::DegreeExceedsCap { agent: x.0, degree: self.out_degree(x), delta }),
            None => Ok(()),
        }
    }

    pub fn weight(&self, src: AgentId, dst: AgentId) -> Option<&Rational> {
        if src.0 >= self.n {
            return None;
        }
        let out = self.out_edges(src);
        out.binary_search_by_key(&dst, |e| e.dst).ok().map(|i| out[i].w.value())
    }

    pub fn check_agent(&self, x: AgentId) -> Result<()> {
        if x.0 < self.n {
            Ok(())
        } else {
            Err(Error::AgentOutOfRange { agent: x.0, n: self.n })
        }
    }

    /// Replaces the weights on `x`'s out-edges, in target order. The edge set is kept.
    pub fn with_agent_reviews(&self, x: AgentId, weights: &[Weight]) -> Result<WeightedDigraph> {
        self.check_agent(x)?;
        let range = self.offsets[x.0]..self.offsets[x.0 + 1];
        if weights.len() != range.len() {
            return Err(Error::SizeMismatch { expected: range.len(), actual: weights.len() });
        }
        let mut g = self.clone();
        for (e, w) in g.edges[range].iter_mut().zip(weights) {
            e.w = w.clone();
        }
        Ok(g)
    }
}

/// A subset of the agents `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AgentSet {
    mask: Vec<bool>,
}

impl AgentSet {
    pub fn empty(n: usize) -> Self {
        AgentSet { mask: vec![false; n] }
    }

    pub fn full(n: usize) -> Self {
        AgentSet { mask: vec![true; n] }
    }

    pub fn from_mask(mask: Vec<bool>) -> Self {
        AgentSet { mask }
    }

    pub fn from_ids<I: IntoIterator<Item = usize>>(n: usize, ids: I) -> Result<Self> {
        let mut set = AgentSet::empty(n);
        for id in ids {
            if id >= n {
                return Err(Error::AgentOutOfRange { agent: id, n });
            }
            set.mask[id] = true;
        }
        Ok(set)
    }

    pub fn n(&self) -> usize {
        self.mask.len()
    }

    pub fn contains(&self, x: AgentId) -> bool {
        self.mask.get(x.0).copied().unwrap_or(false)
    }

    pub fn insert(&mut self, x: AgentId) {
        self.mask[x.0] = true;
    }

    pub fn remove(&mut self, x: AgentId) {
        self.mask[x.0] = false;
    }

    pub fn len(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }

    pub fn iter(&self) -> impl Iterator<Item = AgentId> + '_ {
        self.mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| AgentId(i))
    }

    pub fn ids(&self) -> Vec<usize> {
        self.iter().map(|x| x.0).collect()
    }

    pub fn complement(&self) -> AgentSet {
        AgentSet { mask: self.mask.iter().map(|b| !b).collect() }
    }

    pub fn is_subset(&self, other: &AgentSet) -> bool {
        self.n() == other.n() && self.mask.iter().zip(&other.mask).all(|(&a, &b)| !a || b)
    }

    pub fn intersection_len(&self, other: &AgentSet) -> usize {
        self.mask.iter().zip(&other.mask).filter(|(&a, &b)| a && b).count()
    }

    pub fn symmetric_difference_len(&self, other: &AgentSet) -> usize {
        self.mask.iter().zip(&other.mask).filter(|(&a, &b)| a != b).count()
    }

    pub fn union(&self, other: &AgentSet) -> AgentSet {
        AgentSet { mask: self.mask.iter().zip(&other.mask).map(|(&a, &b)| a || b).collect() }
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }
}

impl fmt::Display for AgentSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: BTreeSet<usize> = self.iter().map(|x| x.0).collect();
        write!(f, "{ids:?}")
    }
}

pub(crate) fn check_alpha(alpha: &Rational) -> Result<()> {
    if alpha.is_negative() || alpha.is_zero() || *alpha >= Rational::one() {
        return Err(Error::InvalidAlpha(alpha.clone()));
    }
    Ok(())
}

/// Score of every agent, in agent order.
pub fn scores(g: &WeightedDigraph) -> Vec<Score> {
    let mut sums = vec![Rational::zero(); g.n()];
    let mut degrees = vec![0usize; g.n()];
    for e in g.edges() {
        sums[e.dst.0] = &sums[e.dst.0] + e.w.value();
        degrees[e.dst.0] += 1;
    }
    sums.into_iter()
        .zip(degrees)
        .map(|(s, d)| if d == 0 { Rational::zero() } else { s / Rational::from_usize(d) })
        .collect()
}

/// Average weight on `x`'s incoming edges; exactly zero when there are none.
pub fn score(g: &WeightedDigraph, x: AgentId) -> Result<Score> {
    g.check_agent(x)?;
    let (sum, count) = g
        .edges()
        .iter()
        .filter(|e| e.dst == x)
        .fold((Rational::zero(), 0usize), |(s, c), e| (s + e.w.value(), c + 1));
    Ok(if count == 0 { Rational::zero() } else { sum / Rational::from_usize(count) })
}

/// Number of agents whose score is strictly higher than `x`'s.
pub fn ranking(g: &WeightedDigraph, x: AgentId) -> Result<usize> {
    g.check_agent(x)?;
    Ok(ScoreView::new(g).rank(x))
}

/// Rankings of all agents, in agent order.
pub fn rankings(g: &WeightedDigraph) -> Vec<usize> {
    let view = ScoreView::new(g);
    g.agents().map(|x| view.rank(x)).collect()
}

/// Agents ranked strictly below `alpha * n`, with `alpha * n` kept exact.
pub fn worthy_set(g: &WeightedDigraph, alpha: &Rational) -> Result<AgentSet> {
    Ok(worthy_sets(g, std::slice::from_ref(alpha))?.remove(0))
}

/// [`worthy_set`] for several values of `alpha`, sharing one ranking pass.
pub fn worthy_sets(g: &WeightedDigraph, alphas: &[Rational]) -> Result<Vec<AgentSet>> {
    for alpha in alphas {
        check_alpha(alpha)?;
    }
    let view = ScoreView::new(g);
    let ranks: Vec<Rational> = g.agents().map(|x| Rational::from_usize(view.rank(x))).collect();
    let n = Rational::from_usize(g.n());
    Ok(alphas
        .iter()
        .map(|alpha| {
            let threshold = alpha * &n;
            AgentSet::from_mask(ranks.iter().map(|r| *r < threshold).collect())
        })
        .collect())
}

/// Copy of `g` with every out-edge of every agent in `xs` set to `value`.
pub fn with_out_weights(g: &WeightedDigraph, xs: &[AgentId], value: &Weight) -> Result<WeightedDigraph> {
    for &x in xs {
        g.check_agent(x)?;
    }
    let mut out = g.clone();
    for e in out.edges.iter_mut() {
        if xs.contains(&e.src) {
            e.w = value.clone();
        }
    }
    Ok(out)
}

/// Checks that `pi` is a bijection on `0..n`.
pub fn check_permutation(pi: &[usize], n: usize) -> Result<()> {
    if pi.len() != n {
        return Err(Error::NotAPermutation { n });
    }
    let mut seen = vec![false; n];
    for &p in pi {
        if p >= n || seen[p] {
            return Err(Error::NotAPermutation { n });
        }
        seen[p] = true;
    }
    Ok(())
}

/// The isomorphic copy of `g` in which agent `x` is renamed `pi[x]`.
pub fn relabel(g: &WeightedDigraph, pi: &[usize]) -> Result<WeightedDigraph> {
    check_permutation(pi, g.n())?;
    let edges = g
        .edges()
        .iter()
        .map(|e| Edge { src: AgentId(pi[e.src.0]), dst: AgentId(pi[e.dst.0]), w: e.w.clone() })
        .collect();
    WeightedDigraph::from_edges(g.n(), edges)
}

/// Every permutation of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    loop {
        out.push(current.clone());
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| current[j] > current[i - 1]).unwrap();
        current.swap(i - 1, j);
        current[i..].reverse();
    }
}

pub const CANONICAL_FORM_LIMIT: usize = 9;

/// Lexicographically smallest sorted edge list over all relabelings.
///
/// Brute force over `n!` permutations; refuses graphs above
/// [`CANONICAL_FORM_LIMIT`] agents.
pub fn canonical_form(g: &WeightedDigraph) -> Result<Vec<(usize, usize, Rational)>> {
    if g.n() > CANONICAL_FORM_LIMIT {
        return Err(Error::TooLarge { what: "canonical form", n: g.n(), limit: CANONICAL_FORM_LIMIT });
    }
    let mut best: Option<Vec<(usize, usize, Rational)>> = None;
    for pi in permutations(g.n()) {
        let mut form: Vec<_> = g.edges().iter().map(|e| (pi[e.src.0], pi[e.dst.0], e.w.value().clone())).collect();
        form.sort();
        if best.as_ref().is_none_or(|b| form < *b) {
            best = Some(form);
        }
    }
    Ok(best.unwrap_or_default())
}

pub fn is_isomorphic(a: &WeightedDigraph, b: &WeightedDigraph) -> Result<bool> {
    if a.n() != b.n() || a.edge_count() != b.edge_count() {
        return Ok(false);
    }
    Ok(canonical_form(a)? == canonical_form(b)?)
}

/// Permutations `pi` with `relabel(g, pi) == g`.
pub fn automorphisms(g: &WeightedDigraph) -> Result<Vec<Vec<usize>>> {
    if g.n() > CANONICAL_FORM_LIMIT {
        return Err(Error::TooLarge { what: "automorphism search", n: g.n(), limit: CANONICAL_FORM_LIMIT });
    }
    let mut out = Vec::new();
    for pi in permutations(g.n()) {
        if relabel(g, &pi)? == *g {
            out.push(pi);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn graph(n: usize, edges: &[(usize, usize, Rational)]) -> WeightedDigraph {
        WeightedDigraph::new(n, edges.iter().cloned()).unwrap()
    }

    #[test]
    fn score_examples() {
        let g = graph(3, &[(0, 1, q(1, 1)), (0, 2, q(1, 1)), (1, 2, q(-1, 2))]);
        assert_eq!(score(&g, AgentId(0)).unwrap(), Rational::zero());
        assert_eq!(score(&g, AgentId(1)).unwrap(), q(1, 1));
        assert_eq!(score(&g, AgentId(2)).unwrap(), q(1, 4));
        assert!(matches!(score(&g, AgentId(3)), Err(Error::AgentOutOfRange { agent: 3, n: 3 })));
    }

    #[test]
    fn zero_weight_edges_count_in_the_denominator() {
        let g = graph(3, &[(0, 2, q(1, 1)), (1, 2, q(0, 1))]);
        assert_eq!(score(&g, AgentId(2)).unwrap(), q(1, 2));
    }

    #[test]
    fn ranking_examples() {
        let empty = WeightedDigraph::empty(4);
        assert!(rankings(&empty).iter().all(|&r| r == 0));
        // scores (1, 0, -1)
        let g = graph(4, &[(3, 0, q(1, 1)), (3, 2, q(-1, 1))]);
        assert_eq!(ranking(&g, AgentId(1)).unwrap(), 1);
        assert_eq!(ranking(&g, AgentId(0)).unwrap(), 0);
        assert_eq!(ranking(&g, AgentId(2)).unwrap(), 3);
    }

    #[test]
    fn worthy_set_examples() {
        let empty = WeightedDigraph::empty(5);
        assert_eq!(worthy_set(&empty, &q(1, 5)).unwrap(), AgentSet::full(5));
        let g = graph(2, &[(1, 0, q(1, 1))]);
        assert_eq!(worthy_set(&g, &q(1, 2)).unwrap().ids(), vec![0]);
        for bad in [q(0, 1), q(1, 1), q(-1, 2), q(3, 2)] {
            assert!(matches!(worthy_set(&g, &bad), Err(Error::InvalidAlpha(_))));
        }
    }

    #[test]
    fn worthy_threshold_is_exact_for_fractional_alpha_n() {
        // n = 3, alpha = 1/2: alpha*n = 3/2, so rank 1 is worthy and rank 2 is not
        let g = graph(3, &[(2, 0, q(1, 1)), (2, 1, q(1, 2))]);
        assert_eq!(worthy_set(&g, &q(1, 2)).unwrap().ids(), vec![0, 1]);
    }

    #[test]
    fn rejects_invalid_edges() {
        assert!(matches!(
            WeightedDigraph::new(2, [(0, 0, q(1, 1))]),
            Err(Error::SelfLoop { src: 0, dst: 0 })
        ));
        assert!(matches!(
            WeightedDigraph::new(2, [(0, 1, q(1, 1)), (0, 1, q(0, 1))]),
            Err(Error::DuplicateEdge { src: 0, dst: 1 })
        ));
        assert!(matches!(
            WeightedDigraph::new(2, [(0, 1, q(2, 1))]),
            Err(Error::WeightOutOfRange { src: 0, dst: 1, .. })
        ));
        assert!(matches!(
            WeightedDigraph::new(2, [(0, 2, q(1, 1))]),
            Err(Error::AgentOutOfRange { agent: 2, n: 2 })
        ));
        assert!(matches!(
            WeightedDigraph::with_degree_cap(3, 1, [(0, 1, q(1, 1)), (0, 2, q(1, 1))]),
            Err(Error::DegreeExceedsCap { agent: 0, degree: 2, delta: 1 })
        ));
    }

    #[test]
    fn out_weight_overwrite_examples() {
        let star = graph(4, &[(0, 1, q(1, 1)), (0, 2, q(0, 1)), (0, 3, q(-1, 1)), (1, 0, q(1, 2))]);
        assert_eq!(with_out_weights(&star, &[], &Weight::one()).unwrap(), star);
        let g = with_out_weights(&star, &[AgentId(0)], &Weight::minus_one()).unwrap();
        assert!(g.out_edges(AgentId(0)).iter().all(|e| *e.w.value() == q(-1, 1)));
        assert_eq!(g.weight(AgentId(1), AgentId(0)), Some(&q(1, 2)));
        assert_eq!(star.weight(AgentId(0), AgentId(1)), Some(&q(1, 1)), "input untouched");

        // 10-cycle with weights alternating by target; only 4->5 changes
        let cycle = WeightedDigraph::new(
            10,
            (0..10).map(|i| (i, (i + 1) % 10, if (i + 1) % 2 == 0 { q(1, 1) } else { q(-1, 2) })),
        )
        .unwrap();
        let over = with_out_weights(&cycle, &[AgentId(4)], &Weight::minus_one()).unwrap();
        let changed: Vec<_> =
            cycle.edges().iter().zip(over.edges()).filter(|(a, b)| a != b).map(|(a, _)| (a.src.0, a.dst.0)).collect();
        assert_eq!(changed, vec![(4, 5)]);
    }

    #[test]
    fn relabel_examples() {
        let tri = graph(3, &[(0, 1, q(1, 1)), (1, 2, q(1, 2)), (2, 0, q(-1, 1))]);
        assert_eq!(relabel(&tri, &[0, 1, 2]).unwrap(), tri);
        let swapped = relabel(&tri, &[1, 0, 2]).unwrap();
        assert_eq!(relabel(&swapped, &[1, 0, 2]).unwrap(), tri);
        let rotated = relabel(&tri, &[1, 2, 0]).unwrap();
        assert_eq!(rotated.weight(AgentId(1), AgentId(2)), Some(&q(1, 1)));
        assert_eq!(rotated.weight(AgentId(2), AgentId(0)), Some(&q(1, 2)));
        assert_eq!(rotated.weight(AgentId(0), AgentId(1)), Some(&q(-1, 1)));
        assert!(is_isomorphic(&tri, &rotated).unwrap());
        assert!(matches!(relabel(&tri, &[0, 0, 1]), Err(Error::NotAPermutation { n: 3 })));
        assert!(matches!(relabel(&tri, &[0, 1]), Err(Error::NotAPermutation { n: 3 })));
    }

    #[test]
    fn permutations_are_complete() {
        assert_eq!(permutations(0).len(), 1);
        assert_eq!(permutations(4).len(), 24);
        let set: BTreeSet<_> = permutations(4).into_iter().collect();
        assert_eq!(set.len(), 24);
    }

    #[test]
    fn isomorphism_distinguishes_weights() {
        let a = graph(3, &[(0, 1, q(1, 1))]);
        let b = graph(3, &[(2, 0, q(1, 1))]);
        let c = graph(3, &[(2, 0, q(1, 2))]);
        assert!(is_isomorphic(&a, &b).unwrap());
        assert!(!is_isomorphic(&a, &c).unwrap());
        assert_eq!(automorphisms(&WeightedDigraph::empty(3)).unwrap().len(), 6);
    }
}
