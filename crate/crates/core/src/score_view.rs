//! Score bookkeeping that answers "what is `y`'s ranking once `y`'s own
//! reviews are overwritten" without rebuilding the graph.
//!
//! Overwriting an agent's out-edges never changes that agent's own score; it
//! only moves the scores of its at most `delta` targets. A view keeps the
//! per-agent in-sums and a sorted copy of all scores, so a ranking query costs
//! one binary search plus a pass over the overwritten agent's out-edges.

use crate::graph::{AgentId, WeightedDigraph};
use crate::rational::Rational;

#[derive(Clone, Debug)]
pub struct ScoreView<'g> {
    g: &'g WeightedDigraph,
    overwritten: Vec<bool>,
    value: Rational,
    in_sum: Vec<Rational>,
    in_deg: Vec<usize>,
    scores: Vec<Rational>,
    /// ascending
    sorted: Vec<Rational>,
}

impl<'g> ScoreView<'g> {
    /// View of `g` itself; later overwrites use weight -1.
    pub fn new(g: &'g WeightedDigraph) -> Self {
        Self::with_overwrite_value(g, Rational::from_integer(-1))
    }

    pub fn with_overwrite_value(g: &'g WeightedDigraph, value: Rational) -> Self {
        let n = g.n();
        let mut in_sum = vec![Rational::zero(); n];
        let mut in_deg = vec![0usize; n];
        for e in g.edges() {
            in_sum[e.dst.0] = &in_sum[e.dst.0] + e.w.value();
            in_deg[e.dst.0] += 1;
        }
        let scores: Vec<Rational> = (0..n).map(|i| average(&in_sum[i], in_deg[i])).collect();
        let mut sorted = scores.clone();
        sorted.sort();
        ScoreView { g, overwritten: vec![false; n], value, in_sum, in_deg, scores, sorted }
    }

    pub fn graph(&self) -> &'g WeightedDigraph {
        self.g
    }

    pub fn score(&self, y: AgentId) -> &Rational {
        &self.scores[y.0]
    }

    pub fn scores(&self) -> &[Rational] {
        &self.scores
    }

    fn current_weight<'a>(&'a self, src: AgentId, original: &'a Rational) -> &'a Rational {
        if self.overwritten[src.0] {
            &self.value
        } else {
            original
        }
    }

    fn count_above(&self, s: &Rational) -> usize {
        self.sorted.len() - self.sorted.partition_point(|t| t <= s)
    }

    /// Number of agents with a strictly higher score than `y` in this view.
    pub fn rank(&self, y: AgentId) -> usize {
        self.count_above(&self.scores[y.0])
    }

    /// Ranking of `y` after additionally overwriting `y`'s out-edges.
    pub fn rank_if_overwritten(&self, y: AgentId) -> usize {
        let sy = &self.scores[y.0];
        let mut rank = self.count_above(sy);
        if self.overwritten[y.0] {
            return rank;
        }
        for e in self.g.out_edges(y) {
            let z = e.dst.0;
            let current = e.w.value();
            if *current == self.value {
                continue;
            }
            let updated = average(&(&self.in_sum[z] - current + &self.value), self.in_deg[z]);
            let before = self.scores[z] > *sy;
            let after = updated > *sy;
            match (before, after) {
                (true, false) => rank -= 1,
                (false, true) => rank += 1,
                _ => {}
            }
        }
        rank
    }

    /// The view of this graph with `x`'s out-edges overwritten as well.
    pub fn overwrite(&self, x: AgentId) -> ScoreView<'g> {
        let mut next = self.clone();
        if next.overwritten[x.0] {
            return next;
        }
        next.overwritten[x.0] = true;
        for e in self.g.out_edges(x) {
            let z = e.dst.0;
            let current = self.current_weight(x, e.w.value());
            if *current == self.value {
                continue;
            }
            next.in_sum[z] = &next.in_sum[z] - current + &self.value;
            let updated = average(&next.in_sum[z], next.in_deg[z]);
            let old = std::mem::replace(&mut next.scores[z], updated.clone());
            let at = next.sorted.partition_point(|t| *t < old);
            next.sorted.remove(at);
            let to = next.sorted.partition_point(|t| *t < updated);
            next.sorted.insert(to, updated);
        }
        next
    }
}

fn average(sum: &Rational, count: usize) -> Rational {
    if count == 0 {
        Rational::zero()
    } else {
        sum / Rational::from_usize(count)
    }
}
