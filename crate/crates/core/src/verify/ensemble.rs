use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::WeightedDigraph;
use crate::rational::{q, Rational};

/// A seeded family of random graphs with bounded out-degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnsembleSpec {
    pub n: usize,
    pub delta: usize,
    pub alpha: Rational,
    pub count: usize,
    pub weight_palette: Vec<Rational>,
    pub seed: u64,
    pub include_adversarial: bool,
}

impl EnsembleSpec {
    pub fn new(n: usize, delta: usize, alpha: Rational, count: usize, seed: u64) -> Self {
        EnsembleSpec {
            n,
            delta,
            alpha,
            count,
            weight_palette: default_palette(),
            seed,
            include_adversarial: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidParameters("ensemble count must be at least 1".into()));
        }
        if self.n == 0 {
            return Err(Error::InvalidParameters("ensemble n must be at least 1".into()));
        }
        if self.weight_palette.is_empty() {
            return Err(Error::InvalidParameters("weight palette is empty".into()));
        }
        for w in &self.weight_palette {
            if *w < q(-1, 1) || *w > q(1, 1) {
                return Err(Error::ValueOutOfRange(w.clone()));
            }
        }
        crate::graph::check_alpha(&self.alpha)
    }

    /// Graph number `index`. Each index has its own generator stream, so a
    /// graph does not depend on which other graphs were drawn.
    pub fn graph(&self, index: usize) -> WeightedDigraph {
        let mut rng = stream(self.seed, index as u64);
        random_graph(self.n, self.delta, &self.weight_palette, &mut rng)
    }

    pub fn graphs(&self) -> impl Iterator<Item = WeightedDigraph> + '_ {
        (0..self.count).map(|i| self.graph(i))
    }
}

/// `{-1, -1/2, 0, 1/2, 1}`.
pub fn default_palette() -> Vec<Rational> {
    vec![q(-1, 1), q(-1, 2), q(0, 1), q(1, 2), q(1, 1)]
}

/// ChaCha8 generator for `(seed, stream)`.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Each agent's out-neighbourhood is uniform over all subsets of the other
/// agents with at most `delta` members; weights are i.i.d. from the palette.
pub fn random_graph(n: usize, delta: usize, palette: &[Rational], rng: &mut impl Rng) -> WeightedDigraph {
    let cap = delta.min(n.saturating_sub(1));
    let sizes = subset_size_distribution(n.saturating_sub(1), cap);
    let mut edges = Vec::new();
    for src in 0..n {
        let degree = sizes.sample(rng);
        for idx in sample(rng, n - 1, degree).into_iter() {
            let dst = if idx < src { idx } else { idx + 1 };
            let w = palette[rng.random_range(0..palette.len())].clone();
            edges.push((src, dst, w));
        }
    }
    WeightedDigraph::new(n, edges).expect("generated edges are valid")
}

/// Size of a uniform subset of `m` items with at most `cap` members:
/// `P(k)` is proportional to `binomial(m, k)`.
fn subset_size_distribution(m: usize, cap: usize) -> WeightedIndex<f64> {
    // ln binomial(m, k), built up from binomial(m, k) / binomial(m, k - 1) = (m - k + 1) / k
    let mut logs = Vec::with_capacity(cap + 1);
    let mut acc = 0.0f64;
    logs.push(acc);
    for k in 1..=cap {
        acc += ((m - k + 1) as f64 / k as f64).ln();
        logs.push(acc);
    }
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    WeightedIndex::new(logs.iter().map(|l| (l - top).exp())).expect("weights are positive and finite")
}
