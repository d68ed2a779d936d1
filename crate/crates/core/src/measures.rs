//! Coincidence measures between a mechanism's output and the worthy set,
//! their expectations under independent selection, and seeded sampling.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::Zero;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{AgentId, AgentSet};
use crate::rational::Rational;

/// The set of agents a deterministic mechanism labels worthy.
pub type Classification = AgentSet;

/// Per-agent probability of being labelled worthy.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProbabilisticAssignment {
    p: Vec<Rational>,
}

impl ProbabilisticAssignment {
    pub fn new(p: Vec<Rational>) -> Result<Self> {
        for (agent, value) in p.iter().enumerate() {
            if value.is_negative() || *value > Rational::one() {
                return Err(Error::InvalidProbability { agent, value: value.clone() });
            }
        }
        Ok(ProbabilisticAssignment { p })
    }

    pub fn uniform(n: usize, value: Rational) -> Result<Self> {
        Self::new(vec![value; n])
    }

    pub fn from_classification(m: &Classification) -> Self {
        ProbabilisticAssignment {
            p: m.mask().iter().map(|&b| if b { Rational::one() } else { Rational::zero() }).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.p.len()
    }

    pub fn get(&self, x: AgentId) -> &Rational {
        &self.p[x.0]
    }

    pub fn probabilities(&self) -> &[Rational] {
        &self.p
    }

    /// The classification when every probability is 0 or 1.
    pub fn as_classification(&self) -> Option<Classification> {
        let mut mask = Vec::with_capacity(self.p.len());
        for v in &self.p {
            if v.is_zero() {
                mask.push(false);
            } else if *v == Rational::one() {
                mask.push(true);
            } else {
                return None;
            }
        }
        Some(AgentSet::from_mask(mask))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MeasureKind {
    /// One point per correctly classified agent, minus one per error, over n.
    MainC,
    /// Credit and penalty only for selected agents, normalised by the worthy count.
    WorthyOnlyCPrime,
    /// Average of the per-class accuracies.
    NormalizedCDoublePrime,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 3] =
        [MeasureKind::MainC, MeasureKind::WorthyOnlyCPrime, MeasureKind::NormalizedCDoublePrime];

    pub fn as_str(self) -> &'static str {
        match self {
            MeasureKind::MainC => "C",
            MeasureKind::WorthyOnlyCPrime => "C'",
            MeasureKind::NormalizedCDoublePrime => "C''",
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MeasureKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "C" | "c" | "main" => Ok(MeasureKind::MainC),
            "C'" | "c'" | "prime" | "worthy-only" => Ok(MeasureKind::WorthyOnlyCPrime),
            "C''" | "c''" | "double-prime" | "normalized" => Ok(MeasureKind::NormalizedCDoublePrime),
            _ => Err(Error::Format(format!("unknown measure {s:?} (expected C, C' or C'')"))),
        }
    }
}

fn check_sizes(n: usize, ideal: &AgentSet, other: usize) -> Result<()> {
    if ideal.n() != n {
        return Err(Error::SizeMismatch { expected: n, actual: ideal.n() });
    }
    if other != n {
        return Err(Error::SizeMismatch { expected: n, actual: other });
    }
    if n == 0 {
        return Err(Error::InvalidParameters("coincidence is undefined for zero agents".into()));
    }
    Ok(())
}

fn nonempty_ideal(ideal: &AgentSet) -> Result<usize> {
    match ideal.len() {
        0 => Err(Error::InvalidParameters("the worthy set is empty".into())),
        k => Ok(k),
    }
}

/// Coincidence of a classification `m` with the worthy set `ideal`.
pub fn coincidence(m: &Classification, ideal: &AgentSet, kind: MeasureKind) -> Result<Rational> {
    let n = m.n();
    check_sizes(n, ideal, m.n())?;
    let nq = Rational::from_usize(n);
    Ok(match kind {
        MeasureKind::MainC => {
            let points: i64 =
                m.mask().iter().zip(ideal.mask()).map(|(a, b)| if a == b { 1 } else { -1 }).sum();
            Rational::from_integer(points) / &nq
        }
        MeasureKind::WorthyOnlyCPrime => {
            let size = nonempty_ideal(ideal)?;
            let hits = m.intersection_len(ideal);
            let misses = m.len() - hits;
            (Rational::from_usize(hits) - Rational::from_usize(misses)) / Rational::from_usize(size)
        }
        MeasureKind::NormalizedCDoublePrime => {
            let size = nonempty_ideal(ideal)?;
            let outside = n - size;
            if outside == 0 {
                Rational::ratio(m.len(), 2 * n) + Rational::new(1, 2)
            } else {
                let hits = m.intersection_len(ideal);
                let rejected_unworthy = outside - (m.len() - hits);
                Rational::ratio(hits, 2 * size) + Rational::ratio(rejected_unworthy, 2 * outside)
            }
        }
    })
}

/// Expected coincidence when each agent is selected independently with its
/// assigned probability. Every measure is affine in each selection indicator,
/// so the expectation is the measure evaluated on the probabilities.
pub fn expected_coincidence(a: &ProbabilisticAssignment, ideal: &AgentSet, kind: MeasureKind) -> Result<Rational> {
    let n = a.n();
    check_sizes(n, ideal, a.n())?;
    let (mut inside, mut outside) = (Rational::zero(), Rational::zero());
    for (i, p) in a.probabilities().iter().enumerate() {
        if ideal.contains(AgentId(i)) {
            inside = inside + p;
        } else {
            outside = outside + p;
        }
    }
    Ok(match kind {
        MeasureKind::MainC => {
            // (1/n) * sum over agents of (2p - 1) * (+1 worthy, -1 unworthy)
            let worthy = Rational::from_usize(ideal.len());
            let unworthy = Rational::from_usize(n - ideal.len());
            let two = Rational::from_integer(2);
            (&two * &inside - worthy - &two * &outside + unworthy) / Rational::from_usize(n)
        }
        MeasureKind::WorthyOnlyCPrime => {
            let size = nonempty_ideal(ideal)?;
            (inside - outside) / Rational::from_usize(size)
        }
        MeasureKind::NormalizedCDoublePrime => {
            let size = nonempty_ideal(ideal)?;
            let rest = n - size;
            if rest == 0 {
                inside / Rational::from_usize(2 * n) + Rational::new(1, 2)
            } else {
                let rejected = Rational::from_usize(rest) - outside;
                inside / Rational::from_usize(2 * size) + rejected / Rational::from_usize(2 * rest)
            }
        }
    })
}

/// Realises a probabilistic assignment: each agent is included independently.
///
/// The generator is ChaCha8 seeded through `seed_from_u64`. Inclusion is
/// decided exactly by comparing the binary expansion of the probability with
/// a stream of uniform random bits, so rational probabilities are honoured
/// without rounding.
pub fn sample_selection(a: &ProbabilisticAssignment, seed: u64) -> Classification {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bits = BitStream::default();
    let mask = a.probabilities().iter().map(|p| bernoulli(p, &mut rng, &mut bits)).collect();
    AgentSet::from_mask(mask)
}

#[derive(Default)]
struct BitStream {
    word: u64,
    left: u32,
}

impl BitStream {
    fn next(&mut self, rng: &mut impl RngCore) -> bool {
        if self.left == 0 {
            self.word = rng.next_u64();
            self.left = 64;
        }
        let bit = self.word & 1 == 1;
        self.word >>= 1;
        self.left -= 1;
        bit
    }
}

/// Draws `U < p` for a uniform `U` in `[0, 1)`, one bit at a time.
fn bernoulli(p: &Rational, rng: &mut impl RngCore, bits: &mut BitStream) -> bool {
    if p.is_zero() {
        return false;
    }
    if *p >= Rational::one() {
        return true;
    }
    let denom = p.denom();
    let mut numer: BigInt = p.numer();
    loop {
        numer <<= 1;
        let p_bit = numer >= denom;
        if p_bit {
            numer -= &denom;
        }
        let u_bit = bits.next(rng);
        if u_bit != p_bit {
            return p_bit;
        }
        if numer.is_zero() {
            // remaining bits of p are all zero, so U >= p
            return false;
        }
    }
}
