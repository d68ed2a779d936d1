//! Brute-force oracles that share no code path with the fast implementations.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{check_alpha, worthy_sets, AgentId, AgentSet, WeightedDigraph};
use crate::measures::{coincidence, MeasureKind, ProbabilisticAssignment};
use crate::rational::Rational;

pub const BRUTE_FORCE_LIMIT: usize = 12;
pub const TINY_SCAN_LIMIT: usize = 4;
/// Upper bound on the number of graphs one tiny scan may enumerate.
pub const TINY_SCAN_BUDGET: u64 = 1 << 26;

/// Scores rebuilt from the edge list, with no shared bookkeeping.
fn naive_scores(g: &WeightedDigraph) -> Vec<Rational> {
    let mut sums = vec![Rational::zero(); g.n()];
    let mut counts = vec![0usize; g.n()];
    for e in g.edges() {
        sums[e.dst.0] = &sums[e.dst.0] + e.w.value();
        counts[e.dst.0] += 1;
    }
    sums.into_iter()
        .zip(counts)
        .map(|(sum, count)| if count == 0 { Rational::zero() } else { sum / Rational::from_usize(count) })
        .collect()
}

/// Agents with fewer than `alpha n` strictly better scores, by pairwise comparison.
fn naive_worthy_from_scores(scores: &[Rational], alpha: &Rational) -> AgentSet {
    let threshold = alpha * Rational::from_usize(scores.len());
    let mask = scores
        .iter()
        .map(|sx| Rational::from_usize(scores.iter().filter(|sy| *sy > sx).count()) < threshold)
        .collect();
    AgentSet::from_mask(mask)
}

/// Worthy set computed by comparing every pair of scores.
pub fn naive_worthy_set(g: &WeightedDigraph, alpha: &Rational) -> AgentSet {
    naive_worthy_from_scores(&naive_scores(g), alpha)
}

/// Expected main coincidence by enumerating all `2^n` selections, each weighted
/// by the product of its members' probabilities and its non-members' complements.
pub fn brute_force_expected_coincidence(a: &ProbabilisticAssignment, ideal: &AgentSet) -> Result<Rational> {
    brute_force_expected_measure(a, ideal, MeasureKind::MainC)
}

/// [`brute_force_expected_coincidence`] for any measure.
pub fn brute_force_expected_measure(
    a: &ProbabilisticAssignment,
    ideal: &AgentSet,
    kind: MeasureKind,
) -> Result<Rational> {
    let n = a.n();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge { what: "brute-force expectation", n, limit: BRUTE_FORCE_LIMIT });
    }
    if ideal.n() != n {
        return Err(Error::SizeMismatch { expected: n, actual: ideal.n() });
    }
    let one = Rational::one();
    let mut total = Rational::zero();
    for bits in 0u32..(1u32 << n) {
        let mut prob = Rational::one();
        let mut mask = Vec::with_capacity(n);
        for x in 0..n {
            let p = a.get(AgentId(x));
            let chosen = bits >> x & 1 == 1;
            prob = prob * if chosen { p.clone() } else { &one - p };
            mask.push(chosen);
        }
        if prob.is_zero() {
            continue;
        }
        total = total + prob * measure_by_definition(&AgentSet::from_mask(mask), ideal, kind)?;
    }
    Ok(total)
}

fn measure_by_definition(m: &AgentSet, ideal: &AgentSet, kind: MeasureKind) -> Result<Rational> {
    if kind != MeasureKind::MainC && ideal.is_empty() {
        return Err(Error::InvalidParameters("the worthy set is empty".into()));
    }
    Ok(match kind {
        MeasureKind::MainC => main_by_definition(m, ideal),
        MeasureKind::WorthyOnlyCPrime => {
            // +1 per selected worthy agent, -1 per selected unworthy one, over |I|
            let points: i64 = m.iter().map(|x| if ideal.contains(x) { 1 } else { -1 }).sum();
            Rational::from_integer(points) / Rational::from_usize(ideal.len())
        }
        MeasureKind::NormalizedCDoublePrime => {
            let n = m.n();
            let unworthy = n - ideal.len();
            let selected_worthy = ideal.iter().filter(|&x| m.contains(x)).count();
            let half = Rational::new(1, 2);
            if unworthy == 0 {
                Rational::ratio(m.len(), 2 * n) + half
            } else {
                let rejected_unworthy = (0..n).map(AgentId).filter(|&x| !ideal.contains(x) && !m.contains(x)).count();
                &half * Rational::ratio(selected_worthy, ideal.len()) + &half * Rational::ratio(rejected_unworthy, unworthy)
            }
        }
    })
}

/// Plus one per agent classified correctly, minus one otherwise, over `n`.
fn main_by_definition(m: &AgentSet, ideal: &AgentSet) -> Rational {
    let n = m.n();
    let points: i64 = (0..n).map(|x| if m.contains(AgentId(x)) == ideal.contains(AgentId(x)) { 1 } else { -1 }).sum();
    Rational::from_integer(points) / Rational::from_usize(n)
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanReport {
    pub n: usize,
    pub alphas: Vec<Rational>,
    pub graphs: u64,
    pub checks: u64,
    pub mismatches: u64,
    /// First few mismatch descriptions.
    pub examples: Vec<String>,
}

impl ScanReport {
    pub fn is_clean(&self) -> bool {
        self.mismatches == 0
    }
}

/// Enumerates every labelled digraph on `n <= 4` agents whose edges carry a
/// palette weight (each ordered pair either absent or one palette value), and
/// for each `alpha` cross-checks the worthy set against [`naive_worthy_set`],
/// the lower bound `|I| >= alpha n`, and the identity `C = 1 - (2/n)|M xor I|`
/// for a few classifications `M`.
pub fn exhaustive_tiny_scan(n: usize, palette: &[Rational], alphas: &[Rational]) -> Result<ScanReport> {
    if n > TINY_SCAN_LIMIT {
        return Err(Error::TooLarge { what: "exhaustive scan", n, limit: TINY_SCAN_LIMIT });
    }
    for alpha in alphas {
        check_alpha(alpha)?;
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b))).collect();
    let choices = palette.len() as u64 + 1;
    let total = pairs.iter().try_fold(1u64, |acc, _| acc.checked_mul(choices).filter(|&t| t <= TINY_SCAN_BUDGET));
    let Some(total) = total else {
        return Err(Error::TooLarge { what: "exhaustive scan (graph count)", n, limit: TINY_SCAN_LIMIT });
    };

    let mut report = ScanReport {
        n,
        alphas: alphas.to_vec(),
        graphs: 0,
        checks: 0,
        mismatches: 0,
        examples: Vec::new(),
    };
    let fail = |report: &mut ScanReport, msg: String| {
        report.mismatches += 1;
        if report.examples.len() < 10 {
            report.examples.push(msg);
        }
    };
    let mut digits = vec![0usize; pairs.len()];
    for _ in 0..total {
        let edges = pairs
            .iter()
            .zip(&digits)
            .filter(|(_, &d)| d > 0)
            .map(|(&(a, b), &d)| (a, b, palette[d - 1].clone()));
        let g = WeightedDigraph::new(n, edges)?;
        report.graphs += 1;
        let naive_s = naive_scores(&g);
        let positive = AgentSet::from_mask(naive_s.iter().map(|s| !s.is_negative() && !s.is_zero()).collect());
        for (alpha, fast) in alphas.iter().zip(worthy_sets(&g, alphas)?) {
            let naive = naive_worthy_from_scores(&naive_s, alpha);
            report.checks += 1;
            if fast != naive {
                fail(&mut report, format!("alpha {alpha}: worthy {fast} vs naive {naive} on {:?}", digits));
            }
            if Rational::from_usize(fast.len()) < alpha * Rational::from_usize(n) {
                fail(&mut report, format!("alpha {alpha}: |I| = {} below alpha n on {:?}", fast.len(), digits));
            }
            for m in [fast.complement(), AgentSet::full(n), positive.clone()] {
                report.checks += 1;
                let lhs = coincidence(&m, &fast, MeasureKind::MainC)?;
                let rhs = Rational::one() - Rational::ratio(2 * m.symmetric_difference_len(&fast), n);
                if lhs != rhs {
                    fail(&mut report, format!("alpha {alpha}: C = {lhs} but 1 - 2|M^I|/n = {rhs}"));
                }
            }
        }
        // odometer increment
        for d in digits.iter_mut() {
            *d += 1;
            if (*d as u64) < choices {
                break;
            }
            *d = 0;
        }
    }
    Ok(report)
}
