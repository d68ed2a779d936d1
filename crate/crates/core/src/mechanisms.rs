//! Classification mechanisms.
//!
//! The trivial mechanisms ignore every weight. The W/U/B mechanisms decide an
//! agent's label only from graphs in which that agent's own reviews were
//! replaced by -1, which is what makes them incentive compatible:
//!
//! * `W` (absolutely worthy): `x` is in the top `beta = alpha - delta/n` of `G_x`;
//! * `U` (absolutely unworthy): `x` is outside the top `alpha` of `G_x`;
//! * `B` (borderline): everything else.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{check_alpha, permutations, relabel, AgentId, AgentSet, WeightedDigraph};
use crate::measures::{Classification, ProbabilisticAssignment};
use crate::rational::Rational;
use crate::score_view::ScoreView;

/// Largest graph `symmetrize` accepts by default (it evaluates `n!` relabelings).
pub const DEFAULT_SYMMETRIZE_GUARD: usize = 6;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MechanismConfig {
    pub alpha: Rational,
    /// Out-degree cap.
    pub delta: usize,
    /// Seed for realising a probabilistic assignment, if one is wanted.
    pub seed: Option<u64>,
}

impl MechanismConfig {
    pub fn new(alpha: Rational, delta: usize) -> Result<Self> {
        check_alpha(&alpha)?;
        Ok(MechanismConfig { alpha, delta, seed: None })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn alpha_n(&self, n: usize) -> Rational {
        &self.alpha * Rational::from_usize(n)
    }

    pub fn beta(&self, n: usize) -> Rational {
        &self.alpha - Rational::ratio(self.delta, n.max(1))
    }

    /// `delta <= alpha n`: the regime of the probabilistic guarantee.
    pub fn in_probabilistic_regime(&self, n: usize) -> bool {
        Rational::from_usize(self.delta) <= self.alpha_n(n)
    }

    /// `delta <= min(alpha n / 3, (1 - alpha) n / 3)`: the regime of the deterministic guarantee.
    pub fn in_deterministic_regime(&self, n: usize) -> bool {
        let three_delta = Rational::from_usize(3 * self.delta);
        let nq = Rational::from_usize(n);
        three_delta <= self.alpha_n(n) && three_delta <= (Rational::one() - &self.alpha) * nq
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    Worthy,
    Unworthy,
    Borderline,
}

/// The absolutely worthy / absolutely unworthy / borderline split.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WubPartition {
    pub worthy: AgentSet,
    pub unworthy: AgentSet,
    pub borderline: AgentSet,
}

impl WubPartition {
    pub fn region(&self, x: AgentId) -> Region {
        if self.worthy.contains(x) {
            Region::Worthy
        } else if self.unworthy.contains(x) {
            Region::Unworthy
        } else {
            Region::Borderline
        }
    }
}

/// Validated thresholds plus the score view of the input graph.
struct Wub<'g> {
    base: ScoreView<'g>,
    alpha_n: Rational,
    beta_n: Rational,
}

impl<'g> Wub<'g> {
    fn new(g: &'g WeightedDigraph, cfg: &MechanismConfig) -> Result<Self> {
        check_alpha(&cfg.alpha)?;
        g.check_degree_cap(cfg.delta)?;
        let beta = cfg.beta(g.n());
        if beta.is_negative() || beta.is_zero() {
            return Err(Error::BetaNotPositive { beta });
        }
        let alpha_n = cfg.alpha_n(g.n());
        let beta_n = &alpha_n - Rational::from_usize(cfg.delta);
        Ok(Wub { base: ScoreView::new(g), alpha_n, beta_n })
    }

    fn classify_rank(&self, rank: usize) -> Region {
        let r = Rational::from_usize(rank);
        if r < self.beta_n {
            Region::Worthy
        } else if r >= self.alpha_n {
            Region::Unworthy
        } else {
            Region::Borderline
        }
    }

    /// Region of `x`, read from `G_x`.
    fn region(&self, x: AgentId) -> Region {
        self.classify_rank(self.base.rank_if_overwritten(x))
    }

    /// Whether borderline `x` lands in the top half of `B(G_x)`, ordered by
    /// ranking in `G_x` with ties broken by agent id.
    fn borderline_accepts(&self, x: AgentId) -> bool {
        let view = self.base.overwrite(x);
        let g = view.graph();
        let own_key = (view.rank(x), x);
        let mut size = 0usize;
        let mut ahead = 0usize;
        for y in g.agents() {
            if self.classify_rank(view.rank_if_overwritten(y)) == Region::Borderline {
                size += 1;
                if (view.rank(y), y) < own_key {
                    ahead += 1;
                }
            }
        }
        ahead < size.div_ceil(2)
    }

    fn deterministic_label(&self, x: AgentId) -> bool {
        match self.region(x) {
            Region::Worthy => true,
            Region::Unworthy => false,
            Region::Borderline => self.borderline_accepts(x),
        }
    }
}

/// Labels every agent worthy.
pub fn m_complete(g: &WeightedDigraph) -> Classification {
    AgentSet::full(g.n())
}

/// Labels every agent unworthy.
pub fn m_empty(g: &WeightedDigraph) -> Classification {
    AgentSet::empty(g.n())
}

/// Selects every agent with probability one half.
pub fn m_half(g: &WeightedDigraph) -> ProbabilisticAssignment {
    ProbabilisticAssignment::uniform(g.n(), Rational::new(1, 2)).expect("1/2 is a probability")
}

/// Selects the worthy set itself. Not incentive compatible: an agent can
/// demote rivals through its own reviews. Kept as a control for the audit.
pub fn top_by_score(g: &WeightedDigraph, alpha: &Rational) -> Result<Classification> {
    crate::graph::worthy_set(g, alpha)
}

pub fn wub_partition(g: &WeightedDigraph, cfg: &MechanismConfig) -> Result<WubPartition> {
    let wub = Wub::new(g, cfg)?;
    let n = g.n();
    let mut part =
        WubPartition { worthy: AgentSet::empty(n), unworthy: AgentSet::empty(n), borderline: AgentSet::empty(n) };
    for x in g.agents() {
        match wub.region(x) {
            Region::Worthy => part.worthy.insert(x),
            Region::Unworthy => part.unworthy.insert(x),
            Region::Borderline => part.borderline.insert(x),
        }
    }
    Ok(part)
}

/// 1 on `W`, 0 on `U`, 1/2 on `B`.
pub fn wub_probabilistic(g: &WeightedDigraph, cfg: &MechanismConfig) -> Result<ProbabilisticAssignment> {
    let wub = Wub::new(g, cfg)?;
    let p = g.agents().map(|x| region_probability(wub.region(x))).collect();
    ProbabilisticAssignment::new(p)
}

fn region_probability(region: Region) -> Rational {
    match region {
        Region::Worthy => Rational::one(),
        Region::Unworthy => Rational::zero(),
        Region::Borderline => Rational::new(1, 2),
    }
}

/// `W`, plus each borderline agent that is in the top half of its own `B(G_x)`.
pub fn wub_deterministic(g: &WeightedDigraph, cfg: &MechanismConfig) -> Result<Classification> {
    let wub = Wub::new(g, cfg)?;
    let mask: Vec<bool> = (0..g.n()).into_par_iter().map(|i| wub.deterministic_label(AgentId(i))).collect();
    Ok(AgentSet::from_mask(mask))
}

/// `W` only.
pub fn wub_worthy_only(g: &WeightedDigraph, cfg: &MechanismConfig) -> Result<Classification> {
    Ok(wub_partition(g, cfg)?.worthy)
}

/// Output of a mechanism on one graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Deterministic(Classification),
    Probabilistic(ProbabilisticAssignment),
}

impl Outcome {
    pub fn assignment(&self) -> ProbabilisticAssignment {
        match self {
            Outcome::Deterministic(c) => ProbabilisticAssignment::from_classification(c),
            Outcome::Probabilistic(a) => a.clone(),
        }
    }
}

/// Every mechanism behind one interface, named as on the command line.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Mechanism {
    Complete,
    Empty,
    Half,
    WubProb,
    WubDet,
    WubWorthy,
    /// Non-IC control: selects the worthy set directly.
    TopByScore,
    Symmetrized { inner: Box<Mechanism>, guard: usize },
}

impl Mechanism {
    /// The IC mechanisms this crate ships.
    pub fn shipped() -> Vec<Mechanism> {
        vec![
            Mechanism::Complete,
            Mechanism::Empty,
            Mechanism::Half,
            Mechanism::WubProb,
            Mechanism::WubDet,
            Mechanism::WubWorthy,
        ]
    }

    pub fn symmetrized(inner: Mechanism) -> Mechanism {
        Mechanism::Symmetrized { inner: Box::new(inner), guard: DEFAULT_SYMMETRIZE_GUARD }
    }

    pub fn name(&self) -> String {
        match self {
            Mechanism::Complete => "complete".into(),
            Mechanism::Empty => "empty".into(),
            Mechanism::Half => "half".into(),
            Mechanism::WubProb => "wub-prob".into(),
            Mechanism::WubDet => "wub-det".into(),
            Mechanism::WubWorthy => "wub-worthy".into(),
            Mechanism::TopByScore => "top-score".into(),
            Mechanism::Symmetrized { inner, .. } => format!("symmetrized:{}", inner.name()),
        }
    }

    pub fn is_probabilistic(&self) -> bool {
        matches!(self, Mechanism::Half | Mechanism::WubProb | Mechanism::Symmetrized { .. })
    }

    /// Whether the mechanism is incentive compatible by construction.
    pub fn is_ic(&self) -> bool {
        match self {
            Mechanism::TopByScore => false,
            Mechanism::Symmetrized { inner, .. } => inner.is_ic(),
            _ => true,
        }
    }

    /// Probability that `x` is labelled worthy in `g` (0 or 1 for deterministic mechanisms).
    pub fn agent_probability(&self, g: &WeightedDigraph, cfg: &MechanismConfig, x: AgentId) -> Result<Rational> {
        g.check_agent(x)?;
        let indicator = |b: bool| if b { Rational::one() } else { Rational::zero() };
        Ok(match self {
            Mechanism::Complete => Rational::one(),
            Mechanism::Empty => Rational::zero(),
            Mechanism::Half => Rational::new(1, 2),
            Mechanism::WubProb => region_probability(Wub::new(g, cfg)?.region(x)),
            Mechanism::WubDet => indicator(Wub::new(g, cfg)?.deterministic_label(x)),
            Mechanism::WubWorthy => indicator(Wub::new(g, cfg)?.region(x) == Region::Worthy),
            Mechanism::TopByScore => indicator(top_by_score(g, &cfg.alpha)?.contains(x)),
            Mechanism::Symmetrized { inner, guard } => symmetrize(inner, g, cfg, x, *guard)?,
        })
    }

    pub fn outcome(&self, g: &WeightedDigraph, cfg: &MechanismConfig) -> Result<Outcome> {
        Ok(match self {
            Mechanism::Complete => Outcome::Deterministic(m_complete(g)),
            Mechanism::Empty => Outcome::Deterministic(m_empty(g)),
            Mechanism::Half => Outcome::Probabilistic(m_half(g)),
            Mechanism::WubProb => Outcome::Probabilistic(wub_probabilistic(g, cfg)?),
            Mechanism::WubDet => Outcome::Deterministic(wub_deterministic(g, cfg)?),
            Mechanism::WubWorthy => Outcome::Deterministic(wub_worthy_only(g, cfg)?),
            Mechanism::TopByScore => Outcome::Deterministic(top_by_score(g, &cfg.alpha)?),
            Mechanism::Symmetrized { inner, guard } => {
                Outcome::Probabilistic(symmetrized_assignment(inner, g, cfg, *guard)?)
            }
        })
    }

    pub fn assignment(&self, g: &WeightedDigraph, cfg: &MechanismConfig) -> Result<ProbabilisticAssignment> {
        Ok(self.outcome(g, cfg)?.assignment())
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Mechanism {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if let Some(inner) = s.strip_prefix("symmetrized:") {
            return Ok(Mechanism::symmetrized(inner.parse()?));
        }
        match s {
            "complete" => Ok(Mechanism::Complete),
            "empty" => Ok(Mechanism::Empty),
            "half" => Ok(Mechanism::Half),
            "wub-prob" => Ok(Mechanism::WubProb),
            "wub-det" => Ok(Mechanism::WubDet),
            "wub-worthy" => Ok(Mechanism::WubWorthy),
            "top-score" => Ok(Mechanism::TopByScore),
            _ => Err(Error::UnknownMechanism(s.to_string())),
        }
    }
}

fn check_guard(n: usize, guard: usize) -> Result<()> {
    if n > guard {
        return Err(Error::TooLarge { what: "symmetrize (n! evaluations)", n, limit: guard });
    }
    Ok(())
}

/// Average of `mech(pi(x), G_pi)` over all permutations `pi` of the agents.
///
/// Costs `n!` evaluations of `mech`, so graphs above `guard` agents are refused.
pub fn symmetrize(
    mech: &Mechanism,
    g: &WeightedDigraph,
    cfg: &MechanismConfig,
    x: AgentId,
    guard: usize,
) -> Result<Rational> {
    g.check_agent(x)?;
    check_guard(g.n(), guard)?;
    let perms = permutations(g.n());
    let count = perms.len();
    let mut total = Rational::zero();
    for pi in perms {
        let image = relabel(g, &pi)?;
        total = total + mech.agent_probability(&image, cfg, AgentId(pi[x.0]))?;
    }
    Ok(total / Rational::from_usize(count))
}

fn symmetrized_assignment(
    mech: &Mechanism,
    g: &WeightedDigraph,
    cfg: &MechanismConfig,
    guard: usize,
) -> Result<ProbabilisticAssignment> {
    check_guard(g.n(), guard)?;
    let perms = permutations(g.n());
    let count = perms.len();
    let mut totals = vec![Rational::zero(); g.n()];
    for pi in perms {
        let image = relabel(g, &pi)?;
        let a = mech.assignment(&image, cfg)?;
        for (x, total) in totals.iter_mut().enumerate() {
            *total = &*total + a.get(AgentId(pi[x]));
        }
    }
    let denom = Rational::from_usize(count);
    ProbabilisticAssignment::new(totals.into_iter().map(|t| t / &denom).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::worthy_set;
    use crate::rational::q;

    fn cfg(alpha: Rational, delta: usize) -> MechanismConfig {
        MechanismConfig::new(alpha, delta).unwrap()
    }

    /// Agent i reviews i+1 (mod 10); reviews into 0..=4 are +1, into 5..=9 are -1.
    fn signed_cycle() -> WeightedDigraph {
        WeightedDigraph::new(10, (0..10).map(|i| {
            let t = (i + 1) % 10;
            (i, t, if t < 5 { q(1, 1) } else { q(-1, 1) })
        }))
        .unwrap()
    }

    #[test]
    fn empty_graph_is_all_worthy() {
        let g = WeightedDigraph::empty(10);
        let c = cfg(q(1, 2), 1);
        let part = wub_partition(&g, &c).unwrap();
        assert_eq!(part.worthy, AgentSet::full(10));
        assert!(part.unworthy.is_empty() && part.borderline.is_empty());
        assert_eq!(wub_deterministic(&g, &c).unwrap(), AgentSet::full(10));
    }

    #[test]
    fn signed_cycle_partition() {
        // Values come from the naive recomputation oracle in tests/mechanisms.rs.
        // In G_9 the review 9 -> 0 becomes -1, dropping 0 to 9's score, so only
        // 1..=4 outrank 9: rank 4 sits in [beta n, alpha n) = [4, 5).
        let g = signed_cycle();
        let c = cfg(q(1, 2), 1);
        let part = wub_partition(&g, &c).unwrap();
        assert_eq!(part.worthy.ids(), vec![0, 1, 2, 3, 4]);
        assert_eq!(part.unworthy.ids(), vec![5, 6, 7, 8]);
        assert_eq!(part.borderline.ids(), vec![9]);
        assert_eq!(wub_deterministic(&g, &c).unwrap().ids(), vec![0, 1, 2, 3, 4]);
        assert_eq!(wub_worthy_only(&g, &c).unwrap().ids(), vec![0, 1, 2, 3, 4]);
        let p = wub_probabilistic(&g, &c).unwrap();
        let expected: Vec<Rational> = (0..10)
            .map(|i| match i {
                0..=4 => q(1, 1),
                9 => q(1, 2),
                _ => q(0, 1),
            })
            .collect();
        assert_eq!(p.probabilities(), expected.as_slice());
    }

    #[test]
    fn star_center_is_absolutely_worthy() {
        let g = WeightedDigraph::new(12, (1..=5).map(|leaf| (leaf, 0, q(1, 1)))).unwrap();
        let part = wub_partition(&g, &cfg(q(1, 2), 1)).unwrap();
        assert!(part.worthy.contains(AgentId(0)));
    }

    #[test]
    fn refuses_nonpositive_beta_and_degree_overflow() {
        let g = WeightedDigraph::empty(10);
        assert!(matches!(wub_partition(&g, &cfg(q(1, 2), 5)), Err(Error::BetaNotPositive { .. })));
        assert!(matches!(wub_probabilistic(&g, &cfg(q(1, 2), 6)), Err(Error::BetaNotPositive { .. })));
        let star = WeightedDigraph::new(4, [(0, 1, q(1, 1)), (0, 2, q(1, 1))]).unwrap();
        assert!(matches!(
            wub_deterministic(&star, &cfg(q(1, 2), 1)),
            Err(Error::DegreeExceedsCap { agent: 0, degree: 2, delta: 1 })
        ));
    }

    #[test]
    fn regimes() {
        let c = cfg(q(3, 10), 5);
        assert!(c.in_probabilistic_regime(50));
        assert!(c.in_deterministic_regime(50));
        assert!(!c.in_deterministic_regime(40));
        assert_eq!(c.beta(50), q(1, 5));
    }

    #[test]
    fn trivial_mechanisms() {
        let g = signed_cycle();
        assert_eq!(m_complete(&g), AgentSet::full(10));
        assert_eq!(m_empty(&g), AgentSet::empty(10));
        assert!(m_half(&g).probabilities().iter().all(|p| *p == q(1, 2)));
        assert_eq!(top_by_score(&g, &q(1, 2)).unwrap(), worthy_set(&g, &q(1, 2)).unwrap());
    }

    #[test]
    fn names_round_trip() {
        let mut all = Mechanism::shipped();
        all.push(Mechanism::TopByScore);
        all.push(Mechanism::symmetrized(Mechanism::WubDet));
        for m in all {
            assert_eq!(m.name().parse::<Mechanism>().unwrap(), m);
        }
        assert!(matches!("nope".parse::<Mechanism>(), Err(Error::UnknownMechanism(_))));
        assert!("symmetrized:nope".parse::<Mechanism>().is_err());
    }

    #[test]
    fn symmetrize_examples() {
        let c = cfg(q(1, 2), 1);
        let g = WeightedDigraph::new(3, [(0, 1, q(1, 1)), (1, 2, q(-1, 2))]).unwrap();
        for x in g.agents() {
            assert_eq!(symmetrize(&Mechanism::Half, &g, &c, x, 6).unwrap(), q(1, 2));
        }
        let empty = WeightedDigraph::empty(3);
        let vals: Vec<_> =
            empty.agents().map(|x| symmetrize(&Mechanism::WubDet, &empty, &c, x, 6).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[0] == w[1]));
        assert!(matches!(
            symmetrize(&Mechanism::Half, &WeightedDigraph::empty(7), &c, AgentId(0), 6),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn per_agent_and_whole_graph_outputs_agree() {
        let g = signed_cycle();
        let c = cfg(q(1, 2), 1);
        for mech in Mechanism::shipped() {
            let a = mech.assignment(&g, &c).unwrap();
            for x in g.agents() {
                assert_eq!(&mech.agent_probability(&g, &c, x).unwrap(), a.get(x), "{mech} agent {x}");
            }
        }
    }
}
