//! Empirical quality floors: the worst coincidence a mechanism reaches over a
//! finite set of graphs. This is an empirical floor, not the worst case over
//! every graph.

use rayon::prelude::*;
use serde::Serialize;

use crate::adversarial::applicable_instances;
use crate::error::{Error, Result};
use crate::graph::{worthy_set, WeightedDigraph};
use crate::io::graph_digest;
use crate::measures::{expected_coincidence, MeasureKind};
use crate::mechanisms::{Mechanism, MechanismConfig};
use crate::rational::Rational;

use super::ensemble::EnsembleSpec;

/// The known feasible quality range of an IC mechanism for a measure, as a
/// function of `(alpha, delta, n)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundFormulas {
    pub lower: Rational,
    pub upper: Rational,
}

impl BoundFormulas {
    /// * `C`: `[alpha, (1 + alpha)/2]`
    /// * `C'`: `[alpha - delta/n, (1 + 3 alpha)/(2 + 2 alpha)]`
    /// * `C''`: `[(1 + alpha - delta/n)/2, 3/4 + 1/(4 (2 - alpha))]`
    pub fn for_measure(kind: MeasureKind, alpha: &Rational, delta: usize, n: usize) -> BoundFormulas {
        let one = Rational::one();
        let two = Rational::from_integer(2);
        let slack = Rational::ratio(delta, n.max(1));
        match kind {
            MeasureKind::MainC => BoundFormulas { lower: alpha.clone(), upper: (&one + alpha) / &two },
            MeasureKind::WorthyOnlyCPrime => BoundFormulas {
                lower: alpha - &slack,
                upper: (&one + Rational::from_integer(3) * alpha) / (&two + &two * alpha),
            },
            MeasureKind::NormalizedCDoublePrime => BoundFormulas {
                lower: (&one + alpha - &slack) / &two,
                upper: Rational::new(3, 4) + &one / (Rational::from_integer(4) * (&two - alpha)),
            },
        }
    }
}

/// The lower bound a mechanism guarantees on every graph of `G(n, delta)`, when
/// it has one for this measure and these parameters.
///
/// | mechanism  | `C`                         | `C'`         | `C''`         |
/// |------------|-----------------------------|--------------|---------------|
/// | complete   | `2 alpha - 1`               | `2 - 1/alpha`| `1/2`         |
/// | empty      |                             | `0`          | `1/2`         |
/// | half       | `0`                         |              | `1/2`         |
/// | wub-prob   | `alpha - delta/n`           |              |               |
/// | wub-det    | `alpha - 3 delta/n` (regime)|              |               |
/// | wub-worthy |                             | `beta`       | `(1 + beta)/2`|
pub fn claimed_bound(mech: &Mechanism, kind: MeasureKind, cfg: &MechanismConfig, n: usize) -> Option<Rational> {
    use MeasureKind::*;
    let alpha = &cfg.alpha;
    let one = Rational::one();
    let half = Rational::new(1, 2);
    let slack = Rational::ratio(cfg.delta, n.max(1));
    match (mech, kind) {
        (Mechanism::Complete, MainC) => Some(Rational::from_integer(2) * alpha - one),
        (Mechanism::Complete, WorthyOnlyCPrime) => Some(Rational::from_integer(2) - one / alpha),
        (Mechanism::Complete | Mechanism::Empty | Mechanism::Half, NormalizedCDoublePrime) => Some(half),
        (Mechanism::Empty, WorthyOnlyCPrime) => Some(Rational::zero()),
        (Mechanism::Half, MainC) => Some(Rational::zero()),
        (Mechanism::WubProb, MainC) if cfg.in_probabilistic_regime(n) => Some(alpha - slack),
        (Mechanism::WubDet, MainC) if cfg.in_deterministic_regime(n) => {
            Some(alpha - Rational::from_integer(3) * slack)
        }
        (Mechanism::WubWorthy, WorthyOnlyCPrime) => Some(cfg.beta(n)),
        (Mechanism::WubWorthy, NormalizedCDoublePrime) => Some((one + cfg.beta(n)) * half),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InstanceValue {
    /// `ensemble#<index>` or `<family> <graph label>`.
    pub label: String,
    pub digest: String,
    /// Expected coincidence; `None` when the mechanism refused the instance.
    pub value: Option<Rational>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EvaluationReport {
    pub mechanism: String,
    pub measure: String,
    pub n: usize,
    pub delta: usize,
    pub alpha: Rational,
    pub instances: Vec<InstanceValue>,
    /// Minimum over the instances that produced a value.
    pub minimum: Option<Rational>,
    pub claimed_bound: Option<Rational>,
    pub formulas: BoundFormulas,
    /// Digests of instances whose value fell below the claimed bound.
    pub violations: Vec<String>,
}

impl EvaluationReport {
    pub fn evaluated(&self) -> usize {
        self.instances.iter().filter(|i| i.value.is_some()).count()
    }

    pub fn refused(&self) -> usize {
        self.instances.len() - self.evaluated()
    }
}

/// Graphs an ensemble stands for: the random ones, then the adversarial
/// family members that fit its parameters.
pub fn ensemble_instances(e: &EnsembleSpec) -> Vec<(String, WeightedDigraph)> {
    let mut out: Vec<(String, WeightedDigraph)> =
        (0..e.count).into_par_iter().map(|i| (format!("ensemble#{i}"), e.graph(i))).collect();
    if e.include_adversarial {
        for inst in applicable_instances(e.n, &e.alpha, e.delta) {
            for fg in inst.graphs {
                out.push((format!("{} {}", inst.family, fg.label), fg.graph));
            }
        }
    }
    out
}

/// Expected coincidence of `mech` with the worthy set on one graph.
pub fn instance_coincidence(
    mech: &Mechanism,
    g: &WeightedDigraph,
    cfg: &MechanismConfig,
    kind: MeasureKind,
) -> Result<Rational> {
    let ideal = worthy_set(g, &cfg.alpha)?;
    expected_coincidence(&mech.assignment(g, cfg)?, &ideal, kind)
}

pub fn quality_floor(mech: &Mechanism, e: &EnsembleSpec, kind: MeasureKind) -> Result<EvaluationReport> {
    e.validate()?;
    let instances = ensemble_instances(e);
    evaluate_instances(mech, e, kind, &instances)
}

/// [`quality_floor`] over instances that were already generated.
pub fn evaluate_instances(
    mech: &Mechanism,
    e: &EnsembleSpec,
    kind: MeasureKind,
    instances: &[(String, WeightedDigraph)],
) -> Result<EvaluationReport> {
    let cfg = MechanismConfig::new(e.alpha.clone(), e.delta)?;
    let values: Vec<InstanceValue> = instances
        .par_iter()
        .map(|(label, g)| {
            let (value, error) = match instance_coincidence(mech, g, &cfg, kind) {
                Ok(v) => (Some(v), None),
                Err(err) if err.is_precondition() => (None, Some(err.to_string())),
                Err(err) => (None, Some(format!("unexpected: {err}"))),
            };
            InstanceValue { label: label.clone(), digest: graph_digest(g), value, error }
        })
        .collect();
    if let Some(bad) = values.iter().find(|v| v.error.as_deref().is_some_and(|e| e.starts_with("unexpected"))) {
        return Err(Error::InvalidParameters(format!("{}: {}", bad.label, bad.error.as_deref().unwrap_or(""))));
    }
    let claimed = claimed_bound(mech, kind, &cfg, e.n);
    let minimum = values.iter().filter_map(|v| v.value.clone()).min();
    let violations = match &claimed {
        Some(bound) => values
            .iter()
            .filter(|v| v.value.as_ref().is_some_and(|x| x < bound))
            .map(|v| v.digest.clone())
            .collect(),
        None => Vec::new(),
    };
    Ok(EvaluationReport {
        mechanism: mech.name(),
        measure: kind.to_string(),
        n: e.n,
        delta: e.delta,
        alpha: e.alpha.clone(),
        instances: values,
        minimum,
        claimed_bound: claimed,
        formulas: BoundFormulas::for_measure(kind, &e.alpha, e.delta, e.n),
        violations,
    })
}
