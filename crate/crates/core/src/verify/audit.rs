//! Incentive-compatibility fuzzing.
//!
//! Each trial picks an agent uniformly and redraws every one of its out-weights
//! uniformly from the palette plus the original weight, keeping the edge set.
//! The agent's own probability of being labelled worthy must not move.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::graph::{AgentId, Weight};
use crate::io::graph_digest;
use crate::mechanisms::{Mechanism, MechanismConfig};
use crate::rational::Rational;

use super::ensemble::{stream, EnsembleSpec};

/// Mixed into the ensemble seed so manipulation draws never reuse graph draws.
const MANIPULATION_SEED_MASK: u64 = 0x5DEE_CE66_D1CE_4E5B;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IcViolation {
    pub instance: usize,
    pub digest: String,
    pub agent: usize,
    /// `(target, weight)` before the manipulation.
    pub original: Vec<(usize, Rational)>,
    pub manipulated: Vec<(usize, Rational)>,
    pub before: Rational,
    pub after: Rational,
}

impl IcViolation {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("violations always serialize")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PreconditionFailure {
    pub instance: usize,
    pub digest: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub mechanism: String,
    pub instances: usize,
    /// Manipulations actually tried, excluding refused instances.
    pub manipulations: usize,
    pub precondition_failures: Vec<PreconditionFailure>,
    pub violations: Vec<IcViolation>,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

struct InstanceAudit {
    tried: usize,
    failure: Option<PreconditionFailure>,
    violations: Vec<IcViolation>,
}

pub fn ic_audit(mech: &Mechanism, e: &EnsembleSpec, per_instance: usize) -> Result<AuditReport> {
    e.validate()?;
    let cfg = MechanismConfig::new(e.alpha.clone(), e.delta)?;
    let palette: Vec<Weight> = e.weight_palette.iter().map(|w| Weight::new(w.clone())).collect::<Result<_>>()?;
    let results: Vec<Result<InstanceAudit>> =
        (0..e.count).into_par_iter().map(|i| audit_instance(mech, e, &cfg, &palette, i, per_instance)).collect();
    let mut report = AuditReport {
        mechanism: mech.name(),
        instances: e.count,
        manipulations: 0,
        precondition_failures: Vec::new(),
        violations: Vec::new(),
    };
    for r in results {
        let r = r?;
        report.manipulations += r.tried;
        report.precondition_failures.extend(r.failure);
        report.violations.extend(r.violations);
    }
    Ok(report)
}

fn audit_instance(
    mech: &Mechanism,
    e: &EnsembleSpec,
    cfg: &MechanismConfig,
    palette: &[Weight],
    index: usize,
    per_instance: usize,
) -> Result<InstanceAudit> {
    let g = e.graph(index);
    let digest = graph_digest(&g);
    let before = match mech.assignment(&g, cfg) {
        Ok(a) => a,
        Err(err) if err.is_precondition() => {
            return Ok(InstanceAudit {
                tried: 0,
                failure: Some(PreconditionFailure { instance: index, digest, reason: err.to_string() }),
                violations: Vec::new(),
            })
        }
        Err(err) => return Err(err),
    };
    let mut rng = stream(e.seed ^ MANIPULATION_SEED_MASK, index as u64);
    let mut violations = Vec::new();
    for _ in 0..per_instance {
        let x = AgentId(rng.random_range(0..g.n()));
        let original: Vec<Weight> = g.out_edges(x).iter().map(|edge| edge.w.clone()).collect();
        let manipulated: Vec<Weight> = original
            .iter()
            .map(|w| {
                let pick = rng.random_range(0..=palette.len());
                palette.get(pick).unwrap_or(w).clone()
            })
            .collect();
        let h = g.with_agent_reviews(x, &manipulated)?;
        let after = mech.agent_probability(&h, cfg, x)?;
        if &after != before.get(x) {
            let targets: Vec<usize> = g.out_edges(x).iter().map(|edge| edge.dst.0).collect();
            let pairs = |ws: &[Weight]| targets.iter().copied().zip(ws.iter().map(|w| w.value().clone())).collect();
            violations.push(IcViolation {
                instance: index,
                digest: digest.clone(),
                agent: x.0,
                original: pairs(&original),
                manipulated: pairs(&manipulated),
                before: before.get(x).clone(),
                after,
            });
        }
    }
    Ok(InstanceAudit { tried: per_instance, failure: None, violations })
}
