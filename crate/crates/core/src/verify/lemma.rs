//! Borderline lemma for the deterministic mechanism: when `|U| < |B| - 2 delta`,
//! at least `(|B ∪ U| - delta) / 2` agents of `B ∪ U` are classified correctly.
//!
//! The weaker count `|B ∪ U| / 2 - delta` is tracked alongside; it is the one
//! that yields the `alpha - 3 delta / n` floor.

use serde::Serialize;

use crate::error::Result;
use crate::graph::{worthy_set, WeightedDigraph};
use crate::io::graph_digest;
use crate::mechanisms::{wub_deterministic, wub_partition, MechanismConfig};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LemmaCase {
    pub digest: String,
    pub borderline: usize,
    pub unworthy: usize,
    /// Agents of `B ∪ U` whose label matches the worthy set.
    pub correct: usize,
    /// `(|B ∪ U| - delta) / 2`.
    pub required: Rational,
    /// `|B ∪ U| / 2 - delta`.
    pub weak_required: Rational,
}

impl LemmaCase {
    pub fn holds(&self) -> bool {
        Rational::from_usize(self.correct) >= self.required
    }

    pub fn holds_weak(&self) -> bool {
        Rational::from_usize(self.correct) >= self.weak_required
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LemmaReport {
    pub graphs: usize,
    /// Graphs outside the deterministic regime or refused by the mechanism.
    pub skipped: usize,
    /// Graphs in the regime where `|U| < |B| - 2 delta` fails.
    pub precondition_unmet: usize,
    pub cases: Vec<LemmaCase>,
}

impl LemmaReport {
    pub fn failures(&self) -> impl Iterator<Item = &LemmaCase> {
        self.cases.iter().filter(|c| !c.holds())
    }

    pub fn weak_failures(&self) -> impl Iterator<Item = &LemmaCase> {
        self.cases.iter().filter(|c| !c.holds_weak())
    }
}

/// `None` when `|U| < |B| - 2 delta` does not hold.
pub fn borderline_lemma(g: &WeightedDigraph, cfg: &MechanismConfig) -> Result<Option<LemmaCase>> {
    let part = wub_partition(g, cfg)?;
    let (b, u) = (part.borderline.len(), part.unworthy.len());
    if u + 2 * cfg.delta >= b {
        return Ok(None);
    }
    let ideal = worthy_set(g, &cfg.alpha)?;
    let chosen = wub_deterministic(g, cfg)?;
    let contested = part.borderline.union(&part.unworthy);
    let correct = contested.iter().filter(|&x| chosen.contains(x) == ideal.contains(x)).count();
    Ok(Some(LemmaCase {
        digest: graph_digest(g),
        borderline: b,
        unworthy: u,
        correct,
        required: Rational::ratio(b + u, 2) - Rational::ratio(cfg.delta, 2),
        weak_required: Rational::ratio(b + u, 2) - Rational::from_usize(cfg.delta),
    }))
}

/// Runs [`borderline_lemma`] on every graph in the deterministic regime.
pub fn lemma_check<'a>(graphs: impl IntoIterator<Item = &'a WeightedDigraph>, cfg: &MechanismConfig) -> LemmaReport {
    let mut report = LemmaReport::default();
    for g in graphs {
        report.graphs += 1;
        if !cfg.in_deterministic_regime(g.n()) {
            report.skipped += 1;
            continue;
        }
        match borderline_lemma(g, cfg) {
            Ok(Some(case)) => report.cases.push(case),
            Ok(None) => report.precondition_unmet += 1,
            Err(_) => report.skipped += 1,
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn tied_graph_meets_the_precondition() {
        // a +1 cycle on 0..=4; the seven others have no edges and tie at score 0
        let g = WeightedDigraph::new(12, (0..5).map(|i| (i, (i + 1) % 5, q(1, 1)))).unwrap();
        let cfg = MechanismConfig::new(q(1, 2), 1).unwrap();
        let case = borderline_lemma(&g, &cfg).unwrap().expect("precondition holds");
        assert_eq!((case.borderline, case.unworthy), (7, 0));
        assert_eq!(case.correct, 4);
        assert_eq!(case.required, q(3, 1));
        assert!(case.holds());
    }

    #[test]
    fn stated_count_can_fail_while_the_weak_one_holds() {
        // Every borderline agent is unworthy in G, yet four of the five get
        // accepted: only 2 of B ∪ U are right against (6 - 1)/2 required.
        let edges = [
            (0, 2, 0), (1, 10, 1), (2, 11, 0), (3, 8, 1), (4, 7, 0), (6, 5, 0),
            (7, 2, 1), (8, 1, 0), (9, 6, 1), (10, 9, 1), (11, 7, 1),
        ];
        let g = WeightedDigraph::new(12, edges.iter().map(|&(a, b, w)| (a, b, q(w, 1)))).unwrap();
        let cfg = MechanismConfig::new(q(1, 2), 1).unwrap();
        assert!(cfg.in_deterministic_regime(12));
        let case = borderline_lemma(&g, &cfg).unwrap().expect("precondition holds");
        assert_eq!((case.borderline, case.unworthy, case.correct), (5, 1, 2));
        assert_eq!(case.required, q(5, 2));
        assert!(!case.holds());
        assert!(case.holds_weak());
    }

    #[test]
    fn weak_count_can_fail_too() {
        // Six tied agents, each lowering someone ranked above the tie; every
        // other tied y is in W in G_{x,y}, so x is alone in B(G_x) and accepted.
        let edges = [
            (0, 11, 0), (1, 4, 1), (2, 3, 0), (3, 2, 1), (4, 8, 0), (5, 3, 1),
            (6, 11, 1), (7, 10, 1), (8, 4, 1), (9, 8, 1), (10, 6, 0), (11, 5, 0),
        ];
        let g = WeightedDigraph::new(12, edges.iter().map(|&(a, b, w)| (a, b, q(w, 1)))).unwrap();
        let cfg = MechanismConfig::new(q(1, 2), 1).unwrap();
        let case = borderline_lemma(&g, &cfg).unwrap().expect("precondition holds");
        assert_eq!((case.borderline, case.unworthy, case.correct), (6, 0, 1));
        assert_eq!(case.digest, "9a646d81d2ff8ffe");
        assert!(!case.holds_weak());
    }
}
