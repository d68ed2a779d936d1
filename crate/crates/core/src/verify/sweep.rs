//! Finite-n quality sweeps over `alpha`, emitted as plot-ready CSV.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::MeasureKind;
use crate::mechanisms::Mechanism;
use crate::rational::Rational;

use super::ensemble::EnsembleSpec;
use super::quality::{ensemble_instances, evaluate_instances};

/// One `(alpha, mechanism, measure)` cell of a sweep.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepRow {
    pub alpha: Rational,
    pub mechanism: String,
    pub measure: String,
    pub lower: Rational,
    pub upper: Rational,
    /// Lower bound the mechanism itself guarantees, if any.
    pub guarantee: Option<Rational>,
    pub minimum: Option<Rational>,
    pub instances: usize,
    pub refused: usize,
}

impl SweepRow {
    /// `lower <= minimum <= upper`.
    pub fn within_band(&self) -> bool {
        self.minimum.as_ref().is_some_and(|m| *m >= self.lower && *m <= self.upper)
    }
}

/// The mechanism paired with each measure by default: the W/U/B probabilistic
/// mechanism for `C` and the worthy-only mechanism for `C'` and `C''`.
pub fn default_runs() -> Vec<(Mechanism, MeasureKind)> {
    vec![
        (Mechanism::WubProb, MeasureKind::MainC),
        (Mechanism::WubWorthy, MeasureKind::WorthyOnlyCPrime),
        (Mechanism::WubWorthy, MeasureKind::NormalizedCDoublePrime),
    ]
}

/// Evaluates every run at every `alpha`, reusing `e` with its `alpha` replaced.
/// Rows come back sorted by `alpha`, mechanism name, then measure.
pub fn sweep(alphas: &[Rational], e: &EnsembleSpec, runs: &[(Mechanism, MeasureKind)]) -> Result<Vec<SweepRow>> {
    if alphas.is_empty() || runs.is_empty() {
        return Err(Error::InvalidParameters("a sweep needs at least one alpha and one run".into()));
    }
    let mut rows = Vec::new();
    for alpha in alphas {
        let spec = EnsembleSpec { alpha: alpha.clone(), ..e.clone() };
        spec.validate()?;
        let instances = ensemble_instances(&spec);
        for (mech, kind) in runs {
            let report = evaluate_instances(mech, &spec, *kind, &instances)?;
            rows.push(SweepRow {
                alpha: alpha.clone(),
                mechanism: report.mechanism.clone(),
                measure: report.measure.clone(),
                lower: report.formulas.lower.clone(),
                upper: report.formulas.upper.clone(),
                guarantee: report.claimed_bound.clone(),
                minimum: report.minimum.clone(),
                instances: report.instances.len(),
                refused: report.refused(),
            });
        }
    }
    rows.sort_by(|a, b| (&a.alpha, &a.mechanism, &a.measure).cmp(&(&b.alpha, &b.mechanism, &b.measure)));
    Ok(rows)
}

pub const CSV_HEADER: [&str; 15] = [
    "alpha",
    "alpha_decimal",
    "mechanism",
    "measure",
    "lower_formula",
    "lower_formula_decimal",
    "upper_formula",
    "upper_formula_decimal",
    "guarantee",
    "guarantee_decimal",
    "empirical_min",
    "empirical_min_decimal",
    "within_band",
    "instances",
    "refused",
];

fn exact(v: &Rational) -> [String; 2] {
    [v.to_string(), format!("{:.6}", v.to_f64())]
}

fn optional(v: &Option<Rational>) -> [String; 2] {
    v.as_ref().map(exact).unwrap_or_default()
}

/// Header plus one record per row; every rational appears as `p/q` and as a decimal.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in rows {
        let mut record: Vec<String> = Vec::with_capacity(CSV_HEADER.len());
        record.extend(exact(&r.alpha));
        record.push(r.mechanism.clone());
        record.push(r.measure.clone());
        record.extend(exact(&r.lower));
        record.extend(exact(&r.upper));
        record.extend(optional(&r.guarantee));
        record.extend(optional(&r.minimum));
        record.push(r.within_band().to_string());
        record.push(r.instances.to_string());
        record.push(r.refused.to_string());
        w.write_record(&record).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn rows_are_ordered_and_rendered() {
        let e = EnsembleSpec::new(40, 2, q(1, 2), 5, 9);
        let rows = sweep(&[q(1, 2), q(1, 4)], &e, &default_runs()).unwrap();
        assert_eq!(rows.len(), 6);
        assert_eq!(rows[0].alpha, q(1, 4));
        assert_eq!(rows[0].mechanism, "wub-prob");
        assert_eq!((rows[1].measure.as_str(), rows[2].measure.as_str()), ("C'", "C''"));
        let text = sweep_csv(&rows);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        assert!(lines.next().unwrap().starts_with("1/4,0.250000,wub-prob,C,1/4,0.250000,5/8,0.625000,"));
        assert_eq!(text.lines().count(), 7);
    }
}
