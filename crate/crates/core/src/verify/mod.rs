//! Verification harness: seeded ensembles, IC fuzzing, brute-force oracles,
//! quality floors and sweeps.

pub mod audit;
pub mod ensemble;
pub mod lemma;
pub mod oracle;
pub mod quality;
pub mod sweep;

pub use audit::{ic_audit, AuditReport, IcViolation, PreconditionFailure};
pub use ensemble::{default_palette, random_graph, EnsembleSpec};
pub use lemma::{borderline_lemma, lemma_check, LemmaCase, LemmaReport};
pub use oracle::{brute_force_expected_coincidence, brute_force_expected_measure, exhaustive_tiny_scan, naive_worthy_set, ScanReport};
pub use quality::{claimed_bound, quality_floor, BoundFormulas, EvaluationReport, InstanceValue};
pub use sweep::{default_runs, sweep, sweep_csv, SweepRow};
