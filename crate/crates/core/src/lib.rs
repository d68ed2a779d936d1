//! Incentive-compatible worthy/unworthy classification on weighted review
//! networks.
//!
//! Agents review each other with weights in `[-1, 1]`. An agent's score is the
//! average weight it receives, its ranking is the number of agents with a
//! strictly higher score, and the worthy set `I_alpha` holds every agent ranked
//! below `alpha n`. Mechanisms try to recover `I_alpha` while ensuring no agent
//! can change its own label through the reviews it writes.
//!
//! All arithmetic is exact ([`Rational`]).

pub mod adversarial;
pub mod error;
pub mod graph;
pub mod io;
pub mod measures;
pub mod mechanisms;
pub mod rational;
pub mod score_view;
pub mod verify;

pub use error::{Error, Result};
pub use graph::{
    ranking, rankings, relabel, score, scores, with_out_weights, worthy_set, worthy_sets, AgentId, AgentSet, Edge, Score,
    Weight, WeightedDigraph,
};
pub use measures::{coincidence, expected_coincidence, sample_selection, Classification, MeasureKind, ProbabilisticAssignment};
pub use mechanisms::{
    symmetrize, wub_deterministic, wub_partition, wub_probabilistic, wub_worthy_only, Mechanism, MechanismConfig,
    Outcome, Region, WubPartition,
};
pub use rational::Rational;
