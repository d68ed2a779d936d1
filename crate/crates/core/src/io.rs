//! JSON formats shared by every command: the canonical graph document and the
//! golden-facts sidecar emitted with adversarial instances.
//!
//! Graph document:
//!
//! ```json
//! {"n": 3, "edges": [{"src": 0, "dst": 1, "w": "1/2"}, {"src": 2, "dst": 1, "w": "-0.25"}]}
//! ```
//!
//! Weights are strings, parsed exactly (`p/q`, integer or decimal). Output
//! always uses the reduced `p/q` form and lists edges sorted by `(src, dst)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::WeightedDigraph;
use crate::rational::Rational;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDoc {
    n: usize,
    edges: Vec<EdgeDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    src: usize,
    dst: usize,
    w: String,
}

/// Parses and validates a graph document.
pub fn parse_graph_json(text: &str) -> Result<WeightedDigraph> {
    let doc: GraphDoc = serde_json::from_str(text).map_err(|e| Error::Format(format!("graph JSON: {e}")))?;
    let mut edges = Vec::with_capacity(doc.edges.len());
    for (i, e) in doc.edges.into_iter().enumerate() {
        let w: Rational = e
            .w
            .parse()
            .map_err(|err| Error::Format(format!("edge #{i} ({}->{}): weight {:?}: {err}", e.src, e.dst, e.w)))?;
        edges.push((e.src, e.dst, w));
    }
    WeightedDigraph::new(doc.n, edges)
}

pub fn graph_to_json(g: &WeightedDigraph) -> String {
    let doc = GraphDoc {
        n: g.n(),
        edges: g.edges().iter().map(|e| EdgeDoc { src: e.src.0, dst: e.dst.0, w: e.w.value().to_string() }).collect(),
    };
    serde_json::to_string(&doc).expect("graph documents always serialize")
}

/// Short content hash of the canonical JSON encoding, for labelling instances.
pub fn graph_digest(g: &WeightedDigraph) -> String {
    let hash = Sha256::digest(graph_to_json(g).as_bytes());
    hex::encode(&hash[..8])
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactsParams {
    pub n: usize,
    pub alpha: Rational,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

/// Golden facts attached to a generated graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactsDoc {
    pub family: String,
    /// Which graph of the family this is, e.g. `G` or `G'`.
    pub label: String,
    pub params: FactsParams,
    pub expected_worthy: Vec<usize>,
    /// Agent id (as a string key) to exact score.
    pub expected_scores: BTreeMap<String, Rational>,
}

pub fn parse_facts_json(text: &str) -> Result<FactsDoc> {
    let doc: FactsDoc = serde_json::from_str(text).map_err(|e| Error::Format(format!("facts JSON: {e}")))?;
    for key in doc.expected_scores.keys() {
        key.parse::<usize>().map_err(|_| Error::Format(format!("facts JSON: score key {key:?} is not an agent id")))?;
    }
    Ok(doc)
}

pub fn facts_to_json(doc: &FactsDoc) -> String {
    serde_json::to_string_pretty(doc).expect("facts documents always serialize")
}

/// Parses a list of rationals: either comma separated (`0.1,1/3,0.5`) or a
/// `start:stop:step` range with an inclusive end (`0.1:0.9:0.1`).
pub fn parse_rational_list(text: &str) -> Result<Vec<Rational>> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::Format("empty list".into()));
    }
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [single] => single.split(',').map(|s| s.parse().map_err(Error::from)).collect(),
        [start, stop, step] => {
            let (start, stop, step): (Rational, Rational, Rational) = (start.parse()?, stop.parse()?, step.parse()?);
            if step.is_negative() || step.is_zero() {
                return Err(Error::Format("range step must be positive".into()));
            }
            if stop < start {
                return Err(Error::Format("range stop is below its start".into()));
            }
            let count = ((&stop - &start) / &step).floor();
            if count > 100_000u32.into() {
                return Err(Error::Format("range has more than 100000 values".into()));
            }
            let mut out = Vec::new();
            let mut v = start;
            while v <= stop {
                out.push(v.clone());
                v = v + &step;
            }
            Ok(out)
        }
        _ => Err(Error::Format(format!("cannot parse {text:?} as a list or start:stop:step range"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::AgentId;
    use crate::rational::q;
    use proptest::prelude::*;

    #[test]
    fn parses_exact_weights() {
        let g = parse_graph_json(r#"{"n": 3, "edges": [{"src": 0, "dst": 1, "w": "0.25"}, {"src": 2, "dst": 1, "w": "-1/2"}]}"#)
            .unwrap();
        assert_eq!(g.weight(AgentId(0), AgentId(1)), Some(&q(1, 4)));
        assert_eq!(g.weight(AgentId(2), AgentId(1)), Some(&q(-1, 2)));
        assert_eq!(
            graph_to_json(&g),
            r#"{"n":3,"edges":[{"src":0,"dst":1,"w":"1/4"},{"src":2,"dst":1,"w":"-1/2"}]}"#
        );
    }

    #[test]
    fn diagnostics_name_the_offending_edge() {
        let err = parse_graph_json(r#"{"n": 2, "edges": [{"src": 0, "dst": 1, "w": "2"}]}"#).unwrap_err();
        assert!(err.to_string().contains("0->1"), "{err}");
        assert!(err.to_string().contains("outside [-1, 1]"), "{err}");
        let err = parse_graph_json(r#"{"n": 2, "edges": [{"src": 0, "dst": 1, "w": "x"}]}"#).unwrap_err();
        assert!(err.to_string().contains("edge #0"), "{err}");
        assert!(parse_graph_json(r#"{"n": 2, "edges": [{"src": 0, "dst": 1, "w": 1}]}"#).is_err());
        assert!(parse_graph_json(r#"{"n": 2}"#).is_err());
        assert!(parse_graph_json(r#"{"n": 2, "edges": [], "extra": 1}"#).is_err());
    }

    #[test]
    fn rational_lists() {
        let v = parse_rational_list("0.1:0.9:0.1").unwrap();
        assert_eq!(v.len(), 9);
        assert_eq!(v[0], q(1, 10));
        assert_eq!(v[8], q(9, 10));
        assert_eq!(parse_rational_list("1/3, 1/2").unwrap(), vec![q(1, 3), q(1, 2)]);
        assert!(parse_rational_list("0:1:0").is_err());
        assert!(parse_rational_list("1:0:1/2").is_err());
        assert!(parse_rational_list("0:1:1/1000000").is_err());
        assert!(parse_rational_list("1:2").is_err());
    }

    #[test]
    fn facts_reject_bad_keys() {
        let text = r#"{"family":"f","label":"G","params":{"n":2,"alpha":"1/2"},"expected_worthy":[0],"expected_scores":{"zero":"0/1"}}"#;
        assert!(parse_facts_json(text).is_err());
    }

    proptest! {
        #[test]
        fn graph_json_round_trips(
            n in 1usize..6,
            raw in proptest::collection::vec((0usize..6, 0usize..6, -4i64..=4), 0..12),
        ) {
            let mut seen = std::collections::BTreeSet::new();
            let edges: Vec<_> = raw
                .into_iter()
                .filter(|&(a, b, _)| a < n && b < n && a != b && seen.insert((a, b)))
                .map(|(a, b, w)| (a, b, q(w, 4)))
                .collect();
            let g = WeightedDigraph::new(n, edges).unwrap();
            prop_assert_eq!(parse_graph_json(&graph_to_json(&g)).unwrap(), g);
        }
    }
}
