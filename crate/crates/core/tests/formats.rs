//! Input formats: round trips, diagnostics, and a replay of every checked-in
//! fuzz corpus seed through the matching parser.

use std::fs;
use std::path::{Path, PathBuf};

use peerclass::adversarial::{applicable_instances, Family};
use peerclass::io::{facts_to_json, graph_digest, graph_to_json, parse_facts_json, parse_graph_json, parse_rational_list};
use peerclass::rational::q;
use peerclass::{Error, Rational, WeightedDigraph};
use proptest::prelude::*;

fn corpus(target: &str) -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut files: Vec<PathBuf> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|entry| entry.unwrap().path())
        .collect();
    files.sort();
    assert!(!files.is_empty(), "no seeds in {}", dir.display());
    files
}

fn seed_text(path: &Path) -> String {
    String::from_utf8_lossy(&fs::read(path).unwrap()).into_owned()
}

#[test]
fn graph_seeds_parse_or_fail_cleanly() {
    let mut accepted = 0;
    for path in corpus("parse_graph_json") {
        if let Ok(g) = parse_graph_json(&seed_text(&path)) {
            accepted += 1;
            assert_eq!(parse_graph_json(&graph_to_json(&g)).unwrap(), g, "{}", path.display());
        }
    }
    assert!(accepted >= 3);
}

#[test]
fn facts_seeds_parse_or_fail_cleanly() {
    for path in corpus("parse_facts_json") {
        if let Ok(doc) = parse_facts_json(&seed_text(&path)) {
            assert_eq!(parse_facts_json(&facts_to_json(&doc)).unwrap(), doc, "{}", path.display());
        }
    }
}

#[test]
fn rational_seeds_parse_or_fail_cleanly() {
    for path in corpus("parse_rational") {
        if let Ok(r) = seed_text(&path).parse::<Rational>() {
            assert_eq!(r.to_string().parse::<Rational>().unwrap(), r, "{}", path.display());
        }
    }
    for path in corpus("parse_rational_list") {
        if let Ok(v) = parse_rational_list(&seed_text(&path)) {
            assert!(!v.is_empty());
        }
    }
}

#[test]
fn graph_validation_errors() {
    let cases = [
        (r#"{"n":2,"edges":[{"src":0,"dst":2,"w":"1"}]}"#, "out of range"),
        (r#"{"n":2,"edges":[{"src":1,"dst":1,"w":"1"}]}"#, "self-loop"),
        (r#"{"n":2,"edges":[{"src":0,"dst":1,"w":"1"},{"src":0,"dst":1,"w":"1/2"}]}"#, "more than once"),
        (r#"{"n":2,"edges":[{"src":0,"dst":1,"w":"-3/2"}]}"#, "outside [-1, 1]"),
        (r#"{"n":2,"edges":[{"src":0,"dst":1,"w":"1/0"}]}"#, "edge #0"),
        (r#"not json"#, "graph JSON"),
    ];
    for (text, needle) in cases {
        let err = parse_graph_json(text).unwrap_err();
        assert!(err.to_string().contains(needle), "{text}: {err}");
        assert!(!err.is_precondition());
    }
}

#[test]
fn decimal_weights_are_exact() {
    let g = parse_graph_json(r#"{"n":2,"edges":[{"src":0,"dst":1,"w":"0.1"}]}"#).unwrap();
    assert_eq!(peerclass::scores(&g)[1], q(1, 10));
    assert!(graph_to_json(&g).contains(r#""w":"1/10""#));
}

#[test]
fn digests_ignore_edge_order_and_spelling() {
    let a = parse_graph_json(r#"{"n":3,"edges":[{"src":0,"dst":1,"w":"0.5"},{"src":2,"dst":0,"w":"-1"}]}"#).unwrap();
    let b = parse_graph_json(r#"{"n":3,"edges":[{"src":2,"dst":0,"w":"-1/1"},{"src":0,"dst":1,"w":"2/4"}]}"#).unwrap();
    assert_eq!(graph_digest(&a), graph_digest(&b));
    assert_eq!(graph_digest(&a).len(), 16);
    assert_ne!(graph_digest(&a), graph_digest(&WeightedDigraph::empty(3)));
}

#[test]
fn adversarial_facts_survive_serialization() {
    for inst in applicable_instances(40, &q(1, 2), 39) {
        for (fg, doc) in inst.graphs.iter().zip(inst.facts()) {
            let back = parse_facts_json(&facts_to_json(&doc)).unwrap();
            assert_eq!(back, doc);
            assert_eq!(back.family.parse::<Family>().unwrap(), inst.family);
            assert_eq!(back.expected_worthy, fg.expected_worthy.ids());
            let g = parse_graph_json(&graph_to_json(&fg.graph)).unwrap();
            let actual = peerclass::scores(&g);
            for (agent, s) in &back.expected_scores {
                assert_eq!(&actual[agent.parse::<usize>().unwrap()], s);
            }
        }
    }
}

#[test]
fn list_errors_are_format_errors() {
    for bad in ["", "a,b", "0:1", "1:0:1/2", "0:1:-1/2"] {
        assert!(matches!(parse_rational_list(bad), Err(Error::Format(_) | Error::ParseRational(_))), "{bad:?}");
    }
}

proptest! {
    #[test]
    fn rationals_print_and_parse_back(p in -10_000i64..10_000, d in 1i64..10_000) {
        let r = q(p, d);
        prop_assert_eq!(r.to_string().parse::<Rational>().unwrap(), r.clone());
        // the sign applies to the whole decimal, so -3.0012 is -30012/10000
        let frac = d % 10_000;
        let parsed: Rational = format!("{p}.{frac:04}").parse().unwrap();
        let scaled = if p < 0 { p * 10_000 - frac } else { p * 10_000 + frac };
        prop_assert_eq!(parsed, q(scaled, 10_000));
    }

    #[test]
    fn arbitrary_text_never_panics(text in ".{0,64}") {
        let _ = parse_graph_json(&text);
        let _ = parse_facts_json(&text);
        let _ = parse_rational_list(&text);
        let _ = text.parse::<Rational>();
    }
}
