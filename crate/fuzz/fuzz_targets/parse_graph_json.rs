#![no_main]

use libfuzzer_sys::fuzz_target;
use peerclass::io::{graph_to_json, parse_graph_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(g) = parse_graph_json(text) {
        // accepted graphs re-encode to a canonical form that parses back to the same graph
        let canonical = graph_to_json(&g);
        assert_eq!(parse_graph_json(&canonical).expect("canonical form parses"), g);
    }
});
