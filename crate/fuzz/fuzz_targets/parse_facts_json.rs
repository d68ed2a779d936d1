#![no_main]

use libfuzzer_sys::fuzz_target;
use peerclass::io::{facts_to_json, parse_facts_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(doc) = parse_facts_json(text) {
        assert_eq!(parse_facts_json(&facts_to_json(&doc)).expect("round trip"), doc);
    }
});
