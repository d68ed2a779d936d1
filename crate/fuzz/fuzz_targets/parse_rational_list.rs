#![no_main]

use libfuzzer_sys::fuzz_target;
use peerclass::io::parse_rational_list;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if text.len() > 4096 {
        return;
    }
    if let Ok(values) = parse_rational_list(text) {
        assert!(!values.is_empty());
        assert!(values.len() <= 100_001);
    }
});
