#![no_main]

use libfuzzer_sys::fuzz_target;
use peerclass::Rational;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if text.len() > 4096 {
        return;
    }
    if let Ok(r) = text.parse::<Rational>() {
        let back: Rational = r.to_string().parse().expect("display form parses");
        assert_eq!(back, r);
    }
});
