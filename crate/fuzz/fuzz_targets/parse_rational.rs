#![no_main]
use libfuzzer_sys::fuzz_target;
use weylwalk::parse::{format_rational, parse_rational, parse_small_rational};

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(q) = parse_rational(s) {
            // the canonical form must parse back to the same value
            assert_eq!(parse_rational(&format_rational(&q)).unwrap(), q);
        }
        let _ = parse_small_rational(s);
    }
});
