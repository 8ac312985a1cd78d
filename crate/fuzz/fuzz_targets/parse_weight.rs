#![no_main]
use libfuzzer_sys::fuzz_target;
use weylwalk::parse::parse_weight;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(w) = parse_weight(s) {
            assert_eq!(parse_weight(&w.to_string()).unwrap(), w);
        }
    }
});
