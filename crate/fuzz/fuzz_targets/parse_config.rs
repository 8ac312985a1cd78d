#![no_main]
use libfuzzer_sys::fuzz_target;
use weylwalk::parse::parse_config;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(pairs) = parse_config(s) {
            for (k, _) in &pairs {
                assert!(!k.is_empty() && !k.contains('_'));
            }
        }
    }
});
