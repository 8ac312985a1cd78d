#![no_main]
use libfuzzer_sys::fuzz_target;
use weylwalk::walk::Theta;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(theta) = s.parse::<Theta>() {
            assert_eq!(theta.to_string().parse::<Theta>().unwrap(), theta);
        }
    }
});
