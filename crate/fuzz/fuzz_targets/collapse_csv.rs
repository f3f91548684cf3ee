#![no_main]

use dicke_core::io::{format_collapse_csv, parse_collapse_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(points) = parse_collapse_csv(text) {
        let again = parse_collapse_csv(&format_collapse_csv(&points)).expect("formatted output parses");
        assert_eq!(again, points);
    }
});
