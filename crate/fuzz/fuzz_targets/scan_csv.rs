#![no_main]

use dicke_core::io::{format_scan_csv, parse_scan_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(points) = parse_scan_csv(text) {
        let again = parse_scan_csv(&format_scan_csv(&points)).expect("formatted output parses");
        assert_eq!(again.len(), points.len());
    }
});
