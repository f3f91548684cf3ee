#![no_main]

use dicke_cli::config::parse_scan_input;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok((n, path)) = parse_scan_input(text) {
            assert!(n >= 1);
            assert!(!path.as_os_str().is_empty());
        }
    }
});
