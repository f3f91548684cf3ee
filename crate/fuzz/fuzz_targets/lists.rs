#![no_main]

use dicke_core::io::{parse_n_list, parse_real_list};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(ns) = parse_n_list(text) {
        assert!(!ns.is_empty() && ns.iter().all(|&n| n > 0));
    }
    if let Ok(xs) = parse_real_list(text) {
        assert!(xs.iter().all(|x| x.is_finite()));
    }
});
