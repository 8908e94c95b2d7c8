#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(rows) = jcsd_cli::parse_region_csv(text) {
        assert!(!rows.is_empty());
        assert!(rows.iter().all(|r| r.exponent.is_finite() && r.rate.is_finite()));
    }
});
