#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(dist) = jcsd_core::parse_distribution(text) {
        let sum: f64 = dist.probs().iter().sum();
        assert!((sum - 1.0).abs() < 1e-9);
        assert!(dist.probs().iter().all(|p| *p >= 0.0));
    }
});
