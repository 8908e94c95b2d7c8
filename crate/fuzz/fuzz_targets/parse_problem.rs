#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(problem) = jcsd_core::parse_problem(text) {
        // Anything accepted must survive a print/parse round trip.
        let again = jcsd_core::parse_problem(&problem.to_string()).expect("re-parse");
        assert_eq!(again, problem);
    }
});
