//! Replays the checked-in fuzz seeds through the same checks the fuzz
//! targets make, so the corpora stay exercised on stable toolchains.

use std::path::PathBuf;

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|entry| {
            let path = entry.unwrap().path();
            let text = std::fs::read_to_string(&path).unwrap();
            (path.file_name().unwrap().to_string_lossy().into_owned(), text)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn problem_seeds() {
    let mut accepted = 0;
    for (name, text) in seeds("parse_problem") {
        if let Ok(problem) = jcsd_core::parse_problem(&text) {
            accepted += 1;
            let again = jcsd_core::parse_problem(&problem.to_string()).unwrap();
            assert_eq!(again, problem, "{name}");
        }
    }
    assert!(accepted >= 3);
}

#[test]
fn distribution_seeds() {
    for (name, text) in seeds("parse_distribution") {
        let parsed = jcsd_core::parse_distribution(&text);
        let expect_ok = !matches!(name.as_str(), "bad_sum.txt" | "negative.txt");
        assert_eq!(parsed.is_ok(), expect_ok, "{name}");
        if let Ok(d) = parsed {
            assert!((d.probs().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn region_csv_seeds() {
    for (name, text) in seeds("parse_region_csv") {
        let parsed = jcsd_cli::parse_region_csv(&text);
        let expect_ok = !matches!(name.as_str(), "short_row.csv" | "nan.csv");
        assert_eq!(parsed.is_ok(), expect_ok, "{name}");
    }
}
