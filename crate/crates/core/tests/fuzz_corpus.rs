//! Replays the checked-in fuzz corpus through the same round-trip checks the
//! fuzz targets apply, so regressions show up without a fuzzing toolchain.

use std::fs;
use std::path::PathBuf;

use zerodiag::format::{decode_csv, decode_json, encode_csv, encode_json};
use zerodiag::planner::ConstructionPlan;

fn corpus(target: &str) -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut files: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|entry| entry.unwrap().path())
        .collect();
    files.sort();
    assert!(!files.is_empty(), "empty corpus for {target}");
    files
        .into_iter()
        .map(|p| {
            let text = fs::read_to_string(&p).unwrap();
            (p, text)
        })
        .collect()
}

#[test]
fn decode_json_corpus() {
    let mut accepted = 0;
    for (path, text) in corpus("decode_json") {
        if let Ok(file) = decode_json(&text) {
            accepted += 1;
            let again = encode_json(&file).unwrap();
            assert_eq!(
                decode_json(&again).as_ref(),
                Ok(&file),
                "{}",
                path.display()
            );
        }
    }
    assert!(accepted >= 4);
}

#[test]
fn decode_csv_corpus() {
    for (path, text) in corpus("decode_csv") {
        if let Ok(m) = decode_csv(&text) {
            let again = encode_csv(&m).unwrap();
            assert_eq!(decode_csv(&again).as_ref(), Ok(&m), "{}", path.display());
        }
    }
}

#[test]
fn parse_plan_corpus() {
    for (path, text) in corpus("parse_plan") {
        if let Ok(plan) = ConstructionPlan::parse(&text) {
            let printed = plan.to_string();
            assert_eq!(
                ConstructionPlan::parse(&printed).map(|p| p.to_string()),
                Ok(printed),
                "{}",
                path.display()
            );
        }
    }
}
