//! Feeds every checked-in fuzz corpus seed through the same entry points the
//! fuzz targets exercise, so the corpora and the round-trip properties stay
//! green without a fuzzing toolchain.

use std::fs;
use std::path::PathBuf;

fn corpus_dir(target: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target)
}

fn corpus_files(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = corpus_dir(target);
    let mut out: Vec<(PathBuf, Vec<u8>)> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("corpus dir {}: {e}", dir.display()))
        .map(|entry| {
            let path = entry.unwrap().path();
            let bytes = fs::read(&path).unwrap();
            (path, bytes)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no corpus seeds for {target}");
    out
}

#[test]
fn config_corpus_parses_and_round_trips() {
    for (path, bytes) in corpus_files("config_parse") {
        let text = std::str::from_utf8(&bytes).unwrap();
        let cfg = drr::config::parse_config(text)
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let again = drr::config::parse_config(&cfg.canonical()).unwrap();
        assert_eq!(cfg, again, "{}", path.display());
    }
}

#[test]
fn dataset_corpus_parses_and_round_trips() {
    for (path, bytes) in corpus_files("dataset_parse") {
        let ds = drr::dataset::parse_dataset(&bytes)
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let text = drr::dataset::dataset_to_string(&ds).unwrap();
        assert_eq!(text.as_bytes(), bytes.as_slice(), "{}", path.display());
    }
}

#[test]
fn model_corpus_loads_and_round_trips() {
    for (path, bytes) in corpus_files("model_load") {
        let model = drr::model_file::model_from_bytes(&bytes)
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let again = drr::model_file::model_to_bytes(&model).unwrap();
        assert_eq!(again, bytes, "{}", path.display());
    }
}

#[test]
fn report_corpus_parses_and_round_trips() {
    for (path, bytes) in corpus_files("report_parse") {
        let text = std::str::from_utf8(&bytes).unwrap();
        let report = drr::bench::parse_report_csv(text)
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let csv = drr::bench::report_to_csv(&report);
        assert_eq!(csv.as_bytes(), bytes.as_slice(), "{}", path.display());
    }
}

#[test]
fn mutated_corpus_inputs_error_cleanly() {
    // A cheap deterministic mutation pass: single-byte corruptions and
    // truncations of every seed must produce an error or a valid value,
    // never a panic.
    for target in ["config_parse", "dataset_parse", "model_load", "report_parse"] {
        for (_, bytes) in corpus_files(target) {
            for stride in [1usize, 7, 13] {
                let mut mutated = bytes.clone();
                for i in (0..mutated.len()).step_by(stride.max(bytes.len() / 50 + 1)) {
                    mutated[i] ^= 0x5A;
                }
                exercise(target, &mutated);
            }
            for cut in [0, bytes.len() / 3, bytes.len().saturating_sub(1)] {
                exercise(target, &bytes[..cut]);
            }
        }
    }
}

fn exercise(target: &str, data: &[u8]) {
    match target {
        "config_parse" => {
            if let Ok(text) = std::str::from_utf8(data) {
                let _ = drr::config::parse_config(text);
            }
        }
        "dataset_parse" => {
            let _ = drr::dataset::parse_dataset(data);
        }
        "model_load" => {
            let _ = drr::model_file::model_from_bytes(data);
        }
        "report_parse" => {
            if let Ok(text) = std::str::from_utf8(data) {
                let _ = drr::bench::parse_report_csv(text);
            }
        }
        _ => unreachable!(),
    }
}
