#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // Parsing must never panic; accepted datasets must round-trip through
    // the writer bit for bit.
    if let Ok(ds) = drr::dataset::parse_dataset(data) {
        let text = drr::dataset::dataset_to_string(&ds).expect("serializable");
        let again = drr::dataset::parse_dataset(text.as_bytes()).expect("round trip");
        assert_eq!(ds, again);
    }
});
