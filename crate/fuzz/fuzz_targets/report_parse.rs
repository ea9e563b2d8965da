#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(report) = drr::bench::parse_report_csv(text) {
        let csv = drr::bench::report_to_csv(&report);
        let again = drr::bench::parse_report_csv(&csv).expect("round trip");
        assert_eq!(report, again);
    }
});
