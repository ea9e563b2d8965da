#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // Loading must never panic or over-allocate; an accepted model must
    // serialize back and reload to an identical value.
    if let Ok(model) = drr::model_file::model_from_bytes(data) {
        let bytes = drr::model_file::model_to_bytes(&model).expect("serializable");
        let again = drr::model_file::model_from_bytes(&bytes).expect("round trip");
        assert_eq!(model, again);
    }
});
