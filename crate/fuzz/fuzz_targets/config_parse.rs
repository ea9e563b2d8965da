#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    // Parsing must never panic, and an accepted config must survive a
    // canonicalize/reparse round trip unchanged.
    if let Ok(cfg) = drr::config::parse_config(text) {
        let canon = cfg.canonical();
        let again = drr::config::parse_config(&canon).expect("canonical form reparses");
        assert_eq!(cfg, again);
        assert_eq!(cfg.digest(), again.digest());
    }
});
