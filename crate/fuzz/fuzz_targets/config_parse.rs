#![no_main]

use hexmg::config::Config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = Config::parse(text) {
            // Rendering and re-parsing keeps every entry.
            let again: String = cfg.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
            assert_eq!(Config::parse(&again).unwrap(), cfg);
        }
    }
});
