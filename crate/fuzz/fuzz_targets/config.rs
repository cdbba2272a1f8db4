#![no_main]

use libfuzzer_sys::fuzz_target;
use viscid_cli::config::ScenarioConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = ScenarioConfig::from_toml(text, "fuzz") {
            // an accepted config must describe a finite record grid
            assert!(!cfg.record_times().is_empty());
        }
    }
});
