#![no_main]

use libfuzzer_sys::fuzz_target;
use viscid_cli::expr::{evaluate, Scope};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(v) = evaluate(text, &Scope::default().with("m", 1.0).with("hbar", 1.0).with("omega0", 0.5)) {
            assert!(v.is_finite());
        }
    }
});
