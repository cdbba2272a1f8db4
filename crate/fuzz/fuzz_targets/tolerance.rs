#![no_main]

use libfuzzer_sys::fuzz_target;
use viscid_cli::tolerance::Tolerances;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(t) = Tolerances::parse(text) {
            assert_eq!(Tolerances::parse(&t.to_string()).as_ref(), Ok(&t));
        }
    }
});
