//! Replays the fuzzing seeds through the same checks as the fuzz targets.

use std::fs;
use std::path::PathBuf;

use viscid_cli::config::ScenarioConfig;
use viscid_cli::expr::{evaluate, Scope};
use viscid_cli::tolerance::Tolerances;
use viscid_core::table::Table;

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn config_seeds() {
    let mut accepted = 0;
    for (name, text) in seeds("config") {
        if let Ok(cfg) = ScenarioConfig::from_toml(&text, &name) {
            assert!(!cfg.record_times().is_empty(), "{name}");
            accepted += 1;
        }
    }
    assert!(accepted > 0);
}

#[test]
fn tolerance_seeds() {
    for (name, text) in seeds("tolerance") {
        if let Ok(t) = Tolerances::parse(&text) {
            assert_eq!(Tolerances::parse(&t.to_string()).as_ref(), Ok(&t), "{name}");
        }
    }
}

#[test]
fn expr_seeds() {
    for (name, text) in seeds("expr") {
        if let Ok(v) = evaluate(&text, &Scope::default().with("m", 1.0).with("hbar", 1.0).with("omega0", 0.5)) {
            assert!(v.is_finite(), "{name}");
        }
    }
}

#[test]
fn table_seeds() {
    for (name, text) in seeds("table") {
        assert!(Table::parse(&text).is_ok(), "{name}");
    }
}
