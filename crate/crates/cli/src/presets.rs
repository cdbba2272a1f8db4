//! Built-in scenarios for the five figure setups.

use crate::config::{ConfigError, ScenarioConfig};

pub const PRESETS: [(&str, &str); 5] = [
    ("fig1", include_str!("../presets/fig1.toml")),
    ("fig2", include_str!("../presets/fig2.toml")),
    ("fig3", include_str!("../presets/fig3.toml")),
    ("fig4", include_str!("../presets/fig4.toml")),
    ("fig5", include_str!("../presets/fig5.toml")),
];

pub fn preset_text(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn preset(name: &str) -> Result<ScenarioConfig, ConfigError> {
    let text = preset_text(name).ok_or_else(|| {
        let known: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
        ConfigError(format!("unknown preset {name:?}; known presets: {}", known.join(", ")))
    })?;
    ScenarioConfig::from_toml(text, name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tolerance::Engine;

    #[test]
    fn presets_load() {
        for (name, _) in PRESETS {
            let c = preset(name).unwrap();
            assert_eq!(c.name, name);
            assert_eq!(c.gammas.len(), 3);
        }
        assert!(preset("fig6").is_err());
    }

    #[test]
    fn friction_values_follow_the_figures() {
        let g = |name| preset(name).unwrap().gammas.iter().map(|g| g.1).collect::<Vec<_>>();
        assert_eq!(g("fig1"), vec![0.025, 0.1, 0.5]);
        let w0 = 2.0 * std::f64::consts::PI / 10.0;
        for (got, want) in g("fig3").into_iter().zip([0.3 * w0, 2.0 * w0, 4.0 * w0]) {
            assert!((got - want).abs() < 1e-15);
        }
        let fig5 = preset("fig5").unwrap();
        assert_eq!(fig5.density_times, vec![5.0, 15.0, 25.0, 35.0]);
        assert_eq!(preset("fig4").unwrap().engines, vec![Engine::ClosedForm, Engine::Ode, Engine::Grid]);
    }
}
