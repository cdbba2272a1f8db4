//! Scenario configuration: a TOML document whose numeric values may be
//! arithmetic expressions. See `presets/` for complete examples.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Deserialize;
use viscid_core::bohm::SamplingMode;
use viscid_core::grid_solver::GridConfig;
use viscid_core::{classify_regime, DampingRegime, PhysicalSetup, PotentialSpec};

use crate::expr::{evaluate, Scope};
use crate::tolerance::{Engine, Rule, Tolerances};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

fn bad<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// A literal number or an expression string such as `"0.3*omega0"`.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Number {
    Literal(f64),
    Expr(String),
}

impl Number {
    fn resolve(&self, what: &str, scope: &Scope) -> Result<f64, ConfigError> {
        match self {
            Number::Literal(v) if v.is_finite() => Ok(*v),
            Number::Literal(v) => bad(format!("{what}: {v} is not finite")),
            Number::Expr(s) => evaluate(s, scope).map_err(|e| ConfigError(format!("{what}: {s:?}: {e}"))),
        }
    }

    fn text(&self) -> String {
        match self {
            Number::Literal(v) => v.to_string(),
            Number::Expr(s) => s.trim().to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Free,
    Linear,
    Harmonic,
    FreeSuperposition,
    HarmonicSuperposition,
    QuasiEigenstate,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Free => "free",
            Scenario::Linear => "linear",
            Scenario::Harmonic => "harmonic",
            Scenario::FreeSuperposition => "free_superposition",
            Scenario::HarmonicSuperposition => "harmonic_superposition",
            Scenario::QuasiEigenstate => "quasi_eigenstate",
        }
    }

    fn potential(self) -> PotentialKind {
        match self {
            Scenario::Free | Scenario::FreeSuperposition => PotentialKind::Free,
            Scenario::Linear => PotentialKind::Linear,
            _ => PotentialKind::Harmonic,
        }
    }

    fn packet_count(self) -> usize {
        match self {
            Scenario::FreeSuperposition | Scenario::HarmonicSuperposition => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    Free,
    Linear,
    Harmonic,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    #[default]
    Quantile,
    Random,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: Scenario,
    gammas: Vec<Number>,
    engines: Vec<Engine>,
    t_end: Number,
    dt: Number,
    record_every: Number,
    #[serde(default)]
    density_times: Vec<Number>,
    #[serde(default)]
    seed: u64,
    output: Option<PathBuf>,
    physics: RawPhysics,
    packet: Vec<RawPacket>,
    trajectories: Option<RawTrajectories>,
    grid: RawGrid,
    #[serde(default)]
    tolerance: BTreeMap<String, f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPhysics {
    potential: PotentialKind,
    mass: Option<Number>,
    hbar: Option<Number>,
    /// Ramp acceleration for `V = -m a x`.
    a: Option<Number>,
    omega0: Option<Number>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPacket {
    x0: Option<Number>,
    p0: Option<Number>,
    sigma0: Option<Number>,
    n: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTrajectories {
    count: usize,
    #[serde(default)]
    sampling: Sampling,
    dt: Option<Number>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    n_points: usize,
    x_min: Number,
    x_max: Number,
    dt: Number,
    absorbing_margin: Option<Number>,
}

/// One wave packet; `n` selects the quasi-eigenstate level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Packet {
    pub x0: f64,
    pub p0: f64,
    pub sigma0: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryConfig {
    pub count: usize,
    pub sampling: SamplingMode,
    pub dt: f64,
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub name: String,
    pub scenario: Scenario,
    /// Setup with `γ = 0`; each run substitutes its own friction.
    pub setup: PhysicalSetup,
    pub packets: Vec<Packet>,
    /// Source text and value of each friction coefficient.
    pub gammas: Vec<(String, f64)>,
    pub engines: Vec<Engine>,
    pub t_end: f64,
    pub dt: f64,
    pub record_every: f64,
    pub density_times: Vec<f64>,
    pub trajectories: TrajectoryConfig,
    pub grid: GridConfig,
    pub tolerances: Tolerances,
    pub output: Option<PathBuf>,
    pub seed: u64,
}

/// `whole / part` when it is a positive integer up to rounding.
pub const MAX_STEPS: usize = 100_000_000;
pub const MAX_RECORDS: usize = 1_000_000;
pub const MAX_TRAJECTORIES: usize = 100_000;
pub const MAX_GRID_POINTS: usize = 1 << 24;

pub fn whole_multiple(whole: f64, part: f64) -> Option<usize> {
    let r = whole / part;
    let n = r.round();
    ((r - n).abs() <= 1e-9 * n.max(1.0) && n >= 1.0).then_some(n as usize)
}

impl ScenarioConfig {
    pub fn from_toml(text: &str, name: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        Self::resolve(raw, name)
    }

    fn resolve(raw: RawConfig, name: &str) -> Result<Self, ConfigError> {
        let base = Scope::default();
        let phys = &raw.physics;
        let scalar = |n: &Option<Number>, what: &str, default: Option<f64>, scope: &Scope| match (n, default) {
            (Some(n), _) => n.resolve(what, scope),
            (None, Some(d)) => Ok(d),
            (None, None) => bad(format!("{what} is required")),
        };
        let mass = scalar(&phys.mass, "physics.mass", Some(1.0), &base)?;
        let hbar = scalar(&phys.hbar, "physics.hbar", Some(1.0), &base)?;
        let mut scope = base.with("m", mass).with("hbar", hbar);
        let potential = match phys.potential {
            PotentialKind::Free => PotentialSpec::Free,
            PotentialKind::Linear => PotentialSpec::Linear { a: scalar(&phys.a, "physics.a", None, &scope)? },
            PotentialKind::Harmonic => {
                let w0 = scalar(&phys.omega0, "physics.omega0", None, &scope)?;
                scope = scope.with("omega0", w0).with("tau0", 2.0 * std::f64::consts::PI / w0);
                PotentialSpec::Harmonic { omega0: w0 }
            }
        };
        if phys.potential != PotentialKind::Linear && phys.a.is_some() {
            return bad("physics.a applies only to the linear potential");
        }
        if phys.potential != PotentialKind::Harmonic && phys.omega0.is_some() {
            return bad("physics.omega0 applies only to the harmonic potential");
        }
        if raw.scenario.potential() != phys.potential {
            return bad(format!("scenario {} does not run in a {:?} potential", raw.scenario.name(), phys.potential));
        }
        let setup = PhysicalSetup::new(mass, hbar, 0.0, potential).map_err(|e| ConfigError(e.to_string()))?;

        if raw.gammas.is_empty() {
            return bad("gammas must not be empty");
        }
        let mut gammas = Vec::new();
        for (i, g) in raw.gammas.iter().enumerate() {
            let v = g.resolve(&format!("gammas[{i}]"), &scope)?;
            if v < 0.0 {
                return bad(format!("gammas[{i}] = {v} is negative"));
            }
            gammas.push((g.text(), v));
        }

        let t_end = raw.t_end.resolve("t_end", &scope)?;
        let dt = raw.dt.resolve("dt", &scope)?;
        let record_every = raw.record_every.resolve("record_every", &scope)?;
        if !(t_end > 0.0 && dt > 0.0 && dt <= t_end) {
            return bad("need 0 < dt <= t_end");
        }
        if whole_multiple(record_every, dt).is_none() || whole_multiple(t_end, record_every).is_none() {
            return bad("record_every must be a whole multiple of dt and divide t_end");
        }
        if t_end / dt > MAX_STEPS as f64 || t_end / record_every > MAX_RECORDS as f64 {
            return bad(format!("at most {MAX_STEPS} steps and {MAX_RECORDS} records per run"));
        }
        let mut density_times = Vec::new();
        for (i, n) in raw.density_times.iter().enumerate() {
            let t = n.resolve(&format!("density_times[{i}]"), &scope)?;
            let on_record = t == 0.0 || whole_multiple(t, record_every).is_some();
            if !(0.0..=t_end * (1.0 + 1e-12)).contains(&t) || !on_record {
                return bad(format!("density_times[{i}] = {t} must be a record time in [0, t_end]"));
            }
            density_times.push(t);
        }

        if raw.packet.len() != raw.scenario.packet_count() {
            return bad(format!("scenario {} needs {} [[packet]] table(s)", raw.scenario.name(), raw.scenario.packet_count()));
        }
        let mut packets = Vec::new();
        for (i, p) in raw.packet.iter().enumerate() {
            let what = |k: &str| format!("packet[{i}].{k}");
            let eigen = raw.scenario == Scenario::QuasiEigenstate;
            let packet = if eigen {
                if p.x0.is_some() || p.p0.is_some() || p.sigma0.is_some() {
                    return bad(format!("packet[{i}]: a quasi-eigenstate is fixed by n alone"));
                }
                let n = p.n.ok_or_else(|| ConfigError(format!("{} is required", what("n"))))?;
                if n > 50 {
                    return bad(format!("{} = {n} exceeds 50", what("n")));
                }
                Packet { x0: 0.0, p0: 0.0, sigma0: 0.0, n }
            } else {
                if p.n.is_some() {
                    return bad(format!("{} applies only to quasi_eigenstate", what("n")));
                }
                let sigma0 = scalar(&p.sigma0, &what("sigma0"), None, &scope)?;
                if sigma0 <= 0.0 {
                    return bad(format!("{} must be positive", what("sigma0")));
                }
                Packet {
                    x0: scalar(&p.x0, &what("x0"), None, &scope)?,
                    p0: scalar(&p.p0, &what("p0"), Some(0.0), &scope)?,
                    sigma0,
                    n: 0,
                }
            };
            packets.push(packet);
        }
        if raw.scenario == Scenario::QuasiEigenstate {
            for (text, g) in &gammas {
                let s = setup.with_gamma(*g).map_err(|e| ConfigError(e.to_string()))?;
                if !matches!(classify_regime(&s), Ok(DampingRegime::Underdamped { .. })) {
                    return bad(format!("quasi-eigenstates need underdamped friction; gamma {text} is not"));
                }
            }
        }

        let trajectories = match &raw.trajectories {
            None => TrajectoryConfig { count: 0, sampling: SamplingMode::Quantile, dt },
            Some(t) => {
                let tdt = match &t.dt {
                    Some(n) => n.resolve("trajectories.dt", &scope)?,
                    None => dt,
                };
                if !(tdt > 0.0) || whole_multiple(record_every, tdt).is_none() {
                    return bad("trajectories.dt must divide record_every");
                }
                let sampling = match t.sampling {
                    Sampling::Quantile => SamplingMode::Quantile,
                    Sampling::Random => SamplingMode::Random { seed: raw.seed },
                };
                if t.count > MAX_TRAJECTORIES {
                    return bad(format!("at most {MAX_TRAJECTORIES} trajectories"));
                }
                TrajectoryConfig { count: t.count, sampling, dt: tdt }
            }
        };

        let g = &raw.grid;
        if g.n_points > MAX_GRID_POINTS {
            return bad(format!("grid.n_points above {MAX_GRID_POINTS}"));
        }
        let mut grid = GridConfig::new(
            g.dt.resolve("grid.dt", &scope)?,
            g.n_points,
            g.x_min.resolve("grid.x_min", &scope)?,
            g.x_max.resolve("grid.x_max", &scope)?,
        )
        .map_err(|e| ConfigError(format!("grid: {e}")))?;
        if let Some(m) = &g.absorbing_margin {
            grid = grid.with_absorber(m.resolve("grid.absorbing_margin", &scope)?).map_err(|e| ConfigError(format!("grid: {e}")))?;
        }

        let mut tolerances = Tolerances::default();
        for (key, bound) in &raw.tolerance {
            tolerances.push(Rule::parse_key(key, *bound).map_err(|e| ConfigError(format!("tolerance {key:?}: {e}")))?);
        }

        let mut cfg = Self {
            name: name.to_string(),
            scenario: raw.scenario,
            setup,
            packets,
            gammas,
            engines: Vec::new(),
            t_end,
            dt,
            record_every,
            density_times,
            trajectories,
            grid,
            tolerances,
            output: raw.output,
            seed: raw.seed,
        };
        cfg.set_engines(&raw.engines)?;
        Ok(cfg)
    }

    /// Replaces the engine list after checking it against the scenario.
    pub fn set_engines(&mut self, engines: &[Engine]) -> Result<(), ConfigError> {
        if engines.is_empty() {
            return bad("engines must not be empty");
        }
        let mut list = engines.to_vec();
        list.sort();
        list.dedup();
        if list.len() != engines.len() {
            return bad("engines are listed twice");
        }
        if self.scenario == Scenario::QuasiEigenstate && list.contains(&Engine::Ode) {
            return bad("the ode engine propagates Gaussians only; quasi_eigenstate runs with closed_form and grid");
        }
        if list.contains(&Engine::Grid) && whole_multiple(self.record_every, self.grid.dt).is_none() {
            return bad("record_every must be a whole multiple of grid.dt");
        }
        self.engines = list;
        Ok(())
    }

    /// Record times `0, Δ, 2Δ, …, t_end`.
    pub fn record_times(&self) -> Vec<f64> {
        let n = whole_multiple(self.t_end, self.record_every).unwrap_or(0);
        (0..=n).map(|k| k as f64 * self.record_every).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
scenario = "harmonic"
gammas = ["0.3*omega0", 0]
engines = ["ode", "closed_form"]
t_end = 20
dt = 1e-3
record_every = 0.5
density_times = ["tau0/2"]

[physics]
potential = "harmonic"
omega0 = "2*pi/10"

[[packet]]
x0 = 5
sigma0 = "sqrt(hbar/(2*m*omega0))"

[trajectories]
count = 15
dt = 0.01

[grid]
n_points = 2048
x_min = -15
x_max = 15
dt = 1e-3

[tolerance]
"closed_form:ode.*" = 1e-8
"#;

    #[test]
    fn expressions_resolve() {
        let c = ScenarioConfig::from_toml(MINIMAL, "t").unwrap();
        let w0 = 0.2 * std::f64::consts::PI;
        assert_eq!(c.gammas[0], ("0.3*omega0".to_string(), 0.3 * w0));
        assert_eq!(c.gammas[1].1, 0.0);
        assert_eq!(c.engines, vec![Engine::ClosedForm, Engine::Ode]);
        assert!((c.packets[0].sigma0 - (1.0 / (2.0 * w0)).sqrt()).abs() < 1e-15);
        assert_eq!(c.density_times, vec![5.0]);
        assert_eq!(c.record_times().len(), 41);
        assert_eq!(c.trajectories.dt, 0.01);
        assert_eq!(c.tolerances.bound(Engine::Ode, Engine::ClosedForm, crate::tolerance::Quantity::Norm), Some(1e-8));
    }

    #[test]
    fn inconsistent_documents_are_rejected() {
        let cases = [
            ("engines = [\"ode\", \"closed_form\"]", "engines = []"),
            ("gammas = [\"0.3*omega0\", 0]", "gammas = []"),
            ("gammas = [\"0.3*omega0\", 0]", "gammas = [-1]"),
            ("gammas = [\"0.3*omega0\", 0]", "gammas = [\"0.3*omega\"]"),
            ("engines = [\"ode\", \"closed_form\"]", "engines = [\"ode\", \"ode\"]"),
            ("engines = [\"ode\", \"closed_form\"]", "engines = [\"fft\"]"),
            ("scenario = \"harmonic\"", "scenario = \"free\""),
            ("scenario = \"harmonic\"", "scenario = \"harmonic_superposition\""),
            ("scenario = \"harmonic\"", "scenario = \"quasi_eigenstate\""),
            ("record_every = 0.5", "record_every = 0.3333"),
            ("density_times = [\"tau0/2\"]", "density_times = [5.25]"),
            ("density_times = [\"tau0/2\"]", "density_times = [25]"),
            ("sigma0 = \"sqrt(hbar/(2*m*omega0))\"", "sigma0 = 0"),
            ("omega0 = \"2*pi/10\"", "omega0 = -1"),
            ("count = 15", "count = 15\nspeed = 2"),
            ("[tolerance]", "[tolerance]\n\"ode:grid.speed\" = 1"),
            ("dt = 0.01", "dt = 0.3"),
            ("x_max = 15", "x_max = -20"),
            ("t_end = 20", "t_end = 1e300"),
            ("count = 15", "count = 1000000000"),
            ("n_points = 2048", "n_points = 1073741824"),
        ];
        for (from, to) in cases {
            assert!(MINIMAL.contains(from), "{from}");
            let text = MINIMAL.replacen(from, to, 1);
            assert!(ScenarioConfig::from_toml(&text, "t").is_err(), "accepted: {to}");
        }
    }

    #[test]
    fn quasi_eigenstates_need_underdamping() {
        let text = MINIMAL
            .replace("scenario = \"harmonic\"", "scenario = \"quasi_eigenstate\"")
            .replace("engines = [\"ode\", \"closed_form\"]", "engines = [\"grid\", \"closed_form\"]")
            .replace("x0 = 5\nsigma0 = \"sqrt(hbar/(2*m*omega0))\"", "n = 2");
        assert!(ScenarioConfig::from_toml(&text, "t").is_ok());
        let over = text.replace("gammas = [\"0.3*omega0\", 0]", "gammas = [\"4*omega0\"]");
        assert!(ScenarioConfig::from_toml(&over, "t").unwrap_err().0.contains("underdamped"));
    }

    #[test]
    fn whole_multiples() {
        assert_eq!(whole_multiple(0.5, 1e-3), Some(500));
        assert_eq!(whole_multiple(40.0, 0.5), Some(80));
        assert_eq!(whole_multiple(0.5, 0.3), None);
        assert_eq!(whole_multiple(1e-4, 1.0), None);
    }
}
