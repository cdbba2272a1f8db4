//! Physical context shared by every engine: mass, ħ, friction and the
//! external potential.

use crate::error::{Error, Result};

/// External potential. All supported variants are at most quadratic, so the
/// second-order Taylor expansion about any point is exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialSpec {
    Free,
    /// `V(x) = -m a x`; `a > 0` pushes the particle toward `+x`.
    Linear { a: f64 },
    /// `V(x) = m ω₀² x² / 2`.
    Harmonic { omega0: f64 },
}

/// Value, slope and curvature of the potential at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialTaylor {
    pub value: f64,
    pub slope: f64,
    pub curvature: f64,
}

impl PotentialSpec {
    /// `false` for a linear potential with `a <= 0`, which is accepted but
    /// does not follow the downhill-toward-`+x` convention.
    pub fn is_canonical(&self) -> bool {
        match *self {
            PotentialSpec::Linear { a } => a > 0.0,
            _ => true,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PotentialSpec::Free => "free",
            PotentialSpec::Linear { .. } => "linear",
            PotentialSpec::Harmonic { .. } => "harmonic",
        }
    }
}

/// Evaluates `(V, V', V'')` at `x`.
pub fn potential_eval(spec: PotentialSpec, mass: f64, x: f64) -> PotentialTaylor {
    match spec {
        PotentialSpec::Free => PotentialTaylor { value: 0.0, slope: 0.0, curvature: 0.0 },
        PotentialSpec::Linear { a } => PotentialTaylor {
            value: -mass * a * x,
            slope: -mass * a,
            curvature: 0.0,
        },
        PotentialSpec::Harmonic { omega0 } => {
            let k = mass * omega0 * omega0;
            PotentialTaylor { value: 0.5 * k * x * x, slope: k * x, curvature: k }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalSetup {
    mass: f64,
    hbar: f64,
    gamma: f64,
    potential: PotentialSpec,
}

impl PhysicalSetup {
    pub fn new(mass: f64, hbar: f64, gamma: f64, potential: PotentialSpec) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::domain(format!("mass must be positive, got {mass}")));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::domain(format!("hbar must be positive, got {hbar}")));
        }
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::domain(format!("gamma must be non-negative, got {gamma}")));
        }
        match potential {
            PotentialSpec::Linear { a } if !a.is_finite() => {
                return Err(Error::domain("linear slope must be finite"));
            }
            PotentialSpec::Harmonic { omega0 } if !(omega0.is_finite() && omega0 > 0.0) => {
                return Err(Error::domain(format!("omega0 must be positive, got {omega0}")));
            }
            _ => {}
        }
        Ok(Self { mass, hbar, gamma, potential })
    }

    /// Unit mass and ħ, the convention used by all the reference scenarios.
    pub fn natural(gamma: f64, potential: PotentialSpec) -> Result<Self> {
        Self::new(1.0, 1.0, gamma, potential)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn potential(&self) -> PotentialSpec {
        self.potential
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Self::new(self.mass, self.hbar, gamma, self.potential)
    }

    pub fn potential_at(&self, x: f64) -> PotentialTaylor {
        potential_eval(self.potential, self.mass, x)
    }

    pub fn omega0(&self) -> Option<f64> {
        match self.potential {
            PotentialSpec::Harmonic { omega0 } => Some(omega0),
            _ => None,
        }
    }

    pub(crate) fn require_omega0(&self) -> Result<f64> {
        self.omega0()
            .ok_or_else(|| Error::domain(format!("{} potential is not harmonic", self.potential.name())))
    }

    /// `e^{γt}`, the factor relating canonical and physical momentum.
    pub fn growth(&self, t: f64) -> f64 {
        (self.gamma * t).exp()
    }
}

/// Damping regime of the harmonic oscillator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DampingRegime {
    /// `ω₀ > γ/2`; `omega = sqrt(ω₀² - γ²/4)`, `phase = atan(γ / 2Ω)`.
    Underdamped { omega: f64, phase: f64 },
    Critical,
    /// `ω₀ < γ/2`; `rate = sqrt(γ²/4 - ω₀²)`.
    Overdamped { rate: f64 },
}

impl DampingRegime {
    /// Ω, Γ or zero.
    pub fn frequency(&self) -> f64 {
        match *self {
            DampingRegime::Underdamped { omega, .. } => omega,
            DampingRegime::Critical => 0.0,
            DampingRegime::Overdamped { rate } => rate,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DampingRegime::Underdamped { .. } => "underdamped",
            DampingRegime::Critical => "critical",
            DampingRegime::Overdamped { .. } => "overdamped",
        }
    }
}

/// Relative width of the band around `ω₀ = γ/2` classified as critical.
pub const CRITICAL_TOLERANCE: f64 = 1e-12;

pub fn classify_regime(setup: &PhysicalSetup) -> Result<DampingRegime> {
    let omega0 = setup.require_omega0()?;
    let half_gamma = 0.5 * setup.gamma();
    if (omega0 - half_gamma).abs() <= CRITICAL_TOLERANCE * omega0.max(half_gamma) {
        return Ok(DampingRegime::Critical);
    }
    if omega0 > half_gamma {
        let omega = ((omega0 - half_gamma) * (omega0 + half_gamma)).sqrt();
        Ok(DampingRegime::Underdamped { omega, phase: (half_gamma / omega).atan() })
    } else {
        let rate = ((half_gamma - omega0) * (half_gamma + omega0)).sqrt();
        Ok(DampingRegime::Overdamped { rate })
    }
}

/// Contracted time `τ = (1 - e^{-γt})/γ`, equal to `t` at `γ = 0`.
pub fn contracted_time(gamma: f64, t: f64) -> f64 {
    let u = gamma * t;
    if u.abs() < 1e-8 {
        t * (1.0 - 0.5 * u)
    } else {
        -(-u).exp_m1() / gamma
    }
}

/// `(γt - 1 + e^{-γt})/γ²`, the displacement kernel of a constant force
/// under friction; equals `t²/2` at `γ = 0`.
pub fn ramp_time(gamma: f64, t: f64) -> f64 {
    let u = gamma * t;
    if u.abs() < 0.1 {
        // Σ_{k≥2} (-u)^k / k!, divided by γ² = t² Σ (-u)^{k-2}/k!
        let mut term = 0.5;
        let mut sum = 0.0;
        for k in 2..40 {
            sum += term;
            term *= -u / (k as f64 + 1.0);
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        t * t * sum
    } else {
        ((-u).exp_m1() + u) / (gamma * gamma)
    }
}
