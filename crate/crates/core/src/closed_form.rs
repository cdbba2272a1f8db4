//! Exact solutions for the free packet, the linear ramp and the damped
//! harmonic oscillator.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::gaussian_ode::GaussianParams;
use crate::setup::{classify_regime, contracted_time, ramp_time, DampingRegime, PhysicalSetup, PotentialSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeSolution {
    pub x_t: f64,
    /// Physical momentum.
    pub p_t: f64,
    pub alpha_t: Complex64,
    pub sigma_t: f64,
    pub sigma_tilde_t: Complex64,
}

pub fn free_solution(t: f64, x0: f64, p0: f64, sigma0: f64, setup: &PhysicalSetup) -> FreeSolution {
    let (m, hbar, gamma) = (setup.mass(), setup.hbar(), setup.gamma());
    let tau = contracted_time(gamma, t);
    let alpha0 = Complex64::new(0.0, hbar / (4.0 * sigma0 * sigma0));
    let sigma_tilde = sigma0 * Complex64::new(1.0, hbar * tau / (2.0 * m * sigma0 * sigma0));
    FreeSolution {
        x_t: x0 + p0 / m * tau,
        p_t: p0 * (-gamma * t).exp(),
        alpha_t: alpha0 / (1.0 + 2.0 * alpha0 * tau / m),
        sigma_t: sigma_tilde.norm(),
        sigma_tilde_t: sigma_tilde,
    }
}

/// Limit width `σ₀ sqrt(1 + (ħ/2mγσ₀²)²)` of a free packet under friction.
pub fn frozen_width(sigma0: f64, setup: &PhysicalSetup) -> Result<f64> {
    if setup.gamma() <= 0.0 {
        return Err(Error::domain("the width only freezes for gamma > 0"));
    }
    let r = setup.hbar() / (2.0 * setup.mass() * setup.gamma() * sigma0 * sigma0);
    Ok(sigma0 * (1.0 + r * r).sqrt())
}

/// Centroid `(x_t, p_t)` in the ramp `V = -m a x`.
pub fn linear_solution(t: f64, x0: f64, p0: f64, setup: &PhysicalSetup) -> Result<(f64, f64)> {
    let PotentialSpec::Linear { a } = setup.potential() else {
        return Err(Error::domain("linear_solution needs a linear potential"));
    };
    let (m, gamma) = (setup.mass(), setup.gamma());
    let tau = contracted_time(gamma, t);
    Ok((
        x0 + p0 / m * tau + a * ramp_time(gamma, t),
        p0 * (-gamma * t).exp() + m * a * tau,
    ))
}

/// Long-time centroid line `x₀ + p₀/mγ - a/γ² + (a/γ) t`.
pub fn linear_asymptote(t: f64, x0: f64, p0: f64, setup: &PhysicalSetup) -> Result<f64> {
    let PotentialSpec::Linear { a } = setup.potential() else {
        return Err(Error::domain("linear_asymptote needs a linear potential"));
    };
    let gamma = setup.gamma();
    if gamma <= 0.0 {
        return Err(Error::domain("no uniform limit motion without friction"));
    }
    Ok(x0 + p0 / (setup.mass() * gamma) - a / (gamma * gamma) + a / gamma * t)
}

/// Fundamental solutions of `ÿ + γẏ + ω₀²y = 0`: `y(t) = y₀ c(t) + ẏ₀ s(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampedBasis {
    pub c: f64,
    pub s: f64,
    pub dc: f64,
    pub ds: f64,
}

impl DampedBasis {
    pub fn at(t: f64, regime: DampingRegime, setup: &PhysicalSetup) -> Result<Self> {
        let omega0 = setup.require_omega0()?;
        let hg = 0.5 * setup.gamma();
        let e = (-hg * t).exp();
        Ok(match regime {
            DampingRegime::Underdamped { omega, .. } => {
                let (sn, cs) = (omega * t).sin_cos();
                DampedBasis {
                    c: e * (cs + hg / omega * sn),
                    s: e * sn / omega,
                    dc: -e * omega0 * omega0 / omega * sn,
                    ds: e * (cs - hg / omega * sn),
                }
            }
            DampingRegime::Critical => DampedBasis {
                c: e * (1.0 + hg * t),
                s: e * t,
                dc: -e * hg * hg * t,
                ds: e * (1.0 - hg * t),
            },
            DampingRegime::Overdamped { rate } => {
                let (sh, ch) = ((rate * t).sinh(), (rate * t).cosh());
                DampedBasis {
                    c: e * (ch + hg / rate * sh),
                    s: e * sh / rate,
                    dc: -e * omega0 * omega0 / rate * sh,
                    ds: e * (ch - hg / rate * sh),
                }
            }
        })
    }
}

fn check_regime(regime: DampingRegime, setup: &PhysicalSetup) -> Result<()> {
    let actual = classify_regime(setup)?;
    if actual.name() != regime.name() || (actual.frequency() - regime.frequency()).abs() > 1e-12 * actual.frequency().max(1.0) {
        return Err(Error::domain(format!(
            "regime {} does not match setup ({})",
            regime.name(),
            actual.name()
        )));
    }
    Ok(())
}

/// Damped-oscillator centroid `(x_t, p_t)` with physical momentum.
///
/// A turning-point launch (`p0 = 0`) uses the compact phase-shifted forms;
/// other launches use the fundamental-solution combination.
pub fn harmonic_centroid(t: f64, x0: f64, p0: f64, regime: DampingRegime, setup: &PhysicalSetup) -> Result<(f64, f64)> {
    check_regime(regime, setup)?;
    let m = setup.mass();
    let omega0 = setup.require_omega0()?;
    let hg = 0.5 * setup.gamma();
    let e = (-hg * t).exp();
    if p0 == 0.0 {
        return Ok(match regime {
            DampingRegime::Underdamped { omega, phase } => (
                omega0 / omega * x0 * e * (omega * t - phase).cos(),
                -m * omega0 * omega0 / omega * x0 * e * (omega * t).sin(),
            ),
            DampingRegime::Critical => (x0 * (1.0 + hg * t) * e, -m * x0 * hg * hg * t * e),
            DampingRegime::Overdamped { rate } => (
                x0 * e * ((rate * t).cosh() + hg / rate * (rate * t).sinh()),
                -m * omega0 * omega0 / rate * x0 * e * (rate * t).sinh(),
            ),
        });
    }
    let b = DampedBasis::at(t, regime, setup)?;
    let v0 = p0 / m;
    Ok((x0 * b.c + v0 * b.s, m * (x0 * b.dc + v0 * b.ds)))
}

/// Riccati shape variable `g_t = α_t e^{-γt}` with its fixed points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicShapeState {
    pub g_t: Complex64,
    pub g_plus: Complex64,
    pub g_minus: Complex64,
    /// `sqrt((γ/2)² - ω₀²)`, principal branch.
    pub beta: Complex64,
}

/// Roots `g±` of `g² + (mγ/2) g + (mω₀/2)² = 0` and `β`.
pub fn riccati_roots(setup: &PhysicalSetup) -> Result<(Complex64, Complex64, Complex64)> {
    let omega0 = setup.require_omega0()?;
    let hg = 0.5 * setup.gamma();
    let half_m = 0.5 * setup.mass();
    let beta = Complex64::new((hg - omega0) * (hg + omega0), 0.0).sqrt();
    Ok((half_m * (beta - hg), half_m * (-beta - hg), beta))
}

/// Evolves `g` from `g0` to time `t`.
pub fn harmonic_g(t: f64, g0: Complex64, setup: &PhysicalSetup) -> Result<HarmonicShapeState> {
    let regime = classify_regime(setup)?;
    let (g_plus, g_minus, beta) = riccati_roots(setup)?;
    let m = setup.mass();
    let g_t = match regime {
        DampingRegime::Critical => {
            let gs = Complex64::new(-0.25 * m * setup.gamma(), 0.0);
            let den = 1.0 + (g0 - gs) * (2.0 * t / m);
            if den.norm() < 1e-300 {
                return Err(Error::SingularState { pole_time: t });
            }
            gs + (g0 - gs) / den
        }
        _ => {
            // divided through by e^{βt} so nothing overflows for Re β ≥ 0;
            // written as g₊ + δ so Im g survives when g₊ is real and δ tiny
            let decay = (-2.0 * beta * t).exp();
            let den = (g0 - g_minus) - (g0 - g_plus) * decay;
            if den.norm() < 1e-300 {
                return Err(Error::SingularState { pole_time: t });
            }
            g_plus + (g_plus - g_minus) * (g0 - g_plus) * decay / den
        }
    };
    if !(g_t.re.is_finite() && g_t.im.is_finite()) {
        return Err(Error::SingularState { pole_time: t });
    }
    Ok(HarmonicShapeState { g_t, g_plus, g_minus, beta })
}

/// Earliest `t ≥ 0` at which the Riccati flow started at `g0` diverges.
pub fn riccati_pole_time(g0: Complex64, setup: &PhysicalSetup) -> Result<Option<f64>> {
    let regime = classify_regime(setup)?;
    let (g_plus, g_minus, _) = riccati_roots(setup)?;
    let m = setup.mass();
    Ok(match regime {
        DampingRegime::Critical => {
            let d = g0 - Complex64::new(-0.25 * m * setup.gamma(), 0.0);
            if d.im.abs() <= 1e-14 * d.norm() && d.re < 0.0 {
                Some(-m / (2.0 * d.re))
            } else {
                None
            }
        }
        DampingRegime::Underdamped { omega, .. } => {
            if (g0 - g_minus).norm() == 0.0 {
                return Ok(None);
            }
            let r = (g0 - g_plus) / (g0 - g_minus);
            if (r.norm() - 1.0).abs() > 1e-12 {
                None
            } else {
                let mut t = r.arg() / (2.0 * omega);
                if t < 0.0 {
                    t += PI / omega;
                }
                Some(t)
            }
        }
        DampingRegime::Overdamped { rate } => {
            if (g0 - g_minus).norm() == 0.0 {
                return Ok(None);
            }
            let r = (g0 - g_plus) / (g0 - g_minus);
            if r.im.abs() > 1e-12 * r.norm() || r.re < 1.0 {
                None
            } else {
                Some(r.re.ln() / (2.0 * rate))
            }
        }
    })
}

/// The `ġ = 0` shape law of one damping regime: `α_t = g e^{γt}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryShape {
    pub regime: DampingRegime,
    pub g: Complex64,
    /// `false` in the critical and overdamped regimes, where `α` is real.
    pub normalizable: bool,
    f0: Complex64,
    f_rate: Complex64,
    gamma: f64,
    hbar: f64,
}

impl StationaryShape {
    pub fn alpha(&self, t: f64) -> Complex64 {
        self.g * (self.gamma * t).exp()
    }

    /// `f_t` without the classical action. In the non-normalizable regimes
    /// the free constant `f₀` is set to zero.
    pub fn f(&self, t: f64) -> Complex64 {
        self.f0 + self.f_rate * t
    }

    /// `σ_t = sqrt(ħ / 4 Im α_t)`, `None` when the state has no envelope.
    pub fn width(&self, t: f64) -> Option<f64> {
        let im = self.alpha(t).im;
        (self.normalizable && im > 0.0).then(|| (self.hbar / (4.0 * im)).sqrt())
    }
}

pub fn stationary_alpha(regime: DampingRegime, setup: &PhysicalSetup) -> Result<StationaryShape> {
    check_regime(regime, setup)?;
    let (m, hbar, gamma) = (setup.mass(), setup.hbar(), setup.gamma());
    let (g, normalizable, f0) = match regime {
        DampingRegime::Underdamped { omega, .. } => {
            let g = Complex64::new(-0.25 * m * gamma, 0.5 * m * omega);
            (g, true, Complex64::new(0.0, 0.25 * hbar * (PI * hbar / (m * omega)).ln()))
        }
        DampingRegime::Critical => (Complex64::new(-0.25 * m * gamma, 0.0), false, Complex64::new(0.0, 0.0)),
        DampingRegime::Overdamped { .. } => (riccati_roots(setup)?.0, false, Complex64::new(0.0, 0.0)),
    };
    // ḟ = iħ g / m for a constant g
    let f_rate = Complex64::i() * hbar * g / m;
    Ok(StationaryShape { regime, g, normalizable, f0, f_rate, gamma, hbar })
}

/// Highest Hermite order accepted by [`hermite`] and [`quasi_eigenstate`].
pub const MAX_HERMITE_ORDER: usize = 50;

/// Physicists' Hermite polynomial `H_n(x)` by the three-term recurrence.
pub fn hermite(n: usize, x: f64) -> Result<f64> {
    if n > MAX_HERMITE_ORDER {
        return Err(Error::domain(format!("Hermite order {n} above {MAX_HERMITE_ORDER}")));
    }
    let (mut prev, mut cur) = (1.0, 2.0 * x);
    if n == 0 {
        return Ok(prev);
    }
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// `H_n(ξ) e^{-ξ²/2} / sqrt(2ⁿ n! √π)`, via the normalized recurrence so
/// large `ξ` does not overflow.
fn hermite_function(n: usize, xi: f64) -> f64 {
    let mut prev = PI.powf(-0.25) * (-0.5 * xi * xi).exp();
    if n == 0 {
        return prev;
    }
    let mut cur = 2f64.sqrt() * xi * prev;
    for k in 1..n {
        let k = k as f64;
        let next = (2.0 / (k + 1.0)).sqrt() * xi * cur - (k / (k + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Dissipative oscillator quasi-eigenstate `Φ_n(x, t)`, normalized to one
/// at every `t`.
pub fn quasi_eigenstate(n: usize, x: f64, t: f64, setup: &PhysicalSetup) -> Result<Complex64> {
    if n > MAX_HERMITE_ORDER {
        return Err(Error::domain(format!("Hermite order {n} above {MAX_HERMITE_ORDER}")));
    }
    let DampingRegime::Underdamped { omega, .. } = classify_regime(setup)? else {
        return Err(Error::domain("quasi-eigenstates need omega0 > gamma/2"));
    };
    let (m, hbar, gamma) = (setup.mass(), setup.hbar(), setup.gamma());
    let growth = (gamma * t).exp();
    let scale = (m * omega / hbar).sqrt();
    let xi = scale * growth.sqrt() * x;
    let amplitude = scale.sqrt() * (0.25 * gamma * t).exp() * hermite_function(n, xi);
    let phase = -(n as f64 + 0.5) * omega * t - 0.25 * m * gamma / hbar * growth * x * x;
    Ok(Complex64::from_polar(amplitude, phase))
}

/// Parameters of the coherent packet released at the turning point `x0`:
/// frictionless coherent state at `γ = 0`, stationary-shape packet for
/// `0 < γ < 2ω₀`. The classical-action phase is omitted.
pub fn coherent_params(t: f64, x0: f64, setup: &PhysicalSetup) -> Result<GaussianParams> {
    let regime = classify_regime(setup)?;
    let shape = stationary_alpha(regime, setup)?;
    if !shape.normalizable {
        return Err(Error::NonNormalizable { t, im_alpha: shape.alpha(t).im });
    }
    let (x_t, p_t) = harmonic_centroid(t, x0, 0.0, regime, setup)?;
    Ok(GaussianParams {
        x: x_t,
        p: p_t * setup.growth(t),
        alpha: shape.alpha(t),
        f: shape.f(t),
        t,
        action: 0.0,
    })
}

pub fn coherent_packet(x: f64, t: f64, x0: f64, setup: &PhysicalSetup) -> Result<Complex64> {
    Ok(coherent_params(t, x0, setup)?.psi(x, setup.hbar()))
}

/// Single-packet closed-form laws usable as a parameter source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PacketLaw {
    Free { x0: f64, p0: f64, sigma0: f64 },
    Linear { x0: f64, p0: f64, sigma0: f64 },
    /// Any normalizable initial shape `alpha0` in the oscillator.
    Harmonic { x0: f64, p0: f64, alpha0: Complex64 },
}

/// A closed-form packet bound to its setup.
#[derive(Debug, Clone, Copy)]
pub struct ClosedFormPacket {
    law: PacketLaw,
    setup: PhysicalSetup,
}

impl ClosedFormPacket {
    pub fn new(law: PacketLaw, setup: &PhysicalSetup) -> Result<Self> {
        match (law, setup.potential()) {
            (PacketLaw::Free { sigma0, .. }, PotentialSpec::Free)
            | (PacketLaw::Linear { sigma0, .. }, PotentialSpec::Linear { .. }) => {
                if !(sigma0 > 0.0) {
                    return Err(Error::domain("sigma0 must be positive"));
                }
            }
            (PacketLaw::Harmonic { alpha0, .. }, PotentialSpec::Harmonic { .. }) => {
                if !(alpha0.im > 0.0) {
                    return Err(Error::NonNormalizable { t: 0.0, im_alpha: alpha0.im });
                }
            }
            _ => return Err(Error::domain("packet law does not match the potential")),
        }
        Ok(Self { law, setup: *setup })
    }

    pub fn law(&self) -> PacketLaw {
        self.law
    }

    pub fn setup(&self) -> &PhysicalSetup {
        &self.setup
    }

    pub fn x0(&self) -> f64 {
        match self.law {
            PacketLaw::Free { x0, .. } | PacketLaw::Linear { x0, .. } | PacketLaw::Harmonic { x0, .. } => x0,
        }
    }

    /// Ratio `σ_t / σ₀` (equivalently `|y_t|` of the linearized Riccati
    /// flow), which maps launch offsets onto trajectory offsets.
    pub fn spreading(&self, t: f64) -> Result<f64> {
        Ok(self.riccati_y(t)?.norm())
    }

    /// `y_t` with `y₀ = 1`, `ẏ₀ = 2α₀/m`; `α_t e^{-γt} = (m/2) ẏ/y`.
    fn riccati_y(&self, t: f64) -> Result<Complex64> {
        let m = self.setup.mass();
        match self.law {
            PacketLaw::Free { sigma0, .. } | PacketLaw::Linear { sigma0, .. } => {
                let alpha0 = Complex64::new(0.0, self.setup.hbar() / (4.0 * sigma0 * sigma0));
                Ok(1.0 + 2.0 * alpha0 / m * contracted_time(self.setup.gamma(), t))
            }
            PacketLaw::Harmonic { alpha0, .. } => {
                let b = DampedBasis::at(t, classify_regime(&self.setup)?, &self.setup)?;
                Ok(b.c + 2.0 * alpha0 / m * b.s)
            }
        }
    }

    /// Full parameter set at `t`. `f` excludes the classical action except
    /// in the free case, where it is `p₀²τ/2m`; for the oscillator the
    /// logarithm in `f` is taken on its principal branch.
    pub fn at(&self, t: f64) -> Result<GaussianParams> {
        let (m, hbar, gamma) = (self.setup.mass(), self.setup.hbar(), self.setup.gamma());
        let growth = self.setup.growth(t);
        let y = self.riccati_y(t)?;
        match self.law {
            PacketLaw::Free { x0, p0, sigma0 } => {
                let s = free_solution(t, x0, p0, sigma0, &self.setup);
                let action = p0 * p0 / (2.0 * m) * contracted_time(gamma, t);
                let f = Complex64::i() * 0.25 * hbar * (2.0 * PI * s.sigma_tilde_t * s.sigma_tilde_t).ln() + action;
                Ok(GaussianParams { x: s.x_t, p: p0, alpha: s.alpha_t, f, t, action })
            }
            PacketLaw::Linear { x0, p0, sigma0 } => {
                let s = free_solution(t, x0, p0, sigma0, &self.setup);
                let (x_t, p_t) = linear_solution(t, x0, p0, &self.setup)?;
                let f = Complex64::i() * 0.25 * hbar * (2.0 * PI * s.sigma_tilde_t * s.sigma_tilde_t).ln();
                Ok(GaussianParams { x: x_t, p: p_t * growth, alpha: s.alpha_t, f, t, action: 0.0 })
            }
            PacketLaw::Harmonic { x0, p0, alpha0 } => {
                let regime = classify_regime(&self.setup)?;
                let (x_t, p_t) = harmonic_centroid(t, x0, p0, regime, &self.setup)?;
                let g = harmonic_g(t, alpha0, &self.setup)?.g_t;
                let f0 = Complex64::new(0.0, 0.25 * hbar * (PI * hbar / (2.0 * alpha0.im)).ln());
                let f = f0 + Complex64::i() * 0.5 * hbar * y.ln();
                Ok(GaussianParams { x: x_t, p: p_t * growth, alpha: g * growth, f, t, action: 0.0 })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const W0: f64 = 0.62832;

    fn free(gamma: f64) -> PhysicalSetup {
        PhysicalSetup::natural(gamma, PotentialSpec::Free).unwrap()
    }

    fn osc(gamma: f64) -> PhysicalSetup {
        PhysicalSetup::natural(gamma, PotentialSpec::Harmonic { omega0: W0 }).unwrap()
    }

    #[test]
    fn free_limits() {
        let s = free_solution(40.0, 0.0, 2.5, 1.0, &free(0.5));
        assert!((s.x_t - 5.0).abs() < 1e-6);
        assert!((s.x_t - 5.0 * (1.0 - (-20f64).exp())).abs() < 1e-14);
        assert!((frozen_width(1.0, &free(0.5)).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let nearly = free_solution(4.0, 0.0, 2.5, 1.0, &free(1e-9));
        assert!((nearly.x_t - 10.0).abs() < 1e-7);
        // α_t = iħ / 4σ₀σ̃_t
        let alt = Complex64::i() / (4.0 * 1.0 * s.sigma_tilde_t);
        assert!((s.alpha_t - alt).norm() < 1e-15);
    }

    #[test]
    fn free_frictionless_width() {
        let s = free_solution(1.0, 0.0, 0.0, 1.0, &free(0.0));
        assert!((s.sigma_t - 1.25f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn time_contraction_maps_frictionless_alpha() {
        // frictionless α(t) evaluated at τ reproduces the damped α(t)
        let alpha0 = Complex64::new(0.0, 0.25);
        for k in 0..=80 {
            let t = 0.5 * k as f64;
            let damped = free_solution(t, 0.0, 0.0, 1.0, &free(0.1)).alpha_t;
            let tau = contracted_time(0.1, t);
            let frictionless = free_solution(tau, 0.0, 0.0, 1.0, &free(0.0)).alpha_t;
            assert!((damped - frictionless).norm() < 1e-15);
            assert!((damped - alpha0 / (1.0 + 2.0 * alpha0 * tau)).norm() < 1e-15);
        }
    }

    #[test]
    fn linear_limits() {
        let setup = PhysicalSetup::natural(0.025, PotentialSpec::Linear { a: 0.25 }).unwrap();
        let (_, p) = linear_solution(2000.0, 50.0, 0.0, &setup).unwrap();
        assert!((p - 10.0).abs() < 1e-8);
        let fast = PhysicalSetup::natural(0.5, PotentialSpec::Linear { a: 0.25 }).unwrap();
        let (x1, _) = linear_solution(60.0, 50.0, 0.0, &fast).unwrap();
        let (x0, _) = linear_solution(59.0, 50.0, 0.0, &fast).unwrap();
        assert!((x1 - x0 - 0.5).abs() < 1e-10);
        assert!((x1 - linear_asymptote(60.0, 50.0, 0.0, &fast).unwrap()).abs() < 1e-10);
        assert_eq!(linear_solution(0.0, 50.0, 1.5, &fast).unwrap(), (50.0, 1.5));
        let still = PhysicalSetup::natural(0.0, PotentialSpec::Linear { a: 0.25 }).unwrap();
        let (x, p) = linear_solution(4.0, 1.0, 2.0, &still).unwrap();
        assert!((x - (1.0 + 8.0 + 2.0)).abs() < 1e-14);
        assert!((p - 3.0).abs() < 1e-15);
        assert!(linear_solution(1.0, 0.0, 0.0, &free(0.1)).is_err());
    }

    #[test]
    fn centroid_initial_conditions_all_regimes() {
        for g in [0.3 * W0, 2.0 * W0, 4.0 * W0] {
            let setup = osc(g);
            let regime = classify_regime(&setup).unwrap();
            let (x, p) = harmonic_centroid(0.0, 5.0, 0.0, regime, &setup).unwrap();
            assert!((x - 5.0).abs() < 1e-14, "{}", regime.name());
            assert_eq!(p, 0.0);
        }
    }

    #[test]
    fn compact_forms_match_fundamental_solutions() {
        for g in [0.3 * W0, 2.0 * W0, 4.0 * W0] {
            let setup = osc(g);
            let regime = classify_regime(&setup).unwrap();
            for k in 0..40 {
                let t = 0.37 * k as f64;
                let (x, p) = harmonic_centroid(t, 5.0, 0.0, regime, &setup).unwrap();
                let b = DampedBasis::at(t, regime, &setup).unwrap();
                assert!((x - 5.0 * b.c).abs() < 1e-12);
                assert!((p - 5.0 * b.dc).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn underdamped_first_zero() {
        let setup = osc(0.3 * W0);
        let regime = classify_regime(&setup).unwrap();
        let DampingRegime::Underdamped { omega, phase } = regime else { unreachable!() };
        let x = |t: f64| harmonic_centroid(t, 5.0, 0.0, regime, &setup).unwrap().0;
        // bisection on the closed form itself
        let (mut lo, mut hi) = (0.0, 0.5 * PI / omega + 1.0);
        assert!(x(lo) > 0.0 && x(hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if x(mid) > 0.0 { lo = mid } else { hi = mid }
        }
        assert!((lo - (0.5 * PI + phase) / omega).abs() < 1e-12);
    }

    #[test]
    fn critical_reference_value() {
        let setup = osc(2.0 * W0);
        let t = 2.0 / setup.gamma();
        let (x, _) = harmonic_centroid(t, 5.0, 0.0, DampingRegime::Critical, &setup).unwrap();
        assert!((x - 10.0 * (-1f64).exp()).abs() < 1e-14);
        assert!((x - 3.67879).abs() < 1e-5);
    }

    #[test]
    fn regime_mismatch_rejected() {
        let setup = osc(0.3 * W0);
        assert!(harmonic_centroid(1.0, 5.0, 0.0, DampingRegime::Critical, &setup).is_err());
        assert!(stationary_alpha(DampingRegime::Overdamped { rate: 1.0 }, &setup).is_err());
    }

    #[test]
    fn riccati_root_identities() {
        for g in [0.0, 0.3 * W0, 2.0 * W0, 4.0 * W0, 7.0] {
            let setup = osc(g);
            let (gp, gm, _) = riccati_roots(&setup).unwrap();
            assert!((gp + gm + 0.5 * g).norm() < 1e-15);
            assert!((gp * gm - 0.25 * W0 * W0).norm() < 1e-15);
        }
    }

    #[test]
    fn fixed_point_is_stationary() {
        for g in [0.3 * W0, 4.0 * W0] {
            let setup = osc(g);
            let (gp, _, _) = riccati_roots(&setup).unwrap();
            for t in [0.0, 1.0, 17.0, 40.0] {
                assert!((harmonic_g(t, gp, &setup).unwrap().g_t - gp).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn overdamped_relaxes_to_g_plus() {
        let setup = osc(4.0 * W0);
        let g0 = Complex64::new(0.0, 0.5 * W0);
        let g = harmonic_g(60.0, g0, &setup).unwrap().g_t;
        let expected = 0.5 * W0 * (3f64.sqrt() - 2.0);
        assert!((g - expected).norm() < 1e-12);
        assert!((expected + 0.08418).abs() < 1e-5);
    }

    /// Explicit RK4 on ġ = -(2/m)(g² + (mγ/2) g + (mω₀/2)²), independent of
    /// the closed form.
    fn integrate_riccati(g0: Complex64, gamma: f64, t_end: f64, dt: f64) -> Vec<Complex64> {
        let rhs = |g: Complex64| -2.0 * (g * g + 0.5 * gamma * g + 0.25 * W0 * W0);
        let mut g = g0;
        let mut out = vec![g];
        let n = (t_end / dt).round() as usize;
        for _ in 0..n {
            let k1 = rhs(g);
            let k2 = rhs(g + 0.5 * dt * k1);
            let k3 = rhs(g + 0.5 * dt * k2);
            let k4 = rhs(g + dt * k3);
            g += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            out.push(g);
        }
        out
    }

    #[test]
    fn closed_g_matches_integrated_riccati() {
        let g0 = Complex64::new(0.0, 0.5 * W0);
        for gamma in [0.3 * W0, 2.0 * W0, 4.0 * W0] {
            let setup = osc(gamma);
            let dt = 1e-3;
            let path = integrate_riccati(g0, gamma, 20.0, dt);
            for (k, g) in path.iter().enumerate().step_by(500) {
                let closed = harmonic_g(k as f64 * dt, g0, &setup).unwrap().g_t;
                assert!((closed - g).norm() < 1e-10, "gamma {gamma} t {}", k as f64 * dt);
            }
        }
    }

    #[test]
    fn underdamped_g_modulus_period() {
        let setup = osc(0.3 * W0);
        let DampingRegime::Underdamped { omega, .. } = classify_regime(&setup).unwrap() else { unreachable!() };
        let g0 = Complex64::new(0.0, 0.5 * W0);
        let period = PI / omega;
        let dt = period / 20000.0;
        let path = integrate_riccati(g0, 0.3 * W0, 2.0 * period, dt);
        for k in (0..20000).step_by(997) {
            let a = path[k].norm();
            let b = path[k + 20000].norm();
            assert!((a - b).abs() < 1e-10);
        }
        // and not periodic with half that period
        assert!((path[5000].norm() - path[15000].norm()).abs() > 1e-3);
    }

    #[test]
    fn riccati_linearization_route() {
        // g = (m/2) ẏ/y for the damped-oscillator solution with ẏ₀ = 2g₀/m
        let g0 = Complex64::new(0.1, 0.4);
        for gamma in [0.3 * W0, 2.0 * W0, 4.0 * W0] {
            let setup = osc(gamma);
            let regime = classify_regime(&setup).unwrap();
            for t in [0.3, 2.0, 9.5] {
                let b = DampedBasis::at(t, regime, &setup).unwrap();
                let y = b.c + 2.0 * g0 * b.s;
                let dy = b.dc + 2.0 * g0 * b.ds;
                let closed = harmonic_g(t, g0, &setup).unwrap().g_t;
                assert!((closed - 0.5 * dy / y).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn normalizable_data_has_no_pole() {
        for gamma in [0.3 * W0, 2.0 * W0, 4.0 * W0] {
            let setup = osc(gamma);
            for im in [0.01, 0.3, 2.0] {
                for re in [-1.0, 0.0, 0.7] {
                    assert_eq!(riccati_pole_time(Complex64::new(re, im), &setup).unwrap(), None);
                }
            }
        }
    }

    #[test]
    fn real_data_below_fixed_point_hits_pole() {
        let setup = osc(2.0 * W0);
        let gs = -0.25 * 2.0 * W0;
        let g0 = Complex64::new(gs - 0.5, 0.0);
        let pole = riccati_pole_time(g0, &setup).unwrap().unwrap();
        assert!((pole - 1.0).abs() < 1e-15);
        assert!(matches!(harmonic_g(pole, g0, &setup), Err(Error::SingularState { .. })));
        let over = osc(4.0 * W0);
        let (_, gm, _) = riccati_roots(&over).unwrap();
        let g0 = gm - 0.1;
        let pole = riccati_pole_time(g0, &over).unwrap().unwrap();
        let before = harmonic_g(0.999 * pole, g0, &over).unwrap().g_t.norm();
        assert!(before > 50.0);
    }

    #[test]
    fn stationary_shapes() {
        let tiny = osc(1e-7);
        let regime = classify_regime(&tiny).unwrap();
        let s = stationary_alpha(regime, &tiny).unwrap();
        assert!((s.alpha(0.0) - Complex64::new(0.0, 0.5 * W0)).norm() < 1e-7);

        let setup = osc(0.3 * W0);
        let regime = classify_regime(&setup).unwrap();
        let s = stationary_alpha(regime, &setup).unwrap();
        let omega = regime.frequency();
        let sigma_ref = (1.0 / (2.0 * omega)).sqrt();
        assert!((sigma_ref - 0.89715).abs() < 1e-5);
        for t in [0.0, 3.0, 12.0] {
            let expect = (-0.15 * W0 * t).exp() * sigma_ref;
            assert!((s.width(t).unwrap() - expect).abs() < 1e-14);
        }
        let crit = osc(2.0 * W0);
        let s = stationary_alpha(DampingRegime::Critical, &crit).unwrap();
        assert_eq!(s.alpha(0.0), Complex64::new(-0.5 * W0, 0.0));
        assert!(!s.normalizable);
        assert_eq!(s.width(1.0), None);
        let over = osc(4.0 * W0);
        let s = stationary_alpha(classify_regime(&over).unwrap(), &over).unwrap();
        assert!(!s.normalizable && s.g.im == 0.0);
    }

    #[test]
    fn hermite_values() {
        assert_eq!(hermite(0, 3.0).unwrap(), 1.0);
        assert_eq!(hermite(1, 3.0).unwrap(), 6.0);
        assert_eq!(hermite(3, 2.0).unwrap(), 8.0 * 8.0 - 12.0 * 2.0);
        assert!(hermite(51, 1.0).is_err());
        // normalized recurrence against the plain one
        for n in 0..8 {
            for xi in [-2.0, 0.3, 1.7] {
                let mut fact = 1.0;
                for k in 1..=n {
                    fact *= k as f64;
                }
                let plain = hermite(n, xi).unwrap() * (-0.5 * xi * xi).exp()
                    / (2f64.powi(n as i32) * fact * PI.sqrt()).sqrt();
                assert!((plain - hermite_function(n, xi)).abs() < 1e-13);
            }
        }
    }

    fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        (0..=n)
            .map(|k| {
                let w = if k == 0 || k == n { 0.5 } else { 1.0 };
                w * f(a + k as f64 * h)
            })
            .sum::<f64>()
            * h
    }

    #[test]
    fn quasi_eigenstate_norm_is_constant() {
        let setup = osc(0.3 * W0);
        for n in 0..4 {
            for t in [0.0, 2.5, 7.0, 10.6] {
                let norm = trapezoid(|x| quasi_eigenstate(n, x, t, &setup).unwrap().norm_sqr(), -12.0, 12.0, 24000);
                assert!((norm - 1.0).abs() < 1e-8, "n {n} t {t}: {norm}");
            }
        }
    }

    #[test]
    fn quasi_eigenstate_limits() {
        let setup = osc(0.3 * W0);
        for t in [0.0, 1.0, 5.0] {
            assert_eq!(quasi_eigenstate(1, 0.0, t, &setup).unwrap().norm(), 0.0);
        }
        // γ = 0 against the textbook eigenfunction
        let still = osc(0.0);
        for n in 0..4 {
            for (x, t) in [(0.4, 0.0), (-1.1, 2.0), (2.0, 7.3)] {
                let mut fact = 1.0;
                for k in 1..=n {
                    fact *= k as f64;
                }
                let norm = (2f64.powi(n as i32) * fact).sqrt().recip() * (PI / W0).powf(-0.25);
                let expect = Complex64::from_polar(
                    norm * (-0.5 * W0 * x * x).exp() * hermite(n, W0.sqrt() * x).unwrap(),
                    -(n as f64 + 0.5) * W0 * t,
                );
                assert!((quasi_eigenstate(n, x, t, &still).unwrap() - expect).norm() < 1e-14);
            }
        }
        assert!(quasi_eigenstate(0, 0.0, 0.0, &osc(2.0 * W0)).is_err());
        assert!(quasi_eigenstate(0, 0.0, 0.0, &free(0.1)).is_err());
    }

    #[test]
    fn coherent_packet_properties() {
        let still = osc(0.0);
        let half_period = PI / W0;
        // density centered at -x0 after half a period
        let rho = |x: f64| coherent_packet(x, half_period, 5.0, &still).unwrap().norm_sqr();
        assert!(rho(-5.0) > rho(-4.9) && rho(-5.0) > rho(-5.1));
        let norm0 = trapezoid(|x| coherent_packet(x, 0.0, 5.0, &still).unwrap().norm_sqr(), -10.0, 20.0, 30000);
        assert!((norm0 - 1.0).abs() < 1e-10);

        let setup = osc(0.3 * W0);
        let omega = classify_regime(&setup).unwrap().frequency();
        for t in [0.0, 4.0, 9.0] {
            let p = coherent_params(t, 5.0, &setup).unwrap();
            let expect = (-0.15 * W0 * t).exp() * (1.0 / (2.0 * omega)).sqrt();
            assert!((p.dispersion(1.0).unwrap() - expect).abs() < 1e-14);
            let norm = trapezoid(|x| coherent_packet(x, t, 5.0, &setup).unwrap().norm_sqr(), -15.0, 15.0, 60000);
            assert!((norm - 1.0).abs() < 1e-9);
        }
        assert!(matches!(coherent_packet(0.0, 1.0, 5.0, &osc(4.0 * W0)), Err(Error::NonNormalizable { .. })));
        assert!(matches!(coherent_packet(0.0, 1.0, 5.0, &osc(2.0 * W0)), Err(Error::NonNormalizable { .. })));
    }

    #[test]
    fn packet_laws_start_from_initial_state() {
        let fr = ClosedFormPacket::new(PacketLaw::Free { x0: 1.0, p0: 2.0, sigma0: 0.5 }, &free(0.3)).unwrap();
        let p = fr.at(0.0).unwrap();
        assert_eq!((p.x, p.p), (1.0, 2.0));
        assert!((p.f.im - 0.25 * (2.0 * PI * 0.25f64).ln()).abs() < 1e-15);
        let setup = osc(4.0 * W0);
        let h = ClosedFormPacket::new(
            PacketLaw::Harmonic { x0: 5.0, p0: 0.0, alpha0: Complex64::new(0.0, 0.5 * W0) },
            &setup,
        )
        .unwrap();
        let q = h.at(0.0).unwrap();
        assert!((q.alpha - Complex64::new(0.0, 0.5 * W0)).norm() < 1e-15);
        assert!(ClosedFormPacket::new(PacketLaw::Free { x0: 0.0, p0: 0.0, sigma0: 1.0 }, &setup).is_err());
    }
}
