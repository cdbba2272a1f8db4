//! Moments, energies, quantum potential and probability current.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian_ode::GaussianParams;
use crate::grid_solver::{GridWavefunction, Spectral};
use crate::setup::{classify_regime, contracted_time, ramp_time, DampingRegime, PhysicalSetup, PotentialSpec};
use crate::table::{Table, TableError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean_x: f64,
    pub dispersion: f64,
    pub energy: f64,
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ObservableSeries {
    pub times: Vec<f64>,
    pub mean_x: Vec<f64>,
    pub dispersion: Vec<f64>,
    pub energy: Vec<f64>,
    pub norm: Vec<f64>,
}

pub const SERIES_COLUMNS: [&str; 5] = ["t", "mean_x", "dispersion", "energy", "norm"];

impl ObservableSeries {
    pub fn push(&mut self, t: f64, m: Moments) {
        self.times.push(t);
        self.mean_x.push(m.mean_x);
        self.dispersion.push(m.dispersion);
        self.energy.push(m.energy);
        self.norm.push(m.norm);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(SERIES_COLUMNS);
        for i in 0..self.len() {
            t.push_row(vec![self.times[i], self.mean_x[i], self.dispersion[i], self.energy[i], self.norm[i]]);
        }
        t
    }

    pub fn from_table(table: &Table) -> std::result::Result<Self, TableError> {
        let col = |name: &str| {
            table.column(name).ok_or_else(|| TableError::Parse { line: 0, msg: format!("missing column {name:?}") })
        };
        Ok(Self {
            times: col("t")?,
            mean_x: col("mean_x")?,
            dispersion: col("dispersion")?,
            energy: col("energy")?,
            norm: col("norm")?,
        })
    }
}

/// `(⟨x⟩, Δx, Ē)` of a Gaussian, with
/// `Ē = E_t + (ħ/2m)(|α|²/Im α)e^{-2γt} + ħV″/(8 Im α)`.
pub fn gaussian_observables(state: &GaussianParams, setup: &PhysicalSetup) -> Result<Moments> {
    let im = state.alpha.im;
    if !(im > 0.0) {
        return Err(Error::NonNormalizable { t: state.t, im_alpha: im });
    }
    let (m, hbar) = (setup.mass(), setup.hbar());
    let p = state.physical_momentum(setup);
    let v = setup.potential_at(state.x);
    let classical = p * p / (2.0 * m) + v.value;
    let decay = (-2.0 * setup.gamma() * state.t).exp();
    let energy = classical + hbar / (2.0 * m) * state.alpha.norm_sqr() / im * decay + hbar * v.curvature / (8.0 * im);
    Ok(Moments { mean_x: state.x, dispersion: (hbar / (4.0 * im)).sqrt(), energy, norm: 1.0 })
}

/// Moments of `ψ = Σ ψ_j` for Gaussian terms, from exact Gaussian
/// integrals. `norm` is the raw `∫|ψ|²`; the other moments are normalized
/// by it. Exact even where interference fringes are far finer than any
/// quadrature grid.
pub fn gaussian_sum_observables(terms: &[GaussianParams], setup: &PhysicalSetup) -> Result<Moments> {
    let Some(first) = terms.first() else {
        return Err(Error::domain("a Gaussian sum needs at least one term"));
    };
    let (m, hbar, t) = (setup.mass(), setup.hbar(), first.t);
    // ψ_j = exp(a x² + b x + c)
    let mut coeffs = Vec::with_capacity(terms.len());
    for s in terms {
        if !(s.alpha.im > 0.0) {
            return Err(Error::NonNormalizable { t: s.t, im_alpha: s.alpha.im });
        }
        let i = Complex64::new(0.0, 1.0 / hbar);
        coeffs.push((i * s.alpha, i * (s.p - 2.0 * s.alpha * s.x), i * (s.alpha * s.x * s.x - s.p * s.x + s.f)));
    }
    let (mut m0, mut m1, mut m2, mut kin) = (Complex64::default(), Complex64::default(), Complex64::default(), Complex64::default());
    for &(aj, bj, cj) in &coeffs {
        let (aj, bj) = (aj.conj(), bj.conj());
        for &(ak, bk, ck) in &coeffs {
            let (a, b, c) = (aj + ak, bj + bk, cj.conj() + ck);
            let mu = -b / (2.0 * a);
            let z0 = (std::f64::consts::PI / -a).sqrt() * (c - b * b / (4.0 * a)).exp();
            let (z1, z2) = (z0 * mu, z0 * (mu * mu - 1.0 / (2.0 * a)));
            m0 += z0;
            m1 += z1;
            m2 += z2;
            // conj(ψ_j′)ψ_k′ with ψ′ = (2a x + b)ψ
            kin += 4.0 * aj * ak * z2 + 2.0 * (aj * bk + bj * ak) * z1 + bj * bk * z0;
        }
    }
    let norm = m0.re;
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::ZeroNorm);
    }
    let (mean, second) = (m1.re / norm, m2.re / norm);
    let v = setup.potential_at(0.0);
    let potential = v.value + v.slope * mean + 0.5 * v.curvature * second;
    let kinetic = hbar * hbar / (2.0 * m) * kin.re / norm * (-2.0 * setup.gamma() * t).exp();
    Ok(Moments { mean_x: mean, dispersion: (second - mean * mean).max(0.0).sqrt(), energy: kinetic + potential, norm })
}

/// Mean energy of a Gaussian released with `(x0, p0, σ0)` on the ramp
/// `V = -m a x`. Written through `τ` and the ramp kernel so that `γ → 0`
/// is exact.
pub fn linear_energy(t: f64, x0: f64, p0: f64, sigma0: f64, setup: &PhysicalSetup) -> Result<f64> {
    let PotentialSpec::Linear { a } = setup.potential() else {
        return Err(Error::domain("linear_energy needs a linear potential"));
    };
    let (m, hbar, gamma) = (setup.mass(), setup.hbar(), setup.gamma());
    let tau = contracted_time(gamma, t);
    let decay = (-2.0 * gamma * t).exp();
    // (3 - 2γt - 4e^{-γt} + e^{-2γt})/γ² = τ² - 2(γt - 1 + e^{-γt})/γ²
    let drift = tau * tau - 2.0 * ramp_time(gamma, t);
    Ok(p0 * p0 / (2.0 * m) * decay - m * a * x0 - p0 * a * gamma * tau * tau
        + 0.5 * m * a * a * drift
        + hbar * hbar / (8.0 * m * sigma0 * sigma0) * decay)
}

/// Long-time line `-m a x₀ - p₀a/γ + (m a²/2γ²)(3 - 2γt)`.
pub fn linear_energy_asymptote(t: f64, x0: f64, p0: f64, setup: &PhysicalSetup) -> Result<f64> {
    let PotentialSpec::Linear { a } = setup.potential() else {
        return Err(Error::domain("linear_energy_asymptote needs a linear potential"));
    };
    let (m, gamma) = (setup.mass(), setup.gamma());
    if gamma <= 0.0 {
        return Err(Error::domain("the energy has no linear asymptote without friction"));
    }
    Ok(-m * a * x0 - p0 * a / gamma + m * a * a / (2.0 * gamma * gamma) * (3.0 - 2.0 * gamma * t))
}

/// Asymptotic `dĒ/dt = -m a²/γ` on the ramp.
pub fn linear_energy_slope(setup: &PhysicalSetup) -> Result<f64> {
    let PotentialSpec::Linear { a } = setup.potential() else {
        return Err(Error::domain("linear_energy_slope needs a linear potential"));
    };
    if setup.gamma() <= 0.0 {
        return Err(Error::domain("the energy has no linear asymptote without friction"));
    }
    Ok(-setup.mass() * a * a / setup.gamma())
}

/// Mean energy of the underdamped stationary-shape packet released at rest
/// from `x0`:
/// `½mω₀²x₀²(ω₀/Ω)²[1 + (γ/2ω₀) sin(2Ωt - φ)]e^{-γt} + ½ħω₀(ω₀/Ω)e^{-γt}`.
pub fn harmonic_energy(t: f64, x0: f64, setup: &PhysicalSetup) -> Result<f64> {
    let DampingRegime::Underdamped { omega, phase } = classify_regime(setup)? else {
        return Err(Error::Unsupported("only the underdamped coherent packet has a finite energy".into()));
    };
    let (m, hbar, gamma) = (setup.mass(), setup.hbar(), setup.gamma());
    let w0 = setup.require_omega0()?;
    let r = w0 / omega;
    let decay = (-gamma * t).exp();
    let oscillation = 1.0 + gamma / (2.0 * w0) * (2.0 * omega * t - phase).sin();
    Ok(0.5 * m * w0 * w0 * x0 * x0 * r * r * oscillation * decay + 0.5 * hbar * w0 * r * decay)
}

/// A value that may be unreliable because the density nearly vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flagged {
    pub value: f64,
    pub near_node: bool,
}

/// `Q` of a Gaussian density of width `sigma` centered at `center`:
/// `(ħ² e^{-γt}/4mσ²)[1 - (x - c)²/2σ²]`.
pub fn gaussian_quantum_potential(x: f64, center: f64, sigma: f64, t: f64, setup: &PhysicalSetup) -> f64 {
    let (m, hbar) = (setup.mass(), setup.hbar());
    let d = (x - center) / sigma;
    hbar * hbar * (-setup.gamma() * t).exp() / (4.0 * m * sigma * sigma) * (1.0 - 0.5 * d * d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantumPotentialForm {
    /// `-(ħ²/2m)(∂²ρ^{1/2}/ρ^{1/2}) e^{-γt}`.
    Amplitude,
    /// `-(ħ²/4m)[∂²ρ/ρ - ½(∂ρ/ρ)²] e^{-γt}`.
    Density,
}

/// Quantum potential of a density sampled on a periodic uniform grid, with
/// spectral derivatives. Points where `ρ < NODE_FLOOR·max ρ` are flagged.
pub fn quantum_potential(
    rho: &[f64],
    dx: f64,
    t: f64,
    setup: &PhysicalSetup,
    form: QuantumPotentialForm,
) -> Result<Vec<Flagged>> {
    if rho.len() < 8 || !rho.len().is_power_of_two() {
        return Err(Error::domain("density must be sampled on a power-of-two grid"));
    }
    let spectral = Spectral::new(rho.len(), dx);
    let (m, hbar) = (setup.mass(), setup.hbar());
    let c = hbar * hbar / m * (-setup.gamma() * t).exp();
    let floor = crate::bohm::NODE_FLOOR * rho.iter().cloned().fold(0.0, f64::max);
    let out = match form {
        QuantumPotentialForm::Amplitude => {
            let amp: Vec<f64> = rho.iter().map(|r| r.max(0.0).sqrt()).collect();
            let d2 = spectral.second_derivative_real(&amp);
            amp.iter()
                .zip(&d2)
                .zip(rho)
                .map(|((a, d2), r)| Flagged { value: -0.5 * c * d2 / a, near_node: *r <= floor })
                .collect()
        }
        QuantumPotentialForm::Density => {
            let d1 = spectral.derivative_real(rho);
            let d2 = spectral.second_derivative_real(rho);
            rho.iter()
                .zip(d1.iter().zip(&d2))
                .map(|(r, (d1, d2))| {
                    let g = d1 / r;
                    Flagged { value: -0.25 * c * (d2 / r - 0.5 * g * g), near_node: *r <= floor }
                })
                .collect()
        }
    };
    Ok(out)
}

/// Probability current `(ħ/m) Im(ψ* ∂ₓψ) e^{-γt}` at every grid point.
pub fn current_density(state: &GridWavefunction, setup: &PhysicalSetup) -> Vec<f64> {
    current_density_with(&Spectral::for_state(state), state, setup)
}

fn current_density_with(spectral: &Spectral, state: &GridWavefunction, setup: &PhysicalSetup) -> Vec<f64> {
    let dpsi = spectral.derivative(&state.psi);
    let c = setup.hbar() / setup.mass() * (-setup.gamma() * state.t).exp();
    state.psi.iter().zip(&dpsi).map(|(p, d)| c * (p.conj() * d).im).collect()
}

/// Moments of a grid state by trapezoidal quadrature, normalized by the
/// grid norm. `Ē = e^{-2γt}⟨P²⟩/2m + ⟨V⟩` with `⟨P²⟩ = ħ²⟨k²⟩` from the
/// spectrum.
pub fn grid_observables(state: &GridWavefunction, setup: &PhysicalSetup) -> Result<Moments> {
    grid_observables_with(&Spectral::for_state(state), state, setup)
}

pub fn grid_observables_with(spectral: &Spectral, state: &GridWavefunction, setup: &PhysicalSetup) -> Result<Moments> {
    let dx = state.dx();
    let norm = state.norm();
    if !(norm > 0.0) {
        return Err(Error::ZeroNorm);
    }
    let (mut s1, mut s2, mut sv) = (0.0, 0.0, 0.0);
    for (k, z) in state.psi.iter().enumerate() {
        let x = state.x(k);
        let r = z.norm_sqr();
        s1 += x * r;
        s2 += x * x * r;
        if !matches!(setup.potential(), PotentialSpec::Free) {
            sv += setup.potential_at(x).value * r;
        }
    }
    let (s1, s2, sv) = (s1 * dx / norm, s2 * dx / norm, sv * dx / norm);
    let var = (s2 - s1 * s1).max(0.0);
    let hbar = setup.hbar();
    let kinetic = hbar * hbar * spectral.mean_k2(&state.psi) / (2.0 * setup.mass());
    let energy = (-2.0 * setup.gamma() * state.t).exp() * kinetic + sv;
    Ok(Moments { mean_x: s1, dispersion: var.sqrt(), energy, norm })
}

/// Canonical mean momentum `ħ⟨k⟩` of a grid state.
pub fn grid_mean_momentum(state: &GridWavefunction, setup: &PhysicalSetup) -> f64 {
    setup.hbar() * Spectral::for_state(state).mean_k(&state.psi)
}

/// Discrete continuity check between two states one step `dt` apart:
/// returns `(max |Δρ/dt + ∂ₓ𝓙̄|, max |Δρ/dt|)` with `𝓙̄` the mean of the
/// currents at both ends.
pub fn continuity_residual(before: &GridWavefunction, after: &GridWavefunction, setup: &PhysicalSetup) -> Result<(f64, f64)> {
    if before.n_points != after.n_points || before.x_min != after.x_min || before.x_max != after.x_max {
        return Err(Error::domain("states live on different grids"));
    }
    let dt = after.t - before.t;
    if !(dt > 0.0) {
        return Err(Error::domain("states must be in time order"));
    }
    let spectral = Spectral::for_state(before);
    let j0 = current_density_with(&spectral, before, setup);
    let j1 = current_density_with(&spectral, after, setup);
    let mean: Vec<f64> = j0.iter().zip(&j1).map(|(a, b)| 0.5 * (a + b)).collect();
    let div = spectral.derivative_real(&mean);
    let (mut resid, mut rate) = (0.0f64, 0.0f64);
    for k in 0..before.n_points {
        let drho = (after.psi[k].norm_sqr() - before.psi[k].norm_sqr()) / dt;
        rate = rate.max(drho.abs());
        resid = resid.max((drho + div[k]).abs());
    }
    Ok((resid, rate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::{coherent_params, ClosedFormPacket, PacketLaw};
    use crate::gaussian_ode::initial_packet;
    use crate::grid_solver::{init_grid, GridConfig};

    const W0: f64 = 0.62832;

    fn free(gamma: f64) -> PhysicalSetup {
        PhysicalSetup::natural(gamma, PotentialSpec::Free).unwrap()
    }

    fn osc(gamma: f64) -> PhysicalSetup {
        PhysicalSetup::natural(gamma, PotentialSpec::Harmonic { omega0: W0 }).unwrap()
    }

    fn ramp(gamma: f64) -> PhysicalSetup {
        PhysicalSetup::natural(gamma, PotentialSpec::Linear { a: 0.25 }).unwrap()
    }

    #[test]
    fn gaussian_sum_reduces_to_single_packet() {
        let setup = osc(0.3 * W0);
        let p = ClosedFormPacket::new(PacketLaw::Harmonic { x0: 5.0, p0: 1.0, alpha0: Complex64::new(0.2, 0.4) }, &setup).unwrap();
        for t in [0.0, 3.0, 11.0] {
            let s = p.at(t).unwrap();
            let (one, sum) = (gaussian_observables(&s, &setup).unwrap(), gaussian_sum_observables(&[s], &setup).unwrap());
            assert!((one.mean_x - sum.mean_x).abs() < 1e-12);
            assert!((one.dispersion - sum.dispersion).abs() < 1e-12);
            assert!((one.energy - sum.energy).abs() < 1e-12 * one.energy.abs());
            assert!((sum.norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_sum_matches_grid_quadrature() {
        for (setup, t) in [(osc(0.3 * W0), 4.0), (ramp(0.1), 2.0), (free(0.5), 1.0)] {
            let law = |x0: f64, p0: f64| match setup.potential() {
                PotentialSpec::Harmonic { .. } => PacketLaw::Harmonic { x0, p0, alpha0: Complex64::new(0.0, 0.25) },
                PotentialSpec::Linear { .. } => PacketLaw::Linear { x0, p0, sigma0: 1.0 },
                PotentialSpec::Free => PacketLaw::Free { x0, p0, sigma0: 1.0 },
            };
            let a = ClosedFormPacket::new(law(2.0, 0.5), &setup).unwrap().at(t).unwrap();
            let b = ClosedFormPacket::new(law(-1.0, -0.3), &setup).unwrap().at(t).unwrap();
            let exact = gaussian_sum_observables(&[a, b], &setup).unwrap();
            let cfg = GridConfig::new(1e-3, 2048, -20.0, 20.0).unwrap();
            let mut grid = init_grid(&cfg, |x| a.psi(x, 1.0) + b.psi(x, 1.0)).unwrap();
            grid.t = t;
            let q = grid_observables(&grid, &setup).unwrap();
            let raw: f64 = cfg.positions().iter().map(|&x| (a.psi(x, 1.0) + b.psi(x, 1.0)).norm_sqr()).sum::<f64>() * cfg.dx();
            assert!((exact.norm - raw).abs() < 1e-12);
            assert!((exact.mean_x - q.mean_x).abs() < 1e-10);
            assert!((exact.dispersion - q.dispersion).abs() < 1e-10);
            assert!((exact.energy - q.energy).abs() < 1e-9 * exact.energy.abs().max(1.0), "{} vs {}", exact.energy, q.energy);
        }
    }

    #[test]
    fn separated_packets_add_incoherently() {
        let setup = free(0.1);
        let a = initial_packet(30.0, 1.0, 1.0, &setup).unwrap();
        let b = initial_packet(-30.0, 0.0, 1.0, &setup).unwrap();
        let m = gaussian_sum_observables(&[a, b], &setup).unwrap();
        assert!((m.norm - 2.0).abs() < 1e-12, "{m:?}");
        assert!((m.mean_x - 0.0).abs() < 1e-12);
        assert!((m.dispersion - (900.0f64 + 1.0).sqrt()).abs() < 1e-10);
        assert!((m.energy - (0.5 * 0.5 + 0.125)).abs() < 1e-12);
        assert!(matches!(gaussian_sum_observables(&[], &setup), Err(Error::Domain(_))));
    }

    #[test]
    fn launch_energies() {
        let e = gaussian_observables(&initial_packet(0.0, 2.5, 1.0, &free(0.5)).unwrap(), &free(0.5)).unwrap();
        assert!((e.energy - 3.25).abs() < 1e-15);
        let setup = osc(0.3 * W0);
        let sigma = (1.0 / (2.0 * W0)).sqrt();
        let e = gaussian_observables(&initial_packet(5.0, 0.0, sigma, &setup).unwrap(), &setup).unwrap();
        assert!((e.energy - (0.5 * W0 * W0 * 25.0 + 0.5 * W0)).abs() < 1e-14);
        assert!((e.energy - 5.249).abs() < 1e-3);
    }

    #[test]
    fn free_energy_decays_at_twice_gamma() {
        let setup = free(0.1);
        let p = ClosedFormPacket::new(PacketLaw::Free { x0: 0.0, p0: 2.5, sigma0: 1.0 }, &setup).unwrap();
        let e = gaussian_observables(&p.at(10.0).unwrap(), &setup).unwrap().energy;
        assert!((e - 3.25 * (-2f64).exp()).abs() < 1e-14);
        assert!((e - 0.43984).abs() < 1e-5);
    }

    #[test]
    fn linear_energy_matches_classical_plus_spread() {
        let setup = ramp(0.37);
        for t in [0.0, 0.5, 3.0, 10.0] {
            let (x, p) = crate::closed_form::linear_solution(t, 2.0, 0.8, &setup).unwrap();
            let direct = p * p / 2.0 - 0.25 * x + (-2.0 * 0.37 * t).exp() / (8.0 * 1.7 * 1.7);
            assert!((linear_energy(t, 2.0, 0.8, 1.7, &setup).unwrap() - direct).abs() < 1e-13);
        }
        let e0 = linear_energy(0.0, 50.0, 0.0, 1.0, &ramp(0.1)).unwrap();
        assert!((e0 - (-12.375)).abs() < 1e-14);
        assert!((linear_energy_slope(&ramp(0.5)).unwrap() + 0.125).abs() < 1e-15);
        // transients are below 1e-6 relative by γt = 20
        let s = ramp(0.5);
        let (exact, asym) = (linear_energy(40.0, 50.0, 0.0, 1.0, &s).unwrap(), linear_energy_asymptote(40.0, 50.0, 0.0, &s).unwrap());
        assert!((exact - asym).abs() < 1e-6 * exact.abs());
        // frictionless limit conserves p₀²/2m - m a x₀ + ħ²/8mσ₀²
        let e = linear_energy(7.0, 1.0, 0.6, 1.0, &ramp(0.0)).unwrap();
        assert!((e - (0.18 - 0.25 + 0.125)).abs() < 1e-14);
    }

    #[test]
    fn harmonic_energy_limits() {
        let tiny = osc(1e-9);
        let e = harmonic_energy(0.0, 5.0, &tiny).unwrap();
        assert!((e - (0.5 * W0 * W0 * 25.0 + 0.5 * W0)).abs() < 1e-7);
        let setup = osc(0.3 * W0);
        let g = 0.3 * W0;
        let t = 10.0 / g;
        let e0 = harmonic_energy(0.0, 5.0, &setup).unwrap();
        let ratio = harmonic_energy(t, 5.0, &setup).unwrap() / e0;
        let r = g / (2.0 * W0);
        assert!(ratio <= (-10f64).exp() * (1.0 + r) / (1.0 - r));
        assert!(matches!(harmonic_energy(1.0, 5.0, &osc(4.0 * W0)), Err(Error::Unsupported(_))));
    }

    #[test]
    fn harmonic_energy_agrees_with_general_formula() {
        let setup = osc(0.3 * W0);
        for t in [0.0, 1.3, 4.0, 9.0, 20.0] {
            let p = coherent_params(t, 5.0, &setup).unwrap();
            let general = gaussian_observables(&p, &setup).unwrap().energy;
            assert!((general - harmonic_energy(t, 5.0, &setup).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_quantum_potential_values() {
        let setup = free(0.2);
        let q = gaussian_quantum_potential(1.0, 1.0, 0.5, 3.0, &setup);
        assert!((q - (-0.6f64).exp() / (4.0 * 0.25)).abs() < 1e-15);
        assert!(gaussian_quantum_potential(0.0, 0.0, 1.0, 1.0, &free(1e3)).abs() < 1e-300);
    }

    #[test]
    fn quantum_potential_forms_agree() {
        let setup = free(0.1);
        let cfg = GridConfig::new(1e-3, 1024, -20.0, 20.0).unwrap();
        let xs = cfg.positions();
        let sigma = 1.3;
        let rho: Vec<f64> = xs.iter().map(|x| (-(x - 0.5) * (x - 0.5) / (2.0 * sigma * sigma)).exp()).collect();
        let a = quantum_potential(&rho, cfg.dx(), 2.0, &setup, QuantumPotentialForm::Amplitude).unwrap();
        let b = quantum_potential(&rho, cfg.dx(), 2.0, &setup, QuantumPotentialForm::Density).unwrap();
        for (k, x) in xs.iter().enumerate() {
            if (x - 0.5).abs() > 4.0 * sigma {
                continue;
            }
            let exact = gaussian_quantum_potential(*x, 0.5, sigma, 2.0, &setup);
            assert!((a[k].value - exact).abs() < 1e-9 * (1.0 + exact.abs()));
            assert!((a[k].value - b[k].value).abs() < 1e-10 * (1.0 + exact.abs()));
            assert!(!a[k].near_node);
        }
    }

    #[test]
    fn current_integrates_to_mean_velocity() {
        let setup = free(0.3);
        let cfg = GridConfig::new(1e-3, 2048, -30.0, 30.0).unwrap();
        let mut s = init_grid(&cfg, |x| Complex64::from_polar((-(x * x) / 4.0).exp(), 1.7 * x + 0.1 * x * x)).unwrap();
        s.t = 2.0;
        let j: f64 = current_density(&s, &setup).iter().sum::<f64>() * s.dx();
        let p = grid_mean_momentum(&s, &setup);
        assert!((j - p * (-0.6f64).exp()).abs() < 1e-8);
        let real = init_grid(&cfg, |x| Complex64::new((-(x * x) / 4.0).exp(), 0.0)).unwrap();
        assert!(current_density(&real, &setup).iter().all(|j| j.abs() < 1e-14));
    }

    #[test]
    fn grid_launch_moments() {
        let setup = free(0.5);
        let cfg = GridConfig::new(1e-3, 4096, -40.0, 60.0).unwrap();
        let p0 = initial_packet(0.0, 2.5, 1.0, &setup).unwrap();
        let s = init_grid(&cfg, |x| p0.psi(x, 1.0)).unwrap();
        let m = grid_observables(&s, &setup).unwrap();
        assert!((m.energy - 3.25).abs() < 1e-6);
        assert!((m.dispersion - 1.0).abs() < 1e-10);
        assert!((m.norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn series_round_trip() {
        let mut s = ObservableSeries::default();
        s.push(0.0, Moments { mean_x: 1.0, dispersion: 0.5, energy: 3.25, norm: 1.0 });
        s.push(0.1, Moments { mean_x: 1.1, dispersion: 0.51, energy: 3.2, norm: 1.0 });
        let back = ObservableSeries::from_table(&Table::parse(&s.to_table().to_text()).unwrap()).unwrap();
        assert_eq!(back, s);
    }
}
