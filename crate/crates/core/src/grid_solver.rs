//! Strang split-step Fourier propagation of
//! `iħ∂ₜΨ = -(ħ²/2m) e^{-γt} ∂ₓ²Ψ + V(x) e^{γt} Ψ` on a periodic grid.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::setup::PhysicalSetup;
use crate::table::Table;

/// Relative edge amplitude allowed at either grid boundary.
pub const BOUNDARY_TOLERANCE: f64 = 1e-10;
/// Largest norm change tolerated in a single step.
pub const STEP_DRIFT_LIMIT: f64 = 1e-8;
/// Momentum-space weight allowed beyond one eighth of the Nyquist wave number.
pub const SPECTRAL_TAIL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub dt: f64,
    pub n_points: usize,
    pub x_min: f64,
    pub x_max: f64,
    /// Fraction of the domain on each side covered by the absorber; zero
    /// disables it.
    pub absorbing_margin: f64,
}

impl GridConfig {
    pub fn new(dt: f64, n_points: usize, x_min: f64, x_max: f64) -> Result<Self> {
        let cfg = Self { dt, n_points, x_min, x_max, absorbing_margin: 0.0 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_absorber(mut self, margin: f64) -> Result<Self> {
        self.absorbing_margin = margin;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::domain(format!("grid dt must be positive, got {}", self.dt)));
        }
        if self.n_points < 8 || !self.n_points.is_power_of_two() {
            return Err(Error::domain(format!("n_points must be a power of two >= 8, got {}", self.n_points)));
        }
        if !(self.x_min.is_finite() && self.x_max.is_finite() && self.x_max > self.x_min) {
            return Err(Error::domain("grid needs x_min < x_max"));
        }
        if !(0.0..=0.2).contains(&self.absorbing_margin) {
            return Err(Error::domain("absorbing margin must lie in [0, 0.2]"));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_points as f64
    }

    pub fn positions(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.n_points).map(|k| self.x_min + k as f64 * dx).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridWavefunction {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    pub psi: Vec<Complex64>,
    pub t: f64,
}

impl GridWavefunction {
    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_points as f64
    }

    pub fn x(&self, k: usize) -> f64 {
        self.x_min + k as f64 * self.dx()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.x(k)).collect()
    }

    pub fn density(&self) -> Vec<f64> {
        self.psi.iter().map(|z| z.norm_sqr()).collect()
    }

    /// `∫|ψ|² dx` by the trapezoidal rule on the periodic grid.
    pub fn norm(&self) -> f64 {
        self.psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.dx()
    }

    /// Largest edge amplitude relative to the peak amplitude.
    pub fn edge_ratio(&self) -> f64 {
        let peak = self.psi.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return f64::INFINITY;
        }
        let edge = self.psi[0].norm().max(self.psi[self.n_points - 1].norm());
        edge / peak
    }

    pub fn check_boundary(&self) -> Result<()> {
        let ratio = self.edge_ratio();
        if ratio >= BOUNDARY_TOLERANCE {
            return Err(Error::Boundary { t: self.t, ratio });
        }
        Ok(())
    }

    /// Snapshot table with columns `x re_psi im_psi rho`.
    pub fn to_table(&self, setup: &PhysicalSetup, dt: f64) -> Table {
        let mut table = Table::new(["x", "re_psi", "im_psi", "rho"])
            .with_meta("t", self.t)
            .with_meta("mass", setup.mass())
            .with_meta("hbar", setup.hbar())
            .with_meta("gamma", setup.gamma())
            .with_meta("potential", format!("{:?}", setup.potential()))
            .with_meta("n_points", self.n_points)
            .with_meta("x_min", self.x_min)
            .with_meta("x_max", self.x_max)
            .with_meta("dt", dt);
        for (k, z) in self.psi.iter().enumerate() {
            table.push_row(vec![self.x(k), z.re, z.im, z.norm_sqr()]);
        }
        table
    }

    /// Rebuilds a snapshot written by [`GridWavefunction::to_table`].
    pub fn from_table(table: &Table) -> Result<Self> {
        let bad = |msg: &str| Error::domain(format!("snapshot table: {msg}"));
        let meta = |key: &str| -> Result<f64> {
            table
                .meta_value(key)
                .ok_or_else(|| bad(&format!("missing {key}")))?
                .parse::<f64>()
                .map_err(|_| bad(&format!("bad {key}")))
        };
        let (re, im) = match (table.column("re_psi"), table.column("im_psi")) {
            (Some(re), Some(im)) => (re, im),
            _ => return Err(bad("missing re_psi/im_psi columns")),
        };
        let n_points = re.len();
        if n_points < 8 || !n_points.is_power_of_two() {
            return Err(bad("row count is not a power of two"));
        }
        let (x_min, x_max, t) = (meta("x_min")?, meta("x_max")?, meta("t")?);
        if !(x_max > x_min) {
            return Err(bad("x_max <= x_min"));
        }
        let psi = re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect();
        Ok(Self { x_min, x_max, n_points, psi, t })
    }
}

/// FFT plans and wave numbers for one grid size.
#[derive(Clone)]
pub struct Spectral {
    n: usize,
    dx: f64,
    k: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("n", &self.n).field("dx", &self.dx).finish()
    }
}

impl Spectral {
    pub fn new(n: usize, dx: f64) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let dk = 2.0 * PI / (n as f64 * dx);
        let k = (0..n)
            .map(|j| {
                let j = j as i64;
                let n = n as i64;
                (if j < n / 2 { j } else { j - n }) as f64 * dk
            })
            .collect();
        Self { n, dx, k, forward, inverse }
    }

    pub fn for_state(state: &GridWavefunction) -> Self {
        Self::new(state.n_points, state.dx())
    }

    pub fn wave_numbers(&self) -> &[f64] {
        &self.k
    }

    pub fn nyquist(&self) -> f64 {
        PI / self.dx
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.forward.process(data);
    }

    /// Inverse transform including the `1/N` factor.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.inverse.process(data);
        let s = 1.0 / self.n as f64;
        data.iter_mut().for_each(|z| *z *= s);
    }

    fn apply(&self, f: &[Complex64], order: u32) -> Vec<Complex64> {
        let mut buf = f.to_vec();
        self.forward(&mut buf);
        let nyq = self.n / 2;
        for (j, z) in buf.iter_mut().enumerate() {
            // the Nyquist mode has no well-defined odd derivative
            if j == nyq && order % 2 == 1 {
                *z = Complex64::new(0.0, 0.0);
                continue;
            }
            *z *= Complex64::i().powu(order) * self.k[j].powi(order as i32);
        }
        self.inverse(&mut buf);
        buf
    }

    pub fn derivative(&self, f: &[Complex64]) -> Vec<Complex64> {
        self.apply(f, 1)
    }

    pub fn second_derivative(&self, f: &[Complex64]) -> Vec<Complex64> {
        self.apply(f, 2)
    }

    pub fn derivative_real(&self, f: &[f64]) -> Vec<f64> {
        let z: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.derivative(&z).into_iter().map(|c| c.re).collect()
    }

    pub fn second_derivative_real(&self, f: &[f64]) -> Vec<f64> {
        let z: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.second_derivative(&z).into_iter().map(|c| c.re).collect()
    }

    /// Fraction of `Σ|ψ̂|²` carried by modes with `|k| > k_nyquist / 8`.
    pub fn spectral_tail(&self, psi: &[Complex64]) -> f64 {
        let mut buf = psi.to_vec();
        self.forward(&mut buf);
        let cut = self.nyquist() / 8.0;
        let (mut tail, mut total) = (0.0, 0.0);
        for (z, k) in buf.iter().zip(&self.k) {
            let w = z.norm_sqr();
            total += w;
            if k.abs() > cut {
                tail += w;
            }
        }
        if total == 0.0 { 0.0 } else { tail / total }
    }

    /// `⟨k²⟩` of a state by Parseval.
    pub fn mean_k2(&self, psi: &[Complex64]) -> f64 {
        let mut buf = psi.to_vec();
        self.forward(&mut buf);
        let (mut num, mut den) = (0.0, 0.0);
        for (z, k) in buf.iter().zip(&self.k) {
            num += k * k * z.norm_sqr();
            den += z.norm_sqr();
        }
        num / den
    }

    /// `⟨k⟩` of a state by Parseval.
    pub fn mean_k(&self, psi: &[Complex64]) -> f64 {
        let mut buf = psi.to_vec();
        self.forward(&mut buf);
        let nyq = self.n / 2;
        let (mut num, mut den) = (0.0, 0.0);
        for (j, (z, k)) in buf.iter().zip(&self.k).enumerate() {
            if j != nyq {
                num += k * z.norm_sqr();
            }
            den += z.norm_sqr();
        }
        num / den
    }
}

fn check_resolution(spectral: &Spectral, psi: &[Complex64]) -> Result<()> {
    let tail = spectral.spectral_tail(psi);
    if tail > SPECTRAL_TAIL_TOLERANCE {
        return Err(Error::Resolution(format!(
            "{tail:.3e} of the momentum distribution lies above k_nyquist/8 = {:.4}",
            spectral.nyquist() / 8.0
        )));
    }
    Ok(())
}

/// Samples `initial` at `t = 0`, renormalizes, and checks the boundary and
/// resolution invariants.
pub fn init_grid(cfg: &GridConfig, initial: impl Fn(f64) -> Complex64) -> Result<GridWavefunction> {
    init_grid_at(cfg, 0.0, initial)
}

pub fn init_grid_at(cfg: &GridConfig, t: f64, initial: impl Fn(f64) -> Complex64) -> Result<GridWavefunction> {
    cfg.validate()?;
    let psi: Vec<Complex64> = cfg.positions().into_iter().map(initial).collect();
    if psi.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::domain("initial wave function is not finite on the grid"));
    }
    let mut state = GridWavefunction { x_min: cfg.x_min, x_max: cfg.x_max, n_points: cfg.n_points, psi, t };
    let norm = state.norm();
    if !(norm > 0.0) {
        return Err(Error::ZeroNorm);
    }
    let s = norm.sqrt().recip();
    state.psi.iter_mut().for_each(|z| *z *= s);
    state.check_boundary()?;
    check_resolution(&Spectral::new(cfg.n_points, cfg.dx()), &state.psi)?;
    Ok(state)
}

/// Split-step propagator for one grid and setup.
#[derive(Debug, Clone)]
pub struct SplitStepper {
    setup: PhysicalSetup,
    cfg: GridConfig,
    spectral: Spectral,
    potential: Option<Vec<f64>>,
    absorber: Option<Vec<f64>>,
}

impl SplitStepper {
    pub fn new(setup: &PhysicalSetup, cfg: &GridConfig) -> Result<Self> {
        cfg.validate()?;
        let xs = cfg.positions();
        let potential = match setup.potential() {
            crate::setup::PotentialSpec::Free => None,
            _ => Some(xs.iter().map(|&x| setup.potential_at(x).value).collect()),
        };
        let absorber = (cfg.absorbing_margin > 0.0).then(|| {
            let width = cfg.absorbing_margin * (cfg.x_max - cfg.x_min);
            xs.iter()
                .map(|&x| {
                    let depth = ((cfg.x_min + width - x).max(x - (cfg.x_max - width))).max(0.0) / width;
                    (0.5 * PI * depth.min(1.0)).cos().powf(0.125)
                })
                .collect()
        });
        Ok(Self { setup: *setup, cfg: *cfg, spectral: Spectral::new(cfg.n_points, cfg.dx()), potential, absorber })
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    pub fn config(&self) -> &GridConfig {
        &self.cfg
    }

    pub fn setup(&self) -> &PhysicalSetup {
        &self.setup
    }

    /// Advances `state` by `dt` with both exponential prefactors evaluated
    /// at the step midpoint.
    pub fn step_by(&self, state: &mut GridWavefunction, dt: f64) -> Result<()> {
        if state.n_points != self.cfg.n_points || state.psi.len() != self.cfg.n_points {
            return Err(Error::domain("state does not belong to this grid"));
        }
        let (m, hbar, gamma) = (self.setup.mass(), self.setup.hbar(), self.setup.gamma());
        let mid = state.t + 0.5 * dt;
        let norm_before = if self.absorber.is_none() { state.norm() } else { 0.0 };
        let half_v: Option<Vec<Complex64>> = self.potential.as_ref().map(|v| {
            let c = -(gamma * mid).exp() * 0.5 * dt / hbar;
            v.iter().map(|&vx| Complex64::from_polar(1.0, c * vx)).collect()
        });
        if let Some(phase) = &half_v {
            state.psi.iter_mut().zip(phase).for_each(|(z, p)| *z *= p);
        }
        self.spectral.forward(&mut state.psi);
        let c = -hbar * (-gamma * mid).exp() * dt / (2.0 * m);
        for (z, k) in state.psi.iter_mut().zip(self.spectral.wave_numbers()) {
            *z *= Complex64::from_polar(1.0, c * k * k);
        }
        self.spectral.inverse(&mut state.psi);
        if let Some(phase) = &half_v {
            state.psi.iter_mut().zip(phase).for_each(|(z, p)| *z *= p);
        }
        if let Some(mask) = &self.absorber {
            state.psi.iter_mut().zip(mask).for_each(|(z, w)| *z *= w);
        }
        state.t += dt;
        if self.absorber.is_none() {
            let drift = (state.norm() - norm_before).abs();
            if !(drift <= STEP_DRIFT_LIMIT) {
                return Err(Error::Instability { t: state.t, drift });
            }
        }
        Ok(())
    }

    pub fn step(&self, state: &mut GridWavefunction) -> Result<()> {
        self.step_by(state, self.cfg.dt)
    }

    /// Takes `steps` steps, calling `observe` after each one.
    pub fn run(
        &self,
        state: &mut GridWavefunction,
        steps: usize,
        mut observe: impl FnMut(usize, &GridWavefunction) -> Result<()>,
    ) -> Result<()> {
        let t0 = state.t;
        for k in 1..=steps {
            self.step(state)?;
            state.t = t0 + k as f64 * self.cfg.dt;
            observe(k, state)?;
        }
        Ok(())
    }

    /// Boundary and resolution checks for a propagated state.
    pub fn check_state(&self, state: &GridWavefunction) -> Result<()> {
        if self.absorber.is_none() {
            state.check_boundary()?;
        }
        check_resolution(&self.spectral, &state.psi).map_err(|e| match e {
            Error::Resolution(msg) => Error::Resolution(format!("t = {}: {msg}", state.t)),
            other => other,
        })
    }
}

/// One split step built from scratch; prefer [`SplitStepper`] in loops.
pub fn split_step(state: &GridWavefunction, setup: &PhysicalSetup, dt: f64) -> Result<GridWavefunction> {
    let cfg = GridConfig::new(dt, state.n_points, state.x_min, state.x_max)?;
    let mut next = state.clone();
    SplitStepper::new(setup, &cfg)?.step(&mut next)?;
    Ok(next)
}

/// Propagates to `t_end`, returning snapshots at the steps nearest to each
/// of `record_times` (in the order given).
pub fn propagate_grid(
    state0: &GridWavefunction,
    setup: &PhysicalSetup,
    cfg: &GridConfig,
    t_end: f64,
    record_times: &[f64],
) -> Result<Vec<GridWavefunction>> {
    let stepper = SplitStepper::new(setup, cfg)?;
    let steps = ((t_end - state0.t) / cfg.dt).round().max(0.0) as usize;
    let targets: Vec<usize> = record_times
        .iter()
        .map(|&t| {
            if t < state0.t - 0.5 * cfg.dt || t > t_end + 0.5 * cfg.dt {
                Err(Error::domain(format!("record time {t} outside [{}, {t_end}]", state0.t)))
            } else {
                Ok(((t - state0.t) / cfg.dt).round().max(0.0) as usize)
            }
        })
        .collect::<Result<_>>()?;
    let mut out: Vec<Option<GridWavefunction>> = vec![None; targets.len()];
    let mut take = |k: usize, s: &GridWavefunction| -> Result<()> {
        let mut checked = false;
        for (slot, &target) in out.iter_mut().zip(&targets) {
            if target == k {
                if !checked {
                    stepper.check_state(s)?;
                    checked = true;
                }
                *slot = Some(s.clone());
            }
        }
        Ok(())
    };
    let mut state = state0.clone();
    take(0, &state)?;
    stepper.run(&mut state, steps, |k, s| take(k, s))?;
    Ok(out.into_iter().map(|s| s.expect("every target step is visited")).collect())
}
