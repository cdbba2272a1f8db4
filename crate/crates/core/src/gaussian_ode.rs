//! Gaussian ansatz `Ψ(X,t) = exp{(i/ħ)[α_t (X-X_t)² + P_t (X-X_t) + f_t]}`
//! propagated by integrating its parameter equations with classical RK4.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::setup::PhysicalSetup;

/// Magnitude beyond which propagation is aborted.
pub const OVERFLOW_LIMIT: f64 = 1e300;

/// Parameters of one Gaussian packet.
///
/// `x` and `p` are the canonical centroid; the physical momentum is
/// `p·e^{-γt}`. `action` accumulates the classical action `∫𝓛 dt`, which is
/// also contained in `f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianParams {
    pub x: f64,
    pub p: f64,
    pub alpha: Complex64,
    pub f: Complex64,
    pub t: f64,
    pub action: f64,
}

impl GaussianParams {
    /// A packet with the given shape whose `Im f` normalizes it.
    pub fn normalized(x: f64, p: f64, alpha: Complex64, t: f64, hbar: f64) -> Result<Self> {
        if !(alpha.im > 0.0) {
            return Err(Error::NonNormalizable { t, im_alpha: alpha.im });
        }
        let f = Complex64::new(0.0, 0.25 * hbar * (std::f64::consts::PI * hbar / (2.0 * alpha.im)).ln());
        Ok(Self { x, p, alpha, f, t, action: 0.0 })
    }

    pub fn physical_momentum(&self, setup: &PhysicalSetup) -> f64 {
        self.p * (-setup.gamma() * self.t).exp()
    }

    /// `Δx = sqrt(ħ / 4 Im α)`.
    pub fn dispersion(&self, hbar: f64) -> Result<f64> {
        if !(self.alpha.im > 0.0) {
            return Err(Error::NonNormalizable { t: self.t, im_alpha: self.alpha.im });
        }
        Ok((hbar / (4.0 * self.alpha.im)).sqrt())
    }

    /// Exponent `(i/ħ)[α (x-X)² + P (x-X) + f]`.
    pub fn exponent(&self, x: f64, hbar: f64) -> Complex64 {
        let d = x - self.x;
        Complex64::i() * (self.alpha * d * d + self.p * d + self.f) / hbar
    }

    pub fn psi(&self, x: f64, hbar: f64) -> Complex64 {
        self.exponent(x, hbar).exp()
    }

    /// Log of the density, `-(2/ħ)[Im α (x-X)² + Im f]`.
    pub fn log_density(&self, x: f64, hbar: f64) -> f64 {
        let d = x - self.x;
        -2.0 * (self.alpha.im * d * d + self.f.im) / hbar
    }

    /// Real phase `S = Re α (x-X)² + P (x-X) + Re f`.
    pub fn phase(&self, x: f64) -> f64 {
        let d = x - self.x;
        self.alpha.re * d * d + self.p * d + self.f.re
    }

    /// `∂ₓS = P + 2 Re α (x - X)`.
    pub fn phase_gradient(&self, x: f64) -> f64 {
        self.p + 2.0 * self.alpha.re * (x - self.x)
    }
}

/// Time derivatives of every field of [`GaussianParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnsatzRates {
    pub x: f64,
    pub p: f64,
    pub alpha: Complex64,
    pub f: Complex64,
    pub action: f64,
}

/// Right-hand side of the coupled centroid/shape equations.
pub fn ansatz_derivatives(state: &GaussianParams, setup: &PhysicalSetup) -> AnsatzRates {
    let m = setup.mass();
    let decay = (-setup.gamma() * state.t).exp();
    let growth = (setup.gamma() * state.t).exp();
    let v = setup.potential_at(state.x);
    let lagrangian = state.p * state.p / (2.0 * m) * decay - v.value * growth;
    AnsatzRates {
        x: state.p / m * decay,
        p: -v.slope * growth,
        alpha: -2.0 * state.alpha * state.alpha / m * decay - 0.5 * v.curvature * growth,
        f: Complex64::i() * setup.hbar() * state.alpha / m * decay + lagrangian,
        action: lagrangian,
    }
}

fn advance(s: &GaussianParams, k: &AnsatzRates, h: f64) -> GaussianParams {
    GaussianParams {
        x: s.x + h * k.x,
        p: s.p + h * k.p,
        alpha: s.alpha + k.alpha * h,
        f: s.f + k.f * h,
        t: s.t + h,
        action: s.action + h * k.action,
    }
}

/// One classical RK4 step. The `e^{±γt}` factors are evaluated at the exact
/// stage times.
pub fn rk4_step(state: &GaussianParams, setup: &PhysicalSetup, dt: f64) -> Result<GaussianParams> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::domain(format!("time step must be positive, got {dt}")));
    }
    let k1 = ansatz_derivatives(state, setup);
    let k2 = ansatz_derivatives(&advance(state, &k1, 0.5 * dt), setup);
    let k3 = ansatz_derivatives(&advance(state, &k2, 0.5 * dt), setup);
    let k4 = ansatz_derivatives(&advance(state, &k3, dt), setup);
    let w = dt / 6.0;
    let next = GaussianParams {
        x: state.x + w * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
        p: state.p + w * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p),
        alpha: state.alpha + (k1.alpha + 2.0 * k2.alpha + 2.0 * k3.alpha + k4.alpha) * w,
        f: state.f + (k1.f + 2.0 * k2.f + 2.0 * k3.f + k4.f) * w,
        t: state.t + dt,
        action: state.action + w * (k1.action + 2.0 * k2.action + 2.0 * k3.action + k4.action),
    };
    guard_overflow(&next, setup)?;
    if !(next.alpha.im > 0.0) {
        return Err(Error::NonNormalizable { t: next.t, im_alpha: next.alpha.im });
    }
    Ok(next)
}

fn guard_overflow(s: &GaussianParams, setup: &PhysicalSetup) -> Result<()> {
    let checks = [
        ("|alpha|", s.alpha.norm()),
        ("exp(gamma t)", (setup.gamma() * s.t).exp()),
        ("|Re f|", s.f.re.abs()),
    ];
    for (quantity, value) in checks {
        if !(value <= OVERFLOW_LIMIT) {
            return Err(Error::Overflow { t: s.t, quantity, value });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeConfig {
    pub dt: f64,
    pub t_end: f64,
    pub record_stride: usize,
}

impl OdeConfig {
    pub const DEFAULT_DT: f64 = 1e-3;

    pub fn new(dt: f64, t_end: f64, record_stride: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) || !(t_end > 0.0 && t_end.is_finite()) {
            return Err(Error::domain("dt and t_end must be positive"));
        }
        if dt > t_end {
            return Err(Error::domain(format!("dt = {dt} exceeds t_end = {t_end}")));
        }
        if record_stride == 0 {
            return Err(Error::domain("record stride must be at least 1"));
        }
        Ok(Self { dt, t_end, record_stride })
    }

    /// Number of whole steps that fit in `[0, t_end]`.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt * (1.0 + 1e-12)).floor() as usize
    }
}

/// Integrates from `state0` and records every `record_stride`-th state,
/// starting with `state0` itself.
pub fn propagate(state0: &GaussianParams, setup: &PhysicalSetup, cfg: &OdeConfig) -> Result<Vec<GaussianParams>> {
    if !(state0.alpha.im > 0.0) {
        return Err(Error::NonNormalizable { t: state0.t, im_alpha: state0.alpha.im });
    }
    let steps = cfg.steps();
    let mut out = Vec::with_capacity(steps / cfg.record_stride + 1);
    out.push(*state0);
    let mut s = *state0;
    for k in 1..=steps {
        s = rk4_step(&s, setup, cfg.dt)?;
        // re-anchor the clock to avoid accumulating dt roundoff
        s.t = state0.t + k as f64 * cfg.dt;
        if k % cfg.record_stride == 0 {
            out.push(s);
        }
    }
    Ok(out)
}

/// Gaussian of width `sigma0` centered at `x0` with mean momentum `p0`.
pub fn initial_packet(x0: f64, p0: f64, sigma0: f64, setup: &PhysicalSetup) -> Result<GaussianParams> {
    if !(sigma0 > 0.0 && sigma0.is_finite()) {
        return Err(Error::domain(format!("sigma0 must be positive, got {sigma0}")));
    }
    let hbar = setup.hbar();
    Ok(GaussianParams {
        x: x0,
        p: p0,
        alpha: Complex64::new(0.0, hbar / (4.0 * sigma0 * sigma0)),
        f: Complex64::new(0.0, 0.25 * hbar * (2.0 * std::f64::consts::PI * sigma0 * sigma0).ln()),
        t: 0.0,
        action: 0.0,
    })
}

/// A recorded ODE run that can be queried at any time inside its span.
///
/// Off-record times are reached by one exact RK4 sub-step from the
/// preceding record, so no interpolation error is introduced.
#[derive(Debug, Clone)]
pub struct OdeTrack {
    setup: PhysicalSetup,
    records: Vec<GaussianParams>,
    spacing: f64,
}

impl OdeTrack {
    pub fn run(state0: &GaussianParams, setup: &PhysicalSetup, dt: f64, t_end: f64) -> Result<Self> {
        let cfg = OdeConfig::new(dt, t_end, 1)?;
        let records = propagate(state0, setup, &cfg)?;
        Ok(Self { setup: *setup, records, spacing: dt })
    }

    pub fn records(&self) -> &[GaussianParams] {
        &self.records
    }

    pub fn setup(&self) -> &PhysicalSetup {
        &self.setup
    }

    pub fn t_start(&self) -> f64 {
        self.records[0].t
    }

    pub fn t_end(&self) -> f64 {
        self.records[self.records.len() - 1].t
    }

    pub fn at(&self, t: f64) -> Result<GaussianParams> {
        let t0 = self.t_start();
        let span = self.t_end() - t0;
        let rel = t - t0;
        if rel < -1e-9 * self.spacing || rel > span + 1e-9 * self.spacing {
            return Err(Error::domain(format!("t = {t} outside recorded span [{t0}, {}]", self.t_end())));
        }
        let idx = ((rel / self.spacing).floor().max(0.0) as usize).min(self.records.len() - 1);
        let rec = self.records[idx];
        let h = t - rec.t;
        if h.abs() <= 1e-12 * self.spacing.max(t.abs()) {
            return Ok(rec);
        }
        if h < 0.0 {
            // only reachable within roundoff of a record
            return Ok(rec);
        }
        rk4_step(&rec, &self.setup, h)
    }
}
