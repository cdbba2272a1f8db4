//! Bohmian trajectories `ẋ = (∂ₓS/m) e^{-γt}` for Gaussian, two-packet and
//! grid wave functions.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal as NormalCdf};

use crate::closed_form::{harmonic_centroid, stationary_alpha, ClosedFormPacket};
use crate::error::{Error, Result};
use crate::gaussian_ode::GaussianParams;
use crate::grid_solver::{GridConfig, GridWavefunction, Spectral, SplitStepper};
use crate::setup::{classify_regime, DampingRegime, PhysicalSetup};
use crate::table::Table;

/// Relative density below which a sample counts as sitting on a node.
pub const NODE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingMode {
    /// Inverse CDF at `(i + ½)/n`.
    Quantile,
    /// I.i.d. draws from a seeded ChaCha8 stream.
    Random { seed: u64 },
}

/// Launch points distributed as `|ψ₀|² = N(x0, σ0²)`, sorted ascending.
pub fn sample_initial_positions(x0: f64, sigma0: f64, n: usize, mode: SamplingMode) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::domain("need at least one trajectory"));
    }
    if !(sigma0 > 0.0 && sigma0.is_finite() && x0.is_finite()) {
        return Err(Error::domain(format!("bad launch distribution N({x0}, {sigma0}²)")));
    }
    let mut out: Vec<f64> = match mode {
        SamplingMode::Quantile => {
            let dist = NormalCdf::new(x0, sigma0).map_err(|e| Error::domain(e.to_string()))?;
            (0..n).map(|i| dist.inverse_cdf((i as f64 + 0.5) / n as f64)).collect()
        }
        SamplingMode::Random { seed } => {
            let dist = Normal::new(x0, sigma0).map_err(|e| Error::domain(e.to_string()))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n).map(|_| dist.sample(&mut rng)).collect()
        }
    };
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Launch points distributed as a tabulated density on a uniform grid.
///
/// The CDF is the running trapezoid sum, inverted by linear interpolation.
pub fn sample_from_density(xs: &[f64], rho: &[f64], n: usize, mode: SamplingMode) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::domain("need at least one trajectory"));
    }
    if xs.len() != rho.len() || xs.len() < 2 {
        return Err(Error::domain("density table needs matching x and rho columns"));
    }
    let mut cdf = Vec::with_capacity(xs.len());
    cdf.push(0.0);
    for k in 1..xs.len() {
        let step = 0.5 * (rho[k] + rho[k - 1]).max(0.0) * (xs[k] - xs[k - 1]);
        cdf.push(cdf[k - 1] + step);
    }
    let total = *cdf.last().expect("non-empty");
    if !(total > 0.0) {
        return Err(Error::ZeroNorm);
    }
    let invert = |u: f64| {
        let target = u * total;
        let k = cdf.partition_point(|&c| c < target).clamp(1, xs.len() - 1);
        let (c0, c1) = (cdf[k - 1], cdf[k]);
        let w = if c1 > c0 { (target - c0) / (c1 - c0) } else { 0.5 };
        xs[k - 1] + w * (xs[k] - xs[k - 1])
    };
    let mut out: Vec<f64> = match mode {
        SamplingMode::Quantile => (0..n).map(|i| invert((i as f64 + 0.5) / n as f64)).collect(),
        SamplingMode::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n).map(|_| invert(rand::Rng::random::<f64>(&mut rng))).collect()
        }
    };
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// One evaluation of a velocity field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub v: f64,
    /// The local density is too small for the phase gradient to be trusted.
    pub near_node: bool,
}

impl FieldSample {
    fn regular(v: f64) -> Self {
        Self { v, near_node: false }
    }
}

/// `[P/m + (2 Re α/m)(x - X)] e^{-γt}`.
pub fn velocity_gaussian(x: f64, state: &GaussianParams, setup: &PhysicalSetup) -> f64 {
    state.phase_gradient(x) / setup.mass() * (-setup.gamma() * state.t).exp()
}

/// Velocity of `ψ₁ + ψ₂`, evaluated as `(ħ/m) Im(ψ'/ψ) e^{-γt}` with both
/// amplitudes rescaled by the larger one so that no exponential under- or
/// overflows.
pub fn velocity_superposition(x: f64, p1: &GaussianParams, p2: &GaussianParams, setup: &PhysicalSetup) -> FieldSample {
    let hbar = setup.hbar();
    let (e1, e2) = (p1.exponent(x, hbar), p2.exponent(x, hbar));
    let top = e1.re.max(e2.re);
    let a1 = (e1 - top).exp();
    let a2 = (e2 - top).exp();
    // ψᵢ'/ψᵢ = (i/ħ) ∂ₓ(exponent)
    let w1 = Complex64::i() * (2.0 * p1.alpha * (x - p1.x) + p1.p) / hbar;
    let w2 = Complex64::i() * (2.0 * p2.alpha * (x - p2.x) + p2.p) / hbar;
    let sum = a1 + a2;
    let scale = a1.norm() + a2.norm();
    let near_node = sum.norm_sqr() <= NODE_FLOOR * scale * scale;
    let v = hbar / setup.mass() * ((w1 * a1 + w2 * a2) / sum).im * (-setup.gamma() * p1.t).exp();
    FieldSample { v, near_node }
}

/// Phase-gradient velocity and node flags at every grid point.
pub fn grid_velocity_profile(state: &GridWavefunction, setup: &PhysicalSetup) -> (Vec<f64>, Vec<bool>) {
    grid_velocity_profile_with(&Spectral::for_state(state), state, setup)
}

fn grid_velocity_profile_with(
    spectral: &Spectral,
    state: &GridWavefunction,
    setup: &PhysicalSetup,
) -> (Vec<f64>, Vec<bool>) {
    let dpsi = spectral.derivative(&state.psi);
    let c = setup.hbar() / setup.mass() * (-setup.gamma() * state.t).exp();
    let peak = state.psi.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    let floor = NODE_FLOOR * peak;
    state
        .psi
        .iter()
        .zip(&dpsi)
        .map(|(psi, d)| {
            let rho = psi.norm_sqr();
            if rho <= floor || rho == 0.0 {
                (0.0, true)
            } else {
                (c * (psi.conj() * d).im / rho, false)
            }
        })
        .unzip()
}

/// Four-point cubic Lagrange interpolation on a uniform grid; `None`
/// outside the interior `[x₁, x_{n-3}]`.
fn cubic_at(values: &[f64], nodes: &[bool], x_min: f64, dx: f64, x: f64) -> Option<FieldSample> {
    let s = (x - x_min) / dx;
    if !s.is_finite() {
        return None;
    }
    let k = s.floor();
    if k < 1.0 || k + 2.0 >= values.len() as f64 {
        return None;
    }
    let k = k as usize;
    let u = s - k as f64;
    let w = [
        -u * (u - 1.0) * (u - 2.0) / 6.0,
        (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0,
        -(u + 1.0) * u * (u - 2.0) / 2.0,
        (u + 1.0) * u * (u - 1.0) / 6.0,
    ];
    let v = (0..4).map(|j| w[j] * values[k - 1 + j]).sum();
    let near_node = nodes[k] || nodes[k + 1];
    Some(FieldSample { v, near_node })
}

/// `(ħ/m) Im(∂ₓψ/ψ) e^{-γt}` at an arbitrary interior point.
pub fn velocity_grid(x: f64, state: &GridWavefunction, setup: &PhysicalSetup) -> Result<FieldSample> {
    let (v, nodes) = grid_velocity_profile(state, setup);
    cubic_at(&v, &nodes, state.x_min, state.dx(), x)
        .ok_or_else(|| Error::domain(format!("x = {x} is outside the grid interior")))
}

/// A velocity field frozen at one instant.
pub trait FieldFrame: Send + Sync {
    /// `None` when `x` lies outside the field's domain.
    fn velocity(&self, x: f64) -> Option<FieldSample>;
}

/// A time-dependent velocity field.
pub trait VelocityField: Sync {
    type Frame: FieldFrame;

    fn frame(&self, t: f64) -> Result<Self::Frame>;
}

/// Field of one Gaussian whose parameters come from any source.
pub struct GaussianField<F> {
    setup: PhysicalSetup,
    params: F,
}

impl<F: Fn(f64) -> Result<GaussianParams> + Sync> GaussianField<F> {
    pub fn new(setup: &PhysicalSetup, params: F) -> Self {
        Self { setup: *setup, params }
    }
}

pub struct GaussianFrame {
    setup: PhysicalSetup,
    params: GaussianParams,
}

impl GaussianFrame {
    pub fn params(&self) -> &GaussianParams {
        &self.params
    }
}

impl FieldFrame for GaussianFrame {
    fn velocity(&self, x: f64) -> Option<FieldSample> {
        Some(FieldSample::regular(velocity_gaussian(x, &self.params, &self.setup)))
    }
}

impl<F: Fn(f64) -> Result<GaussianParams> + Sync> VelocityField for GaussianField<F> {
    type Frame = GaussianFrame;

    fn frame(&self, t: f64) -> Result<GaussianFrame> {
        Ok(GaussianFrame { setup: self.setup, params: (self.params)(t)? })
    }
}

/// Field of `ψ₁ + ψ₂`.
pub struct SuperpositionField<F> {
    setup: PhysicalSetup,
    params: F,
}

impl<F: Fn(f64) -> Result<(GaussianParams, GaussianParams)> + Sync> SuperpositionField<F> {
    pub fn new(setup: &PhysicalSetup, params: F) -> Self {
        Self { setup: *setup, params }
    }
}

pub struct SuperpositionFrame {
    setup: PhysicalSetup,
    pair: (GaussianParams, GaussianParams),
}

impl FieldFrame for SuperpositionFrame {
    fn velocity(&self, x: f64) -> Option<FieldSample> {
        Some(velocity_superposition(x, &self.pair.0, &self.pair.1, &self.setup))
    }
}

impl<F: Fn(f64) -> Result<(GaussianParams, GaussianParams)> + Sync> VelocityField for SuperpositionField<F> {
    type Frame = SuperpositionFrame;

    fn frame(&self, t: f64) -> Result<SuperpositionFrame> {
        Ok(SuperpositionFrame { setup: self.setup, pair: (self.params)(t)? })
    }
}

/// Velocity profiles of a grid propagation, recorded at a fixed spacing and
/// interpolated cubically in time and space.
#[derive(Debug, Clone)]
pub struct GridField {
    x_min: f64,
    dx: f64,
    t0: f64,
    spacing: f64,
    profiles: Vec<Vec<f64>>,
    nodes: Vec<Vec<bool>>,
}

impl GridField {
    /// Propagates `state0` to `t_end`, keeping the velocity profile every
    /// `stride` grid steps. Every kept state passes the boundary and
    /// resolution checks.
    pub fn propagate(
        state0: &GridWavefunction,
        setup: &PhysicalSetup,
        cfg: &GridConfig,
        t_end: f64,
        stride: usize,
    ) -> Result<Self> {
        Self::propagate_with(state0, setup, cfg, t_end, stride, |_| Ok(()))
    }

    /// As [`GridField::propagate`], also handing each kept state to `visit`.
    pub fn propagate_with(
        state0: &GridWavefunction,
        setup: &PhysicalSetup,
        cfg: &GridConfig,
        t_end: f64,
        stride: usize,
        mut visit: impl FnMut(&GridWavefunction) -> Result<()>,
    ) -> Result<Self> {
        if stride == 0 {
            return Err(Error::domain("stride must be at least 1"));
        }
        let stepper = SplitStepper::new(setup, cfg)?;
        let steps = ((t_end - state0.t) / cfg.dt).round().max(0.0) as usize;
        let records = steps.div_ceil(stride);
        let mut field = Self {
            x_min: cfg.x_min,
            dx: cfg.dx(),
            t0: state0.t,
            spacing: stride as f64 * cfg.dt,
            profiles: Vec::with_capacity(records + 1),
            nodes: Vec::with_capacity(records + 1),
        };
        let mut keep = |s: &GridWavefunction| -> Result<()> {
            stepper.check_state(s)?;
            let (v, n) = grid_velocity_profile_with(stepper.spectral(), s, setup);
            field.profiles.push(v);
            field.nodes.push(n);
            visit(s)
        };
        let mut state = state0.clone();
        keep(&state)?;
        // run whole strides so the last profile lies at or beyond t_end
        stepper.run(&mut state, records * stride, |k, s| if k % stride == 0 { keep(s) } else { Ok(()) })?;
        Ok(field)
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + (self.profiles.len() - 1) as f64 * self.spacing
    }
}

pub struct GridFrame {
    x_min: f64,
    dx: f64,
    v: Vec<f64>,
    nodes: Vec<bool>,
}

impl FieldFrame for GridFrame {
    fn velocity(&self, x: f64) -> Option<FieldSample> {
        cubic_at(&self.v, &self.nodes, self.x_min, self.dx, x)
    }
}

impl VelocityField for GridField {
    type Frame = GridFrame;

    fn frame(&self, t: f64) -> Result<GridFrame> {
        let last = self.profiles.len() - 1;
        let s = (t - self.t0) / self.spacing;
        if s < -1e-9 || s > last as f64 + 1e-9 {
            return Err(Error::domain(format!("t = {t} outside the recorded grid field")));
        }
        let s = s.clamp(0.0, last as f64);
        let k = s.round();
        if (s - k).abs() < 1e-9 {
            let k = k as usize;
            return Ok(GridFrame { x_min: self.x_min, dx: self.dx, v: self.profiles[k].clone(), nodes: self.nodes[k].clone() });
        }
        if last < 3 {
            // too few records for a cubic; interpolate linearly
            let k = (s.floor() as usize).min(last - 1);
            let u = s - k as f64;
            let v = self.profiles[k].iter().zip(&self.profiles[k + 1]).map(|(a, b)| a + u * (b - a)).collect();
            let nodes = self.nodes[k].iter().zip(&self.nodes[k + 1]).map(|(a, b)| *a || *b).collect();
            return Ok(GridFrame { x_min: self.x_min, dx: self.dx, v, nodes });
        }
        let start = (s.floor() as usize).saturating_sub(1).min(last - 3);
        let u = s - (start + 1) as f64;
        let w = [
            -u * (u - 1.0) * (u - 2.0) / 6.0,
            (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0,
            -(u + 1.0) * u * (u - 2.0) / 2.0,
            (u + 1.0) * u * (u - 1.0) / 6.0,
        ];
        let n = self.profiles[start].len();
        let mut v = vec![0.0; n];
        let mut nodes = vec![false; n];
        for j in 0..4 {
            for (i, (acc, src)) in v.iter_mut().zip(&self.profiles[start + j]).enumerate() {
                *acc += w[j] * src;
                nodes[i] |= self.nodes[start + j][i];
            }
        }
        Ok(GridFrame { x_min: self.x_min, dx: self.dx, v, nodes })
    }
}

/// Positions of a trajectory ensemble; `positions[i][j]` is trajectory `i`
/// at `times[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEnsemble {
    pub launch_positions: Vec<f64>,
    pub times: Vec<f64>,
    pub positions: Vec<Vec<f64>>,
    /// Centroid `x_t` at each recorded time, when the scenario has one.
    pub centroid: Option<Vec<f64>>,
    /// Number of field evaluations replaced by the last finite velocity.
    pub node_hits: usize,
}

impl TrajectoryEnsemble {
    pub fn len(&self) -> usize {
        self.launch_positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.launch_positions.is_empty()
    }

    /// Positions of every trajectory at record `j`.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.positions.iter().map(|row| row[j]).collect()
    }

    pub fn final_positions(&self) -> Vec<f64> {
        self.column(self.times.len() - 1)
    }

    /// `true` if launch order is kept at every recorded time.
    pub fn preserves_order(&self) -> bool {
        (0..self.times.len()).all(|j| self.column(j).windows(2).all(|w| w[0] < w[1]))
    }

    pub fn with_centroid(mut self, centroid: impl Fn(f64) -> Result<f64>) -> Result<Self> {
        self.centroid = Some(self.times.iter().map(|&t| centroid(t)).collect::<Result<_>>()?);
        Ok(self)
    }

    /// Columns `t`, `x_traj_0 … x_traj_{n-1}` and, if known, `x_centroid`.
    pub fn to_table(&self) -> Table {
        let mut cols = vec!["t".to_string()];
        cols.extend((0..self.len()).map(|i| format!("x_traj_{i}")));
        if self.centroid.is_some() {
            cols.push("x_centroid".into());
        }
        let mut table = Table::new(cols).with_meta("trajectories", self.len()).with_meta("node_hits", self.node_hits);
        for (j, &t) in self.times.iter().enumerate() {
            let mut row = Vec::with_capacity(self.len() + 2);
            row.push(t);
            row.extend(self.positions.iter().map(|p| p[j]));
            if let Some(c) = &self.centroid {
                row.push(c[j]);
            }
            table.push_row(row);
        }
        table
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationConfig {
    pub t_start: f64,
    pub t_end: f64,
    pub dt: f64,
    /// Record every `record_stride` steps; the final time is always kept.
    pub record_stride: usize,
}

impl IntegrationConfig {
    pub fn new(t_start: f64, t_end: f64, dt: f64, record_stride: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) || !(t_end >= t_start) || record_stride == 0 {
            return Err(Error::domain("need dt > 0, t_end >= t_start and a positive record stride"));
        }
        Ok(Self { t_start, t_end, dt, record_stride })
    }

    fn steps(&self) -> usize {
        ((self.t_end - self.t_start) / self.dt).round() as usize
    }
}

/// RK4 transport of every launch point through `field`.
///
/// All trajectories advance in lockstep so each field frame is built once
/// per stage. Where a frame reports a node, the trajectory keeps its last
/// trusted velocity.
pub fn integrate_trajectories<V: VelocityField>(
    launch: &[f64],
    field: &V,
    cfg: &IntegrationConfig,
) -> Result<TrajectoryEnsemble> {
    let n = launch.len();
    let steps = cfg.steps();
    let mut x = launch.to_vec();
    let mut last_v = vec![f64::NAN; n];
    let mut positions: Vec<Vec<f64>> = launch.iter().map(|&x0| vec![x0]).collect();
    let mut times = vec![cfg.t_start];
    let mut node_hits = 0usize;

    let eval = |frame: &V::Frame, i: usize, x: f64, t: f64, last: f64| -> Result<(f64, bool)> {
        let s = frame.velocity(x).ok_or(Error::TrajectoryExit { index: i, t, x })?;
        if s.near_node || !s.v.is_finite() {
            let fallback = if last.is_finite() { last } else { 0.0 };
            return Ok((fallback, true));
        }
        Ok((s.v, false))
    };

    let mut frame_start = field.frame(cfg.t_start)?;
    for k in 0..steps {
        let t = cfg.t_start + k as f64 * cfg.dt;
        let t_next = cfg.t_start + (k + 1) as f64 * cfg.dt;
        let h = t_next - t;
        let frame_mid = field.frame(t + 0.5 * h)?;
        let frame_end = field.frame(t_next)?;
        let hits = x
            .par_iter_mut()
            .zip(last_v.par_iter_mut())
            .enumerate()
            .map(|(i, (xi, lv))| -> Result<usize> {
                let mut hits = 0;
                let mut take = |frame: &V::Frame, at: f64, tt: f64| -> Result<f64> {
                    let (v, hit) = eval(frame, i, at, tt, *lv)?;
                    if hit {
                        hits += 1;
                    } else {
                        *lv = v;
                    }
                    Ok(v)
                };
                let k1 = take(&frame_start, *xi, t)?;
                let k2 = take(&frame_mid, *xi + 0.5 * h * k1, t + 0.5 * h)?;
                let k3 = take(&frame_mid, *xi + 0.5 * h * k2, t + 0.5 * h)?;
                let k4 = take(&frame_end, *xi + h * k3, t_next)?;
                *xi += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                if !xi.is_finite() {
                    return Err(Error::TrajectoryExit { index: i, t: t_next, x: *xi });
                }
                Ok(hits)
            })
            .collect::<Result<Vec<usize>>>()?;
        node_hits += hits.iter().sum::<usize>();
        frame_start = frame_end;
        if (k + 1) % cfg.record_stride == 0 || k + 1 == steps {
            times.push(t_next);
            for (row, xi) in positions.iter_mut().zip(&x) {
                row.push(*xi);
            }
        }
    }
    Ok(TrajectoryEnsemble { launch_positions: launch.to_vec(), times, positions, centroid: None, node_hits })
}

/// Scenarios whose trajectories have closed forms.
#[derive(Debug, Clone, Copy)]
pub enum TrajectoryScenario {
    /// Any closed-form Gaussian: `x(t) = x_t + (σ_t/σ₀)[x(0) - x₀]`.
    Packet(ClosedFormPacket),
    /// Oscillator quasi-eigenstate: `x(t) = x(0) e^{-γt/2}`.
    QuasiEigenstate(PhysicalSetup),
    /// Stationary-shape packet released at rest from `x0`:
    /// `x(t) = x_t + [x(0) - x₀] e^{-γ̄t/2}`.
    StationaryShape { x0: f64, setup: PhysicalSetup },
}

/// Separation decay rate `γ̄`: `γ` when under- or critically damped,
/// `γ - 2Γ` when overdamped.
pub fn coalescence_rate(setup: &PhysicalSetup) -> Result<f64> {
    Ok(match classify_regime(setup)? {
        DampingRegime::Overdamped { rate } => setup.gamma() - 2.0 * rate,
        _ => setup.gamma(),
    })
}

impl TrajectoryScenario {
    /// The trajectory launched at the centroid, where one exists.
    pub fn centroid(&self, t: f64) -> Result<f64> {
        match *self {
            TrajectoryScenario::Packet(p) => Ok(p.at(t)?.x),
            TrajectoryScenario::QuasiEigenstate(_) => Ok(0.0),
            TrajectoryScenario::StationaryShape { x0, setup } => {
                Ok(harmonic_centroid(t, x0, 0.0, classify_regime(&setup)?, &setup)?.0)
            }
        }
    }

    /// Field that generates these trajectories.
    pub fn field(&self) -> Result<GaussianField<impl Fn(f64) -> Result<GaussianParams> + Sync + '_>> {
        let setup = match self {
            TrajectoryScenario::Packet(p) => *p.setup(),
            TrajectoryScenario::QuasiEigenstate(s) | TrajectoryScenario::StationaryShape { setup: s, .. } => *s,
        };
        if let TrajectoryScenario::QuasiEigenstate(s) = self {
            if !matches!(classify_regime(s)?, DampingRegime::Underdamped { .. }) {
                return Err(Error::domain("quasi-eigenstates need omega0 > gamma/2"));
            }
        }
        Ok(GaussianField::new(&setup, move |t| self.params(t)))
    }

    /// Gaussian parameters whose phase generates the flow. For the
    /// quasi-eigenstate only the quadratic phase matters.
    fn params(&self, t: f64) -> Result<GaussianParams> {
        match *self {
            TrajectoryScenario::Packet(p) => p.at(t),
            TrajectoryScenario::QuasiEigenstate(setup) => {
                let alpha = Complex64::new(-0.25 * setup.mass() * setup.gamma() * setup.growth(t), 0.0);
                Ok(GaussianParams { x: 0.0, p: 0.0, alpha, f: Complex64::new(0.0, 0.0), t, action: 0.0 })
            }
            TrajectoryScenario::StationaryShape { x0, setup } => {
                let regime = classify_regime(&setup)?;
                let shape = stationary_alpha(regime, &setup)?;
                let (x_t, p_t) = harmonic_centroid(t, x0, 0.0, regime, &setup)?;
                Ok(GaussianParams { x: x_t, p: p_t * setup.growth(t), alpha: shape.alpha(t), f: shape.f(t), t, action: 0.0 })
            }
        }
    }
}

/// Closed trajectory law of `scenario` for a launch at `x_launch`.
pub fn analytic_trajectory(scenario: &TrajectoryScenario, x_launch: f64, t: f64) -> Result<f64> {
    match *scenario {
        TrajectoryScenario::Packet(p) => {
            Ok(p.at(t)?.x + p.spreading(t)? * (x_launch - p.x0()))
        }
        TrajectoryScenario::QuasiEigenstate(setup) => {
            if !matches!(classify_regime(&setup)?, DampingRegime::Underdamped { .. }) {
                return Err(Error::Unsupported("quasi-eigenstates need omega0 > gamma/2".into()));
            }
            Ok(x_launch * (-0.5 * setup.gamma() * t).exp())
        }
        TrajectoryScenario::StationaryShape { x0, setup } => {
            let rate = coalescence_rate(&setup)?;
            let x_t = harmonic_centroid(t, x0, 0.0, classify_regime(&setup)?, &setup)?.0;
            Ok(x_t + (x_launch - x0) * (-0.5 * rate * t).exp())
        }
    }
}
