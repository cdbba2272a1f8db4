//! Oracles and helpers shared by the integration suites.
#![allow(dead_code)]

use num_complex::Complex64;
use statrs::distribution::{ContinuousCDF, Normal};
use viscid_core::grid_solver::{init_grid, GridConfig, GridWavefunction, SplitStepper};
use viscid_core::observables::{grid_observables_with, Moments};
use viscid_core::{PhysicalSetup, PotentialSpec, Result};

pub const W0: f64 = 0.62832;
pub const TAU0: f64 = 10.0;

pub fn omega0() -> f64 {
    2.0 * std::f64::consts::PI / TAU0
}

pub fn free(gamma: f64) -> PhysicalSetup {
    PhysicalSetup::natural(gamma, PotentialSpec::Free).unwrap()
}

pub fn ramp(gamma: f64) -> PhysicalSetup {
    PhysicalSetup::natural(gamma, PotentialSpec::Linear { a: 0.25 }).unwrap()
}

pub fn osc(gamma: f64) -> PhysicalSetup {
    PhysicalSetup::natural(gamma, PotentialSpec::Harmonic { omega0: omega0() }).unwrap()
}

/// Coherent width `sqrt(ħ/2mω₀)` for `m = ħ = 1`.
pub fn coherent_sigma() -> f64 {
    (1.0 / (2.0 * omega0())).sqrt()
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Total-variation distance between `samples` and `N(mean, sd²)` over
/// `bins` cells of equal reference probability.
pub fn tv_distance(samples: &[f64], mean: f64, sd: f64, bins: usize) -> f64 {
    let dist = Normal::new(mean, sd).unwrap();
    let mut counts = vec![0usize; bins];
    for &x in samples {
        let u = dist.cdf(x);
        counts[((u * bins as f64) as usize).min(bins - 1)] += 1;
    }
    let n = samples.len() as f64;
    0.5 * counts.iter().map(|&c| (c as f64 / n - 1.0 / bins as f64).abs()).sum::<f64>()
}

/// Relative error with an additive floor on the reference magnitude.
pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / (b.abs() + floor)
}

/// A grid run sampled every `every` steps: `(state, moments)` pairs,
/// starting with the initial state.
pub fn grid_run(
    setup: &PhysicalSetup,
    cfg: &GridConfig,
    psi0: impl Fn(f64) -> Complex64,
    t_end: f64,
    every: usize,
) -> Result<Vec<(GridWavefunction, Moments)>> {
    let stepper = SplitStepper::new(setup, cfg)?;
    let mut state = init_grid(cfg, psi0)?;
    let steps = (t_end / cfg.dt).round() as usize;
    let mut out = vec![(state.clone(), grid_observables_with(stepper.spectral(), &state, setup)?)];
    stepper.run(&mut state, steps, |k, s| {
        if k % every == 0 || k == steps {
            stepper.check_state(s)?;
            out.push((s.clone(), grid_observables_with(stepper.spectral(), s, setup)?));
        }
        Ok(())
    })?;
    Ok(out)
}

/// `|∫ conj(a) b dx|` on a shared grid.
pub fn overlap(a: &[Complex64], b: &[Complex64], dx: f64) -> f64 {
    (a.iter().zip(b).map(|(u, v)| u.conj() * v).sum::<Complex64>() * dx).norm()
}
