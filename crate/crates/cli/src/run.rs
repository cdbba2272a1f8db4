//! Executes a scenario: every `(γ, engine)` pair runs concurrently and
//! writes its own files under `gamma-<i>/<engine>/`.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use viscid_core::bohm::{
    analytic_trajectory, integrate_trajectories, sample_from_density, sample_initial_positions, GaussianField,
    GridField, IntegrationConfig, SuperpositionField, TrajectoryEnsemble, TrajectoryScenario,
};
use viscid_core::closed_form::{quasi_eigenstate, ClosedFormPacket, PacketLaw};
use viscid_core::gaussian_ode::{initial_packet, GaussianParams, OdeTrack};
use viscid_core::grid_solver::{init_grid, GridWavefunction};
use viscid_core::observables::{gaussian_sum_observables, grid_observables, Moments, ObservableSeries};
use viscid_core::table::Table;
use viscid_core::PhysicalSetup;

use crate::compare::{compare_dir, ComparisonReport};
use crate::config::{whole_multiple, Scenario, ScenarioConfig};
use crate::tolerance::{Engine, Tolerances};
use crate::CliError;

pub const OBSERVABLES_FILE: &str = "observables.tsv";
pub const TRAJECTORIES_FILE: &str = "trajectories.tsv";

pub fn gamma_dir(out: &Path, index: usize) -> PathBuf {
    out.join(format!("gamma-{index}"))
}

pub fn density_file(k: usize) -> String {
    format!("density-{k}.tsv")
}

/// Runs every `(γ, engine)` pair of `cfg` into `out`, then compares the
/// engines under `cfg.tolerances` extended by `extra`.
pub fn run_scenario(cfg: &ScenarioConfig, out: &Path, extra: &Tolerances) -> Result<ComparisonReport, CliError> {
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let jobs: Vec<(usize, Engine)> =
        (0..cfg.gammas.len()).flat_map(|i| cfg.engines.iter().map(move |&e| (i, e))).collect();
    let results: Vec<Result<(), CliError>> = jobs
        .par_iter()
        .map(|&(i, engine)| {
            let started = std::time::Instant::now();
            let r = run_job(cfg, i, engine, out);
            log::info!("gamma {} engine {engine}: {:.2} s", cfg.gammas[i].0, started.elapsed().as_secs_f64());
            r
        })
        .collect();
    // report the first failure in job order so reruns fail identically
    results.into_iter().collect::<Result<Vec<()>, CliError>>()?;
    let mut tolerances = cfg.tolerances.clone();
    tolerances.extend(extra);
    if cfg.engines.len() < 2 {
        return Ok(ComparisonReport::default());
    }
    let report = compare_dir(out, &tolerances)?;
    report.write(&out.join(crate::compare::REPORT_FILE))?;
    Ok(report)
}

/// Wave function source shared by the engines of one run.
enum Source {
    Gaussians(Vec<ClosedFormPacket>),
    Eigen(usize),
}

struct Job<'a> {
    cfg: &'a ScenarioConfig,
    setup: PhysicalSetup,
    source: Source,
    context: String,
}

/// What one engine produces.
struct Output {
    series: ObservableSeries,
    trajectories: Option<TrajectoryEnsemble>,
    /// `(t, table with columns x and rho)` per density time.
    densities: Vec<Table>,
}

fn run_job(cfg: &ScenarioConfig, index: usize, engine: Engine, out: &Path) -> Result<(), CliError> {
    let (text, gamma) = &cfg.gammas[index];
    let context = format!("gamma {text}, engine {engine}");
    let numeric = |e| CliError::Numerical { context: context.clone(), source: e };
    let setup = cfg.setup.with_gamma(*gamma).map_err(numeric)?;
    let source = match cfg.scenario {
        Scenario::QuasiEigenstate => Source::Eigen(cfg.packets[0].n),
        s => {
            let law = |p: &crate::config::Packet| match s {
                Scenario::Free | Scenario::FreeSuperposition => {
                    PacketLaw::Free { x0: p.x0, p0: p.p0, sigma0: p.sigma0 }
                }
                Scenario::Linear => PacketLaw::Linear { x0: p.x0, p0: p.p0, sigma0: p.sigma0 },
                _ => PacketLaw::Harmonic {
                    x0: p.x0,
                    p0: p.p0,
                    alpha0: Complex64::new(0.0, setup.hbar() / (4.0 * p.sigma0 * p.sigma0)),
                },
            };
            let packets = cfg.packets.iter().map(|p| ClosedFormPacket::new(law(p), &setup)).collect::<Result<_, _>>();
            Source::Gaussians(packets.map_err(numeric)?)
        }
    };
    let job = Job { cfg, setup, source, context: context.clone() };
    let output = match engine {
        Engine::ClosedForm => job.closed_form(),
        Engine::Ode => job.ode(),
        Engine::Grid => job.grid(),
    }
    .map_err(numeric)?;

    let dir = gamma_dir(out, index).join(engine.name());
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let tag = |t: Table| {
        t.with_meta("scenario", cfg.scenario.name())
            .with_meta("engine", engine.name())
            .with_meta("gamma", gamma)
            .with_meta("gamma_expr", text)
            .with_meta("seed", cfg.seed)
    };
    write_table(&dir.join(OBSERVABLES_FILE), &tag(output.series.to_table()))?;
    if let Some(ens) = &output.trajectories {
        write_table(&dir.join(TRAJECTORIES_FILE), &tag(ens.to_table()))?;
    }
    for (k, t) in output.densities.into_iter().enumerate() {
        write_table(&dir.join(density_file(k)), &tag(t))?;
    }
    Ok(())
}

fn write_table(path: &Path, table: &Table) -> Result<(), CliError> {
    let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    table.write_to(std::io::BufWriter::new(file)).map_err(|e| CliError::io(path, e))
}

type CoreResult<T> = viscid_core::Result<T>;

impl Job<'_> {
    fn hbar(&self) -> f64 {
        self.setup.hbar()
    }

    /// Closed-form wave function.
    fn psi(&self, x: f64, t: f64, states: &[GaussianParams]) -> CoreResult<Complex64> {
        match self.source {
            Source::Gaussians(_) => Ok(states.iter().map(|s| s.psi(x, self.hbar())).sum()),
            Source::Eigen(n) => quasi_eigenstate(n, x, t, &self.setup),
        }
    }

    fn closed_states(&self, t: f64) -> CoreResult<Vec<GaussianParams>> {
        match &self.source {
            Source::Gaussians(ps) => ps.iter().map(|p| p.at(t)).collect(),
            Source::Eigen(_) => Ok(Vec::new()),
        }
    }

    /// Trajectory launch points, identical for every engine of a run.
    fn launches(&self) -> CoreResult<Vec<f64>> {
        let tc = &self.cfg.trajectories;
        if tc.count == 0 {
            return Ok(Vec::new());
        }
        let packets = &self.cfg.packets;
        if packets.len() == 1 && !matches!(self.source, Source::Eigen(_)) {
            return sample_initial_positions(packets[0].x0, packets[0].sigma0, tc.count, tc.sampling);
        }
        let xs = self.cfg.grid.positions();
        let states = self.closed_states(0.0)?;
        let rho = xs.iter().map(|&x| Ok(self.psi(x, 0.0, &states)?.norm_sqr())).collect::<CoreResult<Vec<f64>>>()?;
        sample_from_density(&xs, &rho, tc.count, tc.sampling)
    }

    fn integration(&self) -> CoreResult<IntegrationConfig> {
        let tc = &self.cfg.trajectories;
        let stride = whole_multiple(self.cfg.record_every, tc.dt).unwrap_or(1);
        IntegrationConfig::new(0.0, self.cfg.t_end, tc.dt, stride)
    }

    /// Moments of the sampled closed-form state on the grid, for states
    /// that are not Gaussian sums.
    fn sampled_moments(&self, t: f64, norm0: f64) -> CoreResult<Moments> {
        let grid = &self.cfg.grid;
        let psi = grid.positions().into_iter().map(|x| self.psi(x, t, &[])).collect::<CoreResult<Vec<_>>>()?;
        let state = GridWavefunction { x_min: grid.x_min, x_max: grid.x_max, n_points: grid.n_points, psi, t };
        let mut m = grid_observables(&state, &self.setup)?;
        m.norm /= norm0;
        Ok(m)
    }

    /// Density tables sampled from a closed-form or ODE state source.
    fn sampled_densities(
        &self,
        states_at: impl Fn(f64) -> CoreResult<Vec<GaussianParams>>,
        norm0: f64,
    ) -> CoreResult<Vec<Table>> {
        let xs = self.cfg.grid.positions();
        let mut out = Vec::new();
        for &t in &self.cfg.density_times {
            let states = states_at(t)?;
            let mut table = Table::new(["x", "rho"]).with_meta("t", t);
            for &x in &xs {
                table.push_row(vec![x, self.psi(x, t, &states)?.norm_sqr() / norm0]);
            }
            out.push(table);
        }
        Ok(out)
    }

    fn series_from(
        &self,
        states_at: &dyn Fn(f64) -> CoreResult<Vec<GaussianParams>>,
    ) -> CoreResult<(ObservableSeries, f64)> {
        let mut series = ObservableSeries::default();
        let mut norm0 = None;
        for t in self.cfg.record_times() {
            let mut m = match self.source {
                Source::Gaussians(_) => gaussian_sum_observables(&states_at(t)?, &self.setup)?,
                Source::Eigen(_) => self.sampled_moments(t, 1.0)?,
            };
            let n0 = *norm0.get_or_insert(m.norm);
            m.norm /= n0;
            series.push(t, m);
        }
        Ok((series, norm0.unwrap_or(1.0)))
    }

    fn closed_form(&self) -> CoreResult<Output> {
        let states_at = |t| self.closed_states(t);
        let (series, norm0) = self.series_from(&states_at)?;
        let launch = self.launches()?;
        let trajectories = if launch.is_empty() {
            None
        } else {
            Some(match &self.source {
                Source::Gaussians(ps) if ps.len() == 2 => {
                    let field = SuperpositionField::new(&self.setup, |t| Ok((ps[0].at(t)?, ps[1].at(t)?)));
                    integrate_trajectories(&launch, &field, &self.integration()?)?
                }
                Source::Gaussians(ps) => {
                    let sc = TrajectoryScenario::Packet(ps[0]);
                    analytic_ensemble(&launch, &self.cfg.record_times(), |x, t| analytic_trajectory(&sc, x, t))?
                        .with_centroid(|t| ps[0].at(t).map(|s| s.x))?
                }
                Source::Eigen(_) => {
                    let sc = TrajectoryScenario::QuasiEigenstate(self.setup);
                    analytic_ensemble(&launch, &self.cfg.record_times(), |x, t| analytic_trajectory(&sc, x, t))?
                }
            })
        };
        Ok(Output { series, trajectories, densities: self.sampled_densities(states_at, norm0)? })
    }

    fn ode(&self) -> CoreResult<Output> {
        let tracks = self
            .cfg
            .packets
            .iter()
            .map(|p| OdeTrack::run(&initial_packet(p.x0, p.p0, p.sigma0, &self.setup)?, &self.setup, self.cfg.dt, self.cfg.t_end))
            .collect::<CoreResult<Vec<_>>>()?;
        let states_at = |t| tracks.iter().map(|tr| tr.at(t)).collect::<CoreResult<Vec<_>>>();
        let (series, norm0) = self.series_from(&states_at)?;
        let launch = self.launches()?;
        let trajectories = match tracks.as_slice() {
            _ if launch.is_empty() => None,
            [one] => Some(
                integrate_trajectories(&launch, &GaussianField::new(&self.setup, |t| one.at(t)), &self.integration()?)?
                    .with_centroid(|t| one.at(t).map(|s| s.x))?,
            ),
            [a, b] => {
                let field = SuperpositionField::new(&self.setup, |t| Ok((a.at(t)?, b.at(t)?)));
                Some(integrate_trajectories(&launch, &field, &self.integration()?)?)
            }
            _ => unreachable!("validated packet count"),
        };
        Ok(Output { series, trajectories, densities: self.sampled_densities(states_at, norm0)? })
    }

    fn grid(&self) -> CoreResult<Output> {
        let cfg = &self.cfg.grid;
        let states0 = self.closed_states(0.0)?;
        // surface evaluation errors once; the sampler itself cannot fail
        self.psi(cfg.x_min, 0.0, &states0)?;
        let state0 = init_grid(cfg, |x| self.psi(x, 0.0, &states0).unwrap_or_default())?;
        let per_record = whole_multiple(self.cfg.record_every, cfg.dt).unwrap_or(1);
        // keep velocity profiles at most every 10 steps, on the record grid
        let stride = (1..=10).rev().find(|s| per_record % s == 0).unwrap_or(1);
        let mut series = ObservableSeries::default();
        let mut densities = Vec::new();
        let field = GridField::propagate_with(&state0, &self.setup, cfg, self.cfg.t_end, stride, |s| {
            let step = (s.t / cfg.dt).round() as usize;
            if step % per_record == 0 {
                series.push(s.t, grid_observables(s, &self.setup)?);
            }
            if self.cfg.density_times.iter().any(|&t| (t - s.t).abs() < 0.5 * cfg.dt) {
                densities.push(s.to_table(&self.setup, cfg.dt));
            }
            Ok(())
        })?;
        log::debug!("{}: grid field spans [0, {}]", self.context, field.t_end());
        let launch = self.launches()?;
        let trajectories =
            if launch.is_empty() { None } else { Some(integrate_trajectories(&launch, &field, &self.integration()?)?) };
        Ok(Output { series, trajectories, densities })
    }
}

fn analytic_ensemble(
    launch: &[f64],
    times: &[f64],
    law: impl Fn(f64, f64) -> CoreResult<f64>,
) -> CoreResult<TrajectoryEnsemble> {
    let positions = launch.iter().map(|&x| times.iter().map(|&t| law(x, t)).collect()).collect::<CoreResult<_>>()?;
    Ok(TrajectoryEnsemble {
        launch_positions: launch.to_vec(),
        times: times.to_vec(),
        positions,
        centroid: None,
        node_hits: 0,
    })
}
