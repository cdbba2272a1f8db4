//! Pairwise comparison of engine outputs.
//!
//! Observables and trajectories are compared pointwise over the shared
//! record times: `max_abs` is the largest absolute difference and `l2` its
//! root mean square. For densities each snapshot contributes the distance
//! `sqrt(∫(ρ_a - ρ_b)² dx)`; `max_abs` is the largest and `l2` the root
//! mean square over snapshots. Tolerances bound `max_abs`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use viscid_core::observables::ObservableSeries;
use viscid_core::table::Table;

use crate::run::{density_file, gamma_dir, OBSERVABLES_FILE, TRAJECTORIES_FILE};
use crate::tolerance::{Engine, Quantity, Tolerances};
use crate::CliError;

pub const REPORT_FILE: &str = "report.tsv";

/// Relative slack for matching record times and positions.
const ALIGN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ReportEntry {
    pub gamma_index: usize,
    pub gamma: f64,
    pub a: Engine,
    pub b: Engine,
    pub quantity: Quantity,
    pub max_abs: f64,
    pub l2: f64,
    pub bound: Option<f64>,
}

impl ReportEntry {
    /// Unbounded entries always pass; NaN errors never do.
    pub fn passed(&self) -> bool {
        self.bound.is_none_or(|b| self.max_abs <= b)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ComparisonReport {
    pub entries: Vec<ReportEntry>,
}

impl ComparisonReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(ReportEntry::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReportEntry> {
        self.entries.iter().filter(|e| !e.passed())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("gamma_index\tgamma\tengine_a\tengine_b\tquantity\tmax_abs\tl2\tbound\tstatus\n");
        for e in &self.entries {
            let bound = e.bound.map_or("-".to_string(), |b| format!("{b:e}"));
            let status = match (e.bound, e.passed()) {
                (None, _) => "info",
                (_, true) => "pass",
                (_, false) => "FAIL",
            };
            let _ = writeln!(
                s,
                "{}\t{}\t{}\t{}\t{}\t{:e}\t{:e}\t{bound}\t{status}",
                e.gamma_index, e.gamma, e.a, e.b, e.quantity, e.max_abs, e.l2
            );
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        fs::write(path, self.to_text()).map_err(|e| CliError::io(path, e))
    }
}

fn read_table(path: &Path) -> Result<Table, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Table::parse(&text).map_err(|e| CliError::Alignment(format!("{}: {e}", path.display())))
}

fn misaligned<T>(msg: String) -> Result<T, CliError> {
    Err(CliError::Alignment(msg))
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= ALIGN * a.abs().max(b.abs()).max(1.0)
}

fn check_axis(what: &str, a: &[f64], b: &[f64]) -> Result<(), CliError> {
    if a.len() != b.len() || a.iter().zip(b).any(|(x, y)| !close(*x, *y)) {
        return misaligned(format!("{what}: record grids differ"));
    }
    Ok(())
}

/// `(max_abs, rms)` of pointwise differences.
fn errors(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut max = 0.0f64;
    let mut sum = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = (x - y).abs();
        // NaN must not hide behind max
        max = if d.is_nan() || max.is_nan() { f64::NAN } else { max.max(d) };
        sum += d * d;
    }
    (max, (sum / a.len().max(1) as f64).sqrt())
}

/// Engines with outputs under `gamma-<index>`, in canonical order.
fn engines_in(dir: &Path) -> Vec<Engine> {
    Engine::ALL.into_iter().filter(|e| dir.join(e.name()).join(OBSERVABLES_FILE).is_file()).collect()
}

/// Compares every pair of engines for every `gamma-<i>` directory in `out`.
pub fn compare_dir(out: &Path, tolerances: &Tolerances) -> Result<ComparisonReport, CliError> {
    let mut report = ComparisonReport::default();
    let mut any_pair = false;
    for index in 0.. {
        let dir = gamma_dir(out, index);
        if !dir.is_dir() {
            if index == 0 {
                return misaligned(format!("{}: no gamma-0 directory", out.display()));
            }
            break;
        }
        let engines = engines_in(&dir);
        for (i, &a) in engines.iter().enumerate() {
            for &b in &engines[i + 1..] {
                any_pair = true;
                compare_pair(&dir, index, a, b, tolerances, &mut report)?;
            }
        }
    }
    if !any_pair {
        return misaligned(format!("{}: comparison needs at least two engines", out.display()));
    }
    Ok(report)
}

fn compare_pair(
    dir: &Path,
    index: usize,
    a: Engine,
    b: Engine,
    tolerances: &Tolerances,
    report: &mut ComparisonReport,
) -> Result<(), CliError> {
    let label = format!("gamma-{index} {a} vs {b}");
    let (ta, tb) = (read_table(&dir.join(a.name()).join(OBSERVABLES_FILE))?, read_table(&dir.join(b.name()).join(OBSERVABLES_FILE))?);
    let gamma = ta.meta_value("gamma").and_then(|g| g.parse().ok()).unwrap_or(f64::NAN);
    let parse = |t: &Table| ObservableSeries::from_table(t).map_err(|e| CliError::Alignment(format!("{label}: {e}")));
    let (sa, sb) = (parse(&ta)?, parse(&tb)?);
    check_axis(&format!("{label} observables"), &sa.times, &sb.times)?;
    let mut push = |quantity, (max_abs, l2)| {
        let bound = tolerances.bound(a, b, quantity);
        report.entries.push(ReportEntry { gamma_index: index, gamma, a, b, quantity, max_abs, l2, bound });
    };
    push(Quantity::MeanX, errors(&sa.mean_x, &sb.mean_x));
    push(Quantity::Dispersion, errors(&sa.dispersion, &sb.dispersion));
    push(Quantity::Energy, errors(&sa.energy, &sb.energy));
    push(Quantity::Norm, errors(&sa.norm, &sb.norm));

    let (pa, pb) = (dir.join(a.name()).join(TRAJECTORIES_FILE), dir.join(b.name()).join(TRAJECTORIES_FILE));
    match (pa.is_file(), pb.is_file()) {
        (false, false) => {}
        (true, true) => {
            let (ta, tb) = (read_table(&pa)?, read_table(&pb)?);
            check_axis(&format!("{label} trajectories"), &ta.column("t").unwrap_or_default(), &tb.column("t").unwrap_or_default())?;
            let paths = |t: &Table| -> Vec<Vec<f64>> {
                t.columns.iter().filter(|c| c.starts_with("x_traj_")).filter_map(|c| t.column(c)).collect()
            };
            let (xa, xb) = (paths(&ta), paths(&tb));
            if xa.len() != xb.len() {
                return misaligned(format!("{label}: trajectory counts differ ({} vs {})", xa.len(), xb.len()));
            }
            if xa.iter().zip(&xb).any(|(u, v)| !u.is_empty() && !close(u[0], v[0])) {
                return misaligned(format!("{label}: trajectory launch points differ"));
            }
            let (fa, fb): (Vec<f64>, Vec<f64>) = (xa.concat(), xb.concat());
            push(Quantity::Trajectories, errors(&fa, &fb));
        }
        _ => return misaligned(format!("{label}: only one engine wrote trajectories")),
    }

    let mut distances = Vec::new();
    for k in 0.. {
        let (pa, pb) = (dir.join(a.name()).join(density_file(k)), dir.join(b.name()).join(density_file(k)));
        match (pa.is_file(), pb.is_file()) {
            (false, false) => break,
            (true, true) => {}
            _ => return misaligned(format!("{label}: density snapshot {k} exists for one engine only")),
        }
        let (ta, tb) = (read_table(&pa)?, read_table(&pb)?);
        let t = |tab: &Table| tab.meta_value("t").and_then(|v| v.parse::<f64>().ok());
        match (t(&ta), t(&tb)) {
            (Some(u), Some(v)) if close(u, v) => {}
            _ => return misaligned(format!("{label}: density snapshot {k} times differ")),
        }
        let col = |tab: &Table, c: &str| {
            tab.column(c).ok_or_else(|| CliError::Alignment(format!("{label}: density snapshot {k} lacks {c:?}")))
        };
        let (xa, xb) = (col(&ta, "x")?, col(&tb, "x")?);
        check_axis(&format!("{label} density {k}"), &xa, &xb)?;
        let dx = if xa.len() > 1 { xa[1] - xa[0] } else { 1.0 };
        let (ra, rb) = (col(&ta, "rho")?, col(&tb, "rho")?);
        distances.push((ra.iter().zip(&rb).map(|(u, v)| (u - v).powi(2)).sum::<f64>() * dx).sqrt());
    }
    if !distances.is_empty() {
        push(Quantity::DensityL2, errors(&distances, &vec![0.0; distances.len()]));
    }
    Ok(())
}
