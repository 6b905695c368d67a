//! Command orchestration: build the initial map from a config, run the flow
//! or a verification suite, and write the outputs.

pub mod config;
pub mod snapshot;
pub mod svg;

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::diagnostics::{
    angle_consistency, angle_consistency_with, flux_evolution_residual, flux_periods, lagrangian_angle_with, FamilyConfig, TwoParamFamily,
};
use crate::error::{Error, Result};
use crate::field::{GridSpec, ScalarField};
use crate::hamiltonian::{integrate_from, integrate_isotopy, HamiltonianSpec, SymplecticIsotopy, DEFAULT_DEFECT_TOLERANCE};
use crate::mcf::{
    dt_cfl, induced_geometry, maslov_normalized_periods, mcf_step, run_flow, FlowEvent, FlowHistory, FlowObserver,
    Integrator, SeriesRecord, Termination,
};
use crate::torus_map::{DistanceNorm, TorusMap};

pub use config::{load_config, parse_config, ConfigError, RunConfig};
pub use snapshot::{emit_snapshot, format_snapshot, load_snapshot, parse_snapshot, Snapshot, SnapshotError};
pub use svg::{emit_svg, render_svg};

pub const SERIES_HEADER: &str = "t,area,maxH,defect,flux_px,flux_py,angle_spread,w_x,w_y";

/// The starting graph and the flux of the isotopy that produced it.
#[derive(Clone, Debug)]
pub struct InitialMap {
    pub f0: TorusMap,
    /// Flux periods of the translation piece.
    pub translation_flux: (f64, f64),
    /// Flux periods of the Hamiltonian piece.
    pub hamiltonian_flux: (f64, f64),
}

impl InitialMap {
    pub fn total_flux(&self) -> (f64, f64) {
        (self.translation_flux.0 + self.hamiltonian_flux.0, self.translation_flux.1 + self.hamiltonian_flux.1)
    }
}

/// Translate by `cfg.translation`, then follow the Hamiltonian isotopy:
/// `f₀ = φ₁ ∘ T`.
pub fn build_initial(cfg: &RunConfig) -> Result<InitialMap> {
    let grid = cfg.grid()?;
    let spec = HamiltonianSpec::parse(&cfg.hamiltonian)?;
    let [a, b] = cfg.translation;
    let tr = SymplecticIsotopy::translation(grid, a, b, cfg.m);
    let ham = integrate_from(&spec, tr.time_one_map(), cfg.m, DEFAULT_DEFECT_TOLERANCE)?;
    Ok(InitialMap {
        f0: ham.time_one_map().clone(),
        translation_flux: flux_periods(&tr).periods,
        hamiltonian_flux: flux_periods(&ham).periods,
    })
}

fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn format_series(series: &[SeriesRecord]) -> String {
    let mut out = String::with_capacity(64 + series.len() * 200);
    out.push_str(SERIES_HEADER);
    out.push('\n');
    for r in series {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            sci(r.t),
            sci(r.area),
            sci(r.max_h),
            sci(r.defect),
            sci(r.flux.0),
            sci(r.flux.1),
            sci(r.angle_spread),
            r.windings.0,
            r.windings.1
        );
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct RunReport {
    pub termination: String,
    pub detail: Option<String>,
    pub steps: usize,
    pub final_time: f64,
    pub area: f64,
    pub max_h: f64,
    pub defect: f64,
    pub angle_spread: f64,
    pub windings: (i64, i64),
    pub initial_flux: (f64, f64),
    pub accumulated_flux: (f64, f64),
    pub total_flux: (f64, f64),
    /// `(2/π) ∮ σ` on both cycles at the final state.
    pub maslov_periods: (f64, f64),
    pub files: Vec<PathBuf>,
    pub error: Option<String>,
}

impl RunReport {
    pub fn succeeded(&self) -> bool {
        self.error.is_none() && self.termination != "aborted"
    }
}

struct SnapshotWriter<'a> {
    dir: &'a Path,
    every: usize,
    tolerance: f64,
    files: Vec<PathBuf>,
}

impl FlowObserver for SnapshotWriter<'_> {
    fn observe(&mut self, event: &FlowEvent<'_>) -> Result<()> {
        if self.every == 0 || !event.step.is_multiple_of(self.every) {
            return Ok(());
        }
        let path = self.dir.join(format!("snap_{:07}.lmcf", event.step));
        emit_snapshot(&Snapshot::of(event.state, event.t, self.tolerance), &path)?;
        self.files.push(path);
        Ok(())
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Run the configured flow and write `series.csv`, snapshots, heatmaps and
/// `report.json` into `out`. Pipeline failures are recorded in the report
/// rather than returned; only output I/O errors are returned.
pub fn cmd_simulate(cfg: &RunConfig, out: &Path) -> Result<RunReport> {
    create_dir(out)?;
    let mut report = RunReport::default();
    if let Err(e) = simulate_into(cfg, out, &mut report) {
        report.termination = "aborted".into();
        report.error = Some(e.to_string());
    }
    let path = out.join("report.json");
    report.files.push(path.clone());
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    write_file(&path, &json)?;
    Ok(report)
}

fn simulate_into(cfg: &RunConfig, out: &Path, report: &mut RunReport) -> Result<()> {
    let initial = build_initial(cfg)?;
    report.initial_flux = initial.total_flux();
    let tol = cfg.defect_tolerance;
    let first = out.join("initial.lmcf");
    emit_snapshot(&Snapshot::of(&induced_geometry(&initial.f0)?, 0.0, tol), &first)?;
    report.files.push(first);

    let mut writer = SnapshotWriter { dir: out, every: cfg.snapshot_every, tolerance: tol, files: Vec::new() };
    let history = run_flow(&initial.f0, &cfg.flow(), &mut [&mut writer])?;
    report.files.append(&mut writer.files);

    let series = out.join("series.csv");
    write_file(&series, &format_series(&history.series))?;
    report.files.push(series);

    let state = &history.final_state;
    let last = history.last();
    let t = history.final_time();
    let last_snap = out.join("final.lmcf");
    let snap = Snapshot::of(state, t, tol);
    emit_snapshot(&snap, &last_snap)?;
    report.files.push(last_snap);
    if cfg.emit_svg {
        if let Some(theta) = &snap.theta {
            let p = out.join("theta.svg");
            emit_svg(theta, &format!("Lagrangian angle, t = {t:.6}"), &p)?;
            report.files.push(p);
        }
        let h = state.mean_curvature();
        let g = *state.grid();
        let norm = ScalarField::from_values(
            g,
            (0..g.len()).map(|k| h.iter().map(|c| c.values()[k].powi(2)).sum::<f64>().sqrt()).collect(),
        )?;
        let p = out.join("mean_curvature.svg");
        emit_svg(&norm, &format!("|H|, t = {t:.6}"), &p)?;
        report.files.push(p);
    }

    report.termination = history.termination.name().into();
    if let Termination::Aborted(why) = &history.termination {
        report.detail = Some(why.clone());
    }
    report.steps = last.step;
    report.final_time = t;
    report.area = last.area;
    report.max_h = last.max_h;
    report.defect = last.defect;
    report.angle_spread = last.angle_spread;
    report.windings = last.windings;
    report.accumulated_flux = last.flux;
    report.total_flux = (report.initial_flux.0 + last.flux.0, report.initial_flux.1 + last.flux.1);
    report.maslov_periods = maslov_normalized_periods(state);
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Below,
    AtLeast,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRow {
    pub check: String,
    pub measured: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub pass: bool,
}

impl CheckRow {
    pub fn below(check: impl Into<String>, measured: f64, threshold: f64) -> Self {
        CheckRow { check: check.into(), measured, relation: Relation::Below, threshold, pass: measured < threshold }
    }

    pub fn at_least(check: impl Into<String>, measured: f64, threshold: f64) -> Self {
        CheckRow { check: check.into(), measured, relation: Relation::AtLeast, threshold, pass: measured >= threshold }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Stationary,
    Flux,
    Angle,
    TwoParam,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Stationary, Suite::Flux, Suite::Angle, Suite::TwoParam];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Stationary => "stationary",
            Suite::Flux => "flux",
            Suite::Angle => "angle",
            Suite::TwoParam => "two_param",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Suite::ALL.into_iter().find(|s| s.name() == name)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub rows: Vec<CheckRow>,
    pub error: Option<String>,
    pub files: Vec<PathBuf>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.error.is_none() && !self.rows.is_empty() && self.rows.iter().all(|r| r.pass)
    }
}

pub fn format_verify_table(rows: &[CheckRow]) -> String {
    let mut out = String::from("check,measured,relation,threshold,pass\n");
    for r in rows {
        let rel = match r.relation {
            Relation::Below => "<",
            Relation::AtLeast => ">=",
        };
        let _ = writeln!(out, "{},{},{},{},{}", r.check, sci(r.measured), rel, sci(r.threshold), r.pass);
    }
    out
}

/// Run a suite and write `verify.csv` and `report.json` into `out`.
pub fn cmd_verify(cfg: &RunConfig, suite: Suite, out: &Path) -> Result<VerifyReport> {
    create_dir(out)?;
    let mut rows = Vec::new();
    let result = match suite {
        Suite::Stationary => stationary_suite(cfg, &mut rows),
        Suite::Flux => flux_suite(cfg, &mut rows),
        Suite::Angle => angle_suite(cfg, &mut rows),
        Suite::TwoParam => two_param_suite(cfg, &mut rows),
    };
    let table = out.join("verify.csv");
    write_file(&table, &format_verify_table(&rows))?;
    let json = out.join("report.json");
    let report = VerifyReport { suite, rows, error: result.err().map(|e| e.to_string()), files: vec![table, json.clone()] };
    write_file(&json, &serde_json::to_string_pretty(&report).expect("report serializes"))?;
    Ok(report)
}

/// Number of steps the stationary suite takes from each flat graph.
pub const STATIONARY_STEPS: usize = 100;

/// Largest `C⁰` drift and `max |H|` over `steps` flow steps from `f`.
pub fn stationary_drift(f: &TorusMap, safety: f64, steps: usize) -> Result<(f64, f64)> {
    let mut state = induced_geometry(f)?;
    let mut max_h = state.max_mean_curvature();
    for _ in 0..steps {
        let dt = dt_cfl(&state, safety);
        state = mcf_step(&state, dt)?;
        max_h = max_h.max(state.max_mean_curvature());
    }
    Ok((state.map().distance_to(f, DistanceNorm::C0)?, max_h))
}

fn stationary_suite(cfg: &RunConfig, rows: &mut Vec<CheckRow>) -> Result<()> {
    let grid = cfg.grid()?;
    let [a, b] = match cfg.translation {
        [0.0, 0.0] => [0.5, 0.25],
        t => t,
    };
    for (name, f) in [("identity", TorusMap::identity(grid)), ("translation", TorusMap::translation(grid, a, b))] {
        let (drift, max_h) = stationary_drift(&f, cfg.dt_safety, STATIONARY_STEPS)?;
        rows.push(CheckRow::below(format!("{name}: C0 drift after {STATIONARY_STEPS} steps"), drift, 1e-10));
        rows.push(CheckRow::below(format!("{name}: max |H|"), max_h, 1e-10));
    }
    Ok(())
}

fn max_abs_pair(p: (f64, f64)) -> f64 {
    p.0.abs().max(p.1.abs())
}

/// Largest accumulated flux period over the whole run.
pub fn max_accumulated_flux(history: &FlowHistory) -> f64 {
    history.series.iter().map(|r| max_abs_pair(r.flux)).fold(0.0, f64::max)
}

fn converged_row(history: &FlowHistory) -> CheckRow {
    let ok = history.termination == Termination::Converged;
    CheckRow::at_least("run converged (1 = yes)", if ok { 1.0 } else { 0.0 }, 1.0)
}

fn flux_suite(cfg: &RunConfig, rows: &mut Vec<CheckRow>) -> Result<()> {
    let initial = build_initial(cfg)?;
    let [a, b] = cfg.translation;
    rows.push(CheckRow::below("Hamiltonian isotopy flux periods", max_abs_pair(initial.hamiltonian_flux), 1e-8));
    let expect = (-2.0 * PI * b, 2.0 * PI * a);
    let total = initial.total_flux();
    rows.push(CheckRow::below(
        "initial flux minus (-2pi b, 2pi a)",
        max_abs_pair((total.0 - expect.0, total.1 - expect.1)),
        1e-7,
    ));
    let history = run_flow(&initial.f0, &cfg.flow(), &mut [])?;
    rows.push(converged_row(&history));
    rows.push(CheckRow::below("accumulated flux periods over run", max_accumulated_flux(&history), 1e-6));
    // total flux is the isotopy flux plus the accumulated part
    rows.push(CheckRow::below("final total flux minus initial", max_abs_pair(history.last().flux), 1e-6));
    Ok(())
}

/// Area-preserving probe map used for the `σ = dθ` refinement study.
pub fn angle_probe_map(grid: GridSpec) -> TorusMap {
    TorusMap::from_fn(grid, |x, y| {
        let dx = 0.1 * (2.0 * y).sin();
        let xs = x + dx;
        (dx, 0.1 * (2.0 * xs).sin())
    })
}

/// `‖σ − dθ‖∞` on [`angle_probe_map`] at `n/2` and `n`.
pub fn angle_refinement(n: usize, scheme: crate::field::DerivativeScheme) -> Result<(f64, f64)> {
    let at = |n| -> Result<f64> {
        let g = GridSpec::new(n, scheme)?;
        // finite differences leave a visible discrete defect on coarse grids
        angle_consistency_with(induced_geometry(&angle_probe_map(g))?.geometry(), 1e-3)
    };
    Ok((at(n / 2)?, at(n)?))
}

fn angle_suite(cfg: &RunConfig, rows: &mut Vec<CheckRow>) -> Result<()> {
    let initial = build_initial(cfg)?;
    let history = run_flow(&initial.f0, &cfg.flow(), &mut [])?;
    rows.push(converged_row(&history));
    let last = history.last();
    rows.push(CheckRow::below("final max |H|", last.max_h, cfg.conv_threshold.max(1e-6) * (1.0 + 1e-12)));
    rows.push(CheckRow::below("final angle spread", last.angle_spread, 1e-4));
    let moved = history
        .series
        .iter()
        .map(|r| (r.windings.0.abs().max(r.windings.1.abs())) as f64)
        .fold(0.0, f64::max);
    rows.push(CheckRow::below("max |winding| over run", moved, 0.5));
    let fin = history.final_state.geometry();
    rows.push(CheckRow::below("final |sigma - dtheta|", angle_consistency(fin)?, 1e-6));
    let rise = history.series.windows(2).map(|w| w[1].area - w[0].area).fold(f64::NEG_INFINITY, f64::max);
    rows.push(CheckRow::below("largest per-step area increase", rise.max(0.0), 1e-9));
    let defect = history.series.iter().map(|r| r.defect).fold(0.0, f64::max);
    rows.push(CheckRow::below("max symplectic defect over run", defect, 1e-4));
    if cfg.translation != [0.0, 0.0] {
        let u = history.final_state.map().displacement();
        rows.push(CheckRow::below("final displacement spread", u.x.spread().max(u.y.spread()), 1e-4));
    }
    let (coarse, fine) = angle_refinement(cfg.n, cfg.scheme)?;
    rows.push(CheckRow::at_least(
        format!("|sigma - dtheta| ratio n={} to n={}", cfg.n / 2, cfg.n),
        coarse / fine,
        4.0,
    ));
    if let Ok(angle) = lagrangian_angle_with(fin, cfg.defect_tolerance) {
        rows.push(CheckRow::at_least("final branch consistency (1 = yes)", angle.branch_consistent as u8 as f64, 1.0));
    }
    Ok(())
}

/// Flux-evolution residuals of the family at `(m2, dt)` and `(2 m2, dt/2)`,
/// both evaluated at flow time `t`.
pub fn two_param_study(
    spec: &HamiltonianSpec,
    grid: GridSpec,
    m2: usize,
    dt: f64,
    t: f64,
) -> Result<[crate::diagnostics::FluxEvolution; 2]> {
    let iso = integrate_isotopy(spec, grid, 4 * m2)?;
    let tau = (t / dt).round().max(1.0) as usize;
    let run = |m2: usize, dt: f64, tau: usize| {
        let fam = TwoParamFamily::evolve(&iso, &FamilyConfig { m2, dt, steps: tau + 1, integrator: Integrator::Heun })?;
        flux_evolution_residual(&fam, tau)
    };
    Ok([run(m2, dt, tau)?, run(2 * m2, dt / 2.0, 2 * tau)?])
}

fn two_param_suite(cfg: &RunConfig, rows: &mut Vec<CheckRow>) -> Result<()> {
    let spec = HamiltonianSpec::parse(&cfg.hamiltonian)?;
    let [coarse, fine] = two_param_study(&spec, cfg.grid()?, cfg.family_m2, cfg.family_dt, cfg.family_t)?;
    rows.push(CheckRow::below(format!("residual m2={}", cfg.family_m2), coarse.residual, f64::INFINITY));
    rows.push(CheckRow::below(format!("residual m2={}", 2 * cfg.family_m2), fine.residual, f64::INFINITY));
    rows.push(CheckRow::at_least("residual refinement ratio", coarse.residual / fine.residual, 2.0));
    for (name, r) in [("coarse", coarse), ("fine", fine)] {
        rows.push(CheckRow::below(format!("{name}: period identity gap"), max_abs_pair(r.period_gap), 1e-6));
        rows.push(CheckRow::below(format!("{name}: periods of dK"), max_abs_pair(r.k_periods), 1e-8));
    }
    Ok(())
}

/// Conventions printed by `lagflow info`.
pub fn conventions() -> String {
    let mut s = String::new();
    let _ = writeln!(s, "lagflow {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "torus            [0, 2pi)^2, omega = dx ^ dy, grid index i along x, j along y");
    let _ = writeln!(s, "Hamiltonian      i_X omega = dG, X_G = (dG/dy, -dG/dx)");
    let _ = writeln!(s, "flux             F = int_0^1 f_s^*(i_{{X_s}} omega) ds; translation by (a, b) has periods (-2pi b, 2pi a)");
    let _ = writeln!(s, "ambient          T^2 x T^2 with omega' = omega (+) (-omega)");
    let _ = writeln!(s, "complex chart    w1 = x1 + i y1, w2 = x2 - i y2; theta = arg det_C(e1, e2); diagonal theta = -pi/2");
    let _ = writeln!(s, "mean curv. form  sigma_i = omega'(e_i, H) = d theta");
    let _ = writeln!(s, "windings         (1/2pi) * closed-loop increments of theta (integers, primary)");
    let _ = writeln!(s, "Maslov periods   (2/pi) * periods of sigma (secondary; = 4 * winding)");
    let _ = writeln!(s, "threads          LAGFLOW_THREADS caps the worker pool");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_format() {
        let r = SeriesRecord {
            step: 0,
            t: 0.0,
            area: 8.0 * PI * PI,
            max_h: 1.0 / 3.0,
            defect: 0.0,
            flux: (-0.0, 2.0 * PI),
            angle_spread: 0.0,
            windings: (0, -1),
        };
        let text = format_series(&[r]);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(SERIES_HEADER));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row.len(), 9);
        assert_eq!(row[2].parse::<f64>().unwrap(), 1.0 / 3.0);
        assert_eq!(row[1].parse::<f64>().unwrap(), 8.0 * PI * PI);
        assert_eq!(row[8], "-1");
    }

    #[test]
    fn translation_flux_from_config() {
        let cfg = parse_config("n = 16\nm = 8\ntranslation = [1.0, 0.0]\n").unwrap();
        let init = build_initial(&cfg).unwrap();
        let (px, py) = init.total_flux();
        assert!(px.abs() < 1e-12 && (py - 2.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn suite_names() {
        for s in Suite::ALL {
            assert_eq!(Suite::from_name(s.name()), Some(s));
        }
        assert_eq!(Suite::from_name("nope"), None);
    }
}
