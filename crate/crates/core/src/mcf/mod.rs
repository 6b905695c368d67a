//! Mean curvature flow of the graph `S = {(p, f(p))} ⊂ T² × T²`.
//!
//! The ambient space is flat, so the mean curvature vector of the immersion
//! is `H = Δ_g F`, evaluated in divergence form. Each step moves every
//! surface point by `dt · H` and then re-graphs, `f ← F₂ ∘ F₁⁻¹`, which
//! absorbs the tangential part of the motion into a reparametrization.

mod geometry;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{lagrangian_angle_with, maslov_windings, mean_curvature_form};
use crate::error::{Error, Result};
use crate::field::{GridSpec, OneForm, ScalarField};
use crate::torus_map::TorusMap;

pub use geometry::{Embedding, SurfaceGeometry};

/// A graph together with its induced geometry.
#[derive(Clone, Debug)]
pub struct LagrangianGraph {
    f: TorusMap,
    geometry: SurfaceGeometry,
}

impl LagrangianGraph {
    pub fn map(&self) -> &TorusMap {
        &self.f
    }

    pub fn geometry(&self) -> &SurfaceGeometry {
        &self.geometry
    }

    pub fn grid(&self) -> &GridSpec {
        self.f.grid()
    }

    pub fn mean_curvature(&self) -> &[ScalarField; 4] {
        &self.geometry.mean_curvature
    }

    pub fn sqrt_det_g(&self) -> &ScalarField {
        &self.geometry.sqrt_det_g
    }

    pub fn area(&self) -> f64 {
        self.geometry.area()
    }

    pub fn max_mean_curvature(&self) -> f64 {
        self.geometry.max_mean_curvature()
    }

    pub fn symplectic_defect(&self) -> f64 {
        // ω′(e₁, e₂) = 1 − det Df on a graph
        self.geometry.lagrangian_form().max_abs()
    }

    /// Velocity of `f` at fixed base point under the flow, `H₂ − Df · H₁`.
    pub fn graph_velocity(&self) -> crate::field::VectorField2 {
        let h = &self.geometry.mean_curvature;
        let [ex, ey] = &self.geometry.tangents;
        let g = *self.grid();
        let vx = (0..g.len())
            .map(|k| h[2].values()[k] - ex[2].values()[k] * h[0].values()[k] - ey[2].values()[k] * h[1].values()[k])
            .collect();
        let vy = (0..g.len())
            .map(|k| h[3].values()[k] - ex[3].values()[k] * h[0].values()[k] - ey[3].values()[k] * h[1].values()[k])
            .collect();
        crate::field::VectorField2::new(
            ScalarField::from_values(g, vx).expect("grid-sized"),
            ScalarField::from_values(g, vy).expect("grid-sized"),
        )
    }
}

pub fn induced_geometry(f: &TorusMap) -> Result<LagrangianGraph> {
    let geometry = SurfaceGeometry::of(&Embedding::graph(f))?;
    Ok(LagrangianGraph { f: f.clone(), geometry })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    /// Forward Euler.
    Euler,
    /// Two-stage improved Euler (Heun).
    Heun,
}

impl Integrator {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "euler" => Some(Integrator::Euler),
            "heun" => Some(Integrator::Heun),
            _ => None,
        }
    }
}

/// Rule used when accumulating `∫ σ dt` along the flow.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FluxQuadrature {
    Left,
    Midpoint,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowConfig {
    /// Fraction of the explicit stability bound used per step. The spectral
    /// Laplacian is only stable below roughly `4 / π² ≈ 0.405`.
    pub dt_safety: f64,
    pub t_max: f64,
    pub conv_threshold: f64,
    pub regraph_interval: usize,
    /// Abort once the symplectic defect exceeds this.
    pub defect_tolerance: f64,
    pub integrator: Integrator,
    pub flux_quadrature: FluxQuadrature,
    /// Overrides the CFL step when set.
    pub fixed_dt: Option<f64>,
    pub max_steps: usize,
    /// Observers are invoked every `cadence` accepted steps.
    pub cadence: usize,
    /// Keep a map snapshot every this many steps (0: first and last only).
    pub snapshot_every: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            dt_safety: 0.3,
            t_max: 30.0,
            conv_threshold: 1e-6,
            regraph_interval: 1,
            defect_tolerance: 1e-2,
            integrator: Integrator::Euler,
            flux_quadrature: FluxQuadrature::Left,
            fixed_dt: None,
            max_steps: 1_000_000,
            cadence: 1,
            snapshot_every: 0,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(format!("flow config: {what}")));
        if !(self.dt_safety > 0.0 && self.dt_safety <= 1.0) {
            return bad("dt_safety must lie in (0, 1]");
        }
        if !(self.t_max > 0.0) || !(self.conv_threshold > 0.0) || !(self.defect_tolerance > 0.0) {
            return bad("t_max, conv_threshold and defect_tolerance must be positive");
        }
        if self.regraph_interval == 0 || self.cadence == 0 {
            return bad("regraph_interval and cadence must be at least 1");
        }
        if let Some(dt) = self.fixed_dt {
            if !(dt > 0.0) {
                return bad("fixed_dt must be positive");
            }
        }
        Ok(())
    }
}

/// `safety · h² / (4 · max λ(gⁱʲ))`
pub fn dt_cfl(state: &LagrangianGraph, safety: f64) -> f64 {
    geometry_dt(&state.geometry, safety)
}

fn geometry_dt(geom: &SurfaceGeometry, safety: f64) -> f64 {
    let h = geom.grid().h();
    safety * h * h / (4.0 * geom.max_inverse_metric_eigenvalue())
}

/// Advance an embedding by one explicit step (no re-graphing).
pub fn step_embedding(emb: &Embedding, geom: &SurfaceGeometry, dt: f64, integrator: Integrator) -> Result<Embedding> {
    let limit = geometry_dt(geom, 1.0);
    if dt > limit {
        return Err(Error::Cfl { dt, limit });
    }
    let next = match integrator {
        Integrator::Euler => emb.advance(&geom.mean_curvature, dt),
        Integrator::Heun => {
            let predictor = emb.advance(&geom.mean_curvature, dt);
            let hp = SurfaceGeometry::of(&predictor)?.mean_curvature;
            let avg: [ScalarField; 4] =
                std::array::from_fn(|c| geom.mean_curvature[c].add(&hp[c]).scale(0.5));
            emb.advance(&avg, dt)
        }
    };
    if !next.is_finite() {
        return Err(Error::NonFinite("embedding after MCF step"));
    }
    Ok(next)
}

pub fn mcf_step(state: &LagrangianGraph, dt: f64) -> Result<LagrangianGraph> {
    mcf_step_with(state, dt, Integrator::Euler)
}

/// One explicit step followed by re-graphing.
pub fn mcf_step_with(state: &LagrangianGraph, dt: f64, integrator: Integrator) -> Result<LagrangianGraph> {
    let next = step_embedding(&Embedding::graph(&state.f), &state.geometry, dt, integrator)?;
    induced_geometry(&next.regraph()?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", content = "detail", rename_all = "lowercase")]
pub enum Termination {
    Converged,
    Horizon,
    Aborted(String),
}

impl Termination {
    pub fn name(&self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::Horizon => "horizon",
            Termination::Aborted(_) => "aborted",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeriesRecord {
    pub step: usize,
    pub t: f64,
    pub area: f64,
    pub max_h: f64,
    pub defect: f64,
    /// Periods of the accumulated mean-curvature flux.
    pub flux: (f64, f64),
    pub angle_spread: f64,
    pub windings: (i64, i64),
}

#[derive(Clone, Debug)]
pub struct FlowHistory {
    pub times: Vec<f64>,
    pub snapshots: Vec<(f64, TorusMap)>,
    pub accumulated_flux: OneForm,
    pub series: Vec<SeriesRecord>,
    pub termination: Termination,
    pub final_state: LagrangianGraph,
}

impl FlowHistory {
    pub fn final_time(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    pub fn last(&self) -> &SeriesRecord {
        self.series.last().expect("history always holds the initial record")
    }
}

pub struct FlowEvent<'a> {
    pub step: usize,
    pub t: f64,
    pub state: &'a LagrangianGraph,
    pub record: &'a SeriesRecord,
}

pub trait FlowObserver {
    fn observe(&mut self, event: &FlowEvent<'_>) -> Result<()>;
}

impl<F: FnMut(&FlowEvent<'_>) -> Result<()>> FlowObserver for F {
    fn observe(&mut self, event: &FlowEvent<'_>) -> Result<()> {
        self(event)
    }
}

fn record(step: usize, t: f64, state: &LagrangianGraph, flux: &OneForm, defect_tol: f64) -> Result<SeriesRecord> {
    let angle = lagrangian_angle_with(&state.geometry, defect_tol.max(1e-6))?;
    let w = maslov_windings(&angle)?;
    Ok(SeriesRecord {
        step,
        t,
        area: state.area(),
        max_h: state.max_mean_curvature(),
        defect: state.symplectic_defect(),
        flux: flux.periods(),
        angle_spread: angle.theta.spread(),
        windings: (w.w_x, w.w_y),
    })
}

/// Run the flow from `f0` until `max |H| < conv_threshold` or `t ≥ t_max`.
///
/// A failing step ends the run with [`Termination::Aborted`]; everything
/// recorded up to that point is kept.
pub fn run_flow(f0: &TorusMap, config: &FlowConfig, observers: &mut [&mut dyn FlowObserver]) -> Result<FlowHistory> {
    config.validate()?;
    let defect0 = f0.symplectic_defect();
    if !(defect0 <= config.defect_tolerance) {
        return Err(Error::Defect { defect: defect0, tolerance: config.defect_tolerance });
    }
    let mut state = induced_geometry(f0)?;
    let grid = *f0.grid();
    let mut flux = OneForm::zeros(grid);
    let mut t = 0.0;
    let mut step = 0usize;
    let first = record(0, 0.0, &state, &flux, config.defect_tolerance)?;
    let mut history = FlowHistory {
        times: vec![0.0],
        snapshots: vec![(0.0, f0.clone())],
        accumulated_flux: flux.clone(),
        series: vec![first],
        termination: Termination::Horizon,
        final_state: state.clone(),
    };
    for obs in observers.iter_mut() {
        obs.observe(&FlowEvent { step: 0, t, state: &state, record: &history.series[0] })?;
    }

    let horizon_eps = 1e-12 * config.t_max;
    let termination = loop {
        if state.max_mean_curvature() < config.conv_threshold {
            break Termination::Converged;
        }
        if t >= config.t_max - horizon_eps || step >= config.max_steps {
            break Termination::Horizon;
        }
        match advance(&state, &mut flux, &mut t, config) {
            Ok(next) => state = next,
            Err(e) => break Termination::Aborted(e.to_string()),
        }
        step += 1;
        let rec = match record(step, t, &state, &flux, config.defect_tolerance) {
            Ok(r) => r,
            Err(e) => break Termination::Aborted(e.to_string()),
        };
        history.times.push(t);
        history.series.push(rec);
        if config.snapshot_every > 0 && step.is_multiple_of(config.snapshot_every) {
            history.snapshots.push((t, state.f.clone()));
        }
        if step.is_multiple_of(config.cadence) {
            let event = FlowEvent { step, t, state: &state, record: &rec };
            if let Some(e) = observers.iter_mut().find_map(|o| o.observe(&event).err()) {
                break Termination::Aborted(e.to_string());
            }
        }
        if rec.defect > config.defect_tolerance {
            break Termination::Aborted(
                Error::Defect { defect: rec.defect, tolerance: config.defect_tolerance }.to_string(),
            );
        }
    };
    if history.snapshots.last().map(|s| s.0) != Some(t) {
        history.snapshots.push((t, state.f.clone()));
    }
    history.accumulated_flux = flux;
    history.termination = termination;
    history.final_state = state;
    Ok(history)
}

/// `regraph_interval` explicit steps on the embedding, then one re-graph.
fn advance(state: &LagrangianGraph, flux: &mut OneForm, t: &mut f64, config: &FlowConfig) -> Result<LagrangianGraph> {
    let mut emb = Embedding::graph(&state.f);
    let mut geom = state.geometry.clone();
    let mut sigma = mean_curvature_form(&geom);
    let mut sub_t = *t;
    let mut pending = OneForm::zeros(*state.grid());
    for sub in 0..config.regraph_interval {
        let dt = config
            .fixed_dt
            .unwrap_or_else(|| geometry_dt(&geom, config.dt_safety))
            .min(config.t_max - sub_t);
        if !(dt > 0.0) {
            break;
        }
        emb = step_embedding(&emb, &geom, dt, config.integrator)?;
        let last = sub + 1 == config.regraph_interval;
        let next_geom = if last { None } else { Some(SurfaceGeometry::of(&emb)?) };
        let next_state = if last { Some(induced_geometry(&emb.regraph()?)?) } else { None };
        let g_next = next_geom.as_ref().unwrap_or_else(|| &next_state.as_ref().expect("set when last").geometry);
        let sigma_next = mean_curvature_form(g_next);
        pending = match config.flux_quadrature {
            FluxQuadrature::Left => pending.axpy(dt, &sigma),
            FluxQuadrature::Midpoint => pending.axpy(0.5 * dt, &sigma.add(&sigma_next)),
        };
        sub_t += dt;
        if let Some(s) = next_state {
            *flux = flux.add(&pending);
            *t = sub_t;
            return Ok(s);
        }
        geom = next_geom.expect("set when not last");
        sigma = sigma_next;
    }
    *flux = flux.add(&pending);
    *t = sub_t;
    induced_geometry(&emb.regraph()?)
}

/// `(n / π) · periods(σ)` with `n = 2`, the normalization used for the
/// Maslov class representative `(n/π)[i_H ω]`.
pub fn maslov_normalized_periods(state: &LagrangianGraph) -> (f64, f64) {
    let (px, py) = mean_curvature_form(&state.geometry).periods();
    (2.0 / PI * px, 2.0 / PI * py)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::torus_map::DistanceNorm;

    fn grid(n: usize) -> GridSpec {
        GridSpec::spectral(n).unwrap()
    }

    fn shear_pair(g: GridSpec, a: f64) -> TorusMap {
        TorusMap::from_fn(g, |x, y| {
            let xs = x + a * y.sin();
            (a * y.sin(), a * xs.sin())
        })
    }

    #[test]
    fn identity_geometry() {
        let g = grid(32);
        let s = induced_geometry(&TorusMap::identity(g)).unwrap();
        assert!(s.geometry().g11.map(|v| v - 2.0).max_abs() < 1e-14);
        assert!(s.geometry().g12.max_abs() < 1e-14);
        assert!(s.max_mean_curvature() < 1e-13);
        assert!((s.area() - 8.0 * PI * PI).abs() < 1e-10);
        let t = induced_geometry(&TorusMap::translation(g, 0.4, 1.7)).unwrap();
        assert!(t.max_mean_curvature() < 1e-12);
        assert!((t.area() - 8.0 * PI * PI).abs() < 1e-10);
    }

    #[test]
    fn cfl_examples() {
        let g = grid(64);
        let id = induced_geometry(&TorusMap::identity(g)).unwrap();
        let h = g.h();
        assert!((dt_cfl(&id, 0.5) - h * h / 4.0).abs() < 1e-15);
        let id128 = induced_geometry(&TorusMap::identity(grid(128))).unwrap();
        assert!((dt_cfl(&id, 0.5) / dt_cfl(&id128, 0.5) - 4.0).abs() < 1e-12);
        let bent = induced_geometry(&shear_pair(g, 0.2)).unwrap();
        assert!(dt_cfl(&bent, 0.5) < dt_cfl(&id, 0.5));
    }

    #[test]
    fn stationary_states_do_not_move() {
        let g = grid(32);
        for f in [TorusMap::identity(g), TorusMap::translation(g, 0.3, -0.2)] {
            let s = induced_geometry(&f).unwrap();
            let dt = dt_cfl(&s, 0.3);
            let next = mcf_step(&s, dt).unwrap();
            assert!(next.map().distance_to(&f, DistanceNorm::C0).unwrap() < 1e-10);
        }
    }

    #[test]
    fn cfl_violation_is_rejected() {
        let g = grid(16);
        let s = induced_geometry(&shear_pair(g, 0.1)).unwrap();
        let dt = 2.0 * dt_cfl(&s, 1.0);
        assert!(matches!(mcf_step(&s, dt), Err(Error::Cfl { .. })));
    }

    #[test]
    fn area_decreases_by_dissipation() {
        let g = grid(64);
        let f = TorusMap::from_fn(g, |x, y| (0.05 * y.sin(), 0.05 * x.sin()));
        let s = induced_geometry(&f).unwrap();
        let dt = dt_cfl(&s, 0.3) / 2.0;
        let next = mcf_step(&s, dt).unwrap();
        let drop = s.area() - next.area();
        let predicted = dt * s.geometry().dissipation();
        assert!(drop > 0.0);
        assert!((drop - predicted).abs() / predicted < 0.05, "{drop} vs {predicted}");
    }

    #[test]
    fn graph_velocity_matches_step() {
        let g = grid(48);
        let s = induced_geometry(&shear_pair(g, 0.15)).unwrap();
        let dt = 1e-4;
        let next = mcf_step_with(&s, dt, Integrator::Heun).unwrap();
        let fd = next.map().displacement().sub(s.map().displacement()).scale(1.0 / dt);
        let w = s.graph_velocity();
        assert!(fd.sub(&w).max_norm() < 1e-3 * w.max_norm());
    }

    #[test]
    fn identity_run_converges_immediately() {
        let g = grid(16);
        let h = run_flow(&TorusMap::identity(g), &FlowConfig::default(), &mut []).unwrap();
        assert_eq!(h.termination, Termination::Converged);
        assert_eq!(h.series.len(), 1);
        assert_eq!(h.last().flux, (0.0, 0.0));
    }

    #[test]
    fn non_symplectic_start_is_rejected() {
        let g = grid(16);
        let f = TorusMap::from_fn(g, |x, _| (0.1 * x.sin(), 0.0));
        let cfg = FlowConfig { defect_tolerance: 1e-3, ..FlowConfig::default() };
        assert!(matches!(run_flow(&f, &cfg, &mut []), Err(Error::Defect { .. })));
    }

    #[test]
    fn horizon_and_observer_cadence() {
        let g = grid(16);
        let cfg = FlowConfig { t_max: 0.05, cadence: 3, ..FlowConfig::default() };
        let mut seen = Vec::new();
        let mut obs = |e: &FlowEvent<'_>| -> Result<()> {
            seen.push(e.step);
            Ok(())
        };
        let h = run_flow(&shear_pair(g, 0.1), &cfg, &mut [&mut obs]).unwrap();
        assert_eq!(h.termination, Termination::Horizon);
        assert!((h.final_time() - 0.05).abs() < 1e-12);
        assert!(seen.iter().all(|s| s % 3 == 0));
        assert_eq!(seen[0], 0);
        assert!(h.times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(h.times.len(), h.series.len());
    }

    #[test]
    fn failing_observer_aborts_with_partial_data() {
        let g = grid(16);
        let cfg = FlowConfig { t_max: 1.0, ..FlowConfig::default() };
        let mut obs = |e: &FlowEvent<'_>| -> Result<()> {
            if e.step == 4 {
                return Err(Error::InvalidArgument("stop".into()));
            }
            Ok(())
        };
        let h = run_flow(&shear_pair(g, 0.1), &cfg, &mut [&mut obs]).unwrap();
        assert!(matches!(h.termination, Termination::Aborted(ref m) if m.contains("stop")));
        assert_eq!(h.series.len(), 5);
    }
}
