//! Observables of isotopies and of the flow: flux forms and their periods,
//! the mean curvature one-form, the Lagrangian angle with its windings, and
//! the two-parameter flux evolution check.

mod angle;
mod family;

use serde::Serialize;

use crate::field::{OneForm, ScalarField, VectorField2};
use crate::hamiltonian::SymplecticIsotopy;
use crate::mcf::{LagrangianGraph, SurfaceGeometry};
use crate::torus_map::Jacobian;

pub use angle::{
    angle_consistency, angle_consistency_with, angle_differential, lagrangian_angle, lagrangian_angle_with, maslov_windings, AngleField, MaslovWinding,
    LAGRANGIAN_TOLERANCE,
};
pub use family::{flux_evolution_residual, k_potential, FamilyConfig, FluxEvolution, TwoParamFamily};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FluxRecord {
    pub t: f64,
    pub periods: (f64, f64),
}

/// Composite Simpson weights for `m` equal steps on `[0, 1]`. An odd
/// remainder closes with the 3/8 rule; `m = 1` falls back to the trapezoid.
pub fn simpson_weights(m: usize) -> Vec<f64> {
    assert!(m >= 1, "need at least one interval");
    let h = 1.0 / m as f64;
    let mut w = vec![0.0; m + 1];
    if m == 1 {
        w[0] = 0.5 * h;
        w[1] = 0.5 * h;
        return w;
    }
    let simpson_end = if m.is_multiple_of(2) { m } else { m - 3 };
    for p in (0..simpson_end).step_by(2) {
        w[p] += h / 3.0;
        w[p + 1] += 4.0 * h / 3.0;
        w[p + 2] += h / 3.0;
    }
    if simpson_end < m {
        let s = simpson_end;
        for (o, c) in [1.0, 3.0, 3.0, 1.0].into_iter().enumerate() {
            w[s + o] += 3.0 * h / 8.0 * c;
        }
    }
    w
}

/// `f*(i_V ω)` for a velocity `V` attached to base points along `f`:
/// component `i` is `ω(V, ∂_i f)`.
pub fn pullback_interior(jac: &Jacobian, v: &VectorField2) -> OneForm {
    let grid = *v.grid();
    let mut a = Vec::with_capacity(grid.len());
    let mut b = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let [[fxx, fxy], [fyx, fyy]] = jac.at(k);
        let (vx, vy) = (v.x.values()[k], v.y.values()[k]);
        a.push(vx * fyx - vy * fxx);
        b.push(vx * fyy - vy * fxy);
    }
    OneForm::new(
        ScalarField::from_values(grid, a).expect("grid-sized"),
        ScalarField::from_values(grid, b).expect("grid-sized"),
    )
}

/// `F = ∫₀¹ f_s*(i_{X_s} ω) ds` by composite Simpson over the isotopy nodes.
pub fn flux_form(iso: &SymplecticIsotopy) -> OneForm {
    let weights = simpson_weights(iso.steps());
    let mut acc = OneForm::zeros(*iso.grid());
    for ((f, v), w) in iso.maps().iter().zip(iso.velocities()).zip(weights) {
        acc = acc.axpy(w, &pullback_interior(&f.jacobian(), v));
    }
    acc
}

pub fn flux_periods(iso: &SymplecticIsotopy) -> FluxRecord {
    FluxRecord { t: 0.0, periods: flux_form(iso).periods() }
}

/// `σ_i = ω′(e_i, H)` on the graph, in base coordinates.
///
/// With the orientation `ω′(e_i, H)` this equals both `f*(i_W ω)` for the
/// graph velocity `W` and `dθ` for the angle of [`lagrangian_angle`].
pub fn mean_curvature_form(geom: &SurfaceGeometry) -> OneForm {
    let h = &geom.mean_curvature;
    let grid = *geom.grid();
    let comp = |e: &[ScalarField; 4]| {
        let v = (0..grid.len())
            .map(|k| {
                let e = |c: usize| e[c].values()[k];
                let hv = |c: usize| h[c].values()[k];
                (e(0) * hv(1) - e(1) * hv(0)) - (e(2) * hv(3) - e(3) * hv(2))
            })
            .collect();
        ScalarField::from_values(grid, v).expect("grid-sized")
    };
    OneForm::new(comp(&geom.tangents[0]), comp(&geom.tangents[1]))
}

/// `running + dt · σ(state)`.
pub fn accumulate_flux(running: &OneForm, state: &LagrangianGraph, dt: f64) -> OneForm {
    running.axpy(dt, &mean_curvature_form(state.geometry()))
}

/// `∫ √det g`.
pub fn area(state: &LagrangianGraph) -> f64 {
    state.area()
}
