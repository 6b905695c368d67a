use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{OneForm, ScalarField, VectorField2};
use crate::hamiltonian::SymplecticIsotopy;
use crate::mcf::{induced_geometry, mcf_step_with, Integrator};
use crate::torus_map::TorusMap;

use super::{flux_form, pullback_interior, simpson_weights};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FamilyConfig {
    /// Number of `s` intervals.
    pub m2: usize,
    pub dt: f64,
    /// Number of flow steps taken by every member.
    pub steps: usize,
    pub integrator: Integrator,
}

/// `f_{s,t}`: every node `f_{s_k,0}` of an isotopy evolved by the flow on a
/// shared time grid. `maps[k][τ]` is member `k` at `times[τ]`.
#[derive(Clone, Debug)]
pub struct TwoParamFamily {
    pub s_nodes: Vec<f64>,
    pub times: Vec<f64>,
    pub maps: Vec<Vec<TorusMap>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FluxEvolution {
    pub t: f64,
    /// `‖∂_t F − f*(i_W ω) − dK‖∞`
    pub residual: f64,
    /// Periods of `∂_t F − f*(i_W ω)` on both cycles.
    pub period_gap: (f64, f64),
    /// Periods of `dK`.
    pub k_periods: (f64, f64),
}

impl TwoParamFamily {
    pub fn evolve(iso: &SymplecticIsotopy, cfg: &FamilyConfig) -> Result<Self> {
        if cfg.m2 < 2 || !iso.steps().is_multiple_of(cfg.m2) {
            return Err(Error::InvalidArgument(format!(
                "family needs m2 ≥ 2 dividing the isotopy's {} steps (got {})",
                iso.steps(),
                cfg.m2
            )));
        }
        if !(cfg.dt > 0.0) || cfg.steps < 2 {
            return Err(Error::InvalidArgument("family needs dt > 0 and at least two steps".into()));
        }
        let coarse = iso.subsample(iso.steps() / cfg.m2)?;
        let maps = coarse
            .maps()
            .par_iter()
            .map(|f0| -> Result<Vec<TorusMap>> {
                let mut state = induced_geometry(f0)?;
                let mut out = Vec::with_capacity(cfg.steps + 1);
                out.push(f0.clone());
                for _ in 0..cfg.steps {
                    state = mcf_step_with(&state, cfg.dt, cfg.integrator)?;
                    out.push(state.map().clone());
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        let times = (0..=cfg.steps).map(|k| k as f64 * cfg.dt).collect();
        Ok(TwoParamFamily { s_nodes: coarse.s_nodes().to_vec(), times, maps })
    }

    pub fn steps(&self) -> usize {
        self.s_nodes.len() - 1
    }

    fn member_at(&self, tau: usize) -> Vec<&TorusMap> {
        self.maps.iter().map(|m| &m[tau]).collect()
    }

    /// `∂_s f_{s,t}` at every `s` node: centered in the interior, one-sided
    /// second order at the ends.
    fn s_velocities(&self, tau: usize) -> Vec<VectorField2> {
        let maps = self.member_at(tau);
        let m = self.steps();
        let ds = 1.0 / m as f64;
        let u = |k: usize| maps[k].displacement();
        (0..=m)
            .map(|k| {
                if k == 0 {
                    u(1).scale(4.0).sub(&u(0).scale(3.0)).sub(u(2)).scale(0.5 / ds)
                } else if k == m {
                    u(m).scale(3.0).sub(&u(m - 1).scale(4.0)).add(u(m - 2)).scale(0.5 / ds)
                } else {
                    u(k + 1).sub(u(k - 1)).scale(0.5 / ds)
                }
            })
            .collect()
    }

    /// The `s`-isotopy at time index `tau`.
    pub fn slice(&self, tau: usize) -> Result<SymplecticIsotopy> {
        SymplecticIsotopy::from_parts(self.member_at(tau).into_iter().cloned().collect(), self.s_velocities(tau))
    }
}

/// `K_t = ∫₀¹ ω(∂_s f, ∂_t f) ds` at the base points.
pub fn k_potential(fam: &TwoParamFamily, tau: usize) -> Result<ScalarField> {
    let maps = fam.member_at(tau);
    let grid = *maps[0].grid();
    let vs = fam.s_velocities(tau);
    let weights = simpson_weights(fam.steps());
    let terms = maps
        .par_iter()
        .zip(vs.par_iter())
        .map(|(f, v)| -> Result<ScalarField> {
            let w = induced_geometry(f)?.graph_velocity();
            Ok(v.x.mul(&w.y).sub(&v.y.mul(&w.x)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut k = ScalarField::zeros(grid);
    for (term, w) in terms.iter().zip(weights) {
        k = k.axpy(w, term);
    }
    Ok(k)
}

/// Residual of `∂_t F_t = f_t*(i_W ω) + dK_t` at an interior time index,
/// with `∂_t F` by a centered difference.
pub fn flux_evolution_residual(fam: &TwoParamFamily, tau: usize) -> Result<FluxEvolution> {
    if tau == 0 || tau + 1 >= fam.times.len() {
        return Err(Error::InvalidArgument(format!("time index {tau} has no centered difference")));
    }
    let dt = fam.times[tau + 1] - fam.times[tau - 1];
    let df: OneForm = flux_form(&fam.slice(tau + 1)?).sub(&flux_form(&fam.slice(tau - 1)?)).scale(1.0 / dt);
    let end = &fam.maps[fam.steps()][tau];
    let term = pullback_interior(&end.jacobian(), &induced_geometry(end)?.graph_velocity());
    let dk = k_potential(fam, tau)?.gradient_form();
    let gap = df.sub(&term);
    Ok(FluxEvolution {
        t: fam.times[tau],
        residual: gap.sub(&dk).max_abs(),
        period_gap: gap.periods(),
        k_periods: dk.periods(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GridSpec;

    #[test]
    fn identity_family_is_trivial() {
        let g = GridSpec::spectral(16).unwrap();
        let iso = SymplecticIsotopy::identity(g, 8);
        let cfg = FamilyConfig { m2: 4, dt: 1e-3, steps: 3, integrator: Integrator::Heun };
        let fam = TwoParamFamily::evolve(&iso, &cfg).unwrap();
        assert_eq!(fam.maps.len(), 5);
        assert!(fam.maps.iter().all(|m| m.len() == 4));
        assert_eq!(k_potential(&fam, 1).unwrap().max_abs(), 0.0);
        let r = flux_evolution_residual(&fam, 1).unwrap();
        assert!(r.residual < 1e-10);
        assert!(flux_evolution_residual(&fam, 0).is_err());
        assert!(flux_evolution_residual(&fam, 3).is_err());
    }

    #[test]
    fn m2_must_divide_steps() {
        let g = GridSpec::spectral(16).unwrap();
        let iso = SymplecticIsotopy::identity(g, 8);
        let cfg = FamilyConfig { m2: 3, dt: 1e-3, steps: 3, integrator: Integrator::Heun };
        assert!(TwoParamFamily::evolve(&iso, &cfg).is_err());
    }
}
