//! Hamiltonian vector fields and the symplectic isotopies they generate.
//!
//! Sign convention: `i_{X_G} ω = dG` with `ω = dx ∧ dy`, hence
//! `X_G = (∂G/∂y, −∂G/∂x)`. Every flux sign downstream follows from this.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expr::{self, evaluate_gradient, Expr, Var};
use crate::field::{GridSpec, ScalarField, Stencil, VectorField2};
use crate::torus_map::TorusMap;

pub const DEFAULT_DEFECT_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianSpec {
    g: Expr,
    autonomous: bool,
}

impl HamiltonianSpec {
    pub fn new(g: Expr) -> Self {
        let autonomous = !g.uses(Var::S);
        HamiltonianSpec { g, autonomous }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(Self::new(expr::parse(text)?))
    }

    pub fn expr(&self) -> &Expr {
        &self.g
    }

    pub fn is_autonomous(&self) -> bool {
        self.autonomous
    }

    /// `X_G(x, y, s)` from the exact gradient of the expression.
    pub fn vector_field_at(&self, x: f64, y: f64, s: f64) -> Result<(f64, f64)> {
        let (_, gx, gy) = evaluate_gradient(&self.g, x, y, s)?;
        Ok((gy, -gx))
    }
}

/// `X_G = (∂G/∂y, −∂G/∂x)` under the grid's derivative scheme.
pub fn hamiltonian_vector_field(g: &ScalarField) -> VectorField2 {
    VectorField2::new(g.dy(), g.dx().scale(-1.0))
}

/// A path `{f_s}` sampled at equispaced `s` nodes in `[0, 1]`.
///
/// `velocities[k]` is `∂_s f_s` at `s_k` attached to each base node, i.e. the
/// generating field evaluated along the trajectory `X_{s_k}(f_{s_k}(p))`.
/// The Eulerian field `X_{s_k}` at base points is [`SymplecticIsotopy::isotopy_velocity`].
#[derive(Clone, Debug)]
pub struct SymplecticIsotopy {
    s_nodes: Vec<f64>,
    maps: Vec<TorusMap>,
    velocities: Vec<VectorField2>,
}

impl SymplecticIsotopy {
    pub fn from_parts(maps: Vec<TorusMap>, velocities: Vec<VectorField2>) -> Result<Self> {
        if maps.len() < 2 || maps.len() != velocities.len() {
            return Err(Error::InvalidArgument(format!(
                "an isotopy needs at least two nodes with one velocity each (got {} maps, {} velocities)",
                maps.len(),
                velocities.len()
            )));
        }
        let m = maps.len() - 1;
        let s_nodes = (0..=m).map(|k| k as f64 / m as f64).collect();
        Ok(SymplecticIsotopy { s_nodes, maps, velocities })
    }

    /// The built-in translation family `f_s(p) = p + s (a, b)`.
    pub fn translation(grid: GridSpec, a: f64, b: f64, m: usize) -> Self {
        let m = m.max(1);
        let maps = (0..=m).map(|k| TorusMap::translation(grid, a * k as f64 / m as f64, b * k as f64 / m as f64));
        let velocities = (0..=m).map(|_| VectorField2::constant(grid, a, b)).collect();
        Self::from_parts(maps.collect(), velocities).expect("m ≥ 1")
    }

    pub fn identity(grid: GridSpec, m: usize) -> Self {
        Self::translation(grid, 0.0, 0.0, m)
    }

    pub fn grid(&self) -> &GridSpec {
        self.maps[0].grid()
    }

    /// Number of `s` steps.
    pub fn steps(&self) -> usize {
        self.maps.len() - 1
    }

    pub fn s_nodes(&self) -> &[f64] {
        &self.s_nodes
    }

    pub fn maps(&self) -> &[TorusMap] {
        &self.maps
    }

    pub fn velocities(&self) -> &[VectorField2] {
        &self.velocities
    }

    pub fn map(&self, k: usize) -> &TorusMap {
        &self.maps[k]
    }

    pub fn time_one_map(&self) -> &TorusMap {
        self.maps.last().expect("non-empty")
    }

    /// `X_{s_k} = (∂_s f_s) ∘ f_s⁻¹` at the base nodes.
    pub fn isotopy_velocity(&self, k: usize) -> Result<VectorField2> {
        if k >= self.maps.len() {
            return Err(Error::InvalidArgument(format!("node {k} out of range 0..={}", self.steps())));
        }
        let inv = self.maps[k].invert()?;
        let grid = *self.grid();
        let n = grid.n();
        let v = &self.velocities[k];
        let (xs, ys): (Vec<f64>, Vec<f64>) = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let (qx, qy) = inv.image_of_node(idx / n, idx % n);
                let st = Stencil::new(n, qx, qy);
                (st.apply(&v.x), st.apply(&v.y))
            })
            .unzip();
        Ok(VectorField2::new(ScalarField::from_values(grid, xs)?, ScalarField::from_values(grid, ys)?))
    }

    /// Run `self` on `s ∈ [0, ½]` and `next` on `[½, 1]`. `next` must start
    /// where `self` ends and have the same even number of steps.
    pub fn concatenate(&self, next: &SymplecticIsotopy) -> Result<Self> {
        if next.steps() != self.steps() || !self.steps().is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "can only join isotopies with equal, even step counts (got {} and {})",
                self.steps(),
                next.steps()
            )));
        }
        let gap = self.time_one_map().displacement().sub(next.maps[0].displacement()).max_norm();
        if !(gap < 1e-12) {
            return Err(Error::InvalidArgument(format!("isotopies do not meet: gap {gap:.3e}")));
        }
        let maps = self.maps.iter().chain(&next.maps[1..]).cloned().collect();
        // the joint sits on a quadrature panel boundary with equal weight from
        // both sides, so the average of the one-sided velocities is exact there
        let m = self.steps();
        let mut velocities: Vec<VectorField2> = self.velocities[..m].iter().map(|v| v.scale(2.0)).collect();
        velocities.push(self.velocities[m].add(&next.velocities[0]));
        velocities.extend(next.velocities[1..].iter().map(|v| v.scale(2.0)));
        Self::from_parts(maps, velocities)
    }

    /// Every `stride`-th node; `steps()` must be divisible by `stride`.
    pub fn subsample(&self, stride: usize) -> Result<Self> {
        if stride == 0 || !self.steps().is_multiple_of(stride) {
            return Err(Error::InvalidArgument(format!("stride {stride} does not divide {} steps", self.steps())));
        }
        let maps = self.maps.iter().step_by(stride).cloned().collect();
        let velocities = self.velocities.iter().step_by(stride).cloned().collect();
        Self::from_parts(maps, velocities)
    }
}

/// Integrate `∂_s f_s = X_{G(·,·,s)} ∘ f_s` from the identity with `m` RK4 steps.
pub fn integrate_isotopy(spec: &HamiltonianSpec, grid: GridSpec, m: usize) -> Result<SymplecticIsotopy> {
    integrate_from(spec, &TorusMap::identity(grid), m, DEFAULT_DEFECT_TOLERANCE)
}

/// Same as [`integrate_isotopy`] but with trajectories starting at `start(p)`,
/// giving the path `s ↦ φ_s ∘ start`.
pub fn integrate_from(
    spec: &HamiltonianSpec,
    start: &TorusMap,
    m: usize,
    defect_tolerance: f64,
) -> Result<SymplecticIsotopy> {
    if m == 0 {
        return Err(Error::InvalidArgument("isotopy step count must be at least 1".into()));
    }
    let grid = *start.grid();
    let n = grid.n();
    let ds = 1.0 / m as f64;
    let field = |x: f64, y: f64, s: f64| spec.vector_field_at(x, y, s);

    let trajectories: Vec<Vec<[f64; 4]>> = (0..grid.len())
        .into_par_iter()
        .map(|idx| -> Result<Vec<[f64; 4]>> {
            let (i, j) = (idx / n, idx % n);
            let (mut qx, mut qy) = start.image_of_node(i, j);
            let mut out = Vec::with_capacity(m + 1);
            for k in 0..=m {
                let s = k as f64 * ds;
                let k1 = field(qx, qy, s)?;
                out.push([qx, qy, k1.0, k1.1]);
                if k == m {
                    break;
                }
                let k2 = field(qx + 0.5 * ds * k1.0, qy + 0.5 * ds * k1.1, s + 0.5 * ds)?;
                let k3 = field(qx + 0.5 * ds * k2.0, qy + 0.5 * ds * k2.1, s + 0.5 * ds)?;
                let k4 = field(qx + ds * k3.0, qy + ds * k3.1, s + ds)?;
                qx += ds / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
                qy += ds / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
                if !(qx.is_finite() && qy.is_finite()) {
                    return Err(Error::StepFailure { i, j, s: s + ds });
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut maps = Vec::with_capacity(m + 1);
    let mut velocities = Vec::with_capacity(m + 1);
    for k in 0..=m {
        let mut ux = Vec::with_capacity(grid.len());
        let mut uy = Vec::with_capacity(grid.len());
        let mut vx = Vec::with_capacity(grid.len());
        let mut vy = Vec::with_capacity(grid.len());
        for (idx, t) in trajectories.iter().enumerate() {
            let r = t[k];
            ux.push(r[0] - grid.coord(idx / n));
            uy.push(r[1] - grid.coord(idx % n));
            vx.push(r[2]);
            vy.push(r[3]);
        }
        maps.push(TorusMap::from_displacement(VectorField2::new(
            ScalarField::from_values(grid, ux)?,
            ScalarField::from_values(grid, uy)?,
        ))?);
        velocities.push(VectorField2::new(ScalarField::from_values(grid, vx)?, ScalarField::from_values(grid, vy)?));
    }
    let defect = maps[m].symplectic_defect();
    if !(defect <= defect_tolerance) {
        return Err(Error::Defect { defect, tolerance: defect_tolerance });
    }
    SymplecticIsotopy::from_parts(maps, velocities)
}

pub fn time_one_map(iso: &SymplecticIsotopy) -> &TorusMap {
    iso.time_one_map()
}

pub fn isotopy_velocity(iso: &SymplecticIsotopy, k: usize) -> Result<VectorField2> {
    iso.isotopy_velocity(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus_map::DistanceNorm;

    fn grid(n: usize) -> GridSpec {
        GridSpec::spectral(n).unwrap()
    }

    #[test]
    fn vector_field_examples() {
        let g = grid(32);
        assert_eq!(hamiltonian_vector_field(&ScalarField::zeros(g)).max_norm(), 0.0);
        let gf = ScalarField::from_fn(g, |x, y| x.cos() * y.cos());
        let xg = hamiltonian_vector_field(&gf);
        let expect = VectorField2::from_fn(g, |x, y| (-x.cos() * y.sin(), x.sin() * y.cos()));
        assert!(xg.sub(&expect).max_norm() < 1e-13);
        // i_X ω = dG at the discrete level
        let form = xg.interior_omega();
        let dg = gf.gradient_form();
        assert!(form.sub(&dg).max_abs() < 1e-14);
        // G = y → X = (1, 0)
        let spec = HamiltonianSpec::parse("y").unwrap();
        assert_eq!(spec.vector_field_at(0.3, 2.0, 0.0).unwrap(), (1.0, -0.0));
    }

    #[test]
    fn zero_hamiltonian_is_identity() {
        let g = grid(16);
        let iso = integrate_isotopy(&HamiltonianSpec::parse("0").unwrap(), g, 4).unwrap();
        for (f, v) in iso.maps().iter().zip(iso.velocities()) {
            assert_eq!(f.displacement().max_norm(), 0.0);
            assert_eq!(v.max_norm(), 0.0);
        }
        assert_eq!(iso.isotopy_velocity(2).unwrap().max_norm(), 0.0);
    }

    #[test]
    fn linear_hamiltonian_translates() {
        let g = grid(16);
        let spec = HamiltonianSpec::parse("y").unwrap();
        assert!(spec.is_autonomous());
        let iso = integrate_isotopy(&spec, g, 8).unwrap();
        for (k, f) in iso.maps().iter().enumerate() {
            let s = k as f64 / 8.0;
            let expect = TorusMap::translation(g, s, 0.0);
            assert!(f.distance_to(&expect, DistanceNorm::C0).unwrap() < 1e-12);
        }
        let t1 = iso.time_one_map();
        assert!(t1.displacement().x.map(|v| v - 1.0).max_abs() < 1e-12);
        for k in [0, 4, 8] {
            let x = iso.isotopy_velocity(k).unwrap();
            assert!(x.sub(&VectorField2::constant(g, 1.0, 0.0)).max_norm() < 1e-12);
        }
    }

    #[test]
    fn translation_family_matches_integration() {
        let g = grid(16);
        let t = SymplecticIsotopy::translation(g, 0.5, -0.25, 4);
        let i = integrate_isotopy(&HamiltonianSpec::parse("0.5*y + 0.25*x").unwrap(), g, 4).unwrap();
        let d = t.time_one_map().distance_to(i.time_one_map(), DistanceNorm::C0).unwrap();
        assert!(d < 1e-14);
    }

    #[test]
    fn time_dependent_hamiltonian_flags() {
        assert!(!HamiltonianSpec::parse("s*cos(x)").unwrap().is_autonomous());
    }

    #[test]
    fn subsample_keeps_endpoints() {
        let g = grid(16);
        let iso = integrate_isotopy(&HamiltonianSpec::parse("0.1*sin(x+y)").unwrap(), g, 8).unwrap();
        let coarse = iso.subsample(4).unwrap();
        assert_eq!(coarse.steps(), 2);
        assert_eq!(coarse.time_one_map(), iso.time_one_map());
        assert!(iso.subsample(3).is_err());
    }

    #[test]
    fn defect_tolerance_is_enforced() {
        let g = grid(16);
        let spec = HamiltonianSpec::parse("0.1*cos(x)*cos(y)").unwrap();
        let start = TorusMap::from_fn(g, |x, _| (0.1 * x.sin(), 0.0));
        assert!(matches!(integrate_from(&spec, &start, 4, 1e-6), Err(Error::Defect { .. })));
    }
}
