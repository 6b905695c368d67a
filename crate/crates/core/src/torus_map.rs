//! Diffeomorphisms of the torus stored as periodic displacement fields.
//!
//! A map is `f(p) = p + u(p) (mod 2π)`. The displacement `u` is kept
//! unwrapped, so a map isotopic to the identity has a continuous `u` and
//! wrapping only happens when a point is evaluated.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{wrap_angle, GridSpec, ScalarField, Stencil, VectorField2};

/// Tolerance for the Newton residual `|q + u(q) − p|`.
pub const INVERSION_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MAX_NEWTON: usize = 50;

/// Pointwise `Df`; row index is the output component, column the derivative
/// direction, so `xy = ∂f_x/∂y`.
#[derive(Clone, Debug, PartialEq)]
pub struct Jacobian {
    pub xx: ScalarField,
    pub xy: ScalarField,
    pub yx: ScalarField,
    pub yy: ScalarField,
}

impl Jacobian {
    /// Jacobian of `p ↦ p + u(p)`.
    pub fn of_displacement(u: &VectorField2) -> Self {
        Jacobian {
            xx: u.x.dx().map(|v| 1.0 + v),
            xy: u.x.dy(),
            yx: u.y.dx(),
            yy: u.y.dy().map(|v| 1.0 + v),
        }
    }

    #[inline]
    pub fn at(&self, k: usize) -> [[f64; 2]; 2] {
        [[self.xx.values()[k], self.xy.values()[k]], [self.yx.values()[k], self.yy.values()[k]]]
    }

    pub fn determinant(&self) -> ScalarField {
        
        self.xx.mul(&self.yy).sub(&self.xy.mul(&self.yx))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistanceNorm {
    C0,
    C1,
    C2,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TorusMap {
    u: VectorField2,
}

impl TorusMap {
    pub fn identity(grid: GridSpec) -> Self {
        TorusMap { u: VectorField2::zeros(grid) }
    }

    pub fn translation(grid: GridSpec, a: f64, b: f64) -> Self {
        TorusMap { u: VectorField2::constant(grid, a, b) }
    }

    pub fn from_displacement(u: VectorField2) -> Result<Self> {
        if !u.is_finite() {
            return Err(Error::NonFinite("displacement field"));
        }
        Ok(TorusMap { u })
    }

    /// Map from a closed-form displacement `p ↦ u(p)`.
    pub fn from_fn(grid: GridSpec, u: impl Fn(f64, f64) -> (f64, f64)) -> Self {
        TorusMap { u: VectorField2::from_fn(grid, u) }
    }

    pub fn grid(&self) -> &GridSpec {
        self.u.grid()
    }

    pub fn displacement(&self) -> &VectorField2 {
        &self.u
    }

    pub fn into_displacement(self) -> VectorField2 {
        self.u
    }

    /// Image of node `(i, j)` in covering coordinates.
    pub fn image_of_node(&self, i: usize, j: usize) -> (f64, f64) {
        let g = self.grid();
        (g.coord(i) + self.u.x.get(i, j), g.coord(j) + self.u.y.get(i, j))
    }

    /// Image of an arbitrary point in covering coordinates.
    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        let st = Stencil::new(self.grid().n(), x, y);
        (x + st.apply(&self.u.x), y + st.apply(&self.u.y))
    }

    pub fn jacobian(&self) -> Jacobian {
        Jacobian::of_displacement(&self.u)
    }

    /// `max |det Df − 1|`
    pub fn symplectic_defect(&self) -> f64 {
        self.jacobian().determinant().map(|d| d - 1.0).max_abs()
    }

    /// `self ∘ g`, i.e. `p ↦ g(p) + u_self(g(p))`.
    pub fn compose(&self, g: &TorusMap) -> TorusMap {
        let grid = *self.grid();
        let n = grid.n();
        let (ux, uy): (Vec<f64>, Vec<f64>) = (0..grid.len())
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k / n, k % n);
                let (gx, gy) = g.image_of_node(i, j);
                let st = Stencil::new(n, gx, gy);
                (g.u.x.values()[k] + st.apply(&self.u.x), g.u.y.values()[k] + st.apply(&self.u.y))
            })
            .unzip();
        TorusMap {
            u: VectorField2::new(
                ScalarField::from_values(grid, ux).expect("grid-sized"),
                ScalarField::from_values(grid, uy).expect("grid-sized"),
            ),
        }
    }

    pub fn invert(&self) -> Result<TorusMap> {
        self.invert_with(DEFAULT_MAX_NEWTON)
    }

    /// Newton iteration on `q + u(q) = p` at every node, started from
    /// `q = p − u(p)`.
    pub fn invert_with(&self, max_iter: usize) -> Result<TorusMap> {
        let grid = *self.grid();
        let n = grid.n();
        let jac = self.jacobian();
        let fields = [&self.u.x, &self.u.y, &jac.xx, &jac.xy, &jac.yx, &jac.yy];
        let solved: Vec<(f64, f64, f64)> = (0..grid.len())
            .into_par_iter()
            .map(|k| {
                let (px, py) = (grid.coord(k / n), grid.coord(k % n));
                let (mut qx, mut qy) = (px - self.u.x.values()[k], py - self.u.y.values()[k]);
                let mut residual = f64::INFINITY;
                for _ in 0..=max_iter {
                    let st = Stencil::new(n, qx, qy);
                    let v: Vec<f64> = fields.iter().map(|f| st.apply(f)).collect();
                    let (rx, ry) = (qx + v[0] - px, qy + v[1] - py);
                    residual = rx.hypot(ry);
                    if residual < 1e-13 {
                        break;
                    }
                    let det = v[2] * v[5] - v[3] * v[4];
                    if !(det > 0.0) || !residual.is_finite() {
                        residual = f64::INFINITY;
                        break;
                    }
                    qx -= (v[5] * rx - v[3] * ry) / det;
                    qy -= (-v[4] * rx + v[2] * ry) / det;
                }
                (qx - px, qy - py, residual)
            })
            .collect();
        let worst = solved
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .2.partial_cmp(&b.1 .2).unwrap_or(std::cmp::Ordering::Greater))
            .map(|(k, s)| (k, s.2))
            .unwrap_or((0, 0.0));
        if !(worst.1 < INVERSION_TOLERANCE) {
            return Err(Error::Inversion { i: worst.0 / n, j: worst.0 % n, residual: worst.1 });
        }
        let ux = solved.iter().map(|s| s.0).collect();
        let uy = solved.iter().map(|s| s.1).collect();
        Ok(TorusMap {
            u: VectorField2::new(
                ScalarField::from_values(grid, ux).expect("grid-sized"),
                ScalarField::from_values(grid, uy).expect("grid-sized"),
            ),
        })
    }

    /// Largest pointwise distance between images on the torus, plus
    /// derivative differences of the displacements for the C¹ and C² norms.
    pub fn distance_to(&self, other: &TorusMap, norm: DistanceNorm) -> Result<f64> {
        self.grid().check_same(other.grid())?;
        let dx = self.u.x.sub(&other.u.x);
        let dy = self.u.y.sub(&other.u.y);
        let mut d = dx
            .values()
            .iter()
            .zip(dy.values())
            .fold(0.0f64, |m, (a, b)| m.max(wrap_angle(*a).hypot(wrap_angle(*b))));
        if norm == DistanceNorm::C0 {
            return Ok(d);
        }
        let first = [dx.dx(), dx.dy(), dy.dx(), dy.dy()];
        d += first.iter().map(ScalarField::max_abs).fold(0.0, f64::max);
        if norm == DistanceNorm::C2 {
            d += first
                .iter()
                .flat_map(|f| [f.dx(), f.dy()])
                .map(|f| f.max_abs())
                .fold(0.0, f64::max);
        }
        Ok(d)
    }
}

pub fn symplectic_defect(f: &TorusMap) -> f64 {
    f.symplectic_defect()
}

pub fn compose(f: &TorusMap, g: &TorusMap) -> TorusMap {
    f.compose(g)
}

pub fn invert(f: &TorusMap) -> Result<TorusMap> {
    f.invert()
}

#[cfg(test)]
mod tests {
    use std::f64::consts::TAU;

    use super::*;

    fn grid(n: usize) -> GridSpec {
        GridSpec::spectral(n).unwrap()
    }

    fn shear_pair(g: GridSpec) -> TorusMap {
        // (x, y) ↦ (x + 0.1 sin y, y + 0.1 sin(x + 0.1 sin y)), exactly area preserving
        TorusMap::from_fn(g, |x, y| {
            let xs = x + 0.1 * y.sin();
            (0.1 * y.sin(), 0.1 * xs.sin())
        })
    }

    #[test]
    fn jacobian_examples() {
        let g = grid(32);
        let id = TorusMap::identity(g).jacobian();
        assert_eq!(id.xx.min(), 1.0);
        assert_eq!(id.xy.max_abs(), 0.0);
        let t = TorusMap::translation(g, 0.3, -2.0).jacobian();
        assert!(t.xx.map(|v| v - 1.0).max_abs() < 1e-14 && t.yx.max_abs() < 1e-14);
        let shear = TorusMap::from_fn(g, |_, y| (0.1 * y.sin(), 0.0)).jacobian();
        let expect = ScalarField::from_fn(g, |_, y| 0.1 * y.cos());
        assert!(shear.xy.sub(&expect).max_abs() < 1e-14);
        assert!(shear.xx.map(|v| v - 1.0).max_abs() < 1e-14);
        assert!(shear.yy.map(|v| v - 1.0).max_abs() < 1e-14);
    }

    #[test]
    fn defect_examples() {
        let g = grid(32);
        assert_eq!(TorusMap::identity(g).symplectic_defect(), 0.0);
        let shear = TorusMap::from_fn(g, |_, y| (0.1 * y.sin(), 0.0));
        assert!(shear.symplectic_defect() < 1e-12);
        let stretch = TorusMap::from_fn(g, |x, _| (0.1 * x.sin(), 0.0));
        assert!((stretch.symplectic_defect() - 0.1).abs() < 1e-10);
        assert!(shear_pair(g).symplectic_defect() < 1e-12);
    }

    #[test]
    fn compose_identity_and_translations() {
        let g = grid(32);
        let f = shear_pair(g);
        let id = TorusMap::identity(g);
        assert_eq!(f.compose(&id), f);
        assert_eq!(id.compose(&f), f);
        let t = TorusMap::translation(g, 0.25, -0.5).compose(&TorusMap::translation(g, 1.0, 0.75));
        assert!(t.distance_to(&TorusMap::translation(g, 1.25, 0.25), DistanceNorm::C0).unwrap() < 1e-14);
    }

    #[test]
    fn invert_examples() {
        let g = grid(64);
        assert_eq!(TorusMap::identity(g).invert().unwrap(), TorusMap::identity(g));
        let t = TorusMap::translation(g, 0.4, -1.1).invert().unwrap();
        assert!(t.distance_to(&TorusMap::translation(g, -0.4, 1.1), DistanceNorm::C0).unwrap() < 1e-14);

        let f = TorusMap::from_fn(g, |x, y| (0.2 * y.sin(), 0.1 * x.sin()));
        let inv = f.invert().unwrap();
        let id = TorusMap::identity(g);
        // residual of f(f⁻¹(p)) = p
        assert!(f.compose(&inv).distance_to(&id, DistanceNorm::C0).unwrap() < 1e-10);
        assert!(inv.compose(&f).distance_to(&id, DistanceNorm::C0).unwrap() < 1e-8);
    }

    #[test]
    fn invert_reports_failure() {
        let g = grid(16);
        // folds over: det(I + Du) changes sign
        let f = TorusMap::from_fn(g, |x, _| (2.0 * x.sin(), 0.0));
        assert!(matches!(f.invert(), Err(Error::Inversion { .. })));
    }

    #[test]
    fn distances() {
        let g = grid(16);
        let id = TorusMap::identity(g);
        assert_eq!(id.distance_to(&id, DistanceNorm::C2).unwrap(), 0.0);
        let a = 0.7;
        assert!((id.distance_to(&TorusMap::translation(g, a, 0.0), DistanceNorm::C0).unwrap() - a).abs() < 1e-15);
        assert!(id.distance_to(&TorusMap::translation(g, TAU, 0.0), DistanceNorm::C1).unwrap() < 1e-14);
        let f = TorusMap::from_fn(g, |_, y| (0.1 * y.sin(), 0.0));
        // C0: 0.1, first derivatives: 0.1, second: 0.1
        let c0 = id.distance_to(&f, DistanceNorm::C0).unwrap();
        let c2 = id.distance_to(&f, DistanceNorm::C2).unwrap();
        assert!((c0 - 0.1).abs() < 1e-3);
        assert!((c2 - 0.3).abs() < 3e-3);
    }

    #[test]
    fn composition_is_associative() {
        let g = grid(64);
        let f = shear_pair(g);
        let h = TorusMap::from_fn(g, |x, y| (0.05 * (x + y).cos(), -0.08 * (2.0 * x).sin()));
        let k = TorusMap::translation(g, 0.3, 0.1).compose(&f);
        let left = f.compose(&h).compose(&k);
        let right = f.compose(&h.compose(&k));
        assert!(left.distance_to(&right, DistanceNorm::C0).unwrap() < 1e-8);
    }
}
